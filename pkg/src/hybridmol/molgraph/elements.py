"""Periodic table symbols and the allowed-valence table."""

from __future__ import annotations

SYMBOLS = (
    "H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co Ni Cu Zn "
    "Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te I Xe Cs Ba La Ce "
    "Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir Pt Au Hg Tl Pb Bi Po At Rn "
    "Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl "
    "Mc Lv Ts Og"
).split()

ATOMIC_NUMBER = {sym: z for z, sym in enumerate(SYMBOLS, start=1)}

# Elements whose valence is actually checked; everything else is flagged unchecked.
CHECKED = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I", "Si"})

ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})
AROMATIC_SUBSET = frozenset({"b", "c", "n", "o", "p", "s"})
HALOGENS = frozenset({"F", "Cl", "Br", "I"})

# Allowed valences by atomic number. Charged atoms use the row of the
# isoelectronic neutral element (N+ -> C, O- -> F, B- -> C, ...).
_VALENCES: dict[int, tuple[int, ...]] = {
    1: (1,),
    2: (0,),
    5: (3,),
    6: (4,),
    7: (3, 5),
    8: (2,),
    9: (1,),
    10: (0,),
    14: (4,),
    15: (3, 5),
    16: (2, 4, 6),
    17: (1,),
    18: (0,),
    33: (3, 5),
    34: (2, 4, 6),
    35: (1,),
    36: (0,),
    53: (1, 3, 5),
    54: (0,),
}


def is_element(symbol: str) -> bool:
    return symbol in ATOMIC_NUMBER


def allowed_valences(element: str, charge: int = 0) -> tuple[int, ...] | None:
    """Allowed total valences for ``element`` carrying ``charge``.

    Returns None when the element/charge combination is outside the table,
    in which case the caller should treat valence as unchecked.
    """
    if element not in CHECKED:
        return None
    z = ATOMIC_NUMBER[element] - charge
    return _VALENCES.get(z)


def is_valence_checked(element: str, charge: int = 0) -> bool:
    return allowed_valences(element, charge) is not None
