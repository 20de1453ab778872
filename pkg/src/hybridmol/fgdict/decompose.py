"""Priority-driven greedy decomposition into group instances and residual atoms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from ..molgraph import ContractError, MolecularGraph, canonical_ranks
from .match import match_template
from .templates import FunctionalGroupTemplate


@dataclass(frozen=True)
class GroupInstance:
    name: str
    atoms: frozenset[int]
    instance_id: str
    # Graph atom for each core pattern atom, in template core order.
    core_map: tuple[int, ...] = ()
    variant: tuple[str, ...] = ()  # matched elements of variable (halogen) atoms


@dataclass(frozen=True)
class Decomposition:
    group_instances: tuple[GroupInstance, ...]
    residual_atoms: frozenset[int]

    def owner(self) -> dict[int, str]:
        """Atom index -> instance id (residual atoms are absent)."""
        return {a: g.instance_id for g in self.group_instances for a in g.atoms}

    def check_partition(self, n_atoms: int) -> None:
        seen: set[int] = set()
        for g in self.group_instances:
            if seen & g.atoms:
                raise ContractError(f"{g.instance_id} overlaps another group")
            seen |= g.atoms
        if seen & self.residual_atoms or seen | self.residual_atoms != set(range(n_atoms)):
            raise ContractError("groups and residual atoms do not partition the graph")
        ids = [g.instance_id for g in self.group_instances]
        if len(set(ids)) != len(ids):
            raise ContractError("duplicate instance id")


def decompose(graph: MolecularGraph,
              dictionary: Mapping[str, FunctionalGroupTemplate]) -> Decomposition:
    """Scan templates in rank order and lock non-overlapping matches greedily.

    Matching runs on a canonically relabelled copy so that the outcome does
    not depend on input atom order; within one template the match with the
    lexicographically smallest canonical atom tuple is accepted first.
    """
    if not graph.sanitized:
        raise ContractError("decompose requires a sanitized graph")
    ranks = canonical_ranks(graph)
    order = sorted(range(len(graph.atoms)), key=lambda i: ranks[i])  # canonical -> original
    canon = graph.permuted(order)
    locked: set[int] = set()
    accepted = []
    for template in sorted(dictionary.values(), key=lambda t: t.priority_rank):
        for m in match_template(canon, template, frozenset(locked)):
            core = [m[i] for i in template.core]
            if locked.intersection(core):
                continue
            locked.update(core)
            accepted.append((template, m))
    groups = []
    for k, (template, m) in enumerate(accepted, start=1):
        core_map = tuple(order[m[i]] for i in template.core)
        variant = tuple(graph.atoms[core_map[v]].element for v in template.variable_atoms)
        groups.append(GroupInstance(template.name, frozenset(core_map), f"FG_{k}",
                                    core_map, variant))
    owned = set().union(*(g.atoms for g in groups)) if groups else set()
    residual = frozenset(range(len(graph.atoms))) - owned
    return Decomposition(tuple(groups), residual)
