"""
Topology Service — antenna-node trees and hop counts.

Node ids are assigned breadth-first: the root is node 0 and its parent is
the CCU. Array interconnects only exist as hop-count formulas.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache

from system.models import CCU, SystemParams, TreeTopology

logger = logging.getLogger(__name__)


class InvalidTopology(ValueError):
    pass


@dataclass(frozen=True)
class HopsComparison:
    tree: int
    array_corner: int
    array_center: int


def _assemble(parents: tuple, arity: int) -> TreeTopology:
    children = [[] for _ in parents]
    for node, parent in enumerate(parents):
        if parent != CCU:
            children[parent].append(node)

    depth = [0] * len(parents)
    root = parents.index(CCU)
    frontier = [root]
    for node in frontier:
        for child in children[node]:
            depth[child] = depth[node] + 1
            frontier.append(child)

    return TreeTopology(
        parents=tuple(parents),
        arity=arity,
        children=tuple(tuple(c) for c in children),
        depth=tuple(depth),
    )


@lru_cache(maxsize=64)
def build_tree(M: int, arity: int = 2) -> TreeTopology:
    """
    Complete (level-filled, left-packed) arity-ary tree on M nodes.

    Raises:
        InvalidTopology: M < 1 or arity < 1
    """
    if M < 1:
        raise InvalidTopology(f'A tree needs at least one node (M={M}).')
    if arity < 1:
        raise InvalidTopology(f'arity must be >= 1 (got {arity}).')
    parents = (CCU,) + tuple((node - 1) // arity for node in range(1, M))
    return _assemble(parents, arity)


def tree_from_parents(parents, arity: int = None) -> TreeTopology:
    """
    Arbitrary tree from a parent list (``CCU`` marks the root).

    Args:
        parents: parents[n] is the parent of node n
        arity: maximum children per node; None accepts any fan-out

    Raises:
        InvalidTopology: no/several roots, cycles, dangling ids, fan-out above arity
    """
    parents = tuple(int(p) for p in parents)
    M = len(parents)
    if M == 0:
        raise InvalidTopology('A tree needs at least one node.')

    roots = [n for n, p in enumerate(parents) if p == CCU]
    if len(roots) != 1:
        raise InvalidTopology(f'Expected exactly one root, found {len(roots)}.')

    for node, parent in enumerate(parents):
        if parent != CCU and not 0 <= parent < M:
            raise InvalidTopology(f'Node {node} has unknown parent {parent}.')
        if parent == node:
            raise InvalidTopology(f'Node {node} is its own parent.')

    fan_out = max((parents.count(n) for n in range(M)), default=0)
    if arity is None:
        arity = max(fan_out, 1)
    elif fan_out > arity:
        raise InvalidTopology(f'A node has {fan_out} children, arity allows {arity}.')

    topology = _assemble(parents, arity)
    if len(topology.breadth_first) != M:
        raise InvalidTopology('Not every node is reachable from the root (cycle in parent list).')
    return topology


def hop_count(params: SystemParams) -> int:
    """N_hops used by the timing formulas: the override, else the built tree."""
    if params.N_hops is not None:
        return params.N_hops
    return build_tree(params.M, params.tree_arity).N_hops


def hops_comparison(M: int) -> HopsComparison:
    """Hop counts of corner-fed array, center-fed array and binary tree."""
    if M < 1:
        raise InvalidTopology(f'M must be >= 1 (got {M}).')
    root_m = math.sqrt(M)
    return HopsComparison(
        tree=build_tree(M, 2).N_hops,
        array_corner=math.ceil(1.5 * root_m),
        array_center=math.ceil(root_m),
    )


# ── Edge list ────────────────────────────────────────────────────────────────

def to_edge_list(topology: TreeTopology) -> str:
    """One ``child parent`` line per node; the root's parent is ``CCU``."""
    lines = []
    for node in topology.breadth_first:
        parent = topology.parents[node]
        lines.append(f'{node} {"CCU" if parent == CCU else parent}')
    return '\n'.join(lines) + '\n'


def from_edge_list(text: str, arity: int = None) -> TreeTopology:
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith('#'):
            continue
        try:
            child, parent = line.split()
            entries[int(child)] = CCU if parent.upper() == 'CCU' else int(parent)
        except ValueError:
            raise InvalidTopology(f'Line {lineno}: expected "child parent", got "{line}".')

    if sorted(entries) != list(range(len(entries))):
        raise InvalidTopology('Edge list must name every node id 0..M-1 exactly once.')
    return tree_from_parents([entries[n] for n in range(len(entries))], arity)
