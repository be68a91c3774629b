"""Hypergraphs, minimal transversals and transversality numbers.

Vertices are small nonnegative integers; a hyperedge is a nonempty frozenset of
vertices.  Two independent enumerators are provided (incremental cross-product
and a depth-first search with critical-edge pruning) plus a greedy upper bound
on the transversality number.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, Optional, Sequence

log = logging.getLogger(__name__)

VertexSet = FrozenSet[int]


def _canon(sets: Iterable[Iterable[int]]) -> list[VertexSet]:
    """Deduplicate and sort a family of vertex sets (sorted-vector order)."""
    uniq = {frozenset(s) for s in sets}
    return sorted(uniq, key=lambda s: (len(s), sorted(s)))


@dataclass(frozen=True)
class Hypergraph:
    """A vertex set with a family of nonempty hyperedges covering it."""

    vertices: tuple[int, ...]
    edges: tuple[VertexSet, ...]

    @classmethod
    def from_edges(cls, edges: Iterable[Iterable[int]],
                   vertices: Optional[Iterable[int]] = None) -> "Hypergraph":
        canon: list[VertexSet] = []
        seen: set[VertexSet] = set()
        for e in edges:
            fs = frozenset(e)
            if not fs:
                raise ValueError("hyperedge must be nonempty")
            if fs not in seen:
                seen.add(fs)
                canon.append(fs)
        covered: set[int] = set()
        for e in canon:
            covered |= e
        if vertices is None:
            verts = sorted(covered)
        else:
            verts = sorted(set(vertices))
            if covered - set(verts):
                raise ValueError(
                    f"edge vertices {sorted(covered - set(verts))} not in vertex set")
            if set(verts) - covered:
                raise ValueError(
                    f"vertices {sorted(set(verts) - covered)} belong to no edge")
        return cls(tuple(verts), tuple(canon))

    def _check_subset(self, t: Iterable[int]) -> VertexSet:
        ts = frozenset(t)
        extra = ts - set(self.vertices)
        if extra:
            raise ValueError(f"vertices {sorted(extra)} not in hypergraph")
        return ts

    def dump(self) -> str:
        """Debug text form: one edge per line, space-separated vertex ids."""
        return "\n".join(" ".join(str(v) for v in sorted(e)) for e in self.edges)


def is_transversal(h: Hypergraph, t: Iterable[int]) -> bool:
    """True iff ``t`` intersects every edge of ``h``."""
    ts = h._check_subset(t)
    return all(ts & e for e in h.edges)


def is_minimal_transversal(h: Hypergraph, t: Iterable[int]) -> bool:
    """A transversal is minimal iff every member has a critical edge."""
    ts = h._check_subset(t)
    if not all(ts & e for e in h.edges):
        return False
    for v in ts:
        if not any(e & ts == {v} for e in h.edges):
            return False
    return True


def berge_enumerate(h: Hypergraph) -> list[VertexSet]:
    """All minimal transversals, built edge by edge.

    The running family is crossed with each new edge, then pruned back to
    inclusion-minimal sets.  Fine at desk scale; quadratic pruning.
    """
    family: list[VertexSet] = [frozenset()]
    for e in h.edges:
        crossed = {t | {v} for t in family for v in e if not (t & e)}
        crossed |= {t for t in family if t & e}
        family = _prune_minimal(crossed)
    return _canon(t for t in family if t)


def _prune_minimal(sets: Iterable[VertexSet]) -> list[VertexSet]:
    by_size = sorted(set(sets), key=len)
    kept: list[VertexSet] = []
    for s in by_size:
        if not any(k <= s for k in kept):
            kept.append(s)
    return kept


def mmcs(h: Hypergraph, size_cap: Optional[int] = None) -> list[VertexSet]:
    """Depth-first minimal-transversal enumeration with uncov/crit bookkeeping.

    ``uncov`` holds the currently uncovered edges, ``crit[x]`` the edges whose
    only chosen vertex is ``x``; a branch dies when some chosen vertex loses its
    last critical edge.  With ``size_cap`` only transversals of that size or
    smaller are produced.
    """
    if size_cap is not None and size_cap < 1:
        raise ValueError("size_cap must be >= 1")
    out: list[VertexSet] = []
    n_edges = len(h.edges)
    uncov = list(range(n_edges))
    crit: dict[int, set[int]] = {}
    cand = set(h.vertices)
    chosen: list[int] = []

    def choose_edge() -> int:
        # fail-first: uncovered edge with fewest remaining candidates,
        # ties by lowest edge index
        best, best_n = -1, None
        for ei in uncov:
            n = len(h.edges[ei] & cand)
            if best_n is None or n < best_n or (n == best_n and ei < best):
                best, best_n = ei, n
        return best

    def recurse() -> None:
        if not uncov:
            out.append(frozenset(chosen))
            return
        if size_cap is not None and len(chosen) >= size_cap:
            return
        ei = choose_edge()
        branch_verts = sorted(h.edges[ei] & cand)
        removed_from_cand: list[int] = []
        for v in branch_verts:
            cand.discard(v)
            removed_from_cand.append(v)
            # update state for choosing v
            newly_covered = [ej for ej in uncov if v in h.edges[ej]]
            crit[v] = set(newly_covered)
            stolen: list[tuple[int, int]] = []
            for x in chosen:
                for ej in list(crit[x]):
                    if v in h.edges[ej]:
                        crit[x].discard(ej)
                        stolen.append((x, ej))
            ok = all(crit[x] for x in chosen)
            if ok:
                chosen.append(v)
                for ej in newly_covered:
                    uncov.remove(ej)
                recurse()
                for ej in newly_covered:
                    uncov.append(ej)
                uncov.sort()
                chosen.pop()
            # restore crit
            for x, ej in stolen:
                crit[x].add(ej)
            del crit[v]
        for v in removed_from_cand:
            cand.add(v)

    recurse()
    res = _canon(out)
    # the branch-death test prunes non-minimal supersets already, but keep the
    # guarantee explicit
    assert all(is_minimal_transversal(h, t) for t in res)
    return res


def get_min_transversality(h: Hypergraph) -> tuple[int, VertexSet]:
    """Greedy upper bound on the transversality number.

    For every start vertex: repeatedly drop covered edges and add the vertex
    hitting most remaining edges (ties by lowest id).  Returns the smallest
    cover found; the count is an upper bound on the true tau(H).
    """
    best: Optional[VertexSet] = None
    for start in h.vertices:
        picked = [start]
        remaining = [e for e in h.edges if start not in e]
        while remaining:
            support: dict[int, int] = {}
            for e in remaining:
                for v in e:
                    support[v] = support.get(v, 0) + 1
            v = min(support, key=lambda x: (-support[x], x))
            picked.append(v)
            remaining = [e for e in remaining if v not in e]
        t = frozenset(picked)
        if best is None or len(t) < len(best) or (len(t) == len(best)
                                                  and sorted(t) < sorted(best)):
            best = t
    assert best is not None
    return len(best), best


def smallest_transversals(h: Hypergraph) -> list[VertexSet]:
    """All minimal transversals of minimum cardinality (exact)."""
    k0, _ = get_min_transversality(h)
    found = mmcs(h, size_cap=k0)
    if not found:  # greedy bound can never undershoot, but stay safe
        found = mmcs(h)
    k_star = min(len(t) for t in found)
    if k_star < k0:
        log.warning("greedy transversality bound %d overshoots exact %d", k0, k_star)
    return [t for t in found if len(t) == k_star]


def transversality(h: Hypergraph) -> int:
    """Exact transversality number: minimum size over the enumerated set."""
    return len(smallest_transversals(h)[0])
