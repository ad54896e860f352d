"""Isomorphism-free generation of candidate dual graphs.

Generation is orderly: adjacency matrices are filled row by row in
breadth-first shape (a vertex's previously unseen neighbours take the next
free labels), and a partial matrix survives only while no relabelling can
beat it in the lexicographic row order. Every isomorphism class is emitted
exactly once, as its lexicographically greatest breadth-first matrix.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

from .multigraph import (
    Multigraph,
    canonical_form,
    is_bipartite,
    is_connected,
    is_lexmax_canonical,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenSpec:
    n: int
    degrees: tuple[int, ...] = (3,)
    m: int | None = None
    bipartite: bool = False
    connected: bool = True
    min_girth: int = 3
    max_mult: int = 1
    double_edges: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if not self.connected:
            raise ValueError("only connected generation is supported")
        if self.m is not None:
            lo, hi = min(self.degrees) * self.n, max(self.degrees) * self.n
            if not lo <= 2 * self.m <= hi:
                raise ValueError(f"m={self.m} infeasible for degrees {self.degrees} on {self.n} vertices")


def _matrix_to_graph(adj: list[list[int]]) -> Multigraph:
    n = len(adj)
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            edges.extend([(i + 1, j + 1)] * adj[i][j])
    return Multigraph(n, edges)


def orderly(spec: GenSpec, first_rows: Iterable[int] | None = None) -> Iterator[Multigraph]:
    """Yield one lex-max representative per isomorphism class matching ``spec``.

    ``first_rows`` optionally restricts the choice index taken for row 0,
    which lets callers partition the search tree across workers.
    """
    n = spec.n
    maxdeg = max(spec.degrees)
    allowed = set(spec.degrees)
    target_m = spec.m
    adj = [[0] * n for _ in range(n)]
    deg = [0] * n
    colour = [-1] * n
    colour[0] = 0
    state = {"m": 1, "edges": 0, "doubles": 0}
    restrict = None if first_rows is None else set(first_rows)

    def row_options(r):
        """Enumerate (existing multiplicities, new multiplicities) for row r."""
        m = state["m"]
        cands = [
            j
            for j in range(r + 1, m)
            if deg[j] < maxdeg and not (spec.bipartite and colour[j] == colour[r])
        ]
        for final in sorted(allowed, reverse=True):
            need = final - deg[r]
            if need < 0:
                continue
            yield from _split(cands, need, m, final)

    def _split(cands, need, m, final):
        # choose multiplicities toward existing candidate vertices, then new ones
        chosen: list[tuple[int, int]] = []

        def rec(idx, left):
            if idx == len(cands):
                for tail in _new_tails(left, n - m):
                    yield list(chosen), tail
                return
            j = cands[idx]
            room = min(spec.max_mult, maxdeg - deg[j])
            for k in range(min(room, left), -1, -1):
                if k:
                    chosen.append((j, k))
                yield from rec(idx + 1, left - k)
                if k:
                    chosen.pop()

        yield from rec(0, need)

    def _new_tails(left, free):
        # non-increasing multiplicities for freshly labelled neighbours
        out = []

        def rec(left, cap, acc):
            if left == 0:
                out.append(tuple(acc))
                return
            if len(acc) == free:
                return
            for k in range(min(cap, left), 0, -1):
                acc.append(k)
                rec(left - k, k, acc)
                acc.pop()

        rec(left, spec.max_mult, [])
        return out

    def apply(r, existing, tail, sign):
        m0 = state["m"]
        for j, k in existing:
            adj[r][j] += sign * k
            adj[j][r] += sign * k
            deg[r] += sign * k
            deg[j] += sign * k
            state["edges"] += sign * k
            if k == 2:
                state["doubles"] += sign
        if sign > 0:
            for idx, k in enumerate(tail):
                j = m0 + idx
                adj[r][j] = adj[j][r] = k
                deg[r] += k
                deg[j] += k
                colour[j] = 1 - colour[r]
                state["edges"] += k
                if k == 2:
                    state["doubles"] += 1
            state["m"] = m0 + len(tail)
        else:
            m1 = m0 - len(tail)
            for idx, k in enumerate(tail):
                j = m1 + idx
                adj[r][j] = adj[j][r] = 0
                deg[r] -= k
                deg[j] -= k
                colour[j] = -1
                state["edges"] -= k
                if k == 2:
                    state["doubles"] -= 1
            state["m"] = m1

    def feasible(r):
        if spec.double_edges is not None and state["doubles"] > spec.double_edges:
            return False
        if target_m is not None:
            mn = min(allowed)
            fixed = sum(deg[: r + 1])
            lo = fixed + sum(max(d, mn) for d in deg[r + 1 :])
            hi = fixed + maxdeg * (n - r - 1)
            if not lo <= 2 * target_m <= hi:
                return False
        return True

    def dfs(r):
        if r == n:
            if state["m"] != n:
                return
            if target_m is not None and state["edges"] != target_m:
                return
            if spec.double_edges is not None and state["doubles"] != spec.double_edges:
                return
            yield _matrix_to_graph(adj)
            return
        if r >= state["m"]:
            return  # disconnected
        for idx, (existing, tail) in enumerate(row_options(r)):
            if r == 0 and restrict is not None and idx not in restrict:
                continue
            apply(r, existing, tail, +1)
            if deg[r] in allowed and feasible(r) and is_lexmax_canonical(adj, r + 1):
                yield from dfs(r + 1)
            apply(r, existing, tail, -1)

    yield from dfs(0)


def _sorted_by_form(graphs: Iterable[Multigraph]) -> list[Multigraph]:
    keyed = sorted((canonical_form(g), g) for g in graphs)
    return [g for _, g in keyed]


def gen_cubic_simple(n: int) -> list[Multigraph]:
    """All connected simple cubic graphs on ``n`` vertices, one per class."""
    if n % 2 or n < 4:
        raise ValueError("cubic graphs need an even vertex count >= 4")
    return _sorted_by_form(orderly(GenSpec(n=n, degrees=(3,), m=3 * n // 2)))


def filter_bipartite(graphs: Iterable[Multigraph]) -> list[Multigraph]:
    return [g for g in graphs if is_bipartite(g)]


def gen_deg23_bipartite(n: int, m: int) -> list[Multigraph]:
    """Connected bipartite simple graphs with all degrees in {2, 3} and ``m`` edges."""
    if not 2 * n <= 2 * m <= 3 * n:
        raise ValueError(f"no graph on {n} vertices with degrees 2..3 has {m} edges")
    return _sorted_by_form(orderly(GenSpec(n=n, degrees=(2, 3), m=m, bipartite=True)))


def gen_cubic_bipartite_multigraphs(n: int, double_edges: int) -> list[Multigraph]:
    """Connected bipartite cubic multigraphs with exactly ``double_edges`` parallel pairs.

    Independent route to the lifted graphs: generates multiplicity-2 entries
    directly instead of lifting degree-2 vertices.
    """
    spec = GenSpec(
        n=n, degrees=(3,), m=3 * n // 2, bipartite=True, max_mult=2, double_edges=double_edges
    )
    return _sorted_by_form(orderly(spec))


LIFT_RULES = ("matching", "pairing")


def lift_double_edges(g: Multigraph, rule: str = "matching") -> Multigraph | None:
    """Double edges between degree-2 vertices to reach a cubic multigraph.

    ``rule="matching"`` accepts only when the degree-2 vertices induce a
    perfect matching, so doubling every edge among them yields degree 3
    everywhere. ``rule="pairing"`` also accepts longer even paths of
    degree-2 vertices, doubling alternate edges along each path.
    Returns None when the graph is rejected.
    """
    if rule not in LIFT_RULES:
        raise ValueError(f"unknown lift rule {rule!r}")
    if any(g.degree(v) not in (2, 3) for v in g.vertices()):
        return None
    low = [v for v in g.vertices() if g.degree(v) == 2]
    low_set = set(low)
    matched: dict[int, int] = {}
    if rule == "matching":
        for v in low:
            partners = [w for w in g.neighbours(v) if w in low_set]
            if len(partners) != 1:
                return None
            matched[v] = partners[0]
    else:
        for v in low:
            partners = [w for w in g.neighbours(v) if w in low_set]
            if v not in matched and len(partners) < 2:
                _match_path(g, v, low_set, matched)
        if len(matched) != len(low):
            # cycles of degree-2 vertices or odd paths
            return None
    doubled = {(min(v, w), max(v, w)) for v, w in matched.items()}
    return Multigraph(g.n, list(g.edges) + sorted(doubled))


def _match_path(g, start, low_set, matched):
    path = [start]
    prev, cur = None, start
    while True:
        nxt = [w for w in g.neighbours(cur) if w in low_set and w != prev]
        if not nxt:
            break
        prev, cur = cur, nxt[0]
        path.append(cur)
    if len(path) % 2:
        return
    for a, b in zip(path[0::2], path[1::2]):
        matched[a] = b
        matched[b] = a


def lifted_stage(
    n: int, d: int, rule: str = "matching"
) -> tuple[list[Multigraph], list[Multigraph]]:
    """Pre-lift graphs and their lifts for ``d`` double edges (lifts deduplicated)."""
    if d == 0:
        cubic = filter_bipartite(gen_cubic_simple(n))
        return cubic, cubic
    pre = gen_deg23_bipartite(n, 3 * n // 2 - d)
    lifted = {}
    for g in pre:
        h = lift_double_edges(g, rule)
        if h is None:
            continue
        assert is_connected(h)
        lifted.setdefault(canonical_form(h), h)
    return pre, [lifted[k] for k in sorted(lifted)]
