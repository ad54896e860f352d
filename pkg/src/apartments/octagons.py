"""Six-octagon face structures on cubic dual graphs.

Darts (directed edge traversals) are numbered ``2*e`` for edge ``e = (u, v)``
read u -> v with u < v, and ``2*e + 1`` for v -> u. A rotation system picks,
at every vertex, its reference cyclic order of edge-ends (ascending by
neighbour, then edge id) either forwards or reversed. A face is traced by
entering a vertex along an edge and leaving along the next edge-end in that
vertex's rotation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .multigraph import Multigraph, bipartition, canonical_form

FACE_LENGTH = 8


@dataclass(frozen=True)
class SurfaceBudget:
    genus: int
    faces: int
    vertices: int
    edges: int

    @property
    def euler(self) -> int:
        return self.vertices - self.edges + self.faces


def surface_budget(genus: int) -> SurfaceBudget:
    """Octagon count and dual-graph size for a closed orientable surface.

    Octagons meet three at a vertex and two along an edge, so E = 4F and
    V = 8F/3; Euler's formula then forces F = 6g - 6.
    """
    if genus < 0:
        raise ValueError("genus must be non-negative")
    faces = 6 * genus - 6
    if faces <= 0:
        return SurfaceBudget(genus, faces, 0, 0)
    return SurfaceBudget(genus, faces, 16 * (genus - 1), 24 * (genus - 1))


# -- darts and rotations -----------------------------------------------------


def dart_tail(g: Multigraph, d: int) -> int:
    u, v = g.edges[d >> 1]
    return v if d & 1 else u


def dart_head(g: Multigraph, d: int) -> int:
    u, v = g.edges[d >> 1]
    return u if d & 1 else v


def dart_from(g: Multigraph, v: int, eid: int) -> int:
    """The dart leaving ``v`` along edge ``eid``."""
    return 2 * eid + (0 if g.edges[eid][0] == v else 1)


def _require_cubic(g: Multigraph) -> None:
    bad = [v for v in g.vertices() if g.degree(v) != 3]
    if bad:
        raise ValueError(f"rotation systems need a cubic graph; vertex {bad[0]} has degree {g.degree(bad[0])}")


def _successor_tables(g: Multigraph) -> tuple[np.ndarray, np.ndarray]:
    """Face successor of every dart for a forward and a reversed rotation at its head."""
    _require_cubic(g)
    nd = 2 * g.m
    fwd = np.empty(nd, dtype=np.int16)
    rev = np.empty(nd, dtype=np.int16)
    for v in g.vertices():
        ends = g.incidence(v)
        for k, (_, eid) in enumerate(ends):
            incoming = dart_from(g, v, eid) ^ 1
            fwd[incoming] = dart_from(g, v, ends[(k + 1) % 3][1])
            rev[incoming] = dart_from(g, v, ends[(k - 1) % 3][1])
    return fwd, rev


@dataclass(frozen=True)
class RotationSystem:
    graph: Multigraph
    orientation: tuple[bool, ...]  # index v-1; True = reference order forwards

    @classmethod
    def from_mask(cls, g: Multigraph, mask: int) -> "RotationSystem":
        return cls(g, tuple(bool(mask >> (v - 1) & 1) for v in g.vertices()))

    @property
    def mask(self) -> int:
        return sum(1 << i for i, b in enumerate(self.orientation) if b)

    def reversed(self) -> "RotationSystem":
        return RotationSystem(self.graph, tuple(not b for b in self.orientation))

    def rotation(self, v: int) -> list[int]:
        """Edge ids at ``v`` in rotation order, starting at the reference first end."""
        ends = [eid for _, eid in self.graph.incidence(v)]
        return ends if self.orientation[v - 1] else [ends[0], ends[2], ends[1]]

    def next_edge(self, v: int, eid: int) -> int:
        rot = self.rotation(v)
        return rot[(rot.index(eid) + 1) % 3]

    def successor(self, d: int) -> int:
        g = self.graph
        v = dart_head(g, d)
        return dart_from(g, v, self.next_edge(v, d >> 1))


@dataclass(frozen=True)
class Face:
    darts: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.darts)

    def vertices(self, g: Multigraph) -> tuple[int, ...]:
        return tuple(dart_tail(g, d) for d in self.darts)


def trace_faces(r: RotationSystem) -> list[Face]:
    """Partition all darts into faces, each starting at its smallest dart."""
    nd = 2 * r.graph.m
    seen = [False] * nd
    faces = []
    for start in range(nd):
        if seen[start]:
            continue
        walk = []
        d = start
        while not seen[d]:
            seen[d] = True
            walk.append(d)
            d = r.successor(d)
        faces.append(Face(tuple(walk)))
    return faces


def genus_of(r: RotationSystem) -> int:
    g = r.graph
    chi = g.n - g.m + len(trace_faces(r))
    return (2 - chi) // 2


# -- octagon sets ------------------------------------------------------------


def _canonical_cycle(seq: Sequence[int]) -> tuple[int, ...]:
    k = min(range(len(seq)), key=lambda i: tuple(seq[i:]) + tuple(seq[:i]))
    return tuple(seq[k:]) + tuple(seq[:k])


def undirected_key(darts: Sequence[int]) -> tuple[int, ...]:
    """Edge-id cycle of a closed walk, normalised over rotation and reversal."""
    edges = [d >> 1 for d in darts]
    return min(_canonical_cycle(edges), _canonical_cycle(edges[::-1]))


@dataclass(frozen=True)
class OctagonSet:
    graph: Multigraph = field(repr=False, compare=False)
    walks: tuple[tuple[int, ...], ...]  # directed dart cycles, sorted
    provenance: str
    orientation: int | None = None  # bitmask, bit v-1 set = forward at v

    @property
    def key(self) -> tuple[tuple[int, ...], ...]:
        """Equality key: multiset of undirected edge-id cycles."""
        return tuple(sorted(undirected_key(w) for w in self.walks))

    @property
    def directed_key(self) -> tuple[tuple[int, ...], ...]:
        return self.walks

    def vertex_cycles(self) -> list[tuple[int, ...]]:
        return [tuple(dart_tail(self.graph, d) for d in w) for w in self.walks]

    def covers_each_dart_once(self) -> bool:
        darts = sorted(d for w in self.walks for d in w)
        return darts == list(range(2 * self.graph.m))


def _make_set(g, walks, provenance, orientation=None) -> OctagonSet:
    return OctagonSet(g, tuple(sorted(_canonical_cycle(w) for w in walks)), provenance, orientation)


def valid_orientation_masks(g: Multigraph, face_length: int = FACE_LENGTH) -> np.ndarray:
    """All orientation bitmasks whose traced faces all have ``face_length`` darts.

    Vectorised over the 2^n masks: the successor permutation is composed with
    itself and tested for order exactly ``face_length`` on every dart.
    """
    fwd, rev = _successor_tables(g)
    nd = 2 * g.m
    heads = np.array([dart_head(g, d) - 1 for d in range(nd)])
    if face_length & (face_length - 1):
        raise ValueError("face length must be a power of two")
    ident = np.arange(nd, dtype=np.int16)
    found = []
    chunk = 1 << min(g.n, 16)
    for lo in range(0, 1 << g.n, chunk):
        masks = np.arange(lo, lo + chunk, dtype=np.int64)
        bits = ((masks[:, None] >> heads[None, :]) & 1).astype(bool)
        succ = np.where(bits, fwd[None, :], rev[None, :])
        power = succ
        ok = np.ones(len(masks), dtype=bool)
        step = 1
        while step < face_length:
            # no face may be shorter than face_length
            ok &= (power != ident).all(axis=1)
            power = np.take_along_axis(power, power, axis=1)
            step *= 2
        ok &= (power == ident).all(axis=1)
        found.append(masks[ok])
    return np.concatenate(found) if found else np.empty(0, dtype=np.int64)


def neighbour_sequence_count(g: Multigraph, face_length: int = FACE_LENGTH) -> int:
    """Masks among all 2^n that trace valid faces when faces are read as vertex sequences.

    Around an endpoint of a double edge the neighbour sequence (c, b, b)
    reads the same in both directions, so a sweep that records faces by
    vertices cannot tell that endpoint's two orientations apart. This counts
    every mask that becomes valid after re-choosing the bit at the larger
    endpoint of each double edge.
    """
    valid = {int(m) for m in valid_orientation_masks(g, face_length)}
    free = 0
    for _, b in g.double_edges():
        free |= 1 << (b - 1)
    keep = ~free
    reachable = {m & keep for m in valid}
    return sum(1 for m in range(1 << g.n) if m & keep in reachable)


def orientation_octagon_sets(g: Multigraph, genus: int = 2) -> list[OctagonSet]:
    """Octagon sets traced by every orientation assignment giving all faces length 8.

    One set per valid assignment, in increasing mask order.
    """
    budget = surface_budget(genus)
    if g.n != budget.vertices or g.m != budget.edges:
        return []
    out = []
    for mask in valid_orientation_masks(g):
        r = RotationSystem.from_mask(g, int(mask))
        faces = trace_faces(r)
        assert len(faces) == budget.faces
        out.append(_make_set(g, [f.darts for f in faces], "orientation", int(mask)))
    return out


def distinct_sets(sets: Iterable[OctagonSet], directed: bool = False) -> list[OctagonSet]:
    """Deduplicate under the set-equality convention (reversal-equal unless ``directed``)."""
    seen = {}
    for s in sets:
        seen.setdefault(s.directed_key if directed else s.key, s)
    return [seen[k] for k in sorted(seen)]


# -- depth-first closed-walk search -------------------------------------------

WALK_RULES = ("simple", "no-backtrack", "revisit")


def default_walk_rule(g: Multigraph) -> str:
    return "simple" if g.is_simple() else "no-backtrack"


def closed_walks(g: Multigraph, length: int = FACE_LENGTH, rule: str | None = None) -> list[tuple[int, ...]]:
    """Directed closed walks of ``length`` darts, each dart used at most once.

    ``simple`` forbids revisiting a vertex; ``no-backtrack`` allows revisits
    but never leaves along the edge just arrived on; ``revisit`` allows both.
    Walks are returned once each, rotated to start at their smallest dart.
    """
    rule = rule or default_walk_rule(g)
    if rule not in WALK_RULES:
        raise ValueError(f"unknown walk rule {rule!r}")
    out_darts = {v: [dart_from(g, v, eid) for _, eid in g.incidence(v)] for v in g.vertices()}
    dist = _distances(g)
    found = set()
    for start in range(2 * g.m):
        s = dart_tail(g, start)
        walk = [start]
        used = {start}
        visited = {s, dart_head(g, start)}

        def extend():
            last = walk[-1]
            v = dart_head(g, last)
            remaining = length - len(walk)
            if remaining == 0:
                if v != s:
                    return
                if rule == "no-backtrack" and (walk[0] >> 1) == (last >> 1):
                    return
                if walk[0] == min(walk):
                    found.add(tuple(walk))
                return
            for d in out_darts[v]:
                if d in used or d < start:
                    continue
                if rule != "revisit" and (d >> 1) == (last >> 1):
                    continue
                w = dart_head(g, d)
                if dist[w][s] > remaining - 1:
                    continue
                if rule == "simple" and w in visited and not (w == s and remaining == 1):
                    continue
                walk.append(d)
                used.add(d)
                fresh = w not in visited
                if fresh:
                    visited.add(w)
                extend()
                if fresh:
                    visited.discard(w)
                used.discard(d)
                walk.pop()

        extend()
    return sorted(found)


def _distances(g: Multigraph) -> dict[int, dict[int, int]]:
    from collections import deque

    out = {}
    for s in g.vertices():
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w, _ in g.incidence(v):
                if w not in dist:
                    dist[w] = dist[v] + 1
                    queue.append(w)
        out[s] = dist
    return out


def exact_dart_covers(nd: int, walks: Sequence[tuple[int, ...]], parts: int | None = None):
    """Yield every selection of walks covering each dart exactly once.

    Algorithm X: always branch on the smallest uncovered dart.
    """
    by_dart: dict[int, list[int]] = {d: [] for d in range(nd)}
    for i, w in enumerate(walks):
        for d in w:
            by_dart[d].append(i)
    covered = [False] * nd
    chosen: list[int] = []

    def rec():
        try:
            d = covered.index(False)
        except ValueError:
            yield list(chosen)
            return
        if parts is not None and len(chosen) >= parts:
            return
        for i in by_dart[d]:
            w = walks[i]
            if any(covered[x] for x in w):
                continue
            for x in w:
                covered[x] = True
            chosen.append(i)
            yield from rec()
            chosen.pop()
            for x in w:
                covered[x] = False

    yield from rec()


def dfs_octagon_sets(g: Multigraph, genus: int = 2, rule: str | None = None) -> list[OctagonSet]:
    """All sets of 8-walks using every dart exactly once, found depth-first.

    Returned as distinct directed sets; see :func:`distinct_sets` for the
    reversal-equal count.
    """
    budget = surface_budget(genus)
    if g.n != budget.vertices or g.m != budget.edges:
        return []
    if any(g.degree(v) != 3 for v in g.vertices()):
        return []
    walks = closed_walks(g, FACE_LENGTH, rule)
    sets = [
        _make_set(g, [walks[i] for i in sel], "dfs")
        for sel in exact_dart_covers(2 * g.m, walks, budget.faces)
    ]
    return distinct_sets(sets, directed=True)


# -- orientation realisability and the double-edge lemma ----------------------


def realising_orientation(s: OctagonSet) -> int | None:
    """Mask of the rotation system whose faces are exactly ``s``, if any.

    Each vertex's in-dart -> out-dart transitions must form the forward or
    reversed reference 3-cycle of its edge-ends.
    """
    g = s.graph
    succ = {}
    for w in s.walks:
        for i, d in enumerate(w):
            succ[d] = w[(i + 1) % len(w)]
    mask = 0
    for v in g.vertices():
        ends = [eid for _, eid in g.incidence(v)]
        trans = {}
        for eid in ends:
            incoming = dart_from(g, v, eid) ^ 1
            trans[eid] = succ[incoming] >> 1
        if all(trans[ends[k]] == ends[(k + 1) % 3] for k in range(3)):
            mask |= 1 << (v - 1)
        elif not all(trans[ends[k]] == ends[(k - 1) % 3] for k in range(3)):
            return None
    return mask


def drawn_senses(r: RotationSystem, a: int, b: int) -> tuple[int, int]:
    """Turning senses at the ends of a parallel pair, as drawn with a lens between them.

    Draw ``a`` left of ``b`` with the lower-id parallel edge as the upper arc.
    A vertex is counter-clockwise (+1) or clockwise (-1) by how its rotation
    turns in that picture: at ``a`` counter-clockwise runs upper -> other ->
    lower, at ``b`` it runs upper -> lower -> other.
    """
    g = r.graph
    pair = sorted(eid for w, eid in g.incidence(a) if w == b)
    if len(pair) != 2:
        raise ValueError(f"{a} and {b} are not joined by a double edge")
    upper, lower = pair
    sense_a = 1 if r.next_edge(a, lower) == upper else -1
    sense_b = 1 if r.next_edge(b, upper) == lower else -1
    return sense_a, sense_b


def double_edges_opposite(r: RotationSystem) -> bool:
    """True when every double edge joins vertices of opposite drawn sense."""
    for a, b in r.graph.double_edges():
        sa, sb = drawn_senses(r, a, b)
        if sa == sb:
            return False
    return True


def double_edge_orientation_filter(g: Multigraph, sets: Sequence[OctagonSet]) -> list[OctagonSet]:
    """Keep sets realised by a rotation system with opposite senses on each double edge."""
    kept = []
    for s in sets:
        mask = s.orientation if s.orientation is not None else realising_orientation(s)
        if mask is None:
            continue
        if double_edges_opposite(RotationSystem.from_mask(g, mask)):
            kept.append(s)
    return kept


def bipartite_alternation(s: OctagonSet) -> bool:
    a, _ = bipartition(s.graph)
    for cyc in s.vertex_cycles():
        for i in range(len(cyc)):
            if (cyc[i] in a) == (cyc[(i + 1) % len(cyc)] in a):
                return False
    return True


# -- named reference graphs ----------------------------------------------------

# Octagon vertex sequences for the five simple candidates; each graph is the
# union of consecutive pairs along its six cycles.
REFERENCE_OCTAGONS: dict[str, list[tuple[int, ...]]] = {
    "G0_3345": [
        (1, 2, 5, 3, 6, 10, 8, 4),
        (1, 3, 5, 9, 13, 10, 6, 2),
        (1, 4, 7, 9, 5, 2, 6, 3),
        (4, 8, 12, 14, 16, 15, 11, 7),
        (7, 11, 14, 12, 15, 16, 13, 9),
        (8, 10, 13, 16, 14, 11, 15, 12),
    ],
    "G0_3538": [
        (1, 2, 5, 3, 7, 10, 6, 4),
        (1, 3, 5, 9, 8, 4, 6, 2),
        (1, 4, 8, 12, 15, 11, 7, 3),
        (2, 6, 10, 14, 16, 13, 9, 5),
        (7, 11, 13, 16, 15, 12, 14, 10),
        (8, 9, 13, 11, 15, 16, 14, 12),
    ],
    "G0_3621": [
        (1, 2, 5, 9, 14, 10, 6, 4),
        (1, 3, 7, 11, 8, 4, 6, 2),
        (1, 4, 8, 13, 15, 9, 5, 3),
        (2, 6, 10, 16, 12, 7, 3, 5),
        (7, 12, 15, 13, 16, 10, 14, 11),
        (8, 11, 14, 9, 15, 12, 16, 13),
    ],
    "G0_4002": [
        (1, 2, 6, 11, 15, 13, 7, 3),
        (1, 3, 5, 10, 15, 11, 8, 4),
        (1, 4, 9, 12, 16, 10, 5, 2),
        (2, 5, 3, 7, 14, 16, 12, 6),
        (4, 8, 13, 15, 10, 16, 14, 9),
        (6, 12, 9, 14, 7, 13, 8, 11),
    ],
    "G0_4060": [
        (1, 2, 6, 14, 9, 12, 8, 3),
        (1, 3, 7, 11, 5, 12, 9, 4),
        (1, 4, 10, 15, 8, 12, 5, 2),
        (2, 5, 11, 16, 15, 10, 13, 6),
        (3, 8, 15, 16, 14, 6, 13, 7),
        (4, 9, 14, 16, 11, 7, 13, 10),
    ],
}


def graph_from_octagons(cycles: Sequence[Sequence[int]]) -> Multigraph:
    """Simple graph whose edges are the consecutive pairs of the given cycles."""
    edges = set()
    n = 0
    for cyc in cycles:
        for i, u in enumerate(cyc):
            v = cyc[(i + 1) % len(cyc)]
            edges.add((min(u, v), max(u, v)))
            n = max(n, u, v)
    return Multigraph(n, sorted(edges))


def rotation_from_vertex_cycles(g: Multigraph, cycles: Sequence[Sequence[int]]) -> RotationSystem:
    """Rotation system of a simple graph whose faces are the given vertex cycles."""
    mask = 0
    for v in g.vertices():
        ends = [w for w, _ in g.incidence(v)]
        nxt = {}
        for cyc in cycles:
            for i, x in enumerate(cyc):
                if x == v:
                    nxt[cyc[i - 1]] = cyc[(i + 1) % len(cyc)]
        if all(nxt.get(ends[k]) == ends[(k + 1) % 3] for k in range(3)):
            mask |= 1 << (v - 1)
        elif not all(nxt.get(ends[k]) == ends[(k - 1) % 3] for k in range(3)):
            raise ValueError(f"cycles do not induce a rotation at vertex {v}")
    return RotationSystem.from_mask(g, mask)


def _reference_graphs() -> dict[str, Multigraph]:
    from .data import load_named_multigraphs

    refs = {name: graph_from_octagons(cycles) for name, cycles in REFERENCE_OCTAGONS.items()}
    refs.update(load_named_multigraphs())
    return refs


_REFERENCE_FORMS: dict[bytes, str] | None = None


def reference_graphs() -> dict[str, Multigraph]:
    return _reference_graphs()


def identify_named_graph(g: Multigraph) -> str | None:
    """Name of the bundled reference graph isomorphic to ``g``, else None."""
    global _REFERENCE_FORMS
    if any(g.degree(v) != 3 for v in g.vertices()):
        return None
    if _REFERENCE_FORMS is None:
        _REFERENCE_FORMS = {canonical_form(h): name for name, h in _reference_graphs().items()}
    return _REFERENCE_FORMS.get(canonical_form(g))


# -- octagon report --------------------------------------------------------------------


@dataclass
class OctagonReportEntry:
    graph: Multigraph
    name: str | None
    assignments: int
    set_count: int
    sets: list[OctagonSet]
    dfs_sets: int | None = None


def analyse_graph(g: Multigraph, genus: int = 2, method: str = "orientation") -> OctagonReportEntry:
    """Octagon structure of one graph: orientation sweep, double-edge filter, optional DFS."""
    if method not in ("orientation", "dfs", "both"):
        raise ValueError(f"unknown method {method!r}")
    raw = orientation_octagon_sets(g, genus)
    kept = double_edge_orientation_filter(g, raw)
    dfs = None
    if method in ("dfs", "both"):
        dfs = len(dfs_octagon_sets(g, genus))
    count = neighbour_sequence_count(g) if kept else 0
    return OctagonReportEntry(g, identify_named_graph(g), len(raw), count, kept, dfs)


def format_octagon_report(entries: Iterable[OctagonReportEntry], genus: int, method: str) -> str:
    """Line-oriented report: one block per graph, each kept set as six vertex cycles."""
    lines = ["octagons 1", f"genus {genus}", f"method {method}"]
    for i, e in enumerate(entries, start=1):
        lines.append(f"graph {i}")
        lines.append(f"form {canonical_form(e.graph).hex()}")
        lines.append(f"vertices {e.graph.n}")
        lines.append(f"name {e.name or '-'}")
        lines.append(f"assignments {e.assignments}")
        lines.append(f"sets {e.set_count}")
        if e.dfs_sets is not None:
            lines.append(f"dfs {e.dfs_sets}")
        lines.extend("e {} {}".format(*edge) for edge in e.graph.edges)
        for j, s in enumerate(e.sets, start=1):
            lines.append(f"set {j} assignment {s.orientation}")
            lines.extend("  " + " ".join(map(str, cyc)) for cyc in s.vertex_cycles())
        lines.append("end")
    return "\n".join(lines) + "\n"


def parse_octagon_report(text: str) -> list[tuple[Multigraph, str | None, list[int]]]:
    """Graphs, names and kept orientation masks from an octagon report."""
    out = []
    n = 0
    edges: list[tuple[int, int]] = []
    name: str | None = None
    masks: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        parts = raw.split()
        if not parts:
            continue
        head = parts[0]
        if head == "graph":
            edges, masks, name = [], [], None
        elif head == "vertices":
            n = int(parts[1])
        elif head == "name":
            name = None if parts[1] == "-" else parts[1]
        elif head == "e":
            edges.append((int(parts[1]), int(parts[2])))
        elif head == "set":
            masks.append(int(parts[3]))
        elif head == "end":
            out.append((Multigraph(n, edges), name, masks))
        elif head not in ("octagons", "genus", "method", "form", "assignments", "sets", "dfs") and not raw.startswith("  "):
            raise ValueError(f"line {lineno}: unknown record {head!r}")
    return out
