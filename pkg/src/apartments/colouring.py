"""Triangle colourings of dual graphs and their certificates.

A colouring assigns every vertex a reading of one presentation triangle. The
three labels of that reading go onto the vertex's edge-ends in rotation
order; both ends of an edge must carry the same generator. Triangles on the
bipartition class of the lowest-numbered vertex are read forwards along the
rotation, triangles on the other class backwards.
"""

from __future__ import annotations

from collections import deque
from itertools import groupby, permutations
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .multigraph import Multigraph, bipartition, canonical_form, iter_mgtext, to_mgtext
from .octagons import RotationSystem
from .presentations import Presentation, TriangleUse, canonical_rotation, triangle_multiset_subset

ADJACENCY_RULES = ("triangle", "slot")


@dataclass(frozen=True)
class ColouringProblem:
    graph: Multigraph
    orientation: int  # rotation bitmask, bit v-1 set = reference order forwards
    presentation: Presentation
    forward_class: int = 0  # 0: class of vertex 1 reads forwards
    rule: str = "slot"

    def rotation_system(self) -> RotationSystem:
        return RotationSystem.from_mask(self.graph, self.orientation)


@dataclass(frozen=True)
class Colouring:
    problem: ColouringProblem
    assignment: tuple[TriangleUse, ...]  # index v-1
    labels: tuple[int, ...]  # per edge id

    def triangles_used(self) -> set[int]:
        return {u.triangle for u in self.assignment}

    def key(self) -> tuple:
        return tuple((u.triangle, u.offset, u.reverse) for u in self.assignment)


class _Setup:
    """Per-problem tables shared by the search engines."""

    def __init__(self, p: ColouringProblem):
        g = p.graph
        self.g = g
        self.p = p
        rs = p.rotation_system()
        self.rot = {v: rs.rotation(v) for v in g.vertices()}
        a, _ = bipartition(g)
        self.reverse = {v: (v in a) == bool(p.forward_class) for v in g.vertices()}
        pres = p.presentation
        self.repeat = [pres.has_repeat(t) for t in range(len(pres.triangles))]
        self.readings = {
            rev: [(u, u.labels(pres)) for u in pres.uses() if u.reverse == rev] for rev in (False, True)
        }
        # readings indexed by the label they put at rotation position k
        self.by_pos = {
            rev: [{} for _ in range(3)] for rev in (False, True)
        }
        for rev in (False, True):
            for u, lab in self.readings[rev]:
                for k in range(3):
                    self.by_pos[rev][k].setdefault(lab[k], []).append((u, lab))
        self.order = _bfs_order(g)


def _bfs_order(g: Multigraph) -> list[int]:
    seen = {1}
    order = []
    queue = deque([1])
    while queue:
        v = queue.popleft()
        order.append(v)
        for w in g.neighbours(v):
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return order


def slot_of(use: TriangleUse, k: int) -> int:
    """Word position read at rotation position ``k``."""
    return (use.offset - k) % 3 if use.reverse else (use.offset + k) % 3


def search_colourings(
    problem: ColouringProblem,
    limit: int | None = None,
    allowed: Mapping[int, Iterable[int]] | None = None,
    seeds: Iterable[int] | None = None,
) -> list[Colouring]:
    """Enumerate colourings by backtracking in breadth-first vertex order.

    ``allowed`` restricts the triangle indices usable at given vertices.
    ``seeds`` restricts which of the first vertex's readings (indices into
    its 45 candidates) are explored, for splitting work.
    """
    s = _Setup(problem)
    g = s.g
    allowed_sets = {v: set(ts) for v, ts in (allowed or {}).items()}
    label = [0] * g.m
    assigned: dict[int, TriangleUse] = {}
    out: list[Colouring] = []
    seed_set = None if seeds is None else set(seeds)

    def candidates(v):
        rot = s.rot[v]
        rev = s.reverse[v]
        known = [(k, label[e]) for k, e in enumerate(rot) if label[e]]
        if not known:
            return s.readings[rev]
        k0, a0 = known[0]
        return [
            (u, lab)
            for u, lab in s.by_pos[rev][k0].get(a0, ())
            if all(lab[k] == a for k, a in known[1:])
        ]

    def compatible(v, u):
        if v in allowed_sets and u.triangle not in allowed_sets[v]:
            return False
        for k, e in enumerate(s.rot[v]):
            w = g.other_end(e, v)
            other = assigned.get(w)
            if other is None or other.triangle != u.triangle:
                continue
            if problem.rule == "triangle":
                if not s.repeat[u.triangle]:
                    return False
            else:
                kw = s.rot[w].index(e) if s.rot[w].count(e) == 1 else None
                if kw is not None and slot_of(other, kw) == slot_of(u, k):
                    return False
        return True

    def rec(i):
        if limit is not None and len(out) >= limit:
            return
        if i == len(s.order):
            out.append(
                Colouring(problem, tuple(assigned[v] for v in g.vertices()), tuple(label))
            )
            return
        v = s.order[i]
        rot = s.rot[v]
        cands = candidates(v)
        for idx, (u, lab) in enumerate(cands):
            if i == 0 and seed_set is not None and idx not in seed_set:
                continue
            if not compatible(v, u):
                continue
            fresh = []
            ok = True
            for k, e in enumerate(rot):
                if label[e] == 0:
                    label[e] = lab[k]
                    fresh.append(e)
                elif label[e] != lab[k]:
                    ok = False
                    break
            if ok:
                assigned[v] = u
                rec(i + 1)
                del assigned[v]
            for e in fresh:
                label[e] = 0

    rec(0)
    return out


def search_two_phase(
    graph: Multigraph,
    presentation: Presentation,
    masks: Iterable[int],
    forward_class: int = 0,
    rule: str = "slot",
) -> dict[int, list[Colouring]]:
    """Colour without fixing the orientation, then sort colourings by orientation.

    Phase one maps the three word positions of a triangle onto a vertex's
    edge-ends (reference order) in any of the six ways. Each way is read
    correctly by exactly one rotation at that vertex, so a partial labelling
    pins down part of an orientation mask; branches whose pinned bits match
    none of ``masks`` are dropped. Phase two attaches every complete
    labelling to the mask it pins and rebuilds the per-vertex readings.
    """
    g = graph
    masks = sorted({int(m) for m in masks})
    problems = {m: ColouringProblem(g, m, presentation, forward_class, rule) for m in masks}
    out: dict[int, list[Colouring]] = {m: [] for m in masks}
    if not masks:
        return out
    s = _Setup(problems[masks[0]])
    ends = {v: [eid for _, eid in g.incidence(v)] for v in g.vertices()}
    readings = [
        (t, perm, tuple(word[j] for j in perm))
        for t, word in enumerate(presentation.triangles)
        for perm in permutations(range(3))
    ]
    by_end: list[dict[int, list]] = [{} for _ in range(3)]
    for r in readings:
        for k in range(3):
            by_end[k].setdefault(r[2][k], []).append(r)
    label = [0] * g.m
    slot_at: dict[tuple[int, int], int] = {}  # (vertex, edge) -> word position
    tri: dict[int, int] = {}

    def clashes(v, t, perm):
        for k, e in enumerate(ends[v]):
            w = g.other_end(e, v)
            if tri.get(w) != t:
                continue
            if rule == "triangle":
                if not s.repeat[t]:
                    return True
            elif slot_at[(w, e)] == perm[k]:
                return True
        return False

    def finish(mask):
        uses = []
        rs = problems[mask].rotation_system()
        for v in g.vertices():
            first = rs.rotation(v)[0]
            uses.append(TriangleUse(tri[v], slot_at[(v, first)], s.reverse[v]))
        out[mask].append(Colouring(problems[mask], tuple(uses), tuple(label)))

    def rec(i, alive):
        if i == len(s.order):
            for m in alive:
                finish(m)
            return
        v = s.order[i]
        want = 2 if s.reverse[v] else 1
        bit = 1 << (v - 1)
        known = [(k, label[e]) for k, e in enumerate(ends[v]) if label[e]]
        cands = by_end[known[0][0]].get(known[0][1], ()) if known else readings
        for t, perm, lab in cands:
            if any(lab[k] != x for k, x in known) or clashes(v, t, perm):
                continue
            forward = (perm[1] - perm[0]) % 3 == want
            still = [m for m in alive if bool(m & bit) == forward]
            if not still:
                continue
            fresh = [e for e in ends[v] if label[e] == 0]
            for k, e in enumerate(ends[v]):
                label[e] = lab[k]
                slot_at[(v, e)] = perm[k]
            tri[v] = t
            rec(i + 1, still)
            del tri[v]
            for e in ends[v]:
                del slot_at[(v, e)]
            for e in fresh:
                label[e] = 0

    rec(0, masks)
    return {m: sorted(cs, key=Colouring.key) for m, cs in out.items()}


def complete_partial(
    graph: Multigraph,
    orientation: int,
    presentation: Presentation,
    partial: Mapping[int, int],
    forward_class: int = 0,
    rule: str = "slot",
) -> list[Colouring]:
    """All colourings that use triangle ``partial[v]`` at each listed vertex ``v``."""
    problem = ColouringProblem(graph, orientation, presentation, forward_class, rule)
    return search_colourings(problem, allowed={v: [t] for v, t in partial.items()})


def transfer_report(c: Colouring, others: Sequence[Presentation]) -> list[str]:
    """Names of presentations containing every triangle word ``c`` uses."""
    used = c.triangles_used()
    return [q.name for q in others if triangle_multiset_subset(used, c.problem.presentation, q)]


# -- certificates -----------------------------------------------------------------


@dataclass(frozen=True)
class ColouringCertificate:
    graph: Multigraph
    form: str  # hex canonical form of graph
    orientation: tuple[bool, ...]
    presentation_name: str
    words: tuple[tuple[int, int, int], ...]  # per vertex, canonical rotation
    offsets: tuple[int, ...]
    reverse: tuple[bool, ...]
    edge_labels: tuple[int, ...]  # per edge id
    forward_class: int = 0
    rule: str = "slot"

    @classmethod
    def from_colouring(cls, c: Colouring) -> "ColouringCertificate":
        p = c.problem
        pres = p.presentation
        words, offsets = [], []
        for u in c.assignment:
            word = pres.triangles[u.triangle]
            canon = canonical_rotation(word)
            shift = [word[k:] + word[:k] for k in range(3)].index(canon)
            words.append(canon)
            offsets.append((u.offset - shift) % 3)
        return cls(
            graph=p.graph,
            form=canonical_form(p.graph).hex(),
            orientation=p.rotation_system().orientation,
            presentation_name=pres.name,
            words=tuple(words),
            offsets=tuple(offsets),
            reverse=tuple(u.reverse for u in c.assignment),
            edge_labels=c.labels,
            forward_class=p.forward_class,
            rule=p.rule,
        )

    def dumps(self) -> str:
        lines = [
            "certificate 1",
            f"presentation {self.presentation_name}",
            f"form {self.form}",
            f"rule {self.rule}",
            f"forward-class {self.forward_class}",
            "orientation " + "".join("+" if b else "-" for b in self.orientation),
        ]
        lines.append(to_mgtext(self.graph).decode("utf-8").rstrip("\n"))
        for v in self.graph.vertices():
            i, j, k = self.words[v - 1]
            direction = "rev" if self.reverse[v - 1] else "fwd"
            lines.append(f"v {v} {i} {j} {k} {self.offsets[v - 1]} {direction}")
        for eid, (a, b) in enumerate(self.graph.edges):
            lines.append(f"l {eid} {a} {b} {self.edge_labels[eid]}")
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "ColouringCertificate":
        fields: dict[str, str] = {}
        mg_lines, vlines, llines = [], [], []
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            head, _, rest = line.partition(" ")
            if head in ("mg", "e"):
                mg_lines.append(line)
            elif head == "v":
                vlines.append(rest.split())
            elif head == "l":
                llines.append(rest.split())
            else:
                fields[head] = rest.strip()
        if fields.get("certificate") != "1":
            raise ValueError("not a version-1 colouring certificate")
        graph = next(iter_mgtext("\n".join(mg_lines)))
        n = graph.n
        words = [None] * n
        offsets = [0] * n
        reverse = [False] * n
        for parts in vlines:
            v = int(parts[0])
            words[v - 1] = tuple(int(x) for x in parts[1:4])
            offsets[v - 1] = int(parts[4])
            if parts[5] not in ("fwd", "rev"):
                raise ValueError(f"bad direction {parts[5]!r} at vertex {v}")
            reverse[v - 1] = parts[5] == "rev"
        if any(w is None for w in words):
            raise ValueError("certificate misses a vertex line")
        labels = [0] * graph.m
        for parts in llines:
            eid = int(parts[0])
            if tuple(int(x) for x in parts[1:3]) != graph.edges[eid]:
                raise ValueError(f"edge line {eid} does not match the graph")
            labels[eid] = int(parts[3])
        return cls(
            graph=graph,
            form=fields["form"],
            orientation=tuple(ch == "+" for ch in fields["orientation"]),
            presentation_name=fields["presentation"],
            words=tuple(words),
            offsets=tuple(offsets),
            reverse=tuple(reverse),
            edge_labels=tuple(labels),
            forward_class=int(fields.get("forward-class", "0")),
            rule=fields.get("rule", "slot"),
        )


# -- independent verification -------------------------------------------------------

REJECT_REASONS = ("graph", "octagon", "presentation", "vertex", "edge", "adjacency")


@dataclass(frozen=True)
class Verdict:
    ok: bool
    reason: str | None = None  # one of REJECT_REASONS
    where: str = ""
    detail: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return "accept"
        return f"reject {self.reason} at {self.where}: {self.detail}"


def _reject(reason: str, where: str, detail: str) -> Verdict:
    return Verdict(False, reason, where, detail)


def verify_colouring(cert: ColouringCertificate, presentation: Presentation | None = None) -> Verdict:
    """Check a certificate from scratch, sharing no constraint code with the search.

    Conditions, in order: cubic bipartite graph matching the recorded form;
    every face of the recorded rotation is an octagon and there are six of
    them per genus-2 budget; words are triangles of ``presentation`` when
    given; each vertex's reading spells its word in the direction its class
    prescribes; both ends of every edge agree with the edge's label;
    neighbours repeat a triangle only on distinct sides.
    """
    g = cert.graph
    n = g.n
    if len(cert.orientation) != n or len(cert.words) != n or len(cert.edge_labels) != g.m:
        return _reject("graph", "header", "field lengths do not match the graph")
    ends: dict[int, list[tuple[int, int]]] = {v: [] for v in range(1, n + 1)}
    for eid, (a, b) in enumerate(g.edges):
        ends[a].append((b, eid))
        ends[b].append((a, eid))
    for v, inc in ends.items():
        if len(inc) != 3:
            return _reject("graph", f"vertex {v}", f"degree {len(inc)}")
    side = {1: 0}
    stack = [1]
    while stack:
        v = stack.pop()
        for w, _ in ends[v]:
            if w not in side:
                side[w] = 1 - side[v]
                stack.append(w)
            elif side[w] == side[v]:
                return _reject("graph", f"edge {v}-{w}", "graph is not bipartite")
    if len(side) != n:
        return _reject("graph", "graph", "graph is not connected")
    if canonical_form(g).hex() != cert.form:
        return _reject("graph", "form", "canonical form does not match the edge list")

    # rotation at v: incident ends sorted by (neighbour, edge), reversed when the bit is clear
    rot = {}
    for v, inc in ends.items():
        order = [eid for _, eid in sorted(inc)]
        rot[v] = order if cert.orientation[v - 1] else [order[0], order[2], order[1]]
    seen = set()
    faces = 0
    for eid, (a, b) in enumerate(g.edges):
        for start in ((a, eid), (b, eid)):
            if start in seen:
                continue
            length = 0
            cur = start
            while cur not in seen:
                seen.add(cur)
                v, e = cur
                w = g.edges[e][0] if g.edges[e][1] == v else g.edges[e][1]
                r = rot[w]
                cur = (w, r[(r.index(e) + 1) % 3])
                length += 1
            if cur != start:
                return _reject("octagon", f"edge {eid}", "face tracing did not close")
            if length != 8:
                return _reject("octagon", f"edge {eid}", f"face of length {length}")
            faces += 1
    if g.n - g.m + faces != -2:
        return _reject("octagon", "surface", f"{faces} faces do not give genus 2")

    if presentation is not None:
        words = {canonical_rotation(t) for t in presentation.triangles}
        for v in range(1, n + 1):
            if cert.words[v - 1] not in words:
                return _reject("presentation", f"vertex {v}", f"{cert.words[v - 1]} is not a triangle")

    implied: dict[tuple[int, int], int] = {}
    for v in range(1, n + 1):
        word = cert.words[v - 1]
        off = cert.offsets[v - 1]
        if off not in (0, 1, 2):
            return _reject("vertex", f"vertex {v}", f"offset {off}")
        want_reverse = side[v] == 0 if cert.forward_class else side[v] == 1
        if cert.reverse[v - 1] != want_reverse:
            return _reject("vertex", f"vertex {v}", "reading direction contradicts the bipartition class")
        step = -1 if cert.reverse[v - 1] else 1
        for k, e in enumerate(rot[v]):
            implied[(v, e)] = word[(off + step * k) % 3]
    for eid, (a, b) in enumerate(g.edges):
        la, lb, stored = implied[(a, eid)], implied[(b, eid)], cert.edge_labels[eid]
        if la == lb == stored:
            continue
        if la == lb:
            return _reject("edge", f"edge {eid}", f"label {stored} but both ends read {la}")
        culprit = a if la != stored else b
        return _reject("vertex", f"vertex {culprit}", f"reads {implied[(culprit, eid)]} on edge {eid} labelled {stored}")

    for eid, (a, b) in enumerate(g.edges):
        if cert.words[a - 1] != cert.words[b - 1]:
            continue
        word = cert.words[a - 1]
        pos = []
        for v in (a, b):
            step = -1 if cert.reverse[v - 1] else 1
            pos.append((cert.offsets[v - 1] + step * rot[v].index(eid)) % 3)
        if cert.rule == "triangle":
            if len(set(word)) == 3:
                return _reject("adjacency", f"edge {eid}", f"both ends use {word}")
        elif pos[0] == pos[1]:
            return _reject("adjacency", f"edge {eid}", f"both ends use side {pos[0]} of {word}")
    return Verdict(True)


def find_numbering(c: Colouring, rows: Sequence[Sequence[int]]) -> dict[int, int] | None:
    """A vertex renumbering under which ``c`` lists as ``rows``.

    Row ``i`` holds the labels at new vertex ``i + 1`` ordered by ascending
    new number of the neighbour across each edge. Returns old -> new.
    """
    g = c.problem.graph
    if len(rows) != g.n:
        return None
    at = {v: sorted((w, c.labels[e]) for w, e in g.incidence(v)) for v in g.vertices()}
    bag = {v: sorted(x for _, x in at[v]) for v in g.vertices()}
    options = [[v for v in g.vertices() if bag[v] == sorted(row)] for row in rows]
    used: set[int] = set()
    new_of: dict[int, int] = {}

    def fits(v, row):
        # parallel edges reach the same neighbour, so their labels may come in either order
        listed = sorted(at[v], key=lambda p: new_of[p[0]])
        k = 0
        for _, group in groupby(listed, key=lambda p: p[0]):
            labs = sorted(x for _, x in group)
            if labs != sorted(row[k : k + len(labs)]):
                return False
            k += len(labs)
        return True

    def rec(i):
        if i == len(rows):
            return all(fits(v, rows[new_of[v] - 1]) for v in g.vertices())
        for v in options[i]:
            if v in used:
                continue
            used.add(v)
            new_of[v] = i + 1
            if rec(i + 1):
                return True
            used.discard(v)
            del new_of[v]
        return False

    return dict(new_of) if rec(0) else None
