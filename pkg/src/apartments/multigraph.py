"""Undirected multigraphs on vertices 1..n, with canonical forms and file I/O.

Edges are stored sorted lexicographically; an edge's identifier is its index
in that order, so parallel edges get distinct, stable identifiers.
"""

from __future__ import annotations

from collections import Counter, deque
from typing import Iterable, Iterator, Sequence


class GraphError(ValueError):
    """Raised for structurally invalid graphs."""


class ParseError(ValueError):
    """Raised for malformed graph6 / multigraph-text input."""

    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class NotBipartite(Exception):
    """Carries an odd closed walk witnessing non-bipartiteness."""

    def __init__(self, walk: list[int]):
        self.walk = walk
        super().__init__(f"odd closed walk {walk}")


NO_CYCLE = 0


class Multigraph:
    """Immutable loopless multigraph with 1-indexed vertices."""

    __slots__ = ("n", "edges", "_incidence", "_mult", "_hash")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 1:
            raise GraphError("vertex count must be positive")
        normalized = []
        for u, v in edges:
            u, v = int(u), int(v)
            if u == v:
                raise GraphError(f"loop at vertex {u}")
            if not (1 <= u <= n and 1 <= v <= n):
                raise GraphError(f"edge ({u}, {v}) out of range 1..{n}")
            normalized.append((u, v) if u < v else (v, u))
        normalized.sort()
        self.n = n
        self.edges: tuple[tuple[int, int], ...] = tuple(normalized)
        incidence: list[list[tuple[int, int]]] = [[] for _ in range(n + 1)]
        for eid, (u, v) in enumerate(self.edges):
            incidence[u].append((v, eid))
            incidence[v].append((u, eid))
        for ends in incidence:
            ends.sort()
        self._incidence = tuple(tuple(ends) for ends in incidence)
        self._mult = Counter(self.edges)
        self._hash = None

    # -- basic structure -------------------------------------------------

    @property
    def m(self) -> int:
        return len(self.edges)

    def vertices(self) -> range:
        return range(1, self.n + 1)

    def incidence(self, v: int) -> tuple[tuple[int, int], ...]:
        """Edge-ends at ``v`` as (neighbour, edge id), in reference order."""
        return self._incidence[v]

    def degree(self, v: int) -> int:
        return len(self._incidence[v])

    def neighbours(self, v: int) -> list[int]:
        return sorted({w for w, _ in self._incidence[v]})

    def multiplicity(self, u: int, v: int) -> int:
        return self._mult.get((u, v) if u < v else (v, u), 0)

    def double_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, k in self._mult.items() if k >= 2)

    def is_simple(self) -> bool:
        return all(k == 1 for k in self._mult.values())

    def other_end(self, eid: int, v: int) -> int:
        u, w = self.edges[eid]
        return w if u == v else u

    def adjacency(self) -> list[list[int]]:
        """0-indexed adjacency matrix with multiplicities."""
        a = [[0] * self.n for _ in range(self.n)]
        for u, v in self.edges:
            a[u - 1][v - 1] += 1
            a[v - 1][u - 1] += 1
        return a

    def relabel(self, perm: Sequence[int] | dict[int, int]) -> "Multigraph":
        """Return the graph with vertex v renamed to perm[v]."""
        return Multigraph(self.n, ((perm[u], perm[v]) for u, v in self.edges))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Multigraph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.edges))
        return self._hash

    def __repr__(self) -> str:
        return f"Multigraph(n={self.n}, m={self.m})"


# -- elementary invariants --------------------------------------------------


def degree_sequence(g: Multigraph) -> list[int]:
    return sorted((g.degree(v) for v in g.vertices()), reverse=True)


def components(g: Multigraph) -> list[list[int]]:
    seen = [False] * (g.n + 1)
    comps = []
    for s in g.vertices():
        if seen[s]:
            continue
        seen[s] = True
        comp, queue = [], deque([s])
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w, _ in g.incidence(v):
                if not seen[w]:
                    seen[w] = True
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


def is_connected(g: Multigraph) -> bool:
    return len(components(g)) == 1


def bipartition(g: Multigraph) -> tuple[frozenset[int], frozenset[int]]:
    """2-colour a connected graph by BFS.

    Returns ``(A, B)`` with vertex 1 in ``A``. Raises :class:`NotBipartite`
    carrying an odd closed walk, or :class:`GraphError` if disconnected.
    """
    if not is_connected(g):
        raise GraphError("bipartition requires a connected graph")
    side = {1: 0}
    parent = {1: None}
    queue = deque([1])
    while queue:
        v = queue.popleft()
        for w, _ in g.incidence(v):
            if w not in side:
                side[w] = 1 - side[v]
                parent[w] = v
                queue.append(w)
            elif side[w] == side[v]:
                raise NotBipartite(_odd_walk(parent, v, w))
    a = frozenset(v for v, s in side.items() if s == 0)
    b = frozenset(v for v, s in side.items() if s == 1)
    return a, b


def _odd_walk(parent: dict, v: int, w: int) -> list[int]:
    def to_root(x):
        out = []
        while x is not None:
            out.append(x)
            x = parent[x]
        return out

    pv, pw = to_root(v), to_root(w)
    on_w = set(pw)
    i = next(i for i, x in enumerate(pv) if x in on_w)
    j = pw.index(pv[i])
    # v .. lca .. w, closed by the edge w-v
    return pv[: i + 1] + pw[:j][::-1] + [v]


def is_bipartite(g: Multigraph) -> bool:
    try:
        for comp in components(g):
            if len(comp) > 1:
                bipartition(induced(g, comp))
    except NotBipartite:
        return False
    return True


def induced(g: Multigraph, verts: Sequence[int]) -> Multigraph:
    index = {v: i + 1 for i, v in enumerate(sorted(verts))}
    return Multigraph(
        len(index), ((index[u], index[v]) for u, v in g.edges if u in index and v in index)
    )


def girth(g: Multigraph) -> int:
    """Shortest cycle length (2 for a parallel pair), or NO_CYCLE for forests."""
    if not g.is_simple():
        return 2
    best = None
    for s in g.vertices():
        dist = {s: 0}
        parent_edge = {s: -1}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            for w, eid in g.incidence(v):
                if eid == parent_edge[v]:
                    continue
                if w in dist:
                    length = dist[v] + dist[w] + 1
                    if best is None or length < best:
                        best = length
                else:
                    dist[w] = dist[v] + 1
                    parent_edge[w] = eid
                    queue.append(w)
    return NO_CYCLE if best is None else best


# -- canonical form ----------------------------------------------------------


def _row_candidates(adj, v, pos, assigned, r, n):
    """Best possible row for vertex ``v`` placed at position ``r``.

    Returns the fixed prefix (columns r+1 .. len(assigned)-1) and the
    unassigned neighbours grouped by multiplicity, largest first.
    """
    fixed = [adj[v][assigned[c]] for c in range(r + 1, len(assigned))]
    groups: dict[int, list[int]] = {}
    for w in range(n):
        k = adj[v][w]
        if k and pos[w] < 0:
            groups.setdefault(k, []).append(w)
    ordered = sorted(groups.items(), reverse=True)
    return fixed, ordered


def _orderings(groups):
    """All placements of new neighbours: permutations within equal-multiplicity groups."""
    from itertools import permutations, product

    per_group = [list(permutations(ws)) for _, ws in groups]
    for combo in product(*per_group):
        order = []
        for ws in combo:
            order.extend(ws)
        yield order


def _new_tail(groups):
    tail = []
    for k, ws in groups:
        tail.extend([k] * len(ws))
    return tail


def _lexmax_connected(adj: list[list[int]], starts: Sequence[int]) -> list[tuple[int, ...]]:
    """Lexicographically greatest row-major upper triangle over BFS relabellings.

    ``adj`` is a 0-indexed adjacency matrix of a connected multigraph. Only
    greedy breadth-first orders can attain the maximum, so the search branches
    over the start vertex and the order of equal-multiplicity new neighbours.
    """
    n = len(adj)
    best: list[tuple[int, ...]] = [()] * n
    pos = [-1] * n
    assigned: list[int] = []

    def row_at(r):
        v = assigned[r]
        fixed, groups = _row_candidates(adj, v, pos, assigned, r, n)
        tail = _new_tail(groups)
        row = fixed + tail
        row += [0] * (n - 1 - r - len(row))
        return tuple(row), groups

    def dfs(r):
        if r == n:
            return
        row, groups = row_at(r)
        if row < best[r]:
            return
        if row > best[r]:
            best[r] = row
            for i in range(r + 1, n):
                best[i] = ()
        if not groups:
            dfs(r + 1)
            return
        for order in _orderings(groups):
            for w in order:
                pos[w] = len(assigned)
                assigned.append(w)
            dfs(r + 1)
            for w in order:
                pos[w] = -1
                assigned.pop()

    for s in starts:
        pos[s] = 0
        assigned.append(s)
        dfs(0)
        assigned.pop()
        pos[s] = -1
    return best


def _refined_cells(adj: list[list[int]]) -> list[int]:
    """Iterated neighbourhood refinement; returns canonical colour per vertex."""
    n = len(adj)
    colour = [sum(row) for row in adj]
    while True:
        sigs = [
            (colour[v], tuple(sorted((adj[v][w], colour[w]) for w in range(n) if adj[v][w])))
            for v in range(n)
        ]
        table = {s: i for i, s in enumerate(sorted(set(sigs)))}
        new = [table[s] for s in sigs]
        if len(set(new)) == len(set(colour)):
            return new
        colour = new


def _start_cell(adj: list[list[int]]) -> list[int]:
    """Isomorphism-invariant set of start vertices for the lex-max search."""
    colour = _refined_cells(adj)
    n = len(adj)
    # second-order invariant: closed walks of length 4 and 6 through each vertex
    sq = [[sum(adj[i][k] * adj[k][j] for k in range(n)) for j in range(n)] for i in range(n)]
    w4 = [sum(sq[i][k] * sq[k][i] for k in range(n)) for i in range(n)]
    w6 = [sum(sq[i][k] * sum(sq[k][j] * sq[j][i] for j in range(n)) for k in range(n)) for i in range(n)]
    key = [(colour[v], w4[v], w6[v]) for v in range(n)]
    cells: dict[tuple, list[int]] = {}
    for v in range(n):
        cells.setdefault(key[v], []).append(v)
    # smallest cell, ties broken by the largest invariant key
    _, chosen = min(cells.items(), key=lambda kv: (len(kv[1]), [-x for x in kv[0]]))
    return chosen


def _encode(n: int, rows: Sequence[Sequence[int]]) -> bytes:
    body = bytes(x for row in rows for x in row)
    return n.to_bytes(2, "big") + body


def canonical_form(g: Multigraph) -> bytes:
    """Isomorphism-invariant byte encoding of ``g`` (multiplicities included)."""
    comps = components(g)
    adj = g.adjacency()
    if len(comps) == 1:
        rows = _lexmax_connected(adj, _start_cell(adj))
        return _encode(g.n, rows)
    blocks = []
    for comp in comps:
        idx = [v - 1 for v in comp]
        sub = [[adj[i][j] for j in idx] for i in idx]
        rows = _lexmax_connected(sub, _start_cell(sub)) if len(sub) > 1 else [()]
        blocks.append((len(sub), tuple(rows)))
    blocks.sort(reverse=True)
    # block-diagonal assembly of the sorted components
    full: list[list[int]] = []
    offset = 0
    for size, rows in blocks:
        for r, row in enumerate(rows):
            full.append(list(row) + [0] * (g.n - offset - size))
        offset += size
    return _encode(g.n, full)


def canonical_graph(g: Multigraph) -> Multigraph:
    """The graph whose adjacency is spelled by ``canonical_form(g)``."""
    return from_canonical_form(canonical_form(g))


def from_canonical_form(form: bytes) -> Multigraph:
    n = int.from_bytes(form[:2], "big")
    body = form[2:]
    edges = []
    k = 0
    for i in range(n):
        for j in range(i + 1, n):
            edges.extend([(i + 1, j + 1)] * body[k])
            k += 1
    return Multigraph(n, edges)


def is_isomorphic(g: Multigraph, h: Multigraph) -> bool:
    return g.n == h.n and g.m == h.m and canonical_form(g) == canonical_form(h)


def is_lexmax_canonical(adj: list[list[int]], saturated: int | None = None) -> bool:
    """Whether ``adj`` is its own lex-max BFS relabelling.

    With ``saturated = k`` only rows 0..k-1 are trusted; the test then answers
    False only when some relabelling beats ``adj`` for every completion.
    """
    n = len(adj)
    k = n if saturated is None else saturated
    target = []
    for r in range(k):
        target.append(tuple(adj[r][r + 1 :]))
    pos = [-1] * n
    assigned: list[int] = []

    def dfs(r):
        # returns True when a strictly greater relabelling was found
        if r >= k or r >= len(assigned):
            return False
        v = assigned[r]
        if v >= k:
            return False
        fixed, groups = _row_candidates(adj, v, pos, assigned, r, n)
        row = fixed + _new_tail(groups)
        row += [0] * (n - 1 - r - len(row))
        row = tuple(row)
        if row < target[r]:
            return False
        if row > target[r]:
            return True
        if not groups:
            return dfs(r + 1)
        for order in _orderings(groups):
            for w in order:
                pos[w] = len(assigned)
                assigned.append(w)
            hit = dfs(r + 1)
            for w in order:
                pos[w] = -1
                assigned.pop()
            if hit:
                return True
        return False

    for s in range(k):
        pos[s] = 0
        assigned.append(s)
        hit = dfs(0)
        assigned.pop()
        pos[s] = -1
        if hit:
            return False
    return True


# -- file formats ------------------------------------------------------------


def _g6_size(n: int) -> bytes:
    if n <= 62:
        return bytes([n + 63])
    if n <= 258047:
        return bytes([126, (n >> 12) + 63, ((n >> 6) & 63) + 63, (n & 63) + 63])
    raise GraphError("graph too large for graph6")


def to_graph6(g: Multigraph) -> bytes:
    if not g.is_simple():
        raise GraphError("graph6 cannot encode parallel edges")
    bits = []
    for j in range(1, g.n):
        for i in range(j):
            bits.append(1 if g.multiplicity(i + 1, j + 1) else 0)
    while len(bits) % 6:
        bits.append(0)
    body = bytes(
        63 + int("".join(map(str, bits[i : i + 6])), 2) for i in range(0, len(bits), 6)
    )
    return _g6_size(g.n) + body


def from_graph6(data: bytes | str) -> Multigraph:
    if isinstance(data, str):
        data = data.encode("ascii")
    start = 0
    if data.startswith(b">>graph6<<"):
        start = 10
    data = data.rstrip(b"\r\n")
    for i in range(start, len(data)):
        if not 63 <= data[i] <= 126:
            raise ParseError("byte outside graph6 range 63..126", i)
    if len(data) <= start:
        raise ParseError("empty graph6 string", start)
    if data[start] != 126:
        n, p = data[start] - 63, start + 1
    else:
        if len(data) < start + 4:
            raise ParseError("truncated size field", start)
        if data[start + 1] == 126:
            raise ParseError("8-byte size form unsupported", start)
        n = ((data[start + 1] - 63) << 12) | ((data[start + 2] - 63) << 6) | (data[start + 3] - 63)
        p = start + 4
    need = (n * (n - 1) // 2 + 5) // 6
    if len(data) - p != need:
        raise ParseError(f"expected {need} body bytes, found {len(data) - p}", p)
    bits = []
    for b in data[p:]:
        x = b - 63
        bits.extend((x >> s) & 1 for s in range(5, -1, -1))
    edges = []
    k = 0
    for j in range(1, n):
        for i in range(j):
            if bits[k]:
                edges.append((i + 1, j + 1))
            k += 1
    return Multigraph(max(n, 1), edges) if n else _empty_zero()


def _empty_zero():
    raise ParseError("graph6 with zero vertices is not representable", 0)


def to_mgtext(g: Multigraph) -> bytes:
    lines = [f"mg {g.n} {g.m}"]
    lines.extend(f"e {u} {v}" for u, v in g.edges)
    return ("\n".join(lines) + "\n").encode("utf-8")


def iter_mgtext(data: bytes | str) -> Iterator[Multigraph]:
    """Parse concatenated multigraph-text records; empty input yields nothing."""
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data
    offset = 0
    header = None
    edges: list[tuple[int, int]] = []
    header_offset = 0

    def finish():
        n, m = header
        if len(edges) != m:
            raise ParseError(f"header declares {m} edges, found {len(edges)}", header_offset)
        try:
            return Multigraph(n, edges)
        except GraphError as exc:
            raise ParseError(str(exc), header_offset) from None

    for raw in text.splitlines(keepends=True):
        line_offset = offset
        offset += len(raw.encode("utf-8"))
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "mg":
            if header is not None:
                yield finish()
            if len(parts) != 3 or not all(p.isdigit() for p in parts[1:]):
                raise ParseError("malformed header, expected 'mg <n> <m>'", line_offset)
            header = (int(parts[1]), int(parts[2]))
            header_offset = line_offset
            edges = []
        elif parts[0] == "e":
            if header is None:
                raise ParseError("edge line before 'mg' header", line_offset)
            if len(parts) != 3 or not all(p.isdigit() for p in parts[1:]):
                raise ParseError("malformed edge line, expected 'e <u> <v>'", line_offset)
            u, v = int(parts[1]), int(parts[2])
            if u == v:
                raise ParseError(f"loop at vertex {u}", line_offset)
            if not (1 <= u <= header[0] and 1 <= v <= header[0]):
                raise ParseError(f"edge ({u}, {v}) outside 1..{header[0]}", line_offset)
            edges.append((u, v))
        else:
            raise ParseError(f"unknown record type {parts[0]!r}", line_offset)
    if header is not None:
        yield finish()


def from_mgtext(data: bytes | str) -> Multigraph:
    graphs = list(iter_mgtext(data))
    if len(graphs) != 1:
        raise ParseError(f"expected one graph, found {len(graphs)}", 0)
    return graphs[0]


def write_graph(fmt: str, g: Multigraph) -> bytes:
    if fmt == "graph6":
        return to_graph6(g)
    if fmt in ("multigraph-text", "mgtext"):
        return to_mgtext(g)
    raise ValueError(f"unknown format {fmt!r}")


def read_graph(fmt: str, data: bytes | str) -> Multigraph:
    if fmt == "graph6":
        return from_graph6(data)
    if fmt in ("multigraph-text", "mgtext"):
        return from_mgtext(data)
    raise ValueError(f"unknown format {fmt!r}")


def write_graphs(path, graphs: Iterable[Multigraph], fmt: str = "multigraph-text") -> None:
    with open(path, "wb") as fh:
        for g in graphs:
            data = write_graph(fmt, g)
            fh.write(data if fmt != "graph6" else data + b"\n")


def read_graphs(path) -> list[Multigraph]:
    """Read a file of graph6 lines or multigraph-text records (auto-detected)."""
    with open(path, "rb") as fh:
        data = fh.read()
    stripped = data.lstrip()
    if stripped.startswith(b"mg") or stripped.startswith(b"#"):
        return list(iter_mgtext(data))
    return [from_graph6(line) for line in data.splitlines() if line.strip()]
