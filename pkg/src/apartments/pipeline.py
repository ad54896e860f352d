"""End-to-end search: generate, lift, find octagon faces, colour, report.

Stages run one after another; inside a stage, independent work items go to a
bounded process pool and results are merged in input order, so the report
does not depend on the worker count. Stage outputs are cached on disk under
a key derived from the stage name and its parameters.
"""

from __future__ import annotations

import hashlib
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import __version__
from .colouring import (
    ColouringCertificate,
    ColouringProblem,
    search_colourings,
    search_two_phase,
    verify_colouring,
)
from .enumerate import gen_cubic_simple, gen_deg23_bipartite, lift_double_edges
from .multigraph import Multigraph, canonical_form, is_bipartite, iter_mgtext, to_mgtext
from .octagons import (
    dfs_octagon_sets,
    double_edge_orientation_filter,
    identify_named_graph,
    neighbour_sequence_count,
    orientation_octagon_sets,
    surface_budget,
)
from .presentations import Presentation, load_presentation, triangle_multiset_subset

log = logging.getLogger(__name__)

CACHE_ENV = "APARTMENTS_CACHE"
METHODS = ("orientation", "dfs", "both")
ENGINES = ("backtrack", "two-phase")
FIRST_VERTEX_SEEDS = 45  # 15 triangles x 3 rotations, direction fixed by the class


@dataclass(frozen=True)
class PipelineConfig:
    genus: int = 2
    double_edges: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6)
    presentations: tuple[str, ...] = ("T1", "T3", "T9", "T21")
    method: str = "orientation"
    engine: str = "backtrack"
    jobs: int = 1
    cache_dir: Path | None = None
    out_dir: Path | None = None

    def __post_init__(self):
        if self.genus < 2:
            raise ValueError("genus must be at least 2: lower genus leaves no room for octagons")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.jobs < 1:
            raise ValueError("jobs must be positive")

    @property
    def vertices(self) -> int:
        return surface_budget(self.genus).vertices

    def resolved_cache(self) -> Path | None:
        if self.cache_dir is not None:
            return Path(self.cache_dir)
        env = os.environ.get(CACHE_ENV)
        return Path(env) if env else None


# -- stage cache ---------------------------------------------------------------------


class StageCache:
    """Content-addressed store: one file per (stage, parameters), body guarded by a digest."""

    def __init__(self, root: Path | None):
        self.root = root

    @staticmethod
    def key(stage: str, params: str) -> str:
        return hashlib.sha256(f"{__version__}\n{stage}\n{params}".encode()).hexdigest()[:32]

    def path(self, stage: str, params: str) -> Path | None:
        if self.root is None:
            return None
        return self.root / stage / f"{self.key(stage, params)}.txt"

    def get(self, stage: str, params: str) -> bytes | None:
        path = self.path(stage, params)
        if path is None or not path.exists():
            return None
        raw = path.read_bytes()
        head, _, body = raw.partition(b"\n")
        if head != b"sha256 " + hashlib.sha256(body).hexdigest().encode():
            log.warning("cache entry %s failed its digest check; recomputing", path)
            return None
        return body

    def put(self, stage: str, params: str, body: bytes) -> None:
        path = self.path(stage, params)
        if path is None:
            return
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".tmp")
        tmp.write_bytes(b"sha256 " + hashlib.sha256(body).hexdigest().encode() + b"\n" + body)
        tmp.replace(path)

    def fetch(self, stage: str, params: str, compute: Callable[[], bytes]) -> bytes:
        body = self.get(stage, params)
        if body is None:
            body = compute()
            self.put(stage, params, body)
        return body


def stage_cache(cache: StageCache, stage: str, params: str) -> bytes | None:
    """Cached bytes for a stage, or None on a miss or digest mismatch."""
    return cache.get(stage, params)


# -- workers (module level so they pickle) -----------------------------------------


def _generate_item(item: tuple) -> bytes:
    kind, n, m = item
    graphs = gen_cubic_simple(n) if kind == "cubic" else gen_deg23_bipartite(n, m)
    return b"".join(to_mgtext(g) for g in graphs)


def _octagon_item(item: tuple) -> str:
    text, genus, method = item
    g = next(iter_mgtext(text))
    sets = orientation_octagon_sets(g, genus)
    kept = double_edge_orientation_filter(g, sets)
    fields = [
        f"masks {len(sets)}",
        f"kept {' '.join(str(s.orientation) for s in kept) or '-'}",
    ]
    if method in ("dfs", "both"):
        dfs = dfs_octagon_sets(g, genus)
        fields.append(f"dfs {len(dfs)}")
        fields.append(f"dfs_kept {len(double_edge_orientation_filter(g, dfs))}")
    if kept:
        fields.append(f"sets {neighbour_sequence_count(g)}")
    return "; ".join(fields)


def _colour_item(item: tuple) -> tuple[int, str]:
    text, mask, pres, engine = item
    g = next(iter_mgtext(text))
    problem = ColouringProblem(g, mask, pres)
    if engine == "two-phase":
        found = search_two_phase(g, pres, [mask])[mask]
    else:
        found = search_colourings(problem)
    first = ColouringCertificate.from_colouring(found[0]).dumps() if found else ""
    return len(found), first


def _pool_map(fn, items: Sequence, jobs: int) -> list:
    if jobs == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(jobs, len(items))) as pool:
        return list(pool.map(fn, items, chunksize=1))


# -- verdicts --------------------------------------------------------------------------


@dataclass
class Candidate:
    name: str
    form: str
    double_edges: int
    graph: Multigraph
    masks: tuple[int, ...]
    set_count: int
    dfs_sets: int | None = None


@dataclass
class GraphRow:
    name: str
    form: str
    octagon_sets: int
    searched: int  # orientation assignments x first-vertex seeds
    colourings: int
    certificate: str | None = None
    listing: tuple[str, ...] = ()
    also_in: tuple[str, ...] = ()


@dataclass
class PresentationVerdict:
    name: str
    rows: list[GraphRow] = field(default_factory=list)
    error: str | None = None

    @property
    def found(self) -> bool:
        return any(r.colourings for r in self.rows)


@dataclass
class VerdictTable:
    genus: int
    stats: list[tuple[str, str]]
    candidates: list[Candidate]
    verdicts: list[PresentationVerdict]

    @property
    def any_found(self) -> bool:
        return any(v.found for v in self.verdicts)


# -- stages ----------------------------------------------------------------------------


def _stage_generate(cfg: PipelineConfig, cache: StageCache) -> dict[int, tuple[int, list[Multigraph]]]:
    n = cfg.vertices
    items = [("cubic", n, 3 * n // 2)] + [
        ("deg23", n, 3 * n // 2 - d) for d in cfg.double_edges if d > 0
    ]
    raw = {it: cache.get("generate", repr(it)) for it in items}
    todo = [it for it in items if raw[it] is None]
    for it, body in zip(todo, _pool_map(_generate_item, todo, cfg.jobs)):
        cache.put("generate", repr(it), body)
        raw[it] = body
    out: dict[int, tuple[int, list[Multigraph]]] = {}
    cubic = list(iter_mgtext(raw[items[0]]))
    out[-1] = (len(cubic), cubic)
    for d in cfg.double_edges:
        if d == 0:
            bip = [g for g in cubic if is_bipartite(g)]
            out[0] = (len(bip), bip)
            continue
        pre = list(iter_mgtext(raw[("deg23", n, 3 * n // 2 - d)]))
        lifted: dict[bytes, Multigraph] = {}
        for g in pre:
            h = lift_double_edges(g)
            if h is not None:
                lifted.setdefault(canonical_form(h), h)
        out[d] = (len(pre), [lifted[k] for k in sorted(lifted)])
    return out


def _stage_octagons(cfg: PipelineConfig, cache: StageCache, graphs: list[tuple[int, Multigraph]]) -> list[Candidate]:
    texts = [to_mgtext(g) for _, g in graphs]
    params = [f"{cfg.genus} {cfg.method}\n".encode() + t for t in texts]
    results: list[str | None] = [
        None if (b := cache.get("octagons", p.decode())) is None else b.decode() for p in params
    ]
    todo = [i for i, r in enumerate(results) if r is None]
    fresh = _pool_map(_octagon_item, [(texts[i], cfg.genus, cfg.method) for i in todo], cfg.jobs)
    for i, r in zip(todo, fresh):
        results[i] = r
        cache.put("octagons", params[i].decode(), r.encode())
    candidates = []
    for (d, g), line in zip(graphs, results):
        info = dict(part.split(" ", 1) for part in line.split("; "))
        if info["kept"] == "-":
            continue
        masks = tuple(int(x) for x in info["kept"].split())
        form = canonical_form(g).hex()
        name = identify_named_graph(g) or f"G{d}_{form[-12:]}"
        dfs = int(info["dfs"]) if "dfs" in info else None
        candidates.append(Candidate(name, form, d, g, masks, int(info["sets"]), dfs))
    candidates.sort(key=lambda c: (c.double_edges, c.form))
    return candidates


def _stage_colour(
    cfg: PipelineConfig,
    cache: StageCache,
    candidates: list[Candidate],
    presentations: list[tuple[str, Presentation | None, str | None]],
) -> list[PresentationVerdict]:
    items, where = [], []
    for pi, (_, pres, _) in enumerate(presentations):
        if pres is None:
            continue
        for ci, c in enumerate(candidates):
            text = to_mgtext(c.graph)
            for mask in c.masks:
                items.append((text, mask, pres, cfg.engine))
                where.append((pi, ci))
    keys = [f"{it[3]} {it[1]}\n{it[2].serialize()}{it[0].decode()}" for it in items]
    results: list[tuple[int, str] | None] = []
    for k in keys:
        body = cache.get("colour", k)
        if body is None:
            results.append(None)
        else:
            count, _, cert = body.decode().partition("\n")
            results.append((int(count), cert))
    todo = [i for i, r in enumerate(results) if r is None]
    for i, r in zip(todo, _pool_map(_colour_item, [items[i] for i in todo], cfg.jobs)):
        results[i] = r
        cache.put("colour", keys[i], f"{r[0]}\n{r[1]}".encode())

    others = [p for _, p, _ in presentations if p is not None]
    verdicts = []
    for pi, (label, pres, error) in enumerate(presentations):
        v = PresentationVerdict(label, error=error)
        if pres is not None:
            for ci, c in enumerate(candidates):
                mine = [results[i] for i, w in enumerate(where) if w == (pi, ci)]
                total = sum(r[0] for r in mine)
                row = GraphRow(c.name, c.form, c.set_count, len(c.masks) * FIRST_VERTEX_SEEDS, total)
                cert_text = next((r[1] for r in mine if r[0]), "")
                if cert_text:
                    row = _attach_certificate(cfg, row, label, cert_text, pres, others)
                v.rows.append(row)
        verdicts.append(v)
    return verdicts


def _attach_certificate(cfg, row, label, cert_text, pres, others):
    cert = ColouringCertificate.loads(cert_text)
    verdict = verify_colouring(cert, pres)
    if not verdict.ok:
        raise RuntimeError(f"search produced a certificate the verifier rejects: {verdict}")
    rel = f"certificates/{label}_{row.name}.cert"
    if cfg.out_dir is not None:
        path = Path(cfg.out_dir) / rel
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(cert_text, encoding="utf-8")
    listing = tuple(
        f"{v}: ({', '.join(f'x{x}' for x in _reading(cert, v))})" for v in cert.graph.vertices()
    )
    used = {pres.find_word(w) for w in cert.words}
    also = tuple(q.name for q in others if q.name != pres.name and triangle_multiset_subset(used, pres, q))
    return GraphRow(row.name, row.form, row.octagon_sets, row.searched, row.colourings, rel, listing, also)


def _reading(cert: ColouringCertificate, v: int) -> tuple[int, ...]:
    """Labels at ``v`` ordered by ascending neighbour number."""
    g = cert.graph
    return tuple(cert.edge_labels[e] for _, e in g.incidence(v))


def run_pipeline(cfg: PipelineConfig, progress: Callable[[str], None] | None = None) -> VerdictTable:
    say = progress or (lambda msg: log.info(msg))
    cache = StageCache(cfg.resolved_cache())
    say("generating candidate graphs")
    gen = _stage_generate(cfg, cache)
    stats = [("cubic", str(gen[-1][0]))]
    pool: list[tuple[int, Multigraph]] = []
    for d in cfg.double_edges:
        pre, graphs = gen[d]
        if d == 0:
            stats.append(("bipartite", str(pre)))
        else:
            stats.append((f"prelift.{d}", str(pre)))
        stats.append((f"lifted.{d}", str(len(graphs))))
        pool.extend((d, g) for g in graphs)
    say(f"searching octagon faces on {len(pool)} graphs")
    candidates = _stage_octagons(cfg, cache, pool)
    for d in cfg.double_edges:
        stats.append((f"survivors.{d}", str(sum(c.double_edges == d for c in candidates))))
    presentations = []
    for spec in cfg.presentations:
        try:
            pres = load_presentation(spec)
            presentations.append((pres.name, pres, None))
        except (OSError, ValueError, KeyError) as exc:
            presentations.append((spec, None, str(exc)))
    say(f"colouring {len(candidates)} candidates with {len(presentations)} presentations")
    verdicts = _stage_colour(cfg, cache, candidates, presentations)
    return VerdictTable(cfg.genus, stats, candidates, verdicts)


# -- reports ---------------------------------------------------------------------------


def _records(v: VerdictTable) -> Iterable[tuple[str, str]]:
    yield "report", "apartments"
    yield "genus", str(v.genus)
    yield from v.stats
    yield "candidates", str(len(v.candidates))
    for c in v.candidates:
        extra = f" dfs={c.dfs_sets}" if c.dfs_sets is not None else ""
        yield "candidate", (
            f"{c.name} double_edges={c.double_edges} assignments={len(c.masks)} sets={c.set_count}{extra} form={c.form}"
        )
    for p in v.verdicts:
        if p.error is not None:
            yield "presentation", f"{p.name} error={p.error}"
            continue
        yield "presentation", f"{p.name} verdict={'found' if p.found else 'none'}"
        for r in p.rows:
            line = f"{p.name} {r.name} sets={r.octagon_sets} searched={r.searched} colourings={r.colourings}"
            if r.certificate:
                line += f" certificate={r.certificate}"
            if r.also_in:
                line += f" also_in={','.join(r.also_in)}"
            yield "row", line
            for entry in r.listing:
                yield "vertex", f"{p.name} {r.name} {entry}"


def emit_report(v: VerdictTable, fmt: str = "structured") -> bytes:
    """Render the verdict table as ``structured`` key: value lines or aligned ``text``."""
    if fmt == "structured":
        return "".join(f"{k}: {val}\n" for k, val in _records(v)).encode("utf-8")
    if fmt != "text":
        raise ValueError(f"unknown report format {fmt!r}")
    out = [f"Periodic apartment search, genus {v.genus}", ""]
    for k, val in v.stats:
        out.append(f"  {k:<14} {val}")
    out.append("")
    out.append(f"Candidate dual graphs: {len(v.candidates)}")
    for c in v.candidates:
        out.append(f"  {c.name:<16} d={c.double_edges} assignments={len(c.masks):<4} sets={c.set_count}")
    for p in v.verdicts:
        out.append("")
        if p.error is not None:
            out.append(f"{p.name}: error: {p.error}")
            continue
        out.append(f"{p.name}: {'periodic apartment found' if p.found else 'no periodic apartment'}")
        for r in p.rows:
            mark = "yes" if r.colourings else "no"
            out.append(f"  {r.name:<16} {mark:<4} colourings={r.colourings:<6} searched={r.searched}")
            if r.certificate:
                out.append(f"    certificate {r.certificate}")
            if r.also_in:
                out.append(f"    same triangles in {', '.join(r.also_in)}")
            for entry in r.listing:
                out.append(f"    {entry}")
    return ("\n".join(out) + "\n").encode("utf-8")
