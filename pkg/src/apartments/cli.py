"""Command line: generate, octagons, colour, verify, pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .colouring import ColouringCertificate, ColouringProblem, search_colourings, verify_colouring
from .enumerate import filter_bipartite, gen_cubic_simple, lifted_stage
from .multigraph import ParseError, read_graphs, write_graph, write_graphs
from .octagons import analyse_graph, format_octagon_report, parse_octagon_report, surface_budget, valid_orientation_masks
from .pipeline import PipelineConfig, emit_report, run_pipeline
from .presentations import PresentationError, load_presentation

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NONE_FOUND = 10

HUGE_FLAG = "--i-know-this-is-huge"


class CliError(Exception):
    pass


def _check_genus(args) -> int:
    if args.genus < 2:
        raise CliError("genus must be at least 2")
    if args.genus >= 3 and not args.i_know_this_is_huge:
        b = surface_budget(args.genus)
        raise CliError(
            f"genus {args.genus} means cubic graphs on {b.vertices} vertices, far beyond desk scale; "
            f"pass {HUGE_FLAG} to try anyway"
        )
    return surface_budget(args.genus).vertices


def _add_genus(p: argparse.ArgumentParser) -> None:
    p.add_argument("--genus", type=int, default=2)
    p.add_argument(HUGE_FLAG, action="store_true", help="allow genus 3 and above")


def cmd_generate(args) -> int:
    n = _check_genus(args)
    if args.vertices is not None:
        n = args.vertices
    if args.double_edges == 0:
        graphs = gen_cubic_simple(n)
        if not args.all_cubic:
            graphs = filter_bipartite(graphs)
    else:
        pre, graphs = lifted_stage(n, args.double_edges, args.lift_rule)
        print(f"pre-lift graphs: {len(pre)}", file=sys.stderr)
    fmt = args.format
    if args.out:
        write_graphs(args.out, graphs, fmt)
    else:
        for g in graphs:
            out = write_graph(fmt, g)
            sys.stdout.buffer.write(out + (b"\n" if fmt == "graph6" else b""))
    print(f"graphs: {len(graphs)}", file=sys.stderr)
    return EXIT_OK


def cmd_octagons(args) -> int:
    _check_genus(args)
    graphs = read_graphs(args.input)
    entries = [analyse_graph(g, args.genus, args.method) for g in graphs]
    text = format_octagon_report(entries, args.genus, args.method)
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    survivors = sum(1 for e in entries if e.sets)
    print(f"graphs: {len(entries)} with six octagons: {survivors}", file=sys.stderr)
    return EXIT_OK


def cmd_colour(args) -> int:
    pres = load_presentation(args.presentation)
    if args.octagons:
        jobs = [(g, name, masks) for g, name, masks in parse_octagon_report(Path(args.octagons).read_text())]
    else:
        if not args.graphs:
            raise CliError("give --graphs or --octagons")
        jobs = [(g, None, [int(m) for m in valid_orientation_masks(g)]) for g in read_graphs(args.graphs)]
    limit = 1 if args.first else None
    cert_dir = Path(args.cert_out) if args.cert_out else None
    found_any = False
    for gi, (g, name, masks) in enumerate(jobs, start=1):
        label = name or f"graph{gi}"
        total = 0
        for mask in masks:
            found = search_colourings(ColouringProblem(g, mask, pres), limit=limit)
            for ci, c in enumerate(found):
                if cert_dir is not None:
                    cert_dir.mkdir(parents=True, exist_ok=True)
                    path = cert_dir / f"{pres.name}_{label}_{mask}_{ci + 1}.cert"
                    path.write_text(ColouringCertificate.from_colouring(c).dumps(), encoding="utf-8")
            total += len(found)
            if found and args.first:
                break
        found_any |= total > 0
        print(f"{label}: assignments={len(masks)} colourings={total}{'+' if args.first and total else ''}")
    return EXIT_OK if found_any else EXIT_NONE_FOUND


def cmd_verify(args) -> int:
    cert = ColouringCertificate.loads(Path(args.cert).read_text(encoding="utf-8"))
    pres = None
    if args.presentation:
        pres = load_presentation(args.presentation)
    else:
        try:
            pres = load_presentation(cert.presentation_name)
        except (KeyError, FileNotFoundError):
            pres = None
    verdict = verify_colouring(cert, pres)
    print(verdict)
    return EXIT_OK if verdict.ok else EXIT_ERROR


def cmd_pipeline(args) -> int:
    _check_genus(args)
    cfg = PipelineConfig(
        genus=args.genus,
        double_edges=tuple(range(args.max_double_edges + 1)),
        presentations=tuple(x for x in args.presentations.split(",") if x),
        method=args.method,
        engine=args.engine,
        jobs=args.jobs,
        cache_dir=Path(args.cache) if args.cache else None,
        out_dir=Path(args.out) if args.out else None,
    )
    table = run_pipeline(cfg, progress=lambda msg: print(msg, file=sys.stderr))
    structured = emit_report(table, "structured")
    text = emit_report(table, "text")
    if cfg.out_dir is not None:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / "report.txt").write_bytes(structured)
        (cfg.out_dir / "summary.txt").write_bytes(text)
    sys.stdout.buffer.write(text if args.format == "text" else structured)
    return EXIT_OK if table.any_found else EXIT_NONE_FOUND


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="apartments", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="enumerate candidate dual graphs")
    _add_genus(p)
    p.add_argument("--vertices", type=int, help="override the vertex count implied by the genus")
    p.add_argument("--double-edges", type=int, default=0)
    p.add_argument("--all-cubic", action="store_true", help="with 0 double edges, keep non-bipartite graphs")
    p.add_argument("--lift-rule", choices=("matching", "pairing"), default="matching")
    p.add_argument("--format", choices=("graph6", "multigraph-text"), default="multigraph-text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("octagons", help="find six-octagon face structures")
    _add_genus(p)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--method", choices=("dfs", "orientation", "both"), default="orientation")
    p.add_argument("--report")
    p.set_defaults(func=cmd_octagons)

    p = sub.add_parser("colour", help="search triangle colourings")
    p.add_argument("--graphs")
    p.add_argument("--presentation", required=True)
    p.add_argument("--octagons", help="octagon report giving the orientation assignments to try")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--all", action="store_true", default=True)
    mode.add_argument("--first", action="store_true")
    p.add_argument("--cert-out")
    p.set_defaults(func=cmd_colour)

    p = sub.add_parser("verify", help="check a colouring certificate")
    p.add_argument("--cert", required=True)
    p.add_argument("--presentation")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pipeline", help="run the whole search and print the verdict table")
    _add_genus(p)
    p.add_argument("--presentations", default="T1,T3,T9,T21")
    p.add_argument("--max-double-edges", type=int, default=6)
    p.add_argument("--method", choices=("dfs", "orientation", "both"), default="orientation")
    p.add_argument("--engine", choices=("backtrack", "two-phase"), default="backtrack")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cache")
    p.add_argument("--out")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except (CliError, ParseError, PresentationError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
