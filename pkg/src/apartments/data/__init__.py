"""Bundled data files: presentations and named reference multigraphs."""

from __future__ import annotations

from importlib import resources


def read_text(name: str) -> str:
    return resources.files(__name__).joinpath(name).read_text(encoding="utf-8")


def load_named_multigraphs() -> dict:
    from ..multigraph import iter_mgtext

    try:
        text = read_text("named_multigraphs.txt")
    except FileNotFoundError:
        return {}
    names = [line.split(None, 2)[2].strip() for line in text.splitlines() if line.startswith("# name ")]
    return dict(zip(names, iter_mgtext(text)))
