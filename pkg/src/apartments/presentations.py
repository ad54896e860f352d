"""Triangle presentations: generators x_1..x_G and cyclic relators x_i x_j x_k = 1."""

from __future__ import annotations

import warnings
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from . import data

BUILTIN = ("T1", "T3", "T9", "T21")


class PresentationError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MultiplicityWarning(UserWarning):
    """Some generator does not occur exactly three times among the triangle sides."""


Word = tuple[int, int, int]


def rotations(word: Sequence[int]) -> list[Word]:
    return [tuple(word[k:]) + tuple(word[:k]) for k in range(3)]


def canonical_rotation(word: Sequence[int]) -> Word:
    return min(rotations(word))


@dataclass(frozen=True)
class TriangleUse:
    """One reading of a triangle: start at ``offset``, go forwards or backwards."""

    triangle: int  # 0-based index into Presentation.triangles
    offset: int
    reverse: bool

    def labels(self, p: "Presentation") -> Word:
        w = p.triangles[self.triangle]
        if self.reverse:
            return (w[self.offset % 3], w[(self.offset - 1) % 3], w[(self.offset - 2) % 3])
        return (w[self.offset % 3], w[(self.offset + 1) % 3], w[(self.offset + 2) % 3])


@dataclass(frozen=True)
class Presentation:
    name: str
    generators: int
    triangles: tuple[Word, ...]

    def __post_init__(self):
        if not self.triangles:
            raise PresentationError("presentation has no triangles")
        for i, t in enumerate(self.triangles):
            if len(t) != 3:
                raise PresentationError(f"triangle {i + 1} is not a triple")
            for x in t:
                if not 1 <= x <= self.generators:
                    raise PresentationError(f"generator index {x} outside 1..{self.generators}")

    @property
    def canonical_triangles(self) -> tuple[Word, ...]:
        return tuple(canonical_rotation(t) for t in self.triangles)

    def generator_counts(self) -> Counter:
        return Counter(x for t in self.triangles for x in t)

    def multiplicity_ok(self) -> bool:
        counts = self.generator_counts()
        return all(counts.get(x, 0) == 3 for x in range(1, self.generators + 1))

    def has_repeat(self, triangle: int) -> bool:
        return len(set(self.triangles[triangle])) < 3

    def uses(self) -> list[TriangleUse]:
        return [
            TriangleUse(t, off, rev)
            for t in range(len(self.triangles))
            for rev in (False, True)
            for off in range(3)
        ]

    def find_word(self, word: Sequence[int]) -> int | None:
        """Index of the triangle equal to ``word`` up to cyclic rotation."""
        key = canonical_rotation(word)
        for i, c in enumerate(self.canonical_triangles):
            if c == key:
                return i
        return None

    def serialize(self) -> str:
        lines = [f"presentation {self.name} generators={self.generators}"]
        lines.extend("t {} {} {}".format(*canonical_rotation(t)) for t in self.triangles)
        return "\n".join(lines) + "\n"


def parse_presentation(text: str | bytes, name: str | None = None) -> Presentation:
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    header = None
    triangles: list[Word] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "presentation":
            if header is not None:
                raise PresentationError("duplicate header", lineno)
            if len(parts) != 3 or not parts[2].startswith("generators="):
                raise PresentationError("expected 'presentation <name> generators=<G>'", lineno)
            try:
                gens = int(parts[2].split("=", 1)[1])
            except ValueError:
                raise PresentationError("generator count is not an integer", lineno) from None
            header = (parts[1], gens)
        elif parts[0] == "t":
            if header is None:
                raise PresentationError("triangle before header", lineno)
            if len(parts) != 4:
                raise PresentationError("expected 't <i> <j> <k>'", lineno)
            try:
                word = tuple(int(x) for x in parts[1:])
            except ValueError:
                raise PresentationError("non-integer generator index", lineno) from None
            for x in word:
                if not 1 <= x <= header[1]:
                    raise PresentationError(f"generator index {x} outside 1..{header[1]}", lineno)
            triangles.append(word)  # type: ignore[arg-type]
        else:
            raise PresentationError(f"unknown record {parts[0]!r}", lineno)
    if header is None:
        raise PresentationError("missing 'presentation' header")
    if not triangles:
        raise PresentationError("presentation has no triangles")
    p = Presentation(name or header[0], header[1], tuple(canonical_rotation(t) for t in triangles))
    if not p.multiplicity_ok():
        warnings.warn(
            f"{p.name}: generator occurrences {dict(sorted(p.generator_counts().items()))} are not all 3",
            MultiplicityWarning,
            stacklevel=2,
        )
    return p


def builtin(name: str) -> Presentation:
    if name not in BUILTIN:
        raise KeyError(f"unknown presentation {name!r}; bundled: {', '.join(BUILTIN)}")
    p = parse_presentation(data.read_text(f"{name}.txt"))
    assert p.multiplicity_ok(), name
    return p


def load_presentation(spec: str) -> Presentation:
    """A bundled name (T1, T3, T9, T21) or a path to a presentation file."""
    if spec in BUILTIN:
        return builtin(spec)
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(f"no bundled presentation or file named {spec!r}")
    return parse_presentation(path.read_text(encoding="utf-8"))


def corners(p: Presentation) -> dict[tuple[int, int], list[TriangleUse]]:
    """Index of readings by their first two labels: (a, b) -> uses reading a then b."""
    index: dict[tuple[int, int], list[TriangleUse]] = {}
    for use in p.uses():
        a, b, _ = use.labels(p)
        index.setdefault((a, b), []).append(use)
    return index


def triangle_multiset_subset(chosen: Iterable[int], p: Presentation, q: Presentation) -> bool:
    """Whether every chosen triangle of ``p`` is, up to rotation, a triangle of ``q``."""
    q_words = set(q.canonical_triangles)
    return all(canonical_rotation(p.triangles[i]) in q_words for i in chosen)
