from __future__ import annotations

import random
import warnings

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from apartments.presentations import (
    BUILTIN,
    MultiplicityWarning,
    Presentation,
    PresentationError,
    TriangleUse,
    builtin,
    canonical_rotation,
    corners,
    load_presentation,
    parse_presentation,
    triangle_multiset_subset,
)

KNOWN_T1_ASSIGNMENT_WORDS = [(1, 1, 10), (1, 15, 2), (2, 11, 9), (2, 14, 3), (3, 15, 13), (9, 14, 15), (10, 13, 11)]


@pytest.mark.parametrize("name", BUILTIN)
def test_builtin_structure(name):
    p = builtin(name)
    assert p.name == name
    assert p.generators == 15 and len(p.triangles) == 15
    assert sum(p.generator_counts().values()) == 45
    assert p.multiplicity_ok()
    assert all(t == canonical_rotation(t) for t in p.triangles)


def test_builtin_words():
    t1 = builtin("T1")
    assert t1.triangles[:3] == ((1, 1, 10), (1, 15, 2), (2, 11, 9))
    t21 = builtin("T21")
    assert sorted(t for t in t21.triangles if 1 in t) == [(1, 3, 13), (1, 5, 2), (1, 6, 4)]
    assert builtin("T9").triangles[-1] == (11, 12, 13)
    for w in KNOWN_T1_ASSIGNMENT_WORDS:
        assert t1.find_word(w) is not None
    with pytest.raises(KeyError):
        builtin("T2")


def test_parse_equals_builtin_and_round_trip():
    t3 = builtin("T3")
    rotated = ["presentation T3 generators=15  # Table text"]
    for a, b, c in t3.triangles:
        rotated.append(f"t {b} {c} {a}")
    assert parse_presentation("\n".join(rotated)) == t3
    assert parse_presentation(t3.serialize()) == t3


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        ("presentation X generators=15\nt 1 16 2\n", "outside 1..15", 2),
        ("presentation X generators=15\nt 1 2\n", "expected 't <i> <j> <k>'", 2),
        ("presentation X generators=15\nt 1 a 2\n", "non-integer", 2),
        ("t 1 2 3\n", "before header", 1),
        ("presentation X\n", "expected 'presentation", 1),
        ("presentation X generators=3\npresentation Y generators=3\n", "duplicate header", 2),
        ("presentation X generators=3\n\nq 1 2 3\n", "unknown record", 3),
    ],
)
def test_parse_errors_carry_line(text, fragment, line):
    with pytest.raises(PresentationError, match=fragment) as info:
        parse_presentation(text)
    assert info.value.line == line


def test_empty_presentations_rejected():
    with pytest.raises(PresentationError, match="no triangles"):
        parse_presentation("presentation X generators=15\n")
    with pytest.raises(PresentationError, match="missing"):
        parse_presentation("# nothing\n")


def test_multiplicity_warning_for_user_data():
    with pytest.warns(MultiplicityWarning):
        p = parse_presentation("presentation X generators=3\nt 1 2 3\n")
    assert not p.multiplicity_ok()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        parse_presentation("presentation Y generators=3\nt 1 2 3\nt 1 3 2\nt 3 2 1\n")


def test_load_presentation(tmp_path):
    assert load_presentation("T9") == builtin("T9")
    path = tmp_path / "t.txt"
    path.write_text(builtin("T21").serialize())
    assert load_presentation(str(path)).triangles == builtin("T21").triangles
    with pytest.raises(FileNotFoundError):
        load_presentation(str(tmp_path / "missing.txt"))


def test_triangle_use_labels():
    p = builtin("T21")
    i = p.find_word((1, 5, 2))
    assert TriangleUse(i, 0, False).labels(p) == p.triangles[i]
    assert TriangleUse(i, 1, False).labels(p) == (5, 2, 1)
    assert TriangleUse(i, 0, True).labels(p) == (1, 2, 5)
    assert TriangleUse(i, 2, True).labels(p) == (2, 5, 1)
    assert len(p.uses()) == 90


def test_corners_examples():
    t21 = corners(builtin("T21"))
    assert t21.get((9, 4), []) == []
    assert t21.get((13, 6), []) == []
    t1 = builtin("T1")
    k = t1.find_word((1, 1, 10))
    got = {(u.offset, u.reverse) for u in corners(t1)[(1, 1)]}
    assert all(u.triangle == k for u in corners(t1)[(1, 1)])
    # forward from the first x1, and backward from the second x1
    assert got == {(0, False), (1, True)}


def _brute_corners(p: Presentation):
    out = {}
    for t, w in enumerate(p.triangles):
        for rev in (False, True):
            seq = w[::-1] if rev else w
            for k in range(3):
                a, b = seq[k], seq[(k + 1) % 3]
                out.setdefault((a, b), set()).add((t, seq[k:] + seq[:k]))
    return out


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(*[st.integers(1, 6)] * 3), min_size=1, max_size=8))
def test_corners_matches_scan(words):
    p = Presentation("R", 6, tuple(canonical_rotation(w) for w in words))
    ours = {k: {(u.triangle, u.labels(p)) for u in v} for k, v in corners(p).items()}
    assert ours == _brute_corners(p)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(*[st.integers(1, 9)] * 3), min_size=1, max_size=15), st.integers(0, 99))
def test_serialize_round_trip(words, seed):
    rng = random.Random(seed)
    p = Presentation("P", 9, tuple(canonical_rotation(w) for w in words))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", MultiplicityWarning)
        assert parse_presentation(p.serialize()) == p
    w = rng.choice(p.triangles)
    k = rng.randrange(3)
    assert p.find_word(w[k:] + w[:k]) is not None


def test_triangle_multiset_subset():
    t1, t3 = builtin("T1"), builtin("T3")
    chosen = {t1.find_word(w) for w in KNOWN_T1_ASSIGNMENT_WORDS}
    assert triangle_multiset_subset(chosen, t1, t1)
    assert not triangle_multiset_subset(chosen, t1, t3)
    assert t3.find_word((2, 11, 9)) is None
    assert triangle_multiset_subset(set(), t1, t3)
