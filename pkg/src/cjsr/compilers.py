"""Compile switching constraints into multigraph systems.

Words are written in product order: the word ``121`` is the product
``A1 A2 A1``, whose rightmost letter acts first.  Letters are 1-based indices
into the alphabet.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .system import Edge, MultigraphSystem, SystemFormatError, Vertex

__all__ = [
    "WordConstraint",
    "compile_markovian",
    "compile_forbidden_words",
    "compile_constraint_document",
    "parse_word",
    "word_is_admissible",
]


def parse_word(word, m: int) -> tuple[int, ...]:
    """Accept ``"121"``, ``[1, 2, 1]`` or ``["1", "2", "1"]``."""
    if isinstance(word, str):
        if m >= 10:
            raise ValueError("string words are ambiguous for alphabets of 10 or more letters; use a list")
        letters = tuple(int(ch) for ch in word)
    else:
        letters = tuple(int(ch) for ch in word)
    if not letters:
        raise ValueError("forbidden words must be nonempty")
    for c in letters:
        if not 1 <= c <= m:
            raise ValueError(f"letter {c} outside alphabet 1..{m}")
    return letters


def _check_alphabet(matrices: Sequence) -> list[np.ndarray]:
    mats = [np.asarray(a, dtype=float) for a in matrices]
    if not mats:
        raise ValueError("alphabet must contain at least one matrix")
    d = mats[0].shape[0]
    for idx, a in enumerate(mats, start=1):
        if a.ndim != 2 or a.shape != (d, d):
            raise ValueError(f"matrix A{idx} has shape {a.shape}, expected ({d}, {d})")
    return mats


@dataclass(frozen=True)
class WordConstraint:
    alphabet: tuple[np.ndarray, ...]
    forbidden: frozenset[tuple[int, ...]] = field(default_factory=frozenset)
    length: int | None = None  # forces l when there are no long forbidden words

    def __post_init__(self):
        mats = tuple(_check_alphabet(self.alphabet))
        object.__setattr__(self, "alphabet", mats)
        words = frozenset(parse_word(w, len(mats)) for w in self.forbidden)
        object.__setattr__(self, "forbidden", words)

    @property
    def m(self) -> int:
        return len(self.alphabet)

    @property
    def l(self) -> int:
        longest = max((len(w) for w in self.forbidden), default=0)
        return max(2, longest, self.length or 0)


def _name(word: Sequence[int]) -> str:
    return "".join(f"A{c}" for c in word)


def _contains(word: tuple[int, ...], forbidden: Iterable[tuple[int, ...]]) -> bool:
    for f in forbidden:
        n = len(f)
        for s in range(len(word) - n + 1):
            if word[s : s + n] == f:
                return True
    return False


def word_is_admissible(word: Sequence[int], forbidden: Iterable[tuple[int, ...]]) -> bool:
    return not _contains(tuple(word), list(forbidden))


def compile_forbidden_words(wc: WordConstraint) -> MultigraphSystem:
    """Vertices are admissible words of length l-1; edge beta -> c+beta[:-1] carries A_c.

    The edge exists when the length-l word ``c + beta`` is not forbidden;
    shorter forbidden words already prune the vertex set.
    """
    l = wc.l
    short = [f for f in wc.forbidden if len(f) < l]
    full = {f for f in wc.forbidden if len(f) == l}
    words = [w for w in itertools.product(range(1, wc.m + 1), repeat=l - 1) if not _contains(w, short)]
    if not words:
        raise ValueError("every vertex word contains a forbidden subword; the language is empty")
    present = set(words)
    d = wc.alphabet[0].shape[0]
    vertices = tuple(Vertex(_name(w), d) for w in words)
    edges = []
    for beta in words:
        for c in range(1, wc.m + 1):
            gamma = (c,) + beta[:-1]
            if gamma not in present or (c,) + beta in full:
                continue
            src, dst = _name(beta), _name(gamma)
            edges.append(Edge(f"{src}>{dst}", src, dst, f"A{c}", wc.alphabet[c - 1]))
    return MultigraphSystem(vertices, tuple(edges))


def compile_markovian(matrices: Sequence, forbidden_pairs: Iterable[tuple[int, int]] = ()) -> MultigraphSystem:
    """One vertex per matrix; edge i -> j labelled A_j unless A_j may not follow A_i.

    A pair ``(j, i)`` forbids the factor ``A_j A_i``.
    """
    mats = _check_alphabet(matrices)
    m = len(mats)
    pairs = set()
    for pair in forbidden_pairs:
        j, i = (int(x) for x in pair)
        if not (1 <= i <= m and 1 <= j <= m):
            raise ValueError(f"forbidden pair {pair!r} outside alphabet 1..{m}")
        pairs.add((j, i))
    return compile_forbidden_words(WordConstraint(tuple(mats), frozenset(pairs), length=2))


def compile_constraint_document(doc: dict) -> MultigraphSystem:
    """Build a system from ``{"matrices": {...}, "forbidden_pairs"|"forbidden_words": [...]}``.

    Matrix keys must be ``"1".."m"``.
    """
    if not isinstance(doc, dict) or "matrices" not in doc:
        raise SystemFormatError("constraint document needs a 'matrices' object")
    extra = set(doc) - {"matrices", "forbidden_pairs", "forbidden_words"}
    if extra:
        raise SystemFormatError(f"unknown keys in constraint document: {sorted(extra)}")
    if "forbidden_pairs" in doc and "forbidden_words" in doc:
        raise SystemFormatError("give either forbidden_pairs or forbidden_words, not both")
    raw = doc["matrices"]
    m = len(raw)
    if sorted(raw) != sorted(str(i) for i in range(1, m + 1)):
        raise SystemFormatError(f"matrix keys must be '1'..'{m}', got {sorted(raw)}")
    mats = [np.array(raw[str(i)], dtype=float) for i in range(1, m + 1)]
    try:
        if "forbidden_words" in doc:
            return compile_forbidden_words(WordConstraint(tuple(mats), tuple(w if isinstance(w, str) else tuple(w) for w in doc["forbidden_words"])))
        return compile_markovian(mats, [tuple(p) for p in doc.get("forbidden_pairs", [])])
    except ValueError as exc:
        raise SystemFormatError(str(exc)) from None
