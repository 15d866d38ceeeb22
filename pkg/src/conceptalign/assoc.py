"""Candidate enumeration and chi-square association scoring.

Both graph-building passes share this statistical core: enumerate substring
candidates from the uncovered verse set, build a 2x2 contingency table for
each candidate against the verse set inside the parallel universe, and pick
the candidate with the highest Pearson chi-square statistic.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from conceptalign.corpus import (
    OccurrenceIndex,
    VerseId,
    distinct_substrings,
    distinct_word_bounded_substrings,
)
from conceptalign.errors import InputError


@dataclass(frozen=True)
class ContingencyTable:
    """Verse counts for one candidate string t against a verse set V.

    n00: verses in V containing t        n01: verses outside V containing t
    n10: verses in V lacking t           n11: verses outside V lacking t
    The universe (V plus its complement) is the parallel verse set of the
    language pair under consideration.
    """

    n00: int
    n01: int
    n10: int
    n11: int

    def __post_init__(self) -> None:
        if min(self.n00, self.n01, self.n10, self.n11) < 0:
            raise InputError("contingency counts must be nonnegative")

    @property
    def total(self) -> int:
        return self.n00 + self.n01 + self.n10 + self.n11


def _chi2(n00: int, n01: int, n10: int, n11: int) -> float:
    row_t = n00 + n01
    row_not = n10 + n11
    col_in = n00 + n10
    col_out = n01 + n11
    if row_t == 0 or row_not == 0 or col_in == 0 or col_out == 0:
        return 0.0
    det = n00 * n11 - n01 * n10
    return (n00 + n01 + n10 + n11) * det * det / (row_t * row_not * col_in * col_out)


def chi_square(tab: ContingencyTable) -> float:
    """Pearson chi-square statistic, no continuity correction.

    Any zero marginal means the table carries no evidence of association,
    so the score is defined as 0.0 instead of raising.
    """
    return _chi2(tab.n00, tab.n01, tab.n10, tab.n11)


def coverage(idx: OccurrenceIndex, strings: Iterable[str], verses: set[VerseId]) -> float:
    """Fraction of ``verses`` containing at least one of ``strings``.

    Empty ``verses`` is vacuously covered (1.0), which lets the pass loops
    terminate cleanly when a concept has no occurrences.
    """
    if not verses:
        return 1.0
    hit = idx.verses_containing(strings)
    return len(hit & verses) / len(verses)


@dataclass(frozen=True)
class CandidateConstraints:
    """Length, boundary and frequency constraints on substring candidates.

    ``min_count`` is strict: a candidate must occur in more than this many
    verses of the current uncovered set. ``respect_word_boundary`` restricts
    candidates to contain '$' only as first or last character.
    """

    min_len: int
    max_len: int
    respect_word_boundary: bool = False
    min_count: float = 0.0

    def __post_init__(self) -> None:
        if not (1 <= self.min_len <= self.max_len):
            raise InputError(
                f"need 1 <= min_len <= max_len, got {self.min_len}..{self.max_len}"
            )

    def substrings_of(self, text: str) -> set[str]:
        if self.respect_word_boundary:
            return distinct_word_bounded_substrings(text, self.min_len, self.max_len)
        return distinct_substrings(text, self.min_len, self.max_len)

    def with_min_count(self, min_count: float) -> "CandidateConstraints":
        return CandidateConstraints(
            self.min_len, self.max_len, self.respect_word_boundary, min_count
        )


@dataclass(frozen=True)
class ScoredCandidate:
    text: str
    score: float
    count_in_v: int
    count_outside_v: int


def enumerate_candidates(
    idx: OccurrenceIndex, verses: Iterable[VerseId], cons: CandidateConstraints
) -> dict[str, int]:
    """Distinct substrings of the given verses with their verse-level counts.

    A candidate is kept only if the number of verses containing it exceeds
    ``cons.min_count``. Verse ids unknown to this language are ignored.
    """
    counts: Counter[str] = Counter()
    for verse_id in verses:
        text = idx.texts.get(verse_id)
        if text is None:
            continue
        counts.update(cons.substrings_of(text))
    return {t: c for t, c in counts.items() if c > cons.min_count}


class CandidatePool:
    """Per-pass candidate postings, built once and scored per iteration.

    The candidate space is fixed by the pass base verses (the verses whose
    query side contains the concept); each iteration re-checks the frequency
    threshold against the shrinking uncovered set and scores survivors with
    chi-square inside the pass universe. Results are identical to enumerating
    from the uncovered set directly, because any candidate occurring in a
    subset of the base verses also occurs in the base verses.
    """

    def __init__(
        self,
        idx: OccurrenceIndex,
        base_verses: set[VerseId],
        universe: set[VerseId],
        cons: CandidateConstraints,
    ) -> None:
        self.idx = idx
        self.cons = cons
        self.universe_pos = idx.to_positions(universe)
        counts = enumerate_candidates(idx, base_verses, cons)
        self.postings: dict[str, frozenset[int]] = {
            text: idx.positions(text) & self.universe_pos for text in counts
        }

    def best(self, uncovered_pos: frozenset[int], exclude: Iterable[str]) -> ScoredCandidate | None:
        excluded = set(exclude)
        n_universe = len(self.universe_pos)
        n_v = len(uncovered_pos)
        min_count = self.cons.min_count
        # Deterministic argmax: score, then count in V, then smallest text.
        best_text: str | None = None
        best_score = -1.0
        best_n00 = -1
        best_n01 = 0
        for text, posting in self.postings.items():
            if text in excluded:
                continue
            n00 = len(posting & uncovered_pos)
            if n00 == 0 or n00 <= min_count:
                continue
            score = _chi2(n00, len(posting) - n00, n_v - n00, n_universe - n_v - (len(posting) - n00))
            if (
                score > best_score
                or (
                    score == best_score
                    and (n00 > best_n00 or (n00 == best_n00 and text < best_text))
                )
            ):
                best_text = text
                best_score = score
                best_n00 = n00
                best_n01 = len(posting) - n00
        if best_text is None:
            return None
        return ScoredCandidate(best_text, best_score, best_n00, best_n01)


def best_candidate(
    idx: OccurrenceIndex,
    verses: set[VerseId],
    exclude: Iterable[str],
    cons: CandidateConstraints,
    universe: set[VerseId],
) -> ScoredCandidate | None:
    """Highest-chi-square candidate from the verses' texts, or None.

    Ties break toward the higher in-set count, then the lexicographically
    smallest string, so repeated runs return the same candidate.
    """
    pool = CandidatePool(idx, verses, universe, cons)
    return pool.best(idx.to_positions(verses), exclude)
