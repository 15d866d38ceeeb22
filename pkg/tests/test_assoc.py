import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conceptalign.assoc import (
    CandidateConstraints,
    ContingencyTable,
    best_candidate,
    chi_square,
    coverage,
    enumerate_candidates,
)
from conceptalign.corpus import OccurrenceIndex
from conceptalign.errors import InputError


def pearson_via_expected(n00, n01, n10, n11):
    """Independent oracle: sum of (observed-expected)^2/expected."""
    total = n00 + n01 + n10 + n11
    rows = (n00 + n01, n10 + n11)
    cols = (n00 + n10, n01 + n11)
    observed = ((n00, n01), (n10, n11))
    out = 0.0
    for i in range(2):
        for j in range(2):
            expected = rows[i] * cols[j] / total
            out += (observed[i][j] - expected) ** 2 / expected
    return out


class TestChiSquare:
    def test_perfect_independence(self):
        assert chi_square(ContingencyTable(10, 10, 10, 10)) == 0.0

    def test_hand_computed_value(self):
        # N=1000, det=20*965-5*10=19250 -> 1000*19250^2/(25*975*30*970)
        expected = 1000 * 19250**2 / (25 * 975 * 30 * 970)
        got = chi_square(ContingencyTable(20, 5, 10, 965))
        assert got == pytest.approx(expected, rel=1e-12)
        assert got == pytest.approx(522.42, abs=0.005)

    @given(st.integers(1, 500), st.integers(1, 500))
    def test_perfect_association_equals_total(self, k, m):
        assert chi_square(ContingencyTable(k, 0, 0, m)) == pytest.approx(k + m, rel=1e-12)

    @pytest.mark.parametrize(
        "tab",
        [
            ContingencyTable(0, 0, 5, 5),
            ContingencyTable(5, 5, 0, 0),
            ContingencyTable(0, 5, 0, 5),
            ContingencyTable(5, 0, 5, 0),
            ContingencyTable(0, 0, 0, 0),
        ],
    )
    def test_zero_marginal_scores_zero(self, tab):
        assert chi_square(tab) == 0.0

    def test_matches_oracle_on_random_tables(self):
        rng = random.Random(99)
        for _ in range(1000):
            tab = ContingencyTable(
                rng.randint(1, 1000), rng.randint(1, 1000),
                rng.randint(1, 1000), rng.randint(1, 1000),
            )
            expected = pearson_via_expected(tab.n00, tab.n01, tab.n10, tab.n11)
            assert chi_square(tab) == pytest.approx(expected, rel=1e-9)

    def test_negative_counts_rejected(self):
        with pytest.raises(InputError):
            ContingencyTable(-1, 0, 0, 0)


class TestCoverage:
    @pytest.fixture
    def idx(self):
        texts = {f"{i:02d}": f"$w{i}$" for i in range(10)}
        texts["00"] = "$hit$"
        return OccurrenceIndex("aaa", texts)

    def test_empty_strings(self, idx):
        assert coverage(idx, [], set(idx.texts)) == 0.0

    def test_fractional(self, idx):
        verses = set(idx.texts)
        strings = [f"$w{i}$" for i in range(1, 10)]
        assert coverage(idx, strings, verses) == pytest.approx(0.9)

    def test_full(self, idx):
        verses = set(idx.texts)
        strings = ["$hit$"] + [f"$w{i}$" for i in range(1, 10)]
        assert coverage(idx, strings, verses) == 1.0

    def test_empty_verse_set_is_vacuous(self, idx):
        assert coverage(idx, ["$hit$"], set()) == 1.0

    def test_monotone_in_strings(self, idx):
        rng = random.Random(3)
        pool = [f"$w{i}" for i in range(10)] + ["$hit", "zz"]
        verses = set(idx.texts)
        for _ in range(50):
            u2 = set(rng.sample(pool, rng.randint(1, len(pool))))
            u1 = set(rng.sample(sorted(u2), rng.randint(0, len(u2))))
            assert coverage(idx, u1, verses) <= coverage(idx, u2, verses)


class TestEnumerate:
    def test_exhaustive_on_tiny_verse(self):
        idx = OccurrenceIndex("aaa", {"1": "$ab$"})
        cons = CandidateConstraints(1, 8)
        got = enumerate_candidates(idx, {"1"}, cons)
        assert set(got) == {"$", "a", "b", "$a", "ab", "b$", "$ab", "ab$", "$ab$"}
        assert all(count == 1 for count in got.values())

    def test_boundary_mode(self):
        idx = OccurrenceIndex("aaa", {"1": "$ab$cd$"})
        cons = CandidateConstraints(1, 8, respect_word_boundary=True)
        got = enumerate_candidates(idx, {"1"}, cons)
        assert "$ab$" in got
        assert "ab$c" not in got

    def test_min_count_excludes_rare(self):
        idx = OccurrenceIndex("aaa", {"1": "$ab$", "2": "$ab$", "3": "$xy$"})
        cons = CandidateConstraints(2, 4, min_count=1)
        got = enumerate_candidates(idx, {"1", "2", "3"}, cons)
        assert "$ab" in got and got["$ab"] == 2
        assert "$xy" not in got

    def test_unknown_verse_ids_ignored(self):
        idx = OccurrenceIndex("aaa", {"1": "$ab$"})
        cons = CandidateConstraints(1, 2)
        assert enumerate_candidates(idx, {"1", "missing"}, cons) == enumerate_candidates(
            idx, {"1"}, cons
        )

    def test_every_candidate_occurs_in_v(self, random_corpus):
        cons = CandidateConstraints(1, 6)
        rng = random.Random(5)
        for language, texts in random_corpus.texts.items():
            idx = OccurrenceIndex(language, texts)
            verses = set(rng.sample(sorted(texts), 20))
            for candidate, count in enumerate_candidates(idx, verses, cons).items():
                naive = sum(1 for v in verses if candidate in texts[v])
                assert naive == count
                assert count >= 1


def brute_force_best(idx, verses, exclude, cons, universe):
    """Oracle: score every enumerated candidate by naive scanning."""
    counts = enumerate_candidates(idx, verses, cons)
    best = None
    for text in counts:
        if text in set(exclude):
            continue
        n00 = sum(1 for v in verses if text in idx.texts[v])
        in_universe = sum(1 for v in universe if text in idx.texts.get(v, ""))
        n01 = in_universe - n00
        score = pearson_with_zero_rule(n00, n01, len(verses) - n00,
                                       len(universe) - len(verses) - n01)
        key = (score, n00, text)
        if best is None or score > best[0] or (
            score == best[0] and (n00 > best[1] or (n00 == best[1] and text < best[2]))
        ):
            best = key
    if best is None:
        return None
    return best


def pearson_with_zero_rule(n00, n01, n10, n11):
    if min(n00 + n01, n10 + n11, n00 + n10, n01 + n11) == 0:
        return 0.0
    return pearson_via_expected(n00, n01, n10, n11)


class TestBestCandidate:
    def test_planted_word_family_wins(self):
        # "oisx" occurs in exactly the 4 verses of V and nowhere else;
        # neighbors vary per verse so no spanning string ties with it
        texts = {}
        for i in range(20):
            word = "oisx" if i < 4 else f"w{i:02d}x"
            texts[f"{i:02d}"] = f"$ya{i}${word}$zb{i}$"
        idx = OccurrenceIndex("aaa", texts)
        verses = {f"{i:02d}" for i in range(4)}
        universe = set(texts)
        cons = CandidateConstraints(1, 8)
        got = best_candidate(idx, verses, set(), cons, universe)
        oracle = brute_force_best(idx, verses, set(), cons, universe)
        assert got is not None
        assert (got.count_in_v, got.text) == oracle[1:]
        assert got.score == pytest.approx(oracle[0], rel=1e-9)
        assert got.text in "$oisx$"
        assert got.count_in_v == 4 and got.count_outside_v == 0

    def test_matches_brute_force_on_random_sets(self, random_corpus):
        rng = random.Random(11)
        texts = random_corpus.texts["taa"]
        idx = OccurrenceIndex("taa", texts)
        universe = set(texts)
        cons = CandidateConstraints(1, 5)
        for _ in range(20):
            verses = set(rng.sample(sorted(texts), rng.randint(2, 30)))
            got = best_candidate(idx, verses, set(), cons, universe)
            oracle = brute_force_best(idx, verses, set(), cons, universe)
            if got is None:
                assert oracle is None
            else:
                assert (got.count_in_v, got.text) == oracle[1:]
                assert got.score == pytest.approx(oracle[0], rel=1e-9)

    def test_all_excluded_returns_none(self):
        idx = OccurrenceIndex("aaa", {"1": "$ab$", "2": "$cd$"})
        cons = CandidateConstraints(1, 8)
        everything = set(enumerate_candidates(idx, {"1"}, cons))
        assert best_candidate(idx, {"1"}, everything, cons, {"1", "2"}) is None

    def test_v_equals_universe_is_deterministic(self):
        texts = {"1": "$ab$", "2": "$ab$cd$", "3": "$cd$"}
        idx = OccurrenceIndex("aaa", texts)
        cons = CandidateConstraints(1, 8)
        runs = [
            best_candidate(idx, set(texts), set(), cons, set(texts)) for _ in range(3)
        ]
        assert all(r == runs[0] for r in runs)
        assert runs[0].score == 0.0  # degenerate column marginal

    def test_constraint_validation(self):
        with pytest.raises(InputError):
            CandidateConstraints(0, 5)
        with pytest.raises(InputError):
            CandidateConstraints(6, 5)
