"""Evaluation harnesses: gold-lexicon recall, category matching, aligner
coverage comparison, annotation reports and concept discovery.

Proposed translations come from forward-pass string sets with '$' markers
stripped, because gold lexicons give citation forms without boundary marks.
Matching is lenient: two strings match if either is a substring of the other,
which tolerates inflectional affixes.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from conceptalign.corpus import (
    BOUNDARY,
    LanguageId,
    OccurrenceIndex,
    ParallelCorpus,
    VerseId,
    distinct_word_bounded_substrings,
    strip_boundaries,
)
from conceptalign.errors import InputError, ParseError
from conceptalign.graph import (
    BipartiteGraph,
    Concept,
    PassParams,
    forward_pass,
)

logger = logging.getLogger(__name__)

NO_TRANSLATION = "no_translation"
NO_OVERLAP = "no_overlap"
OVERLAP = "overlap"
MATCH = "match"
NO_PROPOSAL = "no_proposal"


def lenient_match(a: str, b: str) -> bool:
    """True iff one nonempty string is a substring of the other."""
    if not a or not b:
        raise InputError("lenient_match needs nonempty strings")
    return a in b or b in a


def strip_proposals(strings: Iterable[str]) -> set[str]:
    """Remove '$' markers from proposed strings, dropping any left empty."""
    out = {s.replace(BOUNDARY, "") for s in strings}
    out.discard("")
    return out


def proposed_translations(
    graph: BipartiteGraph,
) -> dict[tuple[str, LanguageId], set[str]]:
    """Per (concept, language): forward-pass strings with '$' stripped."""
    out: dict[tuple[str, LanguageId], set[str]] = {}
    for concept, node in graph.forward_edges:
        key = (concept.name, node.language)
        out.setdefault(key, set()).update(strip_proposals(node.strings))
    return out


@dataclass
class PairRecall:
    concept: str
    language: LanguageId
    partial: float
    strict: int
    relaxed: int
    false_positives: int

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "language": self.language,
            "partial": self.partial,
            "strict": self.strict,
            "relaxed": self.relaxed,
            "false_positives": self.false_positives,
        }


@dataclass
class RecallSummary:
    pairs: list[PairRecall]
    partial: float
    strict: float
    relaxed: float
    false_positives: float
    skipped: list[tuple[str, LanguageId]]

    def to_dict(self) -> dict:
        return {
            "partial": self.partial,
            "strict": self.strict,
            "relaxed": self.relaxed,
            "false_positives": self.false_positives,
            "pairs": [p.to_dict() for p in self.pairs],
            "skipped": [list(k) for k in self.skipped],
        }


def pair_recall(
    concept: str, language: LanguageId, proposed: set[str], gold: set[str]
) -> PairRecall:
    """Recall of one concept-language pair under lenient matching."""
    if not gold:
        raise InputError("empty gold set for recall")
    matched_gold = {n for n in gold if any(lenient_match(t, n) for t in proposed)}
    unmatched_proposed = [t for t in proposed if not any(lenient_match(t, n) for n in gold)]
    partial = len(matched_gold) / len(gold)
    return PairRecall(
        concept=concept,
        language=language,
        partial=partial,
        strict=1 if len(matched_gold) == len(gold) else 0,
        relaxed=1 if matched_gold else 0,
        false_positives=len(unmatched_proposed),
    )


def recall_scores(
    proposals: Mapping[tuple[str, LanguageId], set[str]],
    gold: Mapping[tuple[str, LanguageId], set[str]],
) -> RecallSummary:
    """Aggregate recall over every gold pair; pairs with empty gold are skipped.

    Pairs present in gold but missing from the proposals count as empty
    proposals (zero recall, zero false positives).
    """
    pairs: list[PairRecall] = []
    skipped: list[tuple[str, LanguageId]] = []
    for key in sorted(gold):
        gold_set = gold[key]
        if not gold_set:
            logger.warning("gold pair %s has no translations; skipped", key)
            skipped.append(key)
            continue
        proposed = proposals.get(key, set())
        pairs.append(pair_recall(key[0], key[1], proposed, gold_set))
    if not pairs:
        raise InputError("no usable gold pairs for recall evaluation")
    n = len(pairs)
    return RecallSummary(
        pairs=pairs,
        partial=sum(p.partial for p in pairs) / n,
        strict=sum(p.strict for p in pairs) / n,
        relaxed=sum(p.relaxed for p in pairs) / n,
        false_positives=sum(p.false_positives for p in pairs) / n,
        skipped=skipped,
    )


def lexicon_category(gold: set[str], proposed: set[str]) -> str:
    """Classify a proposal set against a gold lexicon entry.

    ``match`` means every proposed string matches some gold string; gold
    entries without a matching proposal are tolerated. An empty proposal set
    is its own outcome since the four main categories assume proposals exist.
    """
    if not proposed:
        return NO_PROPOSAL
    if not gold:
        return NO_TRANSLATION
    matched = {t for t in proposed if any(lenient_match(t, p) for p in gold)}
    if not matched:
        return NO_OVERLAP
    if len(matched) < len(proposed):
        return OVERLAP
    return MATCH


def load_gold_lexicon(path: str | Path) -> dict[tuple[str, LanguageId], set[str]]:
    """TSV of (concept, language, translation), multiple rows per pair."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"gold lexicon not found: {path}")
    gold: dict[tuple[str, LanguageId], set[str]] = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ParseError(f"{path}:{n}: expected 'concept<TAB>language<TAB>translation'")
        concept, language, translation = parts[0].strip(), parts[1].strip(), parts[2].strip()
        if translation:
            gold.setdefault((concept, language), set()).add(translation)
    return gold


def load_aligner_proposals(path: str | Path) -> dict[LanguageId, dict[str, float]]:
    """TSV of (language, word, frequency) from an external aligner's output."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"aligner proposals not found: {path}")
    out: dict[LanguageId, dict[str, float]] = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 3:
            raise ParseError(f"{path}:{n}: expected 'language<TAB>word<TAB>frequency'")
        try:
            freq = float(parts[2])
        except ValueError:
            raise ParseError(f"{path}:{n}: bad frequency {parts[2]!r}") from None
        out.setdefault(parts[0].strip(), {})[parts[1].strip()] = freq
    return out


@dataclass
class CoverageComparison:
    coverage_global: float
    coverage_avg: float
    avg_translations: float
    per_language: dict[LanguageId, dict]
    skipped: list[LanguageId]

    def to_dict(self) -> dict:
        return {
            "coverage_global": self.coverage_global,
            "coverage_avg": self.coverage_avg,
            "avg_translations": self.avg_translations,
            "per_language": {k: self.per_language[k] for k in sorted(self.per_language)},
            "skipped": sorted(self.skipped),
        }


def aligner_coverage_compare(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    focal: Concept,
    proposals: Mapping[LanguageId, Mapping[str, float]],
    min_freq: float | None = None,
    freq_fraction: float | None = None,
) -> CoverageComparison:
    """Coverage of the concept's verses by externally proposed translations.

    Per language, keep proposals whose frequency strictly exceeds ``min_freq``
    (absolute) and/or ``freq_fraction`` of the concept's verse count, then
    measure which concept verses contain a kept proposal. Languages missing
    from the proposals are skipped with a warning.
    """
    src_idx = indexes[corpus.source]
    per_language: dict[LanguageId, dict] = {}
    skipped: list[LanguageId] = []
    covered_total = 0
    base_total = 0
    for language in corpus.target_languages:
        if language not in indexes:
            continue
        if language not in proposals:
            logger.warning("no proposals for language %r; skipped", language)
            skipped.append(language)
            continue
        tgt_idx = indexes[language]
        universe = set(src_idx.texts) & set(tgt_idx.texts)
        base = src_idx.verses_containing(focal.strings) & universe
        threshold = 0.0
        if min_freq is not None:
            threshold = max(threshold, min_freq)
        if freq_fraction is not None:
            threshold = max(threshold, freq_fraction * len(base))
        kept = sorted(w for w, f in proposals[language].items() if f > threshold)
        covered = tgt_idx.verses_containing(kept) & base if base else set()
        cov = len(covered) / len(base) if base else 1.0
        per_language[language] = {
            "coverage": cov,
            "kept_translations": len(kept),
            "concept_verses": len(base),
        }
        covered_total += len(covered)
        base_total += len(base)
    if not per_language:
        raise InputError("no language had proposals to evaluate")
    n = len(per_language)
    return CoverageComparison(
        coverage_global=covered_total / base_total if base_total else 1.0,
        coverage_avg=sum(v["coverage"] for v in per_language.values()) / n,
        avg_translations=sum(v["kept_translations"] for v in per_language.values()) / n,
        per_language=per_language,
        skipped=skipped,
    )


DEFAULT_BUCKETS = {"tp": 2, "fp": 2, "fn": 3}


def annotation_report(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    graph: BipartiteGraph,
    focal: Concept,
    language: LanguageId,
    samples_per_bucket: Mapping[str, int] | None = None,
    seed: int = 7,
) -> str:
    """Plain-text report for manual annotation of one (concept, language) run.

    Per target string: verse statistics plus seeded samples of true-positive
    and false-positive parallel verses; plus overall false-negative samples
    (concept verses missed by every string). Identical seeds give identical
    bytes.
    """
    buckets = dict(DEFAULT_BUCKETS)
    if samples_per_bucket:
        buckets.update(samples_per_bucket)
    src_idx = indexes[corpus.source]
    if language not in indexes:
        raise InputError(f"language not indexed: {language!r}")
    tgt_idx = indexes[language]
    universe = set(src_idx.texts) & set(tgt_idx.texts)
    concept_verses = src_idx.verses_containing(focal.strings) & universe

    strings: set[str] = set()
    for concept, node in graph.forward_edges:
        if concept == focal and node.language == language:
            strings |= node.strings

    rng = random.Random(seed)
    lines: list[str] = []
    lines.append(f"# Annotation report: concept '{focal.name}' in {language}")
    lines.append("")
    lines.append(f"concept strings: {', '.join(sorted(focal.strings))}")
    lines.append(f"parallel verses: {len(universe)}")
    lines.append(f"verses with concept ({corpus.source}): {len(concept_verses)}")
    lines.append(f"target strings found: {len(strings)}")
    lines.append("")

    def sample(pool: set[VerseId], size: int) -> list[VerseId]:
        ordered = sorted(pool)
        if len(ordered) <= size:
            return ordered
        return sorted(rng.sample(ordered, size))

    def verse_block(verse: VerseId) -> list[str]:
        return [
            f"- {verse}",
            f"  {language}: {strip_boundaries(tgt_idx.texts[verse])}",
            f"  {corpus.source}: {strip_boundaries(src_idx.texts[verse])}",
        ]

    all_hits: set[VerseId] = set()
    for text in sorted(strings):
        hits = tgt_idx.verses_containing([text]) & universe
        all_hits |= hits
        tp = hits & concept_verses
        fp = hits - concept_verses
        lines.append(f"## string {text!r}")
        lines.append(
            f"verses: {len(hits)} (true positives {len(tp)}, false positives {len(fp)})"
        )
        lines.append("")
        lines.append(f"### sampled true positives ({min(len(tp), buckets['tp'])})")
        for verse in sample(tp, buckets["tp"]):
            lines.extend(verse_block(verse))
        lines.append("")
        lines.append(f"### sampled false positives ({min(len(fp), buckets['fp'])})")
        for verse in sample(fp, buckets["fp"]):
            lines.extend(verse_block(verse))
        lines.append("")

    fn = concept_verses - all_hits
    lines.append(f"## false negatives: concept verses missed by every string "
                 f"({min(len(fn), buckets['fn'])} of {len(fn)})")
    for verse in sample(fn, buckets["fn"]):
        lines.extend(verse_block(verse))
    lines.append("")
    return "\n".join(lines)


def count_occurrences(text: str, needle: str) -> int:
    """Number of (possibly overlapping) occurrences of needle in text."""
    if not needle:
        return 0
    count = 0
    start = text.find(needle)
    while start != -1:
        count += 1
        start = text.find(needle, start + 1)
    return count


def book_number(verse_id: VerseId) -> int | None:
    """Leading book number of a PBC-style 8-digit verse id, else None."""
    if len(verse_id) >= 7 and verse_id.isdigit():
        return int(verse_id[:-6])
    return None


def discover_swadesh(
    corpus: ParallelCorpus,
    words: Sequence[str],
    nt_books: tuple[int, int] = (40, 66),
    min_nt_count: int = 5,
    max_total_count: int = 500,
) -> list[dict]:
    """Filter a candidate word list by source-corpus frequency.

    A word is kept iff its boundary-marked form occurs at least
    ``min_nt_count`` times in the New Testament partition and at most
    ``max_total_count`` times in the whole source corpus. The partition is
    derived from the leading book number of PBC-style verse ids.
    """
    texts = corpus.require(corpus.source)
    lo, hi = nt_books
    nt_verses = {v for v in texts if (b := book_number(v)) is not None and lo <= b <= hi}
    if not nt_verses:
        raise InputError(
            "no verse id parses as a PBC-style book number; cannot build the NT partition"
        )
    out: list[dict] = []
    for word in words:
        marked = BOUNDARY + word.strip().strip(BOUNDARY) + BOUNDARY
        total = 0
        nt = 0
        for verse, text in texts.items():
            c = count_occurrences(text, marked)
            total += c
            if verse in nt_verses:
                nt += c
        kept = nt >= min_nt_count and total <= max_total_count
        out.append(
            {
                "word": word,
                "marked": marked,
                "nt_count": nt,
                "total_count": total,
                "kept": kept,
            }
        )
    return out


def discover_bible(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    params: PassParams,
    sample_size: int = 12,
    seed: int = 7,
    min_len: int = 4,
    max_len: int = 15,
    coverage_threshold: float = 0.5,
    min_languages: int = 5,
    always_include: Sequence[LanguageId] = (),
) -> list[dict]:
    """Mine source-corpus ngrams that align well in a sample of languages.

    Candidates are word-bounded source ngrams of the given length range. Each
    is used as a one-string focal concept in a single-iteration forward pass
    against every sampled language; a candidate is kept iff its coverage
    exceeds ``coverage_threshold`` in strictly more than ``min_languages``
    of them.
    """
    targets = corpus.target_languages
    for language in always_include:
        if language not in targets:
            raise InputError(f"always-include language {language!r} not in corpus")
    if sample_size > len(targets):
        raise InputError(
            f"language sample of {sample_size} exceeds the {len(targets)} available targets"
        )
    rng = random.Random(seed)
    sampled = set(always_include)
    remaining = sorted(set(targets) - sampled)
    sampled |= set(rng.sample(remaining, sample_size - len(sampled)))
    sample = sorted(sampled)

    candidates: set[str] = set()
    for text in corpus.require(corpus.source).values():
        candidates |= distinct_word_bounded_substrings(text, min_len, max_len)

    single_shot = PassParams(
        max_iterations=1,
        alpha=params.alpha,
        target_constraints=params.target_constraints,
        source_constraints=params.source_constraints,
        target_count_fraction=params.target_count_fraction,
        source_min_count=params.source_min_count,
    )
    out: list[dict] = []
    for candidate in sorted(candidates):
        focal = Concept(name=candidate, strings=frozenset({candidate}), is_focal=True)
        good = 0
        for language in sample:
            _, _, report = forward_pass(corpus, indexes, focal, language, single_shot)
            if report.final_coverage > coverage_threshold:
                good += 1
        if good > min_languages:
            out.append({"string": candidate, "languages_covered": good, "sample": sample})
    return out
