"""Verse-aligned parallel corpus loading, normalization and substring indexing.

Corpus files are line-delimited ``verseID<TAB>raw text``; a small key-value
manifest maps language codes to file paths and names the source language.
Verse texts are boundary-marked: lowercased, punctuation stripped, every
whitespace run replaced by ``$`` and the whole verse wrapped in ``$``, so that
word boundaries are ordinary matchable characters.

The occurrence index answers "which verses contain string t as a substring"
exactly. Ngrams up to ``max_indexed_len`` characters are kept in a hashed
postings table; longer probes fall back to the posting list of their prefix
ngram plus literal verification, so answers stay identical to a naive scan at
every length.
"""

from __future__ import annotations

import json
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from conceptalign.errors import InputError, IntegrityError, ParseError

LanguageId = str
VerseId = str

BOUNDARY = "$"

DEFAULT_MAX_INDEXED_LEN = 8


def is_language_id(code: str) -> bool:
    """ISO 639-3 style code: exactly three lowercase ASCII letters."""
    return len(code) == 3 and code.isascii() and code.isalpha() and code.islower()


def check_language_id(code: str) -> LanguageId:
    if not is_language_id(code):
        raise InputError(f"not a valid language code (want 3 lowercase letters): {code!r}")
    return code


def _is_removable(ch: str) -> bool:
    # Unicode categories P* (punctuation) and S* (symbols). '$' itself is Sc,
    # so a literal '$' in raw input is removed rather than escaped.
    return unicodedata.category(ch)[0] in ("P", "S")


def normalize_text(raw: str, keep_chars: str = "") -> str:
    """Normalize a raw verse into its boundary-marked form.

    Lowercase, drop punctuation/symbol characters (minus ``keep_chars``),
    collapse whitespace runs to single ``$`` and wrap the result in ``$``.
    An empty or all-punctuation verse becomes ``"$$"``.
    """
    lowered = raw.lower()
    kept = [ch for ch in lowered if ch in keep_chars or not _is_removable(ch)]
    words = "".join(kept).split()
    return BOUNDARY + BOUNDARY.join(words) + BOUNDARY if words else BOUNDARY * 2


def strip_boundaries(text: str) -> str:
    """Inverse-ish of normalization: turn '$' marks back into spaces."""
    return text.replace(BOUNDARY, " ").strip()


def _parse_kv_lines(lines: Iterable[str], origin: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for n, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ParseError(f"{origin}:{n}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        out[key.strip()] = value.strip()
    return out


@dataclass(frozen=True)
class Manifest:
    """Which file holds which language, and which language is the query side."""

    source: LanguageId
    files: dict[LanguageId, Path]

    @classmethod
    def load(cls, path: str | Path) -> "Manifest":
        path = Path(path)
        if not path.is_file():
            raise InputError(f"manifest not found: {path}")
        entries = _parse_kv_lines(path.read_text(encoding="utf-8").splitlines(), str(path))
        source = entries.pop("source", None)
        if source is None:
            raise ParseError(f"{path}: manifest must name a 'source' language")
        files: dict[LanguageId, Path] = {}
        for key, value in entries.items():
            check_language_id(key)
            file_path = Path(value)
            if not file_path.is_absolute():
                file_path = path.parent / file_path
            files[key] = file_path
        check_language_id(source)
        if source not in files:
            raise ParseError(f"{path}: source language {source!r} has no corpus file entry")
        return cls(source=source, files=files)


def read_verse_file(path: str | Path) -> dict[VerseId, str]:
    """Parse one ``verseID<TAB>raw text`` file into normalized verse texts."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"corpus file not found: {path}")
    verses: dict[VerseId, str] = {}
    with path.open(encoding="utf-8") as handle:
        for n, line in enumerate(handle, start=1):
            line = line.rstrip("\n").rstrip("\r")
            if not line or line.startswith("#"):
                continue
            if "\t" not in line:
                raise ParseError(f"{path}:{n}: missing TAB between verse id and text")
            verse_id, _, raw = line.partition("\t")
            verse_id = verse_id.strip()
            if not verse_id:
                raise ParseError(f"{path}:{n}: empty verse id")
            if verse_id in verses:
                raise IntegrityError(f"{path}:{n}: duplicate verse id {verse_id!r}")
            verses[verse_id] = normalize_text(raw)
    return verses


@dataclass
class ParallelCorpus:
    """Per-language verse texts with a designated source (query) language.

    Languages may cover different verse subsets; verse ids shared between two
    languages denote parallel verses.
    """

    source: LanguageId
    texts: dict[LanguageId, dict[VerseId, str]]

    def __post_init__(self) -> None:
        if self.source not in self.texts:
            raise InputError(f"source language {self.source!r} not among loaded languages")

    @property
    def languages(self) -> list[LanguageId]:
        return sorted(self.texts)

    @property
    def target_languages(self) -> list[LanguageId]:
        return sorted(l for l in self.texts if l != self.source)

    def require(self, language: LanguageId) -> dict[VerseId, str]:
        try:
            return self.texts[language]
        except KeyError:
            raise InputError(f"language not loaded: {language!r}") from None


def load_corpus(source: LanguageId, files: Mapping[LanguageId, str | Path]) -> ParallelCorpus:
    check_language_id(source)
    texts = {lang: read_verse_file(path) for lang, path in files.items()}
    return ParallelCorpus(source=source, texts=texts)


def load_corpus_from_manifest(manifest: Manifest | str | Path) -> ParallelCorpus:
    if not isinstance(manifest, Manifest):
        manifest = Manifest.load(manifest)
    return load_corpus(manifest.source, manifest.files)


def parallel_verses(corpus: ParallelCorpus, l1: LanguageId, l2: LanguageId) -> set[VerseId]:
    """Verse ids present in both languages."""
    return set(corpus.require(l1)) & set(corpus.require(l2))


class OccurrenceIndex:
    """Exact substring-occurrence lookup over one language's verses.

    Verses are stored in sorted id order; postings map each ngram of length
    1..max_indexed_len to the frozenset of verse positions containing it.
    """

    def __init__(
        self,
        language: LanguageId,
        texts: Mapping[VerseId, str],
        max_indexed_len: int = DEFAULT_MAX_INDEXED_LEN,
    ) -> None:
        self.language = language
        self.max_indexed_len = max_indexed_len
        self.verse_ids: tuple[VerseId, ...] = tuple(sorted(texts))
        self.texts: dict[VerseId, str] = {v: texts[v] for v in self.verse_ids}
        self._pos: dict[VerseId, int] = {v: i for i, v in enumerate(self.verse_ids)}
        postings: dict[str, set[int]] = {}
        for pos, verse_id in enumerate(self.verse_ids):
            for gram in distinct_substrings(self.texts[verse_id], 1, max_indexed_len):
                postings.setdefault(gram, set()).add(pos)
        self._postings: dict[str, frozenset[int]] = {
            gram: frozenset(hits) for gram, hits in postings.items()
        }

    def __len__(self) -> int:
        return len(self.verse_ids)

    def positions(self, needle: str) -> frozenset[int]:
        """Verse positions whose text contains ``needle`` as a substring."""
        if not needle:
            return frozenset()
        if len(needle) <= self.max_indexed_len:
            return self._postings.get(needle, frozenset())
        prefix_hits = self._postings.get(needle[: self.max_indexed_len], frozenset())
        return frozenset(
            pos for pos in prefix_hits if needle in self.texts[self.verse_ids[pos]]
        )

    def positions_of_set(self, needles: Iterable[str]) -> frozenset[int]:
        out: set[int] = set()
        for needle in needles:
            out |= self.positions(needle)
        return frozenset(out)

    def verses_containing(self, needles: Iterable[str]) -> set[VerseId]:
        """The union of verse-id sets containing each string in ``needles``."""
        return {self.verse_ids[pos] for pos in self.positions_of_set(needles)}

    def count(self, needle: str) -> int:
        """Number of verses containing ``needle``."""
        return len(self.positions(needle))

    def to_positions(self, verse_ids: Iterable[VerseId]) -> frozenset[int]:
        """Map verse ids to index positions, dropping ids this language lacks."""
        return frozenset(self._pos[v] for v in verse_ids if v in self._pos)

    def to_verse_ids(self, positions: Iterable[int]) -> set[VerseId]:
        return {self.verse_ids[pos] for pos in positions}

    def text_at(self, pos: int) -> str:
        return self.texts[self.verse_ids[pos]]

    def ngram_counts_by_length(self) -> dict[int, int]:
        counts: dict[int, int] = {length: 0 for length in range(1, self.max_indexed_len + 1)}
        for gram in self._postings:
            counts[len(gram)] += 1
        return counts

    def stats(self) -> dict:
        return {
            "language": self.language,
            "verses": len(self.verse_ids),
            "distinct_ngrams": {str(k): v for k, v in sorted(self.ngram_counts_by_length().items())},
        }


def distinct_substrings(text: str, min_len: int, max_len: int) -> set[str]:
    """All distinct substrings of ``text`` with length in [min_len, max_len]."""
    n = len(text)
    out: set[str] = set()
    for i in range(n):
        top = min(max_len, n - i)
        for length in range(min_len, top + 1):
            out.add(text[i : i + length])
    return out


def distinct_word_bounded_substrings(text: str, min_len: int, max_len: int) -> set[str]:
    """Distinct substrings that contain '$' only as first/last character.

    Used for the query-language side, where candidates may not span word
    boundaries: "$ab" and "ab$" qualify, "ab$c" does not.
    """
    n = len(text)
    out: set[str] = set()
    for i in range(n):
        # The interior of text[i:j] must be '$'-free, so j-1 may reach at most
        # the first '$' at or beyond i+1.
        cut = text.find(BOUNDARY, i + 1)
        top = n if cut == -1 else cut + 1
        top = min(top, i + max_len, n)
        for j in range(i + min_len, top + 1):
            out.add(text[i:j])
    return out


def build_indexes(
    corpus: ParallelCorpus,
    languages: Iterable[LanguageId] | None = None,
    max_indexed_len: int = DEFAULT_MAX_INDEXED_LEN,
) -> dict[LanguageId, OccurrenceIndex]:
    selected = sorted(languages) if languages is not None else corpus.languages
    return {
        lang: OccurrenceIndex(lang, corpus.require(lang), max_indexed_len) for lang in selected
    }


def stats_jsonl(indexes: Mapping[LanguageId, OccurrenceIndex]) -> str:
    """Index statistics as line-delimited JSON, one language per line."""
    lines = [
        json.dumps(indexes[lang].stats(), sort_keys=True, ensure_ascii=False)
        for lang in sorted(indexes)
    ]
    return "\n".join(lines) + "\n" if lines else ""
