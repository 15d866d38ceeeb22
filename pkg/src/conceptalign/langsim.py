"""Conceptualization vectors per language, cosine similarity, kNN evaluation.

Each language is represented, per focal concept, by a normalized vector of
length-2 path counts over a fixed dimension basis: the focal concept itself
first, then up to 99 associated source ngrams ranked by how many languages
associate them with the concept. Language vectors concatenate these blocks
over a configured concept list; a language is kept only if every block is
nonzero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from conceptalign.errors import InputError, ParseError
from conceptalign.graph import BipartiteGraph, Concept

logger = logging.getLogger(__name__)

MAX_BASIS_DIMS = 100


@dataclass(frozen=True)
class DimensionBasis:
    """Ordered dimensions of one concept's vectors; dims[0] is the focal concept."""

    concept: Concept
    dims: tuple[Concept, ...]

    def __len__(self) -> int:
        return len(self.dims)

    def labels(self) -> list[str]:
        return [f"{self.concept.name}:{dim.name}" for dim in self.dims]


def build_basis(
    graph: BipartiteGraph, focal: Concept, max_dims: int = MAX_BASIS_DIMS
) -> DimensionBasis:
    """Rank associated source nodes by distinct-language count.

    Ties break by total path count, then by node sort key; at most
    ``max_dims - 1`` ranked nodes follow the focal concept itself.
    """
    targets = graph.forward_targets(focal)
    paths: dict[Concept, int] = {}
    languages: dict[Concept, set[str]] = {}
    for node, endpoint in graph.backward_edges:
        if node not in targets or endpoint == focal:
            continue
        paths[endpoint] = paths.get(endpoint, 0) + 1
        languages.setdefault(endpoint, set()).add(node.language)
    ranked = sorted(
        paths,
        key=lambda c: (-len(languages[c]), -paths[c], c.sort_key()),
    )
    return DimensionBasis(concept=focal, dims=(focal, *ranked[: max_dims - 1]))


def concept_vector(
    graph: BipartiteGraph,
    language: str,
    focal: Concept,
    basis: DimensionBasis,
) -> np.ndarray:
    """Normalized per-dimension path counts through this language's nodes.

    Paths landing on source nodes outside the basis are dropped; the vector
    is L1-normalized when any in-basis path exists, otherwise all zeros.
    """
    index = {dim: i for i, dim in enumerate(basis.dims)}
    counts = np.zeros(len(basis.dims), dtype=float)
    targets = graph.forward_targets(focal)
    for node, endpoint in graph.backward_edges:
        if node.language != language or node not in targets:
            continue
        i = index.get(endpoint)
        if i is not None:
            counts[i] += 1.0
    total = counts.sum()
    return counts / total if total > 0 else counts


@dataclass
class LanguageVectors:
    """Concatenated per-concept vectors for every fully covered language."""

    concepts: list[Concept]
    bases: dict[str, DimensionBasis]  # keyed by concept name
    dims: list[str]  # column labels, concept:ngram
    vectors: dict[str, np.ndarray]  # keyed by language
    dropped: list[str]  # languages missing at least one concept

    def matrix(self) -> tuple[list[str], np.ndarray]:
        languages = sorted(self.vectors)
        return languages, np.vstack([self.vectors[l] for l in languages])


def language_vectors(
    graph: BipartiteGraph,
    concepts: Sequence[Concept],
    languages: Iterable[str] | None = None,
    max_dims: int = MAX_BASIS_DIMS,
) -> LanguageVectors:
    """Build the concatenated conceptualization vector of every language.

    A language is included only if every configured concept contributes a
    nonzero block; others are reported in ``dropped``.
    """
    if not concepts:
        raise InputError("need at least one concept to build language vectors")
    names = [c.name for c in concepts]
    if len(set(names)) != len(names):
        raise InputError("duplicate concept names in vector configuration")
    bases = {c.name: build_basis(graph, c, max_dims) for c in concepts}
    if languages is None:
        pool = sorted({node.language for node in graph.target_nodes})
    else:
        pool = sorted(set(languages))
    vectors: dict[str, np.ndarray] = {}
    dropped: list[str] = []
    for language in pool:
        blocks = []
        complete = True
        for concept in concepts:
            block = concept_vector(graph, language, concept, bases[concept.name])
            if block.sum() == 0:
                complete = False
                break
            blocks.append(block)
        if complete:
            vectors[language] = np.concatenate(blocks)
        else:
            dropped.append(language)
    dims = [label for c in concepts for label in bases[c.name].labels()]
    return LanguageVectors(
        concepts=list(concepts), bases=bases, dims=dims, vectors=vectors, dropped=dropped
    )


def c_sim(v1: np.ndarray, v2: np.ndarray) -> float | None:
    """Cosine similarity; None when either vector is all zeros."""
    n1 = float(np.linalg.norm(v1))
    n2 = float(np.linalg.norm(v2))
    if n1 == 0.0 or n2 == 0.0:
        return None
    return float(np.dot(v1, v2) / (n1 * n2))


def similarity_matrix(vectors: Mapping[str, np.ndarray]) -> tuple[list[str], np.ndarray]:
    """Pairwise cosine matrix over sorted languages; diagonal forced to 1.0."""
    languages = sorted(vectors)
    if not languages:
        raise InputError("no language vectors to compare")
    stacked = np.vstack([vectors[l] for l in languages])
    norms = np.linalg.norm(stacked, axis=1, keepdims=True)
    if np.any(norms == 0):
        zero = [l for l, n in zip(languages, norms.ravel()) if n == 0]
        raise InputError(f"zero vectors for languages: {zero}")
    unit = stacked / norms
    matrix = unit @ unit.T
    np.fill_diagonal(matrix, 1.0)
    return languages, matrix


@dataclass
class ClassificationReport:
    k: int
    overall: float
    per_family: dict[str, float]
    family_sizes: dict[str, int]
    evaluated: int

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "overall": self.overall,
            "per_family": dict(sorted(self.per_family.items())),
            "family_sizes": dict(sorted(self.family_sizes.items())),
            "evaluated": self.evaluated,
        }


def knn_family_accuracy(
    vectors: Mapping[str, np.ndarray],
    labels: Mapping[str, str],
    k: int,
    families: Iterable[str] | None = None,
) -> ClassificationReport:
    """Majority-vote family prediction from the k nearest labeled neighbors.

    A language counts as correct iff strictly more than k/2 of its k nearest
    neighbors (cosine, descending; ties by language code) share its label, so
    an exact half split with even k is incorrect. Neighbors come from all
    labeled languages except the language itself.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    pool = sorted(l for l in vectors if l in labels)
    missing = sorted(set(vectors) - set(pool))
    if missing:
        logger.warning("languages without labels excluded from kNN: %s", ", ".join(missing))
    if len(pool) - 1 < k:
        raise InputError(f"need at least k+1={k + 1} labeled languages, have {len(pool)}")
    languages, matrix = similarity_matrix({l: vectors[l] for l in pool})
    correct: dict[str, bool] = {}
    for i, language in enumerate(languages):
        order = sorted(
            (j for j in range(len(languages)) if j != i),
            key=lambda j: (-matrix[i, j], languages[j]),
        )
        neighbors = order[:k]
        same = sum(1 for j in neighbors if labels[languages[j]] == labels[language])
        correct[language] = same * 2 > k
    overall = sum(correct.values()) / len(correct)
    wanted = sorted(set(families)) if families is not None else sorted(set(labels[l] for l in pool))
    per_family: dict[str, float] = {}
    sizes: dict[str, int] = {}
    for family in wanted:
        members = [l for l in pool if labels[l] == family]
        sizes[family] = len(members)
        per_family[family] = (
            sum(correct[l] for l in members) / len(members) if members else 0.0
        )
    return ClassificationReport(
        k=k, overall=overall, per_family=per_family, family_sizes=sizes, evaluated=len(pool)
    )


def export_vectors(
    vectors: Mapping[str, np.ndarray], dims: Sequence[str], path: str | Path
) -> None:
    """TSV with a header naming every dimension; floats written with repr."""
    if not vectors:
        raise InputError("no vectors to export")
    lines = ["language\t" + "\t".join(dims)]
    for language in sorted(vectors):
        values = vectors[language]
        if len(values) != len(dims):
            raise InputError(f"vector length mismatch for {language!r}")
        lines.append(language + "\t" + "\t".join(repr(float(x)) for x in values))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def import_vectors(path: str | Path) -> tuple[list[str], dict[str, np.ndarray]]:
    path = Path(path)
    if not path.is_file():
        raise InputError(f"vectors file not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or not lines[0].startswith("language\t"):
        raise ParseError(f"{path}: missing vectors header")
    dims = lines[0].split("\t")[1:]
    vectors: dict[str, np.ndarray] = {}
    for n, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != len(dims) + 1:
            raise ParseError(f"{path}:{n}: expected {len(dims) + 1} columns")
        vectors[parts[0]] = np.array([float(x) for x in parts[1:]], dtype=float)
    return dims, vectors


def export_similarity(
    languages: Sequence[str], matrix: np.ndarray, path: str | Path
) -> None:
    lines = ["language\t" + "\t".join(languages)]
    for i, language in enumerate(languages):
        lines.append(language + "\t" + "\t".join(repr(float(x)) for x in matrix[i]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_labels(path: str | Path, kind: str = "family") -> dict[str, str]:
    """TSV of (language, family, area); ``kind`` picks which label column."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"labels file not found: {path}")
    column = {"family": 1, "area": 2}.get(kind)
    if column is None:
        raise InputError(f"unknown label kind {kind!r} (want 'family' or 'area')")
    labels: dict[str, str] = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#") or line.startswith("language\t"):
            continue
        parts = line.split("\t")
        if len(parts) <= column:
            raise ParseError(f"{path}:{n}: expected at least {column + 1} columns")
        label = parts[column].strip()
        if label:
            labels[parts[0].strip()] = label
    return labels
