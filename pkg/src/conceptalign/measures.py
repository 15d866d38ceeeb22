"""Semantic fields, concept stability, and concreteness-based prediction.

The crosslingual semantic field of a focal concept is its second neighborhood
in the graph: every source node reachable through a length-2 path, scored by
how many paths lead there and through how many distinct languages. Stability
is the fraction of a concept's forward target nodes whose backward edge
returns to the concept itself.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from conceptalign.errors import InputError, ParseError
from conceptalign.graph import BipartiteGraph, Concept

logger = logging.getLogger(__name__)

CONCRETE = "concrete"
ABSTRACT = "abstract"
NEITHER = "neither"

DEFAULT_CONCRETE_MIN = 3.5
DEFAULT_ABSTRACT_MAX = 2.5
DEFAULT_SIGMA_THRESHOLD = 0.6


@dataclass(frozen=True)
class FieldEntry:
    path_count: int
    language_count: int


@dataclass
class SemanticField:
    focal: Concept
    entries: dict[Concept, FieldEntry]

    def sorted_entries(self) -> list[tuple[Concept, FieldEntry]]:
        return sorted(
            self.entries.items(),
            key=lambda item: (-item[1].path_count, -item[1].language_count, item[0].sort_key()),
        )

    def to_dict(self) -> dict:
        return {
            "focal": self.focal.to_ref(),
            "entries": [
                {
                    "concept": concept.to_ref(),
                    "path_count": entry.path_count,
                    "language_count": entry.language_count,
                }
                for concept, entry in self.sorted_entries()
            ],
        }


@dataclass
class StabilityScore:
    concept: str
    sigma: float
    recurrent_paths: int
    total_paths: int


def semantic_field(graph: BipartiteGraph, focal: Concept) -> SemanticField:
    """Source nodes reachable via focal -> target node -> source node paths."""
    if focal not in graph.source_nodes or not focal.is_focal:
        raise InputError(f"{focal.name!r} is not a focal concept of this graph")
    targets = graph.forward_targets(focal)
    paths: dict[Concept, int] = {}
    languages: dict[Concept, set[str]] = {}
    for node, endpoint in graph.backward_edges:
        if node not in targets:
            continue
        paths[endpoint] = paths.get(endpoint, 0) + 1
        languages.setdefault(endpoint, set()).add(node.language)
    entries = {
        concept: FieldEntry(path_count=count, language_count=len(languages[concept]))
        for concept, count in paths.items()
    }
    return SemanticField(focal=focal, entries=entries)


def stability(graph: BipartiteGraph, focal: Concept) -> StabilityScore | None:
    """Fraction of forward target nodes whose backward edge returns to focal.

    Returns None when the concept has no forward edges: a failed search is
    not evidence about stability.
    """
    targets = graph.forward_targets(focal)
    if not targets:
        return None
    recurrent = sum(1 for node, endpoint in graph.backward_edges if node in targets and endpoint == focal)
    return StabilityScore(
        concept=focal.name,
        sigma=recurrent / len(targets),
        recurrent_paths=recurrent,
        total_paths=len(targets),
    )


def classify_concept(
    gamma: float,
    concrete_min: float = DEFAULT_CONCRETE_MIN,
    abstract_max: float = DEFAULT_ABSTRACT_MAX,
) -> str:
    """Band a concreteness rating into concrete / abstract / neither."""
    if not (1.0 <= gamma <= 5.0):
        raise InputError(f"concreteness rating out of range [1,5]: {gamma}")
    if gamma >= concrete_min:
        return CONCRETE
    if gamma <= abstract_max:
        return ABSTRACT
    return NEITHER


def load_concreteness(path: str | Path) -> dict[str, float]:
    """TSV of (concept, rating); 'NA' ratings are skipped with a warning."""
    path = Path(path)
    if not path.is_file():
        raise InputError(f"concreteness table not found: {path}")
    table: dict[str, float] = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ParseError(f"{path}:{n}: expected 'concept<TAB>rating'")
        concept, raw = parts[0].strip(), parts[1].strip()
        if raw.upper() == "NA":
            logger.warning("no concreteness rating for %r; skipping", concept)
            continue
        try:
            table[concept] = float(raw)
        except ValueError:
            raise ParseError(f"{path}:{n}: bad rating {raw!r}") from None
    return table


@dataclass
class PredictionReport:
    """Stable-vs-unstable prediction from concreteness, stable as positive."""

    n: int
    true_positive: int
    false_positive: int
    false_negative: int
    true_negative: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    skipped: list[str]

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "true_positive": self.true_positive,
            "false_positive": self.false_positive,
            "false_negative": self.false_negative,
            "true_negative": self.true_negative,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "skipped": list(self.skipped),
        }


def stability_prediction_report(
    scores: Iterable[StabilityScore],
    ratings: Mapping[str, float],
    sigma_threshold: float = DEFAULT_SIGMA_THRESHOLD,
    concrete_min: float = DEFAULT_CONCRETE_MIN,
    abstract_max: float = DEFAULT_ABSTRACT_MAX,
) -> PredictionReport:
    """Predict stability (sigma >= threshold) from concreteness bands.

    Concepts rated in the middle band or missing a rating are skipped.
    A concept is predicted stable iff it is concrete.
    """
    tp = fp = fn = tn = 0
    skipped: list[str] = []
    seen = 0
    for score in scores:
        rating = ratings.get(score.concept)
        if rating is None:
            logger.warning("no rating for concept %r; excluded from report", score.concept)
            skipped.append(score.concept)
            continue
        band = classify_concept(rating, concrete_min, abstract_max)
        if band == NEITHER:
            skipped.append(score.concept)
            continue
        seen += 1
        stable = score.sigma >= sigma_threshold
        predicted = band == CONCRETE
        if predicted and stable:
            tp += 1
        elif predicted and not stable:
            fp += 1
        elif not predicted and stable:
            fn += 1
        else:
            tn += 1
    if seen == 0:
        raise InputError("no concept has both a stability score and a usable rating")
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return PredictionReport(
        n=seen,
        true_positive=tp,
        false_positive=fp,
        false_negative=fn,
        true_negative=tn,
        accuracy=(tp + tn) / seen,
        precision=precision,
        recall=recall,
        f1=f1,
        skipped=sorted(skipped),
    )


def stability_table(
    graph: BipartiteGraph,
    ratings: Mapping[str, float] | None = None,
    concrete_min: float = DEFAULT_CONCRETE_MIN,
    abstract_max: float = DEFAULT_ABSTRACT_MAX,
) -> str:
    """TSV report over all focal concepts with forward edges."""
    lines = ["concept\tsigma\trecurrent\ttotal\tconcreteness\tclass"]
    for name in graph.focal_names():
        score = stability(graph, graph.find_focal(name))
        if score is None:
            logger.warning("concept %r has no forward edges; excluded from report", name)
            continue
        rating = ratings.get(name) if ratings else None
        band = classify_concept(rating, concrete_min, abstract_max) if rating is not None else "NA"
        rating_text = repr(rating) if rating is not None else "NA"
        lines.append(
            f"{name}\t{score.sigma!r}\t{score.recurrent_paths}\t{score.total_paths}"
            f"\t{rating_text}\t{band}"
        )
    return "\n".join(lines) + "\n"


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_field_dot(field: SemanticField, path: str | Path) -> None:
    """Write the field as a DOT digraph.

    Edge weight carries the language count; node width grows with the path
    count. Entries appear in path-count-descending order so output bytes are
    stable.
    """
    if not field.entries:
        raise InputError("refusing to export an empty semantic field")
    focal_label = field.focal.name
    lines = ["digraph semantic_field {"]
    entries = field.sorted_entries()
    focal_entry = field.entries.get(field.focal)
    focal_paths = focal_entry.path_count if focal_entry else 0
    lines.append(
        f"  {_dot_quote(focal_label)} [shape=doublecircle, path_count={focal_paths}, "
        f"width={1.0 + focal_paths ** 0.5:.3f}];"
    )
    for concept, entry in entries:
        if concept == field.focal:
            continue
        lines.append(
            f"  {_dot_quote(concept.name)} [path_count={entry.path_count}, "
            f"width={1.0 + entry.path_count ** 0.5:.3f}];"
        )
    for concept, entry in entries:
        if concept == field.focal:
            continue
        lines.append(
            f"  {_dot_quote(focal_label)} -> {_dot_quote(concept.name)} "
            f"[weight={entry.language_count}, penwidth={entry.language_count}];"
        )
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def export_field_json(field: SemanticField, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(field.to_dict(), sort_keys=True, ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
