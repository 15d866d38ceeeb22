"""Directed bipartite alignment graph and the two passes that induce it.

The forward pass starts from a focal concept (a set of source-language query
strings) and iteratively picks the target-language string with the highest
chi-square association to the not-yet-covered concept verses, stopping once
the selected strings cover at least ``alpha`` of the base verse set or the
iteration budget runs out. It then links the concept to every parallel verse
containing one of the selected strings.

The backward pass mirrors the search from those target verses back into the
source language. Each iteration links the newly covered target nodes to the
string just found, so every target node keeps at most one outgoing edge; a
found string that belongs to the focal concept's own string set redirects the
edge to the focal concept node itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from conceptalign.assoc import CandidateConstraints, CandidatePool
from conceptalign.corpus import LanguageId, OccurrenceIndex, ParallelCorpus, VerseId
from conceptalign.errors import InputError

TERMINATION_COVERAGE = "coverage"
TERMINATION_BUDGET = "iteration_budget"
TERMINATION_EXHAUSTED = "candidates_exhausted"


@dataclass(frozen=True)
class Concept:
    """A source node: a named, nonempty set of source-language strings.

    Focal concepts are the configured search queries and may hold several
    strings; derived source nodes hold exactly the single string found by the
    backward pass. Node identity is the full (name, strings, focal) triple,
    so a derived ngram that happens to spell a focal concept's name stays a
    distinct node.
    """

    name: str
    strings: frozenset[str]
    is_focal: bool = False

    def __post_init__(self) -> None:
        if not self.strings:
            raise InputError(f"concept {self.name!r} has no strings")
        if not self.is_focal and len(self.strings) != 1:
            raise InputError(f"derived concept {self.name!r} must hold exactly one string")

    @classmethod
    def singleton(cls, text: str) -> "Concept":
        return cls(name=text, strings=frozenset({text}))

    def sort_key(self) -> tuple:
        return (self.name, tuple(sorted(self.strings)), self.is_focal)

    def to_ref(self) -> dict:
        return {"name": self.name, "strings": sorted(self.strings), "focal": self.is_focal}

    @classmethod
    def from_ref(cls, ref: dict) -> "Concept":
        return cls(
            name=ref["name"], strings=frozenset(ref["strings"]), is_focal=bool(ref["focal"])
        )


@dataclass(frozen=True)
class TargetNode:
    """A target node: (language, verse, set of strings found for the concept)."""

    language: LanguageId
    verse: VerseId
    strings: frozenset[str]

    def sort_key(self) -> tuple:
        return (self.language, self.verse, tuple(sorted(self.strings)))


@dataclass(frozen=True)
class PassParams:
    """Search parameters shared by both passes."""

    max_iterations: int = 5
    alpha: float = 0.9
    target_constraints: CandidateConstraints = CandidateConstraints(1, 8)
    source_constraints: CandidateConstraints = CandidateConstraints(
        3, 30, respect_word_boundary=True
    )
    target_count_fraction: float = 0.1
    source_min_count: float = 2.0

    def __post_init__(self) -> None:
        if self.max_iterations < 1:
            raise InputError("max_iterations must be >= 1")
        if not (0.0 < self.alpha <= 1.0):
            raise InputError("alpha must be in (0, 1]")


@dataclass
class PassReport:
    """What one pass did and why it stopped."""

    concept: str
    language: LanguageId
    direction: str  # "forward" or "backward"
    strings: list[str]
    iterations: int
    final_coverage: float
    termination: str
    universe_size: int
    base_verses: int

    def to_dict(self) -> dict:
        return {
            "concept": self.concept,
            "language": self.language,
            "direction": self.direction,
            "strings": list(self.strings),
            "iterations": self.iterations,
            "final_coverage": self.final_coverage,
            "termination": self.termination,
            "universe_size": self.universe_size,
            "base_verses": self.base_verses,
        }


@dataclass
class BipartiteGraph:
    """Source concepts, target nodes, and directed edges both ways."""

    source_nodes: set[Concept] = field(default_factory=set)
    target_nodes: set[TargetNode] = field(default_factory=set)
    forward_edges: set[tuple[Concept, TargetNode]] = field(default_factory=set)
    backward_edges: set[tuple[TargetNode, Concept]] = field(default_factory=set)

    def add_forward(self, concept: Concept, node: TargetNode) -> None:
        self.source_nodes.add(concept)
        self.target_nodes.add(node)
        self.forward_edges.add((concept, node))

    def add_backward(self, node: TargetNode, concept: Concept) -> None:
        self.source_nodes.add(concept)
        self.target_nodes.add(node)
        self.backward_edges.add((node, concept))

    def merge(self, other: "BipartiteGraph") -> None:
        self.source_nodes |= other.source_nodes
        self.target_nodes |= other.target_nodes
        self.forward_edges |= other.forward_edges
        self.backward_edges |= other.backward_edges

    def find_focal(self, name: str) -> Concept:
        hits = [c for c in self.source_nodes if c.is_focal and c.name == name]
        if not hits:
            raise InputError(f"no focal concept named {name!r} in graph")
        if len(hits) > 1:
            raise InputError(f"multiple focal concepts named {name!r} in graph")
        return hits[0]

    def focal_names(self) -> list[str]:
        return sorted(c.name for c in self.source_nodes if c.is_focal)

    def forward_targets(self, concept: Concept) -> set[TargetNode]:
        return {node for c, node in self.forward_edges if c == concept}

    def backward_endpoints(self) -> dict[TargetNode, Concept]:
        """Target node -> its (unique) backward endpoint."""
        return {node: concept for node, concept in self.backward_edges}

    def is_empty(self) -> bool:
        return not (
            self.source_nodes or self.target_nodes or self.forward_edges or self.backward_edges
        )


def _pass_loop(
    pool: CandidatePool,
    base_pos: frozenset[int],
    params: PassParams,
    on_selection: Callable[[str, frozenset[int]], None] | None = None,
) -> tuple[list[str], frozenset[int], float, str, int]:
    """Shared iteration skeleton of both passes.

    Returns (selected strings, covered positions, final coverage of the base
    set, termination cause, number of selection attempts). ``on_selection``
    is called with (text, newly covered base positions) after each selection.
    """
    selected: list[str] = []
    covered: frozenset[int] = frozenset()
    iterations = 0
    termination = TERMINATION_BUDGET
    cov = 0.0
    for _ in range(params.max_iterations):
        cov = 1.0 if not base_pos else len(covered & base_pos) / len(base_pos)
        if cov >= params.alpha:
            termination = TERMINATION_COVERAGE
            break
        uncovered = base_pos - covered
        iterations += 1
        best = pool.best(uncovered, selected)
        if best is None:
            termination = TERMINATION_EXHAUSTED
            break
        selected.append(best.text)
        newly = pool.postings[best.text]
        if on_selection is not None:
            on_selection(best.text, newly & uncovered)
        covered |= newly
    else:
        cov = 1.0 if not base_pos else len(covered & base_pos) / len(base_pos)
        termination = TERMINATION_COVERAGE if cov >= params.alpha else TERMINATION_BUDGET
    return selected, covered, cov, termination, iterations


def forward_pass(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    focal: Concept,
    language: LanguageId,
    params: PassParams,
) -> tuple[list[str], set[tuple[Concept, TargetNode]], PassReport]:
    """Find target-language strings for ``focal`` and the edges they induce.

    Returns the selected strings in selection order, the forward edges (one
    per parallel verse containing any selected string), and the pass report.
    A concept occurring in no parallel verse yields no strings and no edges.
    """
    if language == corpus.source:
        raise InputError("forward pass target must differ from the source language")
    src_idx = indexes[corpus.source]
    tgt_idx = indexes[language]
    universe = set(src_idx.texts) & set(tgt_idx.texts)
    base = src_idx.verses_containing(focal.strings) & universe
    base_pos = tgt_idx.to_positions(base)

    cons = params.target_constraints.with_min_count(params.target_count_fraction * len(base))
    pool = CandidatePool(tgt_idx, base, universe, cons)
    selected, covered, cov, termination, iterations = _pass_loop(pool, base_pos, params)

    edges: set[tuple[Concept, TargetNode]] = set()
    if selected:
        strings = frozenset(selected)
        for pos in covered:
            node = TargetNode(language, tgt_idx.verse_ids[pos], strings)
            edges.add((focal, node))
    report = PassReport(
        concept=focal.name,
        language=language,
        direction="forward",
        strings=selected,
        iterations=iterations,
        final_coverage=cov,
        termination=termination,
        universe_size=len(universe),
        base_verses=len(base),
    )
    return selected, edges, report


def backward_pass(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    focal: Concept,
    language: LanguageId,
    params: PassParams,
    graph: BipartiteGraph,
) -> tuple[list[str], set[tuple[TargetNode, Concept]], PassReport]:
    """Search back from the forward-pass target nodes into the source language.

    Each iteration attaches the still-uncovered target nodes whose source
    verse contains the newly found string, so every target node ends with at
    most one outgoing edge. A found string belonging to the focal concept's
    own set redirects its edges to the focal concept node.
    """
    src_idx = indexes[corpus.source]
    tgt_idx = indexes[language]
    universe = set(src_idx.texts) & set(tgt_idx.texts)

    node_by_verse = {
        node.verse: node
        for concept, node in graph.forward_edges
        if concept == focal and node.language == language
    }
    base = set(node_by_verse)
    base_pos = src_idx.to_positions(base)

    cons = params.source_constraints.with_min_count(params.source_min_count)
    pool = CandidatePool(src_idx, base, universe, cons)

    edges: set[tuple[TargetNode, Concept]] = set()

    def attach(text: str, newly_covered: frozenset[int]) -> None:
        endpoint = focal if text in focal.strings else Concept.singleton(text)
        for pos in newly_covered:
            node = node_by_verse[src_idx.verse_ids[pos]]
            edges.add((node, endpoint))

    selected, _, cov, termination, iterations = _pass_loop(
        pool, base_pos, params, on_selection=attach
    )
    report = PassReport(
        concept=focal.name,
        language=language,
        direction="backward",
        strings=selected,
        iterations=iterations,
        final_coverage=cov,
        termination=termination,
        universe_size=len(universe),
        base_verses=len(base),
    )
    return selected, edges, report


def run_pair(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    focal: Concept,
    language: LanguageId,
    params: PassParams,
) -> tuple[BipartiteGraph, list[PassReport]]:
    """Run forward then backward pass for one (concept, language) pair."""
    graph = BipartiteGraph()
    _, fwd_edges, fwd_report = forward_pass(corpus, indexes, focal, language, params)
    for concept, node in fwd_edges:
        graph.add_forward(concept, node)
    _, bwd_edges, bwd_report = backward_pass(corpus, indexes, focal, language, params, graph)
    for node, endpoint in bwd_edges:
        graph.add_backward(node, endpoint)
    return graph, [fwd_report, bwd_report]


def run_concept(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    focal: Concept,
    languages: Iterable[LanguageId],
    params: PassParams,
) -> tuple[BipartiteGraph, list[PassReport]]:
    """Run both passes for a concept against every given target language.

    Per-language results are merged by set union, so the outcome does not
    depend on language order.
    """
    graph = BipartiteGraph()
    reports: list[PassReport] = []
    for language in sorted(set(languages)):
        if language == corpus.source:
            raise InputError("target languages must exclude the source language")
        pair_graph, pair_reports = run_pair(corpus, indexes, focal, language, params)
        graph.merge(pair_graph)
        reports.extend(pair_reports)
    return graph, reports


def _dump(record: dict) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def serialize_graph(graph: BipartiteGraph) -> str:
    """Line-delimited JSON with stable field order and sorted records."""
    lines: list[str] = []
    for concept in sorted(graph.source_nodes, key=Concept.sort_key):
        lines.append(_dump({"kind": "concept", **concept.to_ref()}))
    for node in sorted(graph.target_nodes, key=TargetNode.sort_key):
        lines.append(
            _dump(
                {
                    "kind": "target",
                    "language": node.language,
                    "verse": node.verse,
                    "strings": sorted(node.strings),
                }
            )
        )
    for concept, node in sorted(
        graph.forward_edges, key=lambda e: e[0].sort_key() + e[1].sort_key()
    ):
        lines.append(
            _dump(
                {
                    "kind": "forward",
                    "concept": concept.to_ref(),
                    "language": node.language,
                    "verse": node.verse,
                    "strings": sorted(node.strings),
                }
            )
        )
    for node, concept in sorted(
        graph.backward_edges, key=lambda e: e[0].sort_key() + e[1].sort_key()
    ):
        lines.append(
            _dump(
                {
                    "kind": "backward",
                    "concept": concept.to_ref(),
                    "language": node.language,
                    "verse": node.verse,
                    "strings": sorted(node.strings),
                }
            )
        )
    return "\n".join(lines) + "\n" if lines else ""


def deserialize_graph(text: str) -> BipartiteGraph:
    graph = BipartiteGraph()
    for n, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as err:
            raise InputError(f"graph line {n}: invalid JSON ({err})") from None
        kind = record.get("kind")
        if kind == "concept":
            graph.source_nodes.add(Concept.from_ref(record))
        elif kind == "target":
            graph.target_nodes.add(
                TargetNode(record["language"], record["verse"], frozenset(record["strings"]))
            )
        elif kind == "forward":
            node = TargetNode(record["language"], record["verse"], frozenset(record["strings"]))
            graph.add_forward(Concept.from_ref(record["concept"]), node)
        elif kind == "backward":
            node = TargetNode(record["language"], record["verse"], frozenset(record["strings"]))
            graph.add_backward(node, Concept.from_ref(record["concept"]))
        else:
            raise InputError(f"graph line {n}: unknown record kind {kind!r}")
    return graph
