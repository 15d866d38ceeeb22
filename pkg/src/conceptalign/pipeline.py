"""File-level orchestration of the pipeline stages.

Every stage reads and writes plain files under the configured output
directory, is deterministic given (inputs, config, seed), and is safe to
rerun: the align stage skips (concept, language) pairs whose artifact already
exists, so an interrupted run resumes to byte-identical outputs.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Iterable, Mapping

from conceptalign import evaluation, langsim, measures
from conceptalign.config import RunConfig, load_concepts
from conceptalign.corpus import (
    LanguageId,
    Manifest,
    OccurrenceIndex,
    ParallelCorpus,
    read_verse_file,
    stats_jsonl,
)
from conceptalign.errors import InputError
from conceptalign.graph import (
    BipartiteGraph,
    Concept,
    TargetNode,
    deserialize_graph,
    run_pair,
    serialize_graph,
)

logger = logging.getLogger(__name__)

GRAPH_FILE = "graph.jsonl"
REPORTS_FILE = "reports.jsonl"
PAIRS_DIR = "pairs"
INDEX_DIR = "index"
STATS_FILE = "stats.jsonl"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def _dump_json(record) -> str:
    return json.dumps(record, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


# ---------------------------------------------------------------- index stage

def run_index(config: RunConfig) -> dict:
    """Normalize every manifest language and persist texts plus statistics."""
    manifest = Manifest.load(config.manifest)
    out = config.out_dir() / INDEX_DIR
    stats: dict[str, OccurrenceIndex] = {}
    for language in sorted(manifest.files):
        verses = read_verse_file(manifest.files[language])
        lines = [
            _dump_json({"verse": verse, "text": verses[verse]}) for verse in sorted(verses)
        ]
        _atomic_write(out / f"{language}.jsonl", "\n".join(lines) + "\n" if lines else "")
        stats[language] = OccurrenceIndex(language, verses, config.max_indexed_len)
    _atomic_write(out / STATS_FILE, stats_jsonl(stats))
    return {
        "source": manifest.source,
        "languages": sorted(manifest.files),
        "stats_path": str(out / STATS_FILE),
        "stats": [stats[l].stats() for l in sorted(stats)],
    }


def _read_indexed_language(path: Path) -> dict[str, str]:
    verses: dict[str, str] = {}
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        record = json.loads(line)
        verses[record["verse"]] = record["text"]
    return verses


def load_indexed_corpus(
    config: RunConfig, languages: Iterable[LanguageId] | None = None
) -> tuple[ParallelCorpus, dict[LanguageId, OccurrenceIndex]]:
    """Load normalized texts persisted by the index stage and index them.

    Raises with an instruction to run the index stage when artifacts are
    missing.
    """
    manifest = Manifest.load(config.manifest)
    index_dir = config.out_dir() / INDEX_DIR
    wanted = set(languages) if languages is not None else set(manifest.files)
    wanted.add(manifest.source)
    texts: dict[str, dict[str, str]] = {}
    for language in sorted(wanted):
        path = index_dir / f"{language}.jsonl"
        if not path.is_file():
            raise InputError(
                f"index artifact missing for {language!r} ({path}); run the 'index' stage first"
            )
        texts[language] = _read_indexed_language(path)
    corpus = ParallelCorpus(source=manifest.source, texts=texts)
    indexes = {
        language: OccurrenceIndex(language, texts[language], config.max_indexed_len)
        for language in sorted(texts)
    }
    return corpus, indexes


def select_languages(config: RunConfig, manifest: Manifest) -> list[LanguageId]:
    targets = [l for l in sorted(manifest.files) if l != manifest.source]
    if config.languages:
        unknown = sorted(set(config.languages) - set(targets) - {manifest.source})
        if unknown:
            raise InputError(f"languages not in manifest: {unknown}")
        targets = [l for l in targets if l in set(config.languages)]
    if config.exclude_languages:
        targets = [l for l in targets if l not in set(config.exclude_languages)]
    if not targets:
        raise InputError("no target languages selected")
    return targets


# ---------------------------------------------------------------- align stage

def _pair_path(out: Path, concept: str, language: str) -> Path:
    return out / PAIRS_DIR / f"{concept}__{language}.json"


def _compute_pair(
    corpus: ParallelCorpus,
    indexes: Mapping[LanguageId, OccurrenceIndex],
    focal: Concept,
    language: LanguageId,
    config: RunConfig,
) -> dict:
    graph, reports = run_pair(corpus, indexes, focal, language, config.pass_params())
    forward_verses = sorted(node.verse for _, node in graph.forward_edges)
    target_strings: list[str] = reports[0].strings
    backward = sorted(
        (node.verse, endpoint.name, endpoint.is_focal)
        for node, endpoint in graph.backward_edges
    )
    return {
        "concept": focal.name,
        "concept_strings": sorted(focal.strings),
        "language": language,
        "target_strings": target_strings,
        "source_strings": reports[1].strings,
        "forward_verses": forward_verses,
        "backward": [list(item) for item in backward],
        "reports": [r.to_dict() for r in reports],
    }


def _pair_graph(record: dict, focal: Concept) -> BipartiteGraph:
    """Rebuild the pair's graph fragment from its artifact."""
    graph = BipartiteGraph()
    strings = frozenset(record["target_strings"])
    language = record["language"]
    if strings:
        for verse in record["forward_verses"]:
            graph.add_forward(focal, TargetNode(language, verse, strings))
    for verse, endpoint_name, endpoint_is_focal in record["backward"]:
        node = TargetNode(language, verse, strings)
        endpoint = focal if endpoint_is_focal else Concept.singleton(endpoint_name)
        graph.add_backward(node, endpoint)
    return graph


def run_align(config: RunConfig) -> dict:
    """Run both passes for every (concept, language) pair and merge results.

    Pairs with an existing artifact are skipped (resume); the merged graph
    and reports are rewritten from pair artifacts on every call, so resumed,
    fresh and parallel runs produce identical bytes.
    """
    if not config.concepts:
        raise InputError("align needs a concepts file (config key 'concepts')")
    concepts = load_concepts(config.concepts)
    manifest = Manifest.load(config.manifest)
    languages = select_languages(config, manifest)
    corpus, indexes = load_indexed_corpus(config, set(languages) | {manifest.source})
    out = config.out_dir()

    pairs = [(c, l) for c in sorted(concepts, key=lambda c: c.name) for l in languages]
    todo: list[tuple[Concept, str]] = []
    reused = 0
    for focal, language in pairs:
        path = _pair_path(out, focal.name, language)
        if path.is_file():
            record = json.loads(path.read_text(encoding="utf-8"))
            if record.get("concept_strings") != sorted(focal.strings):
                raise InputError(
                    f"existing pair artifact {path} was built from different concept strings; "
                    "remove the pairs directory to realign"
                )
            reused += 1
        else:
            todo.append((focal, language))

    def work(item: tuple[Concept, str]) -> tuple[Path, dict]:
        focal, language = item
        record = _compute_pair(corpus, indexes, focal, language, config)
        return _pair_path(out, focal.name, language), record

    jobs = max(1, config.jobs)
    if todo:
        if jobs == 1:
            results = map(work, todo)
            for path, record in results:
                _atomic_write(path, _dump_json(record) + "\n")
        else:
            with ThreadPoolExecutor(max_workers=jobs) as executor:
                for path, record in executor.map(work, todo):
                    _atomic_write(path, _dump_json(record) + "\n")

    graph = BipartiteGraph()
    report_lines: list[str] = []
    pair_summaries: list[dict] = []
    by_name = {c.name: c for c in concepts}
    for focal, language in pairs:
        record = json.loads(_pair_path(out, focal.name, language).read_text(encoding="utf-8"))
        graph.merge(_pair_graph(record, by_name[record["concept"]]))
        for report in record["reports"]:
            report_lines.append(_dump_json(report))
        pair_summaries.append(
            {
                "concept": record["concept"],
                "language": record["language"],
                "target_strings": record["target_strings"],
                "source_strings": record["source_strings"],
                "forward_edges": len(record["forward_verses"]),
                "backward_edges": len(record["backward"]),
            }
        )
    _atomic_write(out / GRAPH_FILE, serialize_graph(graph))
    _atomic_write(out / REPORTS_FILE, "\n".join(report_lines) + "\n" if report_lines else "")
    return {
        "graph_path": str(out / GRAPH_FILE),
        "reports_path": str(out / REPORTS_FILE),
        "pairs_total": len(pairs),
        "pairs_reused": reused,
        "pairs_computed": len(todo),
        "pairs": pair_summaries,
    }


def load_graph(config: RunConfig) -> BipartiteGraph:
    path = config.out_dir() / GRAPH_FILE
    if not path.is_file():
        raise InputError(f"graph file missing ({path}); run the 'align' stage first")
    return deserialize_graph(path.read_text(encoding="utf-8"))


# ------------------------------------------------------------- measure stages

def run_field(config: RunConfig, concept_name: str) -> dict:
    graph = load_graph(config)
    focal = graph.find_focal(concept_name)
    field = measures.semantic_field(graph, focal)
    out = config.out_dir()
    json_path = out / f"field_{concept_name}.json"
    measures.export_field_json(field, json_path)
    dot_path: Path | None = None
    if field.entries:
        dot_path = out / f"field_{concept_name}.dot"
        measures.export_field_dot(field, dot_path)
    return {
        "concept": concept_name,
        "entries": len(field.entries),
        "json_path": str(json_path),
        "dot_path": str(dot_path) if dot_path else None,
        "field": field.to_dict(),
    }


def run_stability(config: RunConfig, concreteness_path: str | None = None) -> dict:
    graph = load_graph(config)
    ratings = measures.load_concreteness(concreteness_path) if concreteness_path else None
    table = measures.stability_table(graph, ratings)
    out = config.out_dir()
    table_path = out / "stability.tsv"
    _atomic_write(table_path, table)
    result: dict = {"table_path": str(table_path), "concepts": len(table.splitlines()) - 1}
    if ratings:
        scores = []
        for name in graph.focal_names():
            score = measures.stability(graph, graph.find_focal(name))
            if score is not None:
                scores.append(score)
        report = measures.stability_prediction_report(scores, ratings)
        report_path = out / "stability_prediction.json"
        _atomic_write(report_path, _dump_json(report.to_dict()) + "\n")
        result["prediction_path"] = str(report_path)
        result["prediction"] = report.to_dict()
    return result


def run_vectors(config: RunConfig, concept_names: list[str] | None = None) -> dict:
    graph = load_graph(config)
    names = concept_names or graph.focal_names()
    if not names:
        raise InputError("graph holds no focal concepts")
    concepts = [graph.find_focal(name) for name in names]
    vectors = langsim.language_vectors(graph, concepts)
    if not vectors.vectors:
        raise InputError("no language has edges for every requested concept")
    out = config.out_dir()
    vectors_path = out / "vectors.tsv"
    langsim.export_vectors(vectors.vectors, vectors.dims, vectors_path)
    return {
        "vectors_path": str(vectors_path),
        "concepts": names,
        "dimensions": len(vectors.dims),
        "languages": sorted(vectors.vectors),
        "dropped": vectors.dropped,
    }


def run_similarity(config: RunConfig) -> dict:
    out = config.out_dir()
    vectors_path = out / "vectors.tsv"
    if not vectors_path.is_file():
        raise InputError(f"vectors file missing ({vectors_path}); run 'vectors' first")
    _, vectors = langsim.import_vectors(vectors_path)
    languages, matrix = langsim.similarity_matrix(vectors)
    matrix_path = out / "similarity.tsv"
    langsim.export_similarity(languages, matrix, matrix_path)
    return {"matrix_path": str(matrix_path), "languages": languages}


def run_classify(
    config: RunConfig,
    labels_path: str,
    k: int,
    label_kind: str = "family",
    families: list[str] | None = None,
) -> dict:
    out = config.out_dir()
    vectors_path = out / "vectors.tsv"
    if not vectors_path.is_file():
        raise InputError(f"vectors file missing ({vectors_path}); run 'vectors' first")
    _, vectors = langsim.import_vectors(vectors_path)
    labels = langsim.load_labels(labels_path, label_kind)
    report = langsim.knn_family_accuracy(vectors, labels, k, families)
    report_path = out / f"classification_{label_kind}_k{k}.json"
    _atomic_write(report_path, _dump_json(report.to_dict()) + "\n")
    return {"report_path": str(report_path), **report.to_dict()}


# ----------------------------------------------------------- evaluation stages

def run_eval_recall(config: RunConfig, gold_path: str) -> dict:
    graph = load_graph(config)
    gold = evaluation.load_gold_lexicon(gold_path)
    proposals = evaluation.proposed_translations(graph)
    summary = evaluation.recall_scores(proposals, gold)
    out_path = config.out_dir() / "recall.json"
    _atomic_write(out_path, _dump_json(summary.to_dict()) + "\n")
    return {"report_path": str(out_path), **summary.to_dict()}


def run_eval_categories(config: RunConfig, gold_path: str) -> dict:
    graph = load_graph(config)
    gold = evaluation.load_gold_lexicon(gold_path)
    proposals = evaluation.proposed_translations(graph)
    rows = []
    counts: dict[str, int] = {}
    for key in sorted(proposals):
        category = evaluation.lexicon_category(gold.get(key, set()), proposals[key])
        counts[category] = counts.get(category, 0) + 1
        rows.append(
            {
                "concept": key[0],
                "language": key[1],
                "category": category,
                "proposed": sorted(proposals[key]),
                "gold": sorted(gold.get(key, set())),
            }
        )
    result = {"counts": dict(sorted(counts.items())), "pairs": rows}
    out_path = config.out_dir() / "categories.json"
    _atomic_write(out_path, _dump_json(result) + "\n")
    return {"report_path": str(out_path), **result}


def run_eval_aligner(
    config: RunConfig,
    concept_name: str,
    proposals_path: str,
    min_freq: float | None = None,
    freq_fraction: float | None = None,
) -> dict:
    if not config.concepts:
        raise InputError("aligner evaluation needs a concepts file (config key 'concepts')")
    concepts = {c.name: c for c in load_concepts(config.concepts)}
    if concept_name not in concepts:
        raise InputError(f"concept {concept_name!r} not in concepts file")
    corpus, indexes = load_indexed_corpus(config)
    proposals = evaluation.load_aligner_proposals(proposals_path)
    comparison = evaluation.aligner_coverage_compare(
        corpus, indexes, concepts[concept_name], proposals, min_freq, freq_fraction
    )
    out_path = config.out_dir() / f"aligner_coverage_{concept_name}.json"
    _atomic_write(out_path, _dump_json(comparison.to_dict()) + "\n")
    return {"report_path": str(out_path), **comparison.to_dict()}


def run_report(
    config: RunConfig,
    concept_name: str,
    language: LanguageId,
    buckets: dict[str, int] | None = None,
) -> dict:
    if not config.concepts:
        raise InputError("annotation report needs a concepts file (config key 'concepts')")
    concepts = {c.name: c for c in load_concepts(config.concepts)}
    if concept_name not in concepts:
        raise InputError(f"concept {concept_name!r} not in concepts file")
    graph = load_graph(config)
    corpus, indexes = load_indexed_corpus(config)
    text = evaluation.annotation_report(
        corpus,
        indexes,
        graph,
        concepts[concept_name],
        language,
        samples_per_bucket=buckets,
        seed=config.seed,
    )
    out_path = config.out_dir() / f"report_{concept_name}_{language}.md"
    _atomic_write(out_path, text)
    return {"report_path": str(out_path), "bytes": len(text.encode("utf-8"))}


def run_discover(
    config: RunConfig,
    mode: str,
    wordlist_path: str | None = None,
    sample_size: int = 12,
    min_len: int = 4,
    max_len: int = 15,
) -> dict:
    corpus, indexes = load_indexed_corpus(config)
    if mode == "swadesh":
        if not wordlist_path:
            raise InputError("swadesh discovery needs a word list file")
        wordlist = Path(wordlist_path)
        if not wordlist.is_file():
            raise InputError(f"word list not found: {wordlist}")
        words = [
            line.strip()
            for line in wordlist.read_text(encoding="utf-8").splitlines()
            if line.strip() and not line.startswith("#")
        ]
        rows = evaluation.discover_swadesh(corpus, words)
        kept = [r["word"] for r in rows if r["kept"]]
    elif mode == "bible":
        rows = evaluation.discover_bible(
            corpus,
            indexes,
            config.pass_params(),
            sample_size=sample_size,
            seed=config.seed,
            min_len=min_len,
            max_len=max_len,
        )
        kept = [r["string"] for r in rows]
    else:
        raise InputError(f"unknown discovery mode {mode!r} (want 'swadesh' or 'bible')")
    out_path = config.out_dir() / f"discovered_{mode}.json"
    _atomic_write(out_path, _dump_json({"mode": mode, "rows": rows, "kept": kept}) + "\n")
    return {"report_path": str(out_path), "kept": kept, "candidates": len(rows)}
