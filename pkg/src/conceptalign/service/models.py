"""Pydantic request/response models for the pipeline service.

Requests carry server-side paths plus configuration overrides; responses
echo the artifact paths written and the key numbers so thin clients can
print them without re-reading files.
"""

from __future__ import annotations

from typing import Any, Optional

from pydantic import BaseModel, Field


class ConfigPayload(BaseModel):
    """A config file path and/or inline overrides of its keys."""

    config_path: Optional[str] = None
    manifest: Optional[str] = None
    out: Optional[str] = None
    concepts: Optional[str] = None
    languages: Optional[list[str]] = None
    exclude_languages: Optional[list[str]] = None
    max_iter: Optional[int] = None
    alpha: Optional[float] = None
    target_min_len: Optional[int] = None
    target_max_len: Optional[int] = None
    source_min_len: Optional[int] = None
    source_max_len: Optional[int] = None
    target_count_fraction: Optional[float] = None
    source_min_count: Optional[float] = None
    max_indexed_len: Optional[int] = None
    seed: Optional[int] = None
    jobs: Optional[int] = None

    def overrides(self) -> dict:
        data = self.model_dump(exclude_none=True)
        data.pop("config_path", None)
        return data


class HealthResponse(BaseModel):
    status: str
    version: str


class IndexRequest(BaseModel):
    config: ConfigPayload


class IndexResponse(BaseModel):
    source: str
    languages: list[str]
    stats_path: str
    stats: list[dict]


class AlignRequest(BaseModel):
    config: ConfigPayload


class AlignResponse(BaseModel):
    graph_path: str
    reports_path: str
    pairs_total: int
    pairs_reused: int
    pairs_computed: int
    pairs: list[dict]


class FieldRequest(BaseModel):
    config: ConfigPayload
    concept: str


class FieldResponse(BaseModel):
    concept: str
    entries: int
    json_path: str
    dot_path: Optional[str]
    field: dict


class StabilityRequest(BaseModel):
    config: ConfigPayload
    concreteness: Optional[str] = None


class StabilityResponse(BaseModel):
    table_path: str
    concepts: int
    prediction_path: Optional[str] = None
    prediction: Optional[dict] = None


class VectorsRequest(BaseModel):
    config: ConfigPayload
    concepts: Optional[list[str]] = None


class VectorsResponse(BaseModel):
    vectors_path: str
    concepts: list[str]
    dimensions: int
    languages: list[str]
    dropped: list[str]


class SimilarityRequest(BaseModel):
    config: ConfigPayload


class SimilarityResponse(BaseModel):
    matrix_path: str
    languages: list[str]


class ClassifyRequest(BaseModel):
    config: ConfigPayload
    labels: str
    k: int = 4
    label_kind: str = "family"
    families: Optional[list[str]] = None


class ClassifyResponse(BaseModel):
    report_path: str
    k: int
    overall: float
    per_family: dict[str, float]
    family_sizes: dict[str, int]
    evaluated: int


class RecallRequest(BaseModel):
    config: ConfigPayload
    gold: str


class RecallResponse(BaseModel):
    report_path: str
    partial: float
    strict: float
    relaxed: float
    false_positives: float
    pairs: list[dict]
    skipped: list[list[str]]


class CategoriesRequest(BaseModel):
    config: ConfigPayload
    gold: str


class CategoriesResponse(BaseModel):
    report_path: str
    counts: dict[str, int]
    pairs: list[dict]


class AlignerEvalRequest(BaseModel):
    config: ConfigPayload
    concept: str
    proposals: str
    min_freq: Optional[float] = None
    freq_fraction: Optional[float] = None


class AlignerEvalResponse(BaseModel):
    report_path: str
    coverage_global: float
    coverage_avg: float
    avg_translations: float
    per_language: dict[str, dict]
    skipped: list[str]


class ReportRequest(BaseModel):
    config: ConfigPayload
    concept: str
    language: str
    tp_samples: int = Field(default=2, ge=0)
    fp_samples: int = Field(default=2, ge=0)
    fn_samples: int = Field(default=3, ge=0)


class ReportResponse(BaseModel):
    report_path: str
    bytes: int


class DiscoverRequest(BaseModel):
    config: ConfigPayload
    mode: str
    wordlist: Optional[str] = None
    sample_size: int = 12
    min_len: int = 4
    max_len: int = 15


class DiscoverResponse(BaseModel):
    report_path: str
    kept: list[Any]
    candidates: int
