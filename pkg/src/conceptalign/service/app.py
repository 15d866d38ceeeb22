"""FastAPI application exposing the pipeline stages.

The service operates on server-side paths: requests name a config file or
inline settings, stages write artifacts under the configured output
directory, and responses echo paths plus summary numbers. Input problems map
to HTTP 400; anything else is a 500.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from conceptalign import __version__, pipeline
from conceptalign.config import RunConfig
from conceptalign.errors import InputError
from conceptalign.service import models


def build_config(payload: models.ConfigPayload) -> RunConfig:
    overrides = payload.overrides()
    if payload.config_path:
        return RunConfig.from_file(payload.config_path, overrides)
    return RunConfig().with_overrides(overrides)


def create_app() -> FastAPI:
    app = FastAPI(
        title="conceptalign",
        version=__version__,
        description="Crosslingual concept alignment over verse-aligned parallel corpora",
    )

    @app.exception_handler(InputError)
    async def input_error_handler(request: Request, exc: InputError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.get("/health", response_model=models.HealthResponse)
    def health() -> models.HealthResponse:
        return models.HealthResponse(status="ok", version=__version__)

    @app.post("/index", response_model=models.IndexResponse)
    def index(request: models.IndexRequest) -> models.IndexResponse:
        return models.IndexResponse(**pipeline.run_index(build_config(request.config)))

    @app.post("/align", response_model=models.AlignResponse)
    def align(request: models.AlignRequest) -> models.AlignResponse:
        return models.AlignResponse(**pipeline.run_align(build_config(request.config)))

    @app.post("/field", response_model=models.FieldResponse)
    def field(request: models.FieldRequest) -> models.FieldResponse:
        return models.FieldResponse(
            **pipeline.run_field(build_config(request.config), request.concept)
        )

    @app.post("/stability", response_model=models.StabilityResponse)
    def stability(request: models.StabilityRequest) -> models.StabilityResponse:
        return models.StabilityResponse(
            **pipeline.run_stability(build_config(request.config), request.concreteness)
        )

    @app.post("/vectors", response_model=models.VectorsResponse)
    def vectors(request: models.VectorsRequest) -> models.VectorsResponse:
        return models.VectorsResponse(
            **pipeline.run_vectors(build_config(request.config), request.concepts)
        )

    @app.post("/similarity", response_model=models.SimilarityResponse)
    def similarity(request: models.SimilarityRequest) -> models.SimilarityResponse:
        return models.SimilarityResponse(
            **pipeline.run_similarity(build_config(request.config))
        )

    @app.post("/classify", response_model=models.ClassifyResponse)
    def classify(request: models.ClassifyRequest) -> models.ClassifyResponse:
        return models.ClassifyResponse(
            **pipeline.run_classify(
                build_config(request.config),
                request.labels,
                request.k,
                request.label_kind,
                request.families,
            )
        )

    @app.post("/eval/recall", response_model=models.RecallResponse)
    def eval_recall(request: models.RecallRequest) -> models.RecallResponse:
        return models.RecallResponse(
            **pipeline.run_eval_recall(build_config(request.config), request.gold)
        )

    @app.post("/eval/categories", response_model=models.CategoriesResponse)
    def eval_categories(request: models.CategoriesRequest) -> models.CategoriesResponse:
        return models.CategoriesResponse(
            **pipeline.run_eval_categories(build_config(request.config), request.gold)
        )

    @app.post("/eval/aligner", response_model=models.AlignerEvalResponse)
    def eval_aligner(request: models.AlignerEvalRequest) -> models.AlignerEvalResponse:
        return models.AlignerEvalResponse(
            **pipeline.run_eval_aligner(
                build_config(request.config),
                request.concept,
                request.proposals,
                request.min_freq,
                request.freq_fraction,
            )
        )

    @app.post("/report", response_model=models.ReportResponse)
    def report(request: models.ReportRequest) -> models.ReportResponse:
        buckets = {"tp": request.tp_samples, "fp": request.fp_samples, "fn": request.fn_samples}
        return models.ReportResponse(
            **pipeline.run_report(
                build_config(request.config), request.concept, request.language, buckets
            )
        )

    @app.post("/discover", response_model=models.DiscoverResponse)
    def discover(request: models.DiscoverRequest) -> models.DiscoverResponse:
        return models.DiscoverResponse(
            **pipeline.run_discover(
                build_config(request.config),
                request.mode,
                request.wordlist,
                request.sample_size,
                request.min_len,
                request.max_len,
            )
        )

    return app


app = create_app()
