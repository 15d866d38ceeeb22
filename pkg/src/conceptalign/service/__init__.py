"""HTTP service wrapping the pipeline; the CLI is a thin client of this app."""

from conceptalign.service.app import app, create_app

__all__ = ["app", "create_app"]
