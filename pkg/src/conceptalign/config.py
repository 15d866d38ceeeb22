"""Run configuration: a key-value file plus per-invocation overrides."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, fields
from pathlib import Path

from conceptalign.assoc import CandidateConstraints
from conceptalign.errors import InputError, ParseError
from conceptalign.graph import Concept, PassParams

CONCEPT_NAME_RE = re.compile(r"^[A-Za-z0-9_.-]+$")

_INT_KEYS = {"max_iter", "target_min_len", "target_max_len", "source_min_len",
             "source_max_len", "max_indexed_len", "seed", "jobs"}
_FLOAT_KEYS = {"alpha", "target_count_fraction", "source_min_count"}
_LIST_KEYS = {"languages", "exclude_languages"}


@dataclass
class RunConfig:
    """Everything a pipeline invocation needs, with fixed defaults."""

    manifest: str = ""
    out: str = "out"
    concepts: str = ""
    languages: list[str] = field(default_factory=list)
    exclude_languages: list[str] = field(default_factory=list)
    max_iter: int = 5
    alpha: float = 0.9
    target_min_len: int = 1
    target_max_len: int = 8
    source_min_len: int = 3
    source_max_len: int = 30
    target_count_fraction: float = 0.1
    source_min_count: float = 2.0
    max_indexed_len: int = 8
    seed: int = 7
    jobs: int = 1

    @classmethod
    def from_file(cls, path: str | Path, overrides: dict | None = None) -> "RunConfig":
        """Parse ``key = value`` lines, resolve relative paths, apply overrides."""
        path = Path(path)
        if not path.is_file():
            raise InputError(f"config file not found: {path}")
        raw: dict[str, str] = {}
        for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ParseError(f"{path}:{n}: expected 'key = value'")
            key, _, value = stripped.partition("=")
            raw[key.strip()] = value.strip()
        config = cls()
        known = {f.name for f in fields(cls)}
        for key, value in raw.items():
            if key not in known:
                raise ParseError(f"{path}: unknown config key {key!r}")
            setattr(config, key, _coerce(key, value))
        for key in ("manifest", "concepts", "out"):
            value = getattr(config, key)
            if value and not Path(value).is_absolute():
                setattr(config, key, str((path.parent / value).resolve()))
        if overrides:
            config = config.with_overrides(overrides)
        return config

    def with_overrides(self, overrides: dict) -> "RunConfig":
        known = {f.name for f in fields(self)}
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in known:
                raise InputError(f"unknown config override {key!r}")
            setattr(self, key, value)
        return self

    def pass_params(self) -> PassParams:
        return PassParams(
            max_iterations=self.max_iter,
            alpha=self.alpha,
            target_constraints=CandidateConstraints(
                self.target_min_len, self.target_max_len, respect_word_boundary=False
            ),
            source_constraints=CandidateConstraints(
                self.source_min_len, self.source_max_len, respect_word_boundary=True
            ),
            target_count_fraction=self.target_count_fraction,
            source_min_count=self.source_min_count,
        )

    def out_dir(self) -> Path:
        return Path(self.out)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _coerce(key: str, value: str):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError:
        raise ParseError(f"bad value for {key!r}: {value!r}") from None
    if key in _LIST_KEYS:
        return [item for chunk in value.split(",") for item in chunk.split() if item]
    return value


def load_concepts(path: str | Path) -> list[Concept]:
    """Concept file: ``name<TAB>string string ...``, one concept per line.

    Strings are boundary-marked query patterns, e.g. ``$bird``; they may not
    contain whitespace. Names must be filesystem-safe identifiers.
    """
    path = Path(path)
    if not path.is_file():
        raise InputError(f"concepts file not found: {path}")
    concepts: list[Concept] = []
    seen: set[str] = set()
    for n, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        if "\t" not in line:
            raise ParseError(f"{path}:{n}: expected 'name<TAB>strings'")
        name, _, rest = line.partition("\t")
        name = name.strip()
        if not CONCEPT_NAME_RE.match(name):
            raise ParseError(f"{path}:{n}: concept name {name!r} is not filesystem-safe")
        if name in seen:
            raise ParseError(f"{path}:{n}: duplicate concept name {name!r}")
        strings = frozenset(rest.split())
        if not strings:
            raise ParseError(f"{path}:{n}: concept {name!r} has no strings")
        seen.add(name)
        concepts.append(Concept(name=name, strings=strings, is_focal=True))
    if not concepts:
        raise InputError(f"{path}: no concepts defined")
    return concepts
