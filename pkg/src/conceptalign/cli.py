"""Command-line interface: a thin client of the pipeline service.

Every subcommand builds a request, sends it through the service's HTTP
surface and prints the JSON response. With ``--server URL`` the request goes
to a running instance; otherwise the app is hosted in-process, so the CLI
works standalone while still exercising exactly the service contract.

Exit codes: 0 success, 1 internal error, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Any

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2


class ServiceClient:
    """POSTs to a remote server or to the in-process app."""

    def __init__(self, server: str | None = None) -> None:
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=None)
        else:
            from fastapi.testclient import TestClient

            from conceptalign.service.app import create_app

            self._client = TestClient(create_app(), raise_server_exceptions=False)

    def post(self, path: str, payload: dict) -> tuple[int, Any]:
        response = self._client.post(path, json=payload)
        try:
            body = response.json()
        except ValueError:
            body = {"detail": response.text}
        return response.status_code, body

    def close(self) -> None:
        self._client.close()


def _config_payload(args: argparse.Namespace) -> dict:
    payload: dict[str, Any] = {}
    if getattr(args, "config", None):
        payload["config_path"] = args.config
    mapping = {
        "manifest": "manifest",
        "out": "out",
        "concepts": "concepts",
        "languages": "languages",
        "max_iter": "max_iter",
        "alpha": "alpha",
        "min_len": "target_min_len",
        "max_len": "target_max_len",
        "jobs": "jobs",
        "seed": "seed",
    }
    for arg_name, key in mapping.items():
        value = getattr(args, arg_name, None)
        if value is not None:
            payload[key] = value
    return payload


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="key-value config file")
    parser.add_argument("--manifest", help="corpus manifest path")
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--concepts", help="concepts file (name<TAB>strings)")
    parser.add_argument(
        "--languages", nargs="+", metavar="LANG", help="restrict to these target languages"
    )
    parser.add_argument("--max-iter", type=int, dest="max_iter", help="pass iteration budget")
    parser.add_argument("--alpha", type=float, help="coverage threshold")
    parser.add_argument(
        "--min-len", type=int, dest="min_len", help="minimum target candidate length"
    )
    parser.add_argument(
        "--max-len", type=int, dest="max_len", help="maximum target candidate length"
    )
    parser.add_argument("--jobs", type=int, help="worker pool size for align")
    parser.add_argument("--seed", type=int, help="seed for all sampling")
    parser.add_argument("--server", help="base URL of a running service (default: in-process)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="conceptalign",
        description="Align concepts across languages in a verse-aligned parallel corpus.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="normalize and index the corpus")
    _add_common(p)

    p = sub.add_parser("align", help="run forward/backward passes for all pairs")
    _add_common(p)

    p = sub.add_parser("field", help="export a concept's crosslingual semantic field")
    _add_common(p)
    p.add_argument("--concept", required=True)

    p = sub.add_parser("stability", help="stability table and optional prediction report")
    _add_common(p)
    p.add_argument("--concreteness", help="TSV of concept<TAB>rating")

    p = sub.add_parser("vectors", help="conceptualization vectors per language")
    _add_common(p)
    p.add_argument("--vector-concepts", nargs="+", metavar="NAME", dest="vector_concepts")

    p = sub.add_parser("similarity", help="pairwise conceptual similarity matrix")
    _add_common(p)

    p = sub.add_parser("classify", help="kNN family/area classification accuracy")
    _add_common(p)
    p.add_argument("--labels", required=True, help="TSV of language<TAB>family<TAB>area")
    p.add_argument("-k", type=int, default=4)
    p.add_argument("--label-kind", choices=["family", "area"], default="family")
    p.add_argument("--families", nargs="+", metavar="FAMILY")

    p = sub.add_parser("eval", help="evaluate against gold data or aligner output")
    _add_common(p)
    p.add_argument("--task", choices=["recall", "categories", "aligner"], required=True)
    p.add_argument("--gold", help="gold lexicon TSV (recall/categories)")
    p.add_argument("--proposals", help="aligner proposals TSV (aligner)")
    p.add_argument("--concept", help="concept name (aligner)")
    p.add_argument("--min-freq", type=float, dest="min_freq")
    p.add_argument("--freq-fraction", type=float, dest="freq_fraction")

    p = sub.add_parser("report", help="annotation report for one concept-language pair")
    _add_common(p)
    p.add_argument("--concept", required=True)
    p.add_argument("--language", required=True)
    p.add_argument("--tp-samples", type=int, default=2, dest="tp_samples")
    p.add_argument("--fp-samples", type=int, default=2, dest="fp_samples")
    p.add_argument("--fn-samples", type=int, default=3, dest="fn_samples")

    p = sub.add_parser("discover", help="mine concept candidates from the corpus")
    _add_common(p)
    p.add_argument("--mode", choices=["swadesh", "bible"], required=True)
    p.add_argument("--wordlist", help="candidate word list (swadesh mode)")
    p.add_argument("--sample-size", type=int, default=12, dest="sample_size")
    p.add_argument("--discover-min-len", type=int, default=4, dest="discover_min_len")
    p.add_argument("--discover-max-len", type=int, default=15, dest="discover_max_len")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8571)

    return parser


def _request_for(args: argparse.Namespace) -> tuple[str, dict]:
    config = _config_payload(args)
    command = args.command
    if command == "index":
        return "/index", {"config": config}
    if command == "align":
        return "/align", {"config": config}
    if command == "field":
        return "/field", {"config": config, "concept": args.concept}
    if command == "stability":
        return "/stability", {"config": config, "concreteness": args.concreteness}
    if command == "vectors":
        return "/vectors", {"config": config, "concepts": args.vector_concepts}
    if command == "similarity":
        return "/similarity", {"config": config}
    if command == "classify":
        return "/classify", {
            "config": config,
            "labels": args.labels,
            "k": args.k,
            "label_kind": args.label_kind,
            "families": args.families,
        }
    if command == "eval":
        if args.task in ("recall", "categories"):
            if not args.gold:
                raise UsageError("--gold is required for this task")
            return f"/eval/{args.task}", {"config": config, "gold": args.gold}
        if not args.proposals or not args.concept:
            raise UsageError("--proposals and --concept are required for the aligner task")
        return "/eval/aligner", {
            "config": config,
            "concept": args.concept,
            "proposals": args.proposals,
            "min_freq": args.min_freq,
            "freq_fraction": args.freq_fraction,
        }
    if command == "report":
        return "/report", {
            "config": config,
            "concept": args.concept,
            "language": args.language,
            "tp_samples": args.tp_samples,
            "fp_samples": args.fp_samples,
            "fn_samples": args.fn_samples,
        }
    if command == "discover":
        return "/discover", {
            "config": config,
            "mode": args.mode,
            "wordlist": args.wordlist,
            "sample_size": args.sample_size,
            "min_len": args.discover_min_len,
            "max_len": args.discover_max_len,
        }
    raise UsageError(f"unknown command {command!r}")


class UsageError(Exception):
    pass


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "serve":
        import uvicorn

        uvicorn.run("conceptalign.service.app:app", host=args.host, port=args.port)
        return EXIT_OK

    try:
        path, payload = _request_for(args)
    except UsageError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE

    client = ServiceClient(getattr(args, "server", None))
    try:
        status, body = client.post(path, payload)
    finally:
        client.close()

    if 200 <= status < 300:
        print(json.dumps(body, indent=2, sort_keys=True, ensure_ascii=False))
        return EXIT_OK
    detail = body.get("detail") if isinstance(body, dict) else body
    print(f"error ({status}): {detail}", file=sys.stderr)
    if status in (400, 404, 422):
        return EXIT_USAGE
    return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
