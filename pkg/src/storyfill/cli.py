"""Command-line entry point.

    storyfill <command> [--config file.json] [--workdir DIR] [--set k.ey=value ...]

Commands: make-corpus, synth-data, train-lm, train-scorer, select-prompts,
gen-examples, run-all, serve, analyze, simulate.

Exit codes: 0 success, 1 usage error, 2 data error, 3 step failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_STEP = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, default=None, help="JSON config file")
    parser.add_argument("--workdir", type=Path, default=Path("artifacts"))
    parser.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry (dotted path, JSON value)",
    )
    parser.add_argument("--force", action="store_true", help="ignore step manifests")


def build_parser() -> _Parser:
    parser = _Parser(prog="storyfill", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("make-corpus", help="write the deterministic desk story corpus")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--sentences", type=int, default=2000)
    p.add_argument("--seed", type=int, default=2024)

    for name, help_text in [
        ("synth-data", "corpus -> dataset splits + vocabulary + corpus stats"),
        ("train-lm", "train the causal infilling model"),
        ("train-scorer", "train the masked difficulty model"),
        ("select-prompts", "filter, score, and label 3-word prompts"),
        ("gen-examples", "generate 5 filtered examples per labeled prompt"),
        ("run-all", "run every pipeline step, skipping fresh ones"),
    ]:
        p = sub.add_parser(name, help=help_text)
        _common(p)

    p = sub.add_parser("serve", help="run the authoring/judgment HTTP service")
    _common(p)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument(
        "--stub-feedback",
        action="store_true",
        help="serve without a model; story feedback is empty",
    )

    p = sub.add_parser("analyze", help="evaluation report from exported blocks/responses")
    _common(p)
    p.add_argument("--blocks", type=Path, default=None, help="blocks JSONL (default workdir/blocks.jsonl)")
    p.add_argument("--responses", type=Path, default=None)
    p.add_argument("--out", type=Path, default=None, help="report basename (default workdir/report)")

    p = sub.add_parser("simulate", help="synthetic-author replay with injected effects")
    _common(p)
    p.add_argument("--authors", type=int, default=22)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--post-shift-points", type=float, default=0.0,
                   help="target Post preference-rate gain, e.g. 0.10")
    p.add_argument("--influence-strength", type=float, default=0.0)
    p.add_argument("--gap-effect", type=float, default=0.0,
                   help="extra mean gap words for hard prompts")
    p.add_argument("--noise-sd", type=float, default=0.5)
    return parser


def main(argv: list[str] | None = None) -> int:
    import logging

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except SystemExit:
        raise
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ValueError, KeyError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # step-level failure
        print(f"step failure: {exc}", file=sys.stderr)
        return EXIT_STEP


def _make_pipeline(args):
    from .pipeline import Pipeline, load_config

    config = load_config(args.config, args.overrides)
    return Pipeline(config, args.workdir)


def _dispatch(args) -> int:
    from .pipeline import StepFailure

    if args.command == "make-corpus":
        from .fixtures import write_corpus_dir

        out = write_corpus_dir(args.out, args.sentences, args.seed)
        print(f"wrote corpus to {out}")
        return EXIT_OK

    if args.command in {"synth-data", "train-lm", "train-scorer", "select-prompts",
                        "gen-examples", "run-all"}:
        pipeline = _make_pipeline(args)
        try:
            if args.command == "run-all":
                ran = pipeline.run_all(force=args.force)
                for step, did_run in ran.items():
                    print(f"{step}: {'ran' if did_run else 'up to date'}")
            else:
                method = getattr(pipeline, args.command.replace("-", "_"))
                did_run = method(force=args.force)
                print(f"{args.command}: {'ran' if did_run else 'up to date'}")
        except StepFailure as exc:
            print(f"step failure: {exc}", file=sys.stderr)
            return EXIT_STEP
        return EXIT_OK

    if args.command == "serve":
        return _serve(args)
    if args.command == "analyze":
        return _analyze(args)
    if args.command == "simulate":
        return _simulate(args)
    raise AssertionError(f"unhandled command {args.command}")


def _serve(args) -> int:
    import uvicorn

    from .api import create_app
    from .eventlog import EventLog
    from .service import ExperimentService, ServiceConfig

    pipeline = _make_pipeline(args)
    assets = pipeline.load_prompt_assets()
    if not assets:
        print("data error: no prompt assets; run gen-examples first", file=sys.stderr)
        return EXIT_DATA
    svc_cfg = pipeline.config["service"]
    continuation = None if args.stub_feedback else pipeline.make_continuation_fn()
    service = ExperimentService(
        prompt_pool=assets,
        config=ServiceConfig(
            judgment_subset_size=svc_cfg["judgment_subset_size"],
            raters_per_group=svc_cfg["raters_per_group"],
            seed=svc_cfg["seed"],
        ),
        continuation_fn=continuation,
        log=EventLog(pipeline.path("events.jsonl")),
    )
    static_dir = None
    frontend = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if frontend.exists():
        static_dir = str(frontend)
    app = create_app(service, static_dir=static_dir)
    port = args.port if args.port is not None else svc_cfg["port"]
    uvicorn.run(app, host=args.host, port=port)
    return EXIT_OK


def _analyze(args) -> int:
    from .analytics import read_blocks, read_responses, report

    pipeline = _make_pipeline(args)
    blocks_path = args.blocks or pipeline.path("blocks.jsonl")
    responses_path = args.responses or pipeline.path("responses.jsonl")
    blocks = read_blocks(blocks_path)
    responses = read_responses(responses_path)
    analysis_cfg = pipeline.config["analysis"]
    embedder = _make_embedder(pipeline, analysis_cfg["embedder"])
    rep = report(
        blocks,
        responses,
        embedder,
        n_resamples=analysis_cfg["n_resamples"],
        seed=analysis_cfg["seed"],
    )
    out_base = args.out or pipeline.path("report")
    Path(f"{out_base}.json").write_text(rep.to_json() + "\n")
    Path(f"{out_base}.txt").write_text(rep.render_text() + "\n")
    print(rep.render_text())
    if rep.empty:
        print("no responses: report contains empty-table markers", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


def _make_embedder(pipeline, kind: str):
    if kind == "stub":
        from .simulate import hashed_bag_embedder

        return hashed_bag_embedder()
    if kind == "masked":
        from .checkpoint import load_checkpoint

        model = load_checkpoint(pipeline.path("masked.ckpt")).to_model(pipeline._load_vocab())
        return model.embed
    raise ValueError(f"unknown embedder kind {kind!r}")


def _simulate(args) -> int:
    from .analytics import report, write_blocks, write_responses
    from .simulate import (
        SyntheticAuthorModel,
        hashed_bag_embedder,
        latent_shift_for_rate_gap,
        simulate,
    )

    pipeline = _make_pipeline(args)
    model = SyntheticAuthorModel(
        post_shift=latent_shift_for_rate_gap(args.post_shift_points),
        influence_strength=args.influence_strength,
        difficulty_gap_effect=args.gap_effect,
        noise_sd=args.noise_sd,
    )
    blocks, responses = simulate(model, n_authors=args.authors, seed=args.seed)
    write_blocks(blocks, pipeline.path("blocks.jsonl"))
    write_responses(responses, pipeline.path("responses.jsonl"))
    rep = report(
        blocks,
        responses,
        hashed_bag_embedder(),
        n_resamples=pipeline.config["analysis"]["n_resamples"],
        seed=pipeline.config["analysis"]["seed"],
    )
    Path(pipeline.path("report.json")).write_text(rep.to_json() + "\n")
    Path(pipeline.path("report.txt")).write_text(rep.render_text() + "\n")
    print(rep.render_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
