"""Command-line entry points: train, evaluate, predict, serve.

Exit codes: 0 success, 1 runtime failure (bad data, broken artifact),
2 usage error (argparse). Every command is deterministic given --seed.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import persistence
from .metrics import render_report
from .pipelines import DISEASES, evaluate_artifact, resolve_settings, train_disease
from .service.advice import advice_for
from .service.predictor import predict_image, predict_tabular


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="medpredict",
        description="Train, evaluate and serve disease prediction models.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model and save its artifact")
    train.add_argument("--disease", required=True, choices=DISEASES)
    train.add_argument("--data", required=True, help="CSV file (diabetes, heart) or image folder root (lung, brain)")
    train.add_argument("--model-out", required=True, help="artifact output path")
    train.add_argument("--config", help="INI file with a [train] section of hyperparameter overrides")
    train.add_argument("--seed", type=int, help="random seed (default 42)")
    train.add_argument("--scale", choices=("desk", "full"), help="desk: reduced size/epochs; full: native size, full networks")

    evaluate = sub.add_parser("evaluate", help="print a classification report for a saved model on labeled data")
    evaluate.add_argument("--model", required=True)
    evaluate.add_argument("--data", required=True)

    predict = sub.add_parser("predict", help="predict one case from a saved model")
    predict.add_argument("--model", required=True)
    predict.add_argument("--json", dest="json_input", help="feature JSON, inline or a file path")
    predict.add_argument("--image", help="path to a PNG or JPEG image")

    serve = sub.add_parser("serve", help="start the HTTP prediction service")
    serve.add_argument("--models-dir", required=True)
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--static-dir", help="directory of web UI files to serve at /")

    return parser


def _cmd_train(args) -> int:
    settings = resolve_settings(args.config, seed=args.seed, scale=args.scale)
    result = train_disease(args.disease, args.data, settings)
    print(render_report(result.report), end="")
    size = persistence.save(
        result.model, result.schema, result.scaler, args.model_out, disease_tag=args.disease
    )
    print(f"saved {args.disease} model ({size} bytes) to {args.model_out}")
    return 0


def _cmd_evaluate(args) -> int:
    artifact = persistence.load(args.model)
    _, rep = evaluate_artifact(artifact, args.data)
    print(render_report(rep), end="")
    return 0


def _read_json_input(raw: str) -> dict:
    if os.path.exists(raw):
        with open(raw) as fh:
            raw = fh.read()
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"--json is neither an existing file nor valid JSON: {exc}") from exc


def _cmd_predict(args, parser: argparse.ArgumentParser) -> int:
    if (args.json_input is None) == (args.image is None):
        parser.error("predict needs exactly one of --json or --image")
    artifact = persistence.load(args.model)
    if args.json_input is not None:
        if artifact.schema.input_kind != "tabular":
            raise ValueError("this model takes an image upload; use --image")
        label, probability = predict_tabular(artifact, _read_json_input(args.json_input))
    else:
        if artifact.schema.input_kind != "image":
            raise ValueError("this model takes JSON features; use --json")
        with open(args.image, "rb") as fh:
            label, probability = predict_image(artifact, fh.read())
    print(f"label: {label}")
    print(f"probability: {probability!r}")
    print(f"advice: {advice_for(artifact.disease_tag, label)}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    app = create_app(args.models_dir, static_dir=args.static_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "train":
            return _cmd_train(args)
        if args.command == "evaluate":
            return _cmd_evaluate(args)
        if args.command == "predict":
            return _cmd_predict(args, parser)
        return _cmd_serve(args)
    except (ValueError, OSError, persistence.ModelFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
