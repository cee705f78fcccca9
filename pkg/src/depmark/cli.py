"""Command-line interface.

Exit status: 0 success, 2 invalid input, 3 reproduction outside tolerance,
4 file-system error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import config
from .catalog import EXAMPLES, example_spec
from .characterize import classify, classify_empirical
from .errors import IoError, ValidationError
from .estimate import estimate_all
from .exact import exact_reports
from .figures import emit_figure_data
from .io import dataset_to_csv, load_model, model_to_spec, read_dataset
from .markov import MarkovDataset, sample_markov, transform_markov
from .model import Dataset, sample_joint
from .reproduce import run_reproduction

MEASURES = ("xi", "r2", "lambda")


def _common(suppress: bool) -> argparse.ArgumentParser:
    """Shared flags; on subcommands they only override when given."""
    def default(value):
        return argparse.SUPPRESS if suppress else value

    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default(config.DEFAULT_SEED), help="random seed (default 42)")
    p.add_argument("--out", default=default(None), help="output directory")
    p.add_argument("--format", choices=("json", "csv"), default=default(None), help="output format")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="depmark",
        description="Directed dependence measures xi, R^2 and Lambda: exact values, "
        "Markov-product representations, estimators and characterizations.",
        parents=[_common(False)],
    )
    common = [_common(True)]
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("example", parents=common, help="list or show catalog models")
    ex.add_argument("action", choices=("list", "show"))
    ex.add_argument("id", nargs="?")

    sp = sub.add_parser("sample", parents=common, help="draw (x, y) rows from a model")
    sp.add_argument("model", help="catalog id or model JSON file")
    sp.add_argument("-n", type=int, default=1000)

    mk = sub.add_parser("markov", parents=common, help="draw (x, y, y') rows of the Markov product")
    mk.add_argument("model")
    mk.add_argument("-n", type=int, default=1000)
    mk.add_argument("--transform", action="store_true", help="apply the distributional transform F_Y")

    exa = sub.add_parser("exact", parents=common, help="exact xi, R^2, Lambda by both paths")
    exa.add_argument("model")

    est = sub.add_parser("estimate", parents=common, help="nearest-neighbor estimates from a CSV")
    est.add_argument("--in", dest="infile", required=True)
    est.add_argument("--measures", default="xi,r2,lambda")
    est.add_argument("--clamp", action="store_true", help="clamp reported values to [0, 1]")

    ch = sub.add_parser("check", parents=common, help="characterize a model or a Markov sample")
    src = ch.add_mutually_exclusive_group(required=True)
    src.add_argument("--model")
    src.add_argument("--in", dest="infile")
    ch.add_argument("--transformed", action="store_true", help="input values are already F_Y-transformed")

    fig = sub.add_parser("figure", parents=common, help="emit scatter data for a figure")
    fig.add_argument("figure", type=int, choices=range(1, 8), metavar="{1..7}")
    fig.add_argument("-n", type=int, default=None, help="sample size (1000; 2000 for figure 4)")

    rp = sub.add_parser("reproduce", parents=common, help="run the full catalog check")
    rp.add_argument("-n", type=int, default=100_000)
    return parser


def _emit(args, payload, name: str, csv_text: str | None = None) -> None:
    """Write JSON (or CSV text when requested and available) to stdout or
    into ``--out``."""
    if args.format == "csv" and csv_text is not None:
        text, ext = csv_text, "csv"
    else:
        text, ext = json.dumps(payload, indent=2) + "\n", "json"
    if args.out:
        out = Path(args.out)
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / f"{name}.{ext}").write_text(text)
        except OSError as exc:
            raise IoError(f"cannot write to {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def _data_payload(data) -> dict:
    out = {"x": data.x.tolist(), "y": data.y.tolist()}
    if isinstance(data, MarkovDataset):
        out["yprime"] = data.yprime.tolist()
        out["transformed"] = data.transformed
    out["seed"] = data.seed
    return out


def _rows_csv(rows: list[dict]) -> str:
    keys = list(rows[0])
    lines = [",".join(keys)]
    for r in rows:
        lines.append(",".join("" if r[k] is None else (repr(r[k]) if isinstance(r[k], float) else str(r[k])) for k in keys))
    return "\n".join(lines) + "\n"


def _cmd_example(args) -> int:
    if args.action == "list":
        rows = [{"id": k, "description": v} for k, v in EXAMPLES.items()]
        text = "".join(f"{r['id']}\t{r['description']}\n" for r in rows)
        if args.format == "json" or args.out:
            _emit(args, rows, "examples")
        else:
            sys.stdout.write(text)
        return 0
    if not args.id:
        raise ValidationError("example show needs an id")
    spec = model_to_spec(load_model(args.id)) if args.id not in EXAMPLES else example_spec(args.id)
    _emit(args, spec, args.id)
    return 0


def _cmd_sample(args) -> int:
    data = sample_joint(load_model(args.model), args.n, args.seed)
    if args.format == "json":
        _emit(args, _data_payload(data), "sample")
    else:
        args.format = "csv"
        _emit(args, None, "sample", dataset_to_csv(data))
    return 0


def _cmd_markov(args) -> int:
    model = load_model(args.model)
    data = sample_markov(model, args.n, args.seed)
    if args.transform:
        data = transform_markov(model, data)
    if args.format == "json":
        _emit(args, _data_payload(data), "markov")
    else:
        args.format = "csv"
        _emit(args, None, "markov", dataset_to_csv(data))
    return 0


def _cmd_exact(args) -> int:
    reports = [r.to_dict() for r in exact_reports(load_model(args.model))]
    flat = [{k: v for k, v in r.items() if k != "notes"} for r in reports]
    _emit(args, reports, "exact", _rows_csv(flat))
    return 0


def _cmd_estimate(args) -> int:
    measures = [m.strip() for m in args.measures.split(",") if m.strip()]
    unknown = set(measures) - set(MEASURES)
    if unknown or not measures:
        raise ValidationError(f"unknown measures {sorted(unknown)}; choose from {', '.join(MEASURES)}")
    data = read_dataset(args.infile)
    if isinstance(data, MarkovDataset):
        data = Dataset(data.x, data.y)
    result = estimate_all(data, args.seed, measures, clamp=args.clamp)
    _emit(args, result, "estimate", _rows_csv([result]))
    return 0


def _cmd_check(args) -> int:
    if args.model:
        report = classify(load_model(args.model))
    else:
        data = read_dataset(args.infile, transformed=True if args.transformed else None)
        if not isinstance(data, MarkovDataset):
            raise ValidationError("check --in needs a Markov CSV with a yprime column")
        report = classify_empirical(data)
    _emit(args, report.to_dict(), "check")
    return 0


def _cmd_figure(args) -> int:
    n = args.n if args.n is not None else (2000 if args.figure == 4 else 1000)
    paths = emit_figure_data(args.figure, n, args.seed, args.out or "figures")
    for p in paths:
        print(p)
    return 0


def _cmd_reproduce(args) -> int:
    out = args.out or "reproduction"
    rows, problems = run_reproduction(out, n=args.n, seed=args.seed)
    print((Path(out) / "summary.md").read_text(), end="")
    return 3 if problems else 0


COMMANDS = {
    "example": _cmd_example,
    "sample": _cmd_sample,
    "markov": _cmd_markov,
    "exact": _cmd_exact,
    "estimate": _cmd_estimate,
    "check": _cmd_check,
    "figure": _cmd_figure,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
