"""Batch front end emitting one JSON record per run."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import __version__, anomaly, csint, presets
from .errors import InputError, NumericalError
from .geom import LinkEmbedding
from .sampling import SamplerConfig

EXIT_INPUT = 2
EXIT_NUMERICAL = 3

_DEFAULT_SAMPLES = {
    ("lk", "quadrature"): 512,
    ("writhe", "quadrature"): 8192,
}


def _count(text: str) -> int:
    """Sample counts accept forms like ``2e7``."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if value != int(value) or value < 1:
        raise argparse.ArgumentTypeError(f"need a positive integer, got {text!r}")
    return int(value)


def _lambdas(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad lambda list {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("lambdas must be positive")
    return vals


def _source_args(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", help=f"one of: {', '.join(sorted(presets.PRESETS))}")
    src.add_argument("--file", type=Path, help="link embedding JSON")


def _sampler_args(p, method=None):
    p.add_argument("--method", choices=["monte_carlo", "quasi_mc", "quadrature"], default=method)
    p.add_argument("--samples", type=_count)
    p.add_argument("--seed", type=int)
    p.add_argument("--blocks", type=int)
    p.add_argument("--config", type=Path, help="sampler-config JSON; flags given explicitly win")


def _output_args(p):
    p.add_argument("--json-out", type=Path, help="also append the record to this file")
    p.add_argument("--no-wall-time", action="store_true",
                   help="omit timing so identical runs give identical bytes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="knotcsi", description=__doc__)
    parser.add_argument("--version", action="version", version=f"knotcsi {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    inv = sub.add_parser("invariant", help="linking number, writhe or the degree-2 invariant")
    inv.add_argument("kind", choices=["lk", "writhe", "v2"])
    _source_args(inv)
    _sampler_args(inv)
    inv.add_argument("--components", type=int, nargs=2, default=(0, 1), metavar=("I", "J"))
    _output_args(inv)

    an = sub.add_parser("anomaly", help="vanishing filters and the degree-one anomaly")
    an.add_argument("--degree", type=int)
    an.add_argument("--alpha1", action="store_true")
    an.add_argument("--configs", type=_count, default=64, help="random configurations per diagram")
    _sampler_args(an, "monte_carlo")
    _output_args(an)

    sh = sub.add_parser("shrink", help="writhe under horizontal squashing")
    _source_args(sh)
    sh.add_argument("--lambdas", type=_lambdas, default=[1.0, 0.1, 0.01, 0.001])
    _sampler_args(sh, "quadrature")
    sh.add_argument("--csv", type=Path, help="write the (lambda, estimate, std_error) table here")
    _output_args(sh)
    return parser


def _sampler(args, default_method: str, default_samples: int) -> SamplerConfig:
    base = {}
    if args.config is not None:
        try:
            base = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read sampler config: {exc}") from exc
        if not isinstance(base, dict):
            raise InputError("sampler config must be a JSON object")
        base = SamplerConfig.from_dict(base).to_dict()
    method = args.method or base.get("method") or default_method
    if args.samples is not None:
        samples = args.samples
    elif "samples" in base and base.get("method", method) == method:
        samples = base["samples"]
    else:
        samples = default_samples
    seed = args.seed if args.seed is not None else base.get("seed", 0)
    blocks = args.blocks if args.blocks is not None else base.get("blocks", 15)
    return SamplerConfig(method=method, samples=samples, seed=seed, blocks=blocks,
                         reject_delta=base.get("reject_delta", 1e-9))


def _load(args) -> tuple[LinkEmbedding, dict]:
    if args.preset is not None:
        return presets.preset(args.preset), {"preset": args.preset}
    try:
        return LinkEmbedding.load(args.file), {"file": str(args.file)}
    except OSError as exc:
        raise InputError(f"cannot read {args.file}: {exc}") from exc


def cmd_invariant(args) -> dict:
    link, source = _load(args)
    method = args.method or ("monte_carlo" if args.kind == "v2" else "quadrature")
    cfg = _sampler(args, method, _DEFAULT_SAMPLES.get((args.kind, method), 1_000_000))
    if args.kind == "lk":
        i, j = args.components
        if not (0 <= i < len(link) and 0 <= j < len(link)):
            raise InputError(f"components {i}, {j} out of range for a {len(link)}-component link")
        result = csint.gauss_linking(link, i, j, cfg)
    elif len(link) != 1:
        raise InputError(f"{args.kind} needs a knot, got {len(link)} components")
    elif args.kind == "writhe":
        result = csint.writhe_integral(link, cfg)
    else:
        if cfg.method == "quadrature":
            raise InputError("v2 is estimated by sampling; use monte_carlo or quasi_mc")
        result = csint.degree2_invariant(link, cfg)
    return {"command": f"invariant {args.kind}", "source": source,
            "sampler_config": cfg.to_dict(), "result": result.to_dict()}


def cmd_anomaly(args) -> dict:
    if args.degree is None and not args.alpha1:
        raise InputError("give --degree, --alpha1 or both")
    if args.degree is not None and not 1 <= args.degree <= 5:
        raise InputError("anomaly filters cover degrees 1 to 5")
    result, cfg = {}, None
    if args.degree is not None:
        result["report"] = anomaly.check_vanishing_filters(args.degree, args.configs, args.seed or 0).to_dict()
    if args.alpha1:
        cfg = _sampler(args, "monte_carlo", 1_000_000)
        if cfg.method == "quadrature":
            raise InputError("alpha1 is estimated by sampling")
        result["alpha1"] = anomaly.estimate_alpha1(cfg).to_dict()
    return {"command": "anomaly", "source": {"degree": args.degree},
            "sampler_config": cfg.to_dict() if cfg else None, "result": result}


def cmd_shrink(args) -> dict:
    if args.preset is not None and args.preset not in presets.MORSE_PRESETS:
        raise InputError(f"preset {args.preset!r} has no horizontal-tangent data; "
                         f"use one of {', '.join(sorted(presets.MORSE_PRESETS))}")
    link, source = _load(args)
    if len(link) != 1:
        raise InputError("shrink needs a knot")
    if not presets.horizontal_extrema(link[0]):
        raise InputError("the knot has no horizontal tangents to predict the limit from")
    cfg = _sampler(args, "quadrature", 8192)
    rows = csint.shrink_limit(link, args.lambdas, cfg)
    table = [{"lambda": lam, "value": e.value, "std_error": e.std_error} for lam, e in rows]
    if args.csv is not None:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "estimate", "std_error"])
        for r in table:
            w.writerow([repr(r["lambda"]), repr(r["value"]), repr(r["std_error"])])
        args.csv.write_text(buf.getvalue())
    return {"command": "shrink", "source": source, "sampler_config": cfg.to_dict(),
            "result": {"rows": table, "predicted_limit_mod_1": presets.predicted_shrink_limit(link[0])}}


COMMANDS = {"invariant": cmd_invariant, "anomaly": cmd_anomaly, "shrink": cmd_shrink}


def run(argv=None) -> tuple[int, str]:
    """Parse, execute and return (exit code, JSON line or empty)."""
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    try:
        record = COMMANDS[args.command](args)
    except InputError as exc:
        print(f"knotcsi: error: {exc}", file=sys.stderr)
        return EXIT_INPUT, ""
    except NumericalError as exc:
        print(f"knotcsi: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL, ""
    record["wall_time"] = None if args.no_wall_time else round(time.perf_counter() - start, 6)
    record["version"] = __version__
    line = json.dumps(record, sort_keys=True)
    if args.json_out is not None:
        with args.json_out.open("a") as fh:
            fh.write(line + "\n")
    return 0, line


def main(argv=None) -> int:
    code, line = run(argv)
    if line:
        print(line)
    return code


if __name__ == "__main__":
    sys.exit(main())
