"""``te`` command line: sample, pdf, fit, verify.

Exit codes: 0 success, 1 runtime failure, 2 usage or input-file error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__, density, fileio, mle, sampling, verify
from .errors import DomainError, TEError

SEED_ENV = "TE_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _seed(value):
    if value is None:
        value = os.environ.get(SEED_ENV)
        if value is None:
            raise UsageError(f"no seed given: pass --seed or set {SEED_ENV}")
    try:
        seed = int(value)
    except ValueError:
        raise UsageError(f"seed must be an integer, got {value!r}") from None
    if not 0 <= seed < 2**64:
        raise UsageError("seed must be an unsigned 64-bit integer")
    return seed


def _load_model(path):
    try:
        return fileio.read_model(path)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _load_data(path):
    try:
        return fileio.read_data(path)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def cmd_sample(args, out):
    if args.n < 1:
        raise UsageError(f"-n must be at least 1, got {args.n}")
    seed = _seed(args.seed)
    model = _load_model(args.model)
    stream = sampling.RngStream(seed).substream(args.mode)
    if args.mode == "mixture":
        rows = sampling.sample_mixture(model, args.n, stream)
    else:
        rows = sampling.sample_te(model, args.n, stream)
    provenance = {"seed": seed, "mode": args.mode, "version": __version__}
    fileio.write_data(args.output, model.shape, rows, provenance)
    return 0


def cmd_pdf(args, out):
    model = _load_model(args.model)
    shape, rows, _ = _load_data(args.data)
    if shape != model.shape:
        raise UsageError(f"data shape {list(shape.dims)} does not match model shape {list(model.shape.dims)}")
    if rows.shape[0] == 0:
        return 0
    if args.via_mixture:
        vals = np.atleast_1d(density.pdf_via_mixture(model, rows))
        if args.log:
            with np.errstate(divide="ignore"):
                vals = np.log(vals)
    else:
        vals = np.atleast_1d(density.logpdf(model, rows))
        if not args.log:
            vals = np.exp(vals)
    out.write("row\t" + ("logpdf" if args.log else "pdf") + "\n")
    for i, v in enumerate(vals):
        out.write(f"{i}\t{float(v)!r}\n")
    return 0


def cmd_fit(args, out):
    shape, rows, _ = _load_data(args.data)
    try:
        config = mle.FitConfig(max_sweeps=args.max_sweeps, tol=args.tol, center=not args.no_center,
                               yg_convention=args.yg_convention)
        family = mle.parse_family(args.family)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    report = mle.fit(rows, shape, family, config)
    text = fileio.dumps(_finite(report.to_dict()))
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)
    return 0


def _finite(obj):
    # JSON has no NaN; an undefined log-likelihood is written as null
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_finite(v) for v in obj]
    return obj


def cmd_verify(args, out):
    seed = verify.DEFAULT_SEED if args.seed is None and SEED_ENV not in os.environ else _seed(args.seed)

    def report(res):
        out.write(res.line() + "\n")
        out.flush()

    results = verify.run_suite(args.suite, seed, report)
    passed = sum(r.passed for r in results)
    out.write(f"{passed}/{len(results)} checks passed\n")
    return 0 if passed == len(results) else 1


def build_parser():
    parser = _Parser(prog="te", description="Tensor elliptical distributions")
    parser.add_argument("--version", action="version", version=f"te {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sample", help="draw a sample from a model file")
    p.add_argument("model")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--mode", choices=("representation", "mixture"), default="representation")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("pdf", help="evaluate the density at each data row")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--log", action="store_true")
    p.add_argument("--via-mixture", action="store_true")
    p.set_defaults(func=cmd_pdf)

    p = sub.add_parser("fit", help="maximum-likelihood Kronecker factors")
    p.add_argument("data")
    p.add_argument("--family", default="normal")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-sweeps", type=int, default=200)
    p.add_argument("--no-center", action="store_true")
    p.add_argument("--yg-convention", choices=mle.CONVENTIONS, default="joint-dimension")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("verify", help="run acceptance checks")
    p.add_argument("suite", choices=tuple(verify.SUITES))
    p.add_argument("--seed")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        return args.func(args, out)
    except SystemExit as exc:  # --help and --version
        return int(exc.code or 0)
    except UsageError as exc:
        err.write(f"usage error: {exc}\n")
        return 2
    except TEError as exc:
        err.write(f"error: {exc}\n")
        return 1
    except OSError as exc:
        err.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
