"""Command-line front end.

Exit codes: 0 success, 2 precondition error, 3 parse error, 64 usage error
(unknown subcommand or bad flags).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import antibunching as ab
from . import fock, landscape, stats, witness
from .errors import NonclassicalError, PreconditionError, SpecParseError, UnknownKindError

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_PARSE = 3
EXIT_USAGE = 64

STATE_KINDS = ("fock", "coherent", "thermal", "superposition", "density")
SUBCOMMANDS = ("stats", "classicality", "g2", "classical-process", "k-landscape")

_STATE_FIELDS = {
    "fock": ("n",),
    "coherent": ("alpha_re",),
    "thermal": ("nbar",),
    "superposition": ("coeffs",),
    "density": ("matrix",),
}


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class StateSpec:
    kind: str
    dim: int
    params: dict = field(default_factory=dict)

    def build(self) -> fock.State:
        space = fock.make_space(self.dim)
        p = self.params
        tail_tol = p.get("tail_tol", fock.DEFAULT_TAIL_TOL)
        if self.kind == "fock":
            return fock.fock_state(space, p["n"])
        if self.kind == "coherent":
            return fock.coherent_state(space, complex(p["alpha_re"], p.get("alpha_im", 0.0)), tail_tol)
        if self.kind == "thermal":
            return fock.thermal_state(space, p["nbar"], tail_tol)
        if self.kind == "superposition":
            return fock.superposition(space, p["coeffs"])
        return fock.density_operator(space, p["matrix"])


def _load_json(text: str, what: str):
    if text.startswith("@"):
        text = _read_file(text[1:])
    elif not text.lstrip().startswith(("{", "[")) and os.path.isfile(text):
        text = _read_file(text)
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecParseError(f"{what} is not valid JSON: {exc}") from None


def _read_file(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SpecParseError(f"cannot read {path}: {exc}") from None


def _complex_entry(v, where: str) -> complex:
    if isinstance(v, bool):
        raise SpecParseError(f"{where}: expected a number", {where: "not a number"})
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2 and all(
        isinstance(c, (int, float)) and not isinstance(c, bool) for c in v
    ):
        return complex(v[0], v[1])
    raise SpecParseError(f"{where}: expected a number or [re, im]", {where: "bad complex value"})


def _number(obj: dict, key: str, errors: dict, integer=False):
    v = obj.get(key)
    ok = isinstance(v, int) if integer else isinstance(v, (int, float))
    if v is None:
        errors[key] = "missing"
    elif isinstance(v, bool) or not ok:
        errors[key] = "expected an integer" if integer else "expected a number"
    return v


def parse_state_spec(text: str) -> StateSpec:
    """Validate a state-spec JSON document; field errors are collected together."""
    obj = _load_json(text, "state spec")
    if not isinstance(obj, dict):
        raise SpecParseError("state spec must be a JSON object")
    kind = obj.get("kind")
    if kind not in STATE_KINDS:
        raise UnknownKindError(f"unknown state kind {kind!r}; expected one of {STATE_KINDS}", {"kind": "unknown"})
    errors: dict[str, str] = {}
    dim = _number(obj, "dim", errors, integer=True)
    params: dict[str, Any] = {}
    if kind == "fock":
        params["n"] = _number(obj, "n", errors, integer=True)
    elif kind == "coherent":
        params["alpha_re"] = _number(obj, "alpha_re", errors)
        if "alpha_im" in obj:
            params["alpha_im"] = _number(obj, "alpha_im", errors)
    elif kind == "thermal":
        params["nbar"] = _number(obj, "nbar", errors)
    elif kind == "superposition":
        coeffs = obj.get("coeffs")
        if not isinstance(coeffs, list) or not coeffs:
            errors["coeffs"] = "missing or not a non-empty list"
        else:
            try:
                c = [_complex_entry(v, f"coeffs[{i}]") for i, v in enumerate(coeffs)]
            except SpecParseError as exc:
                errors.update(exc.fields)
            else:
                if not np.all(np.isfinite(c)) or np.linalg.norm(c) == 0:
                    errors["coeffs"] = "not normalizable (all zero or non-finite)"
                params["coeffs"] = c
    elif kind == "density":
        rows = obj.get("matrix")
        if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
            errors["matrix"] = "missing or not a list of rows"
        else:
            try:
                params["matrix"] = [
                    [_complex_entry(v, f"matrix[{i}][{j}]") for j, v in enumerate(r)]
                    for i, r in enumerate(rows)
                ]
            except SpecParseError as exc:
                errors.update(exc.fields)
    if kind in ("coherent", "thermal") and "tail_tol" in obj:
        params["tail_tol"] = _number(obj, "tail_tol", errors)
    extra = set(obj) - {"kind", "dim", "tail_tol", "alpha_im", *_STATE_FIELDS[kind]}
    for key in sorted(extra):
        errors[key] = "unknown field"
    if errors:
        listing = ", ".join(f"{k}: {v}" for k, v in sorted(errors.items()))
        raise SpecParseError(f"invalid {kind} spec ({listing})", errors)
    return StateSpec(kind, dim, params)


def parse_moments(text: str) -> witness.MomentSequence:
    """Moments as a JSON list or comma/whitespace separated numbers."""
    raw = text.strip()
    if raw.startswith("["):
        try:
            vals = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise SpecParseError(f"moment list is not valid JSON: {exc}") from None
    else:
        vals = [tok for row in csv.reader(io.StringIO(raw)) for cell in row for tok in cell.split()]
    try:
        m = np.array([float(v) for v in vals])
    except (TypeError, ValueError):
        raise SpecParseError("moments must be numbers") from None
    return witness.MomentSequence(m)


def _emitter_from_spec(obj: dict) -> ab.EmitterModel:
    kind = obj.get("kind")
    if kind not in ab.EMITTER_KINDS:
        raise UnknownKindError(f"unknown emitter kind {kind!r}; expected one of {ab.EMITTER_KINDS}")
    try:
        return ab.EmitterModel(
            kind=kind,
            gamma=float(obj.get("gamma", 1.0)),
            omega_r=float(obj.get("omega_r", 0.0)),
            dim=obj.get("dim"),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise SpecParseError(f"bad emitter model: {exc}") from None


def _process_from_spec(obj: dict) -> ab.ClassicalProcessModel:
    kind = obj.get("kind")
    if kind not in ab.PROCESS_KINDS:
        raise UnknownKindError(f"unknown process kind {kind!r}; expected one of {ab.PROCESS_KINDS}")
    kwargs: dict[str, Any] = {"kind": kind}
    rate = obj.get("rate", obj.get("gamma"))
    if rate is not None:
        kwargs["rate"] = rate
    for key in ("rate_up", "rate_down", "sigma", "offset"):
        if key in obj:
            kwargs[key] = obj[key]
    if "levels" in obj:
        kwargs["levels"] = tuple(obj["levels"])
    try:
        return ab.ClassicalProcessModel(**kwargs)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, PreconditionError):
            raise
        raise SpecParseError(f"bad process model: {exc}") from None


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _positive(value, name):
    if value is not None and not value > 0:
        raise PreconditionError(f"{name} must be positive, got {value}")
    return value


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonclassical", description="Non-classicality diagnostics for single-mode light.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("stats", help="K, Mandel Q and sub-Poisson test for a state")
    p.add_argument("--state", required=True, help="state-spec JSON (text, @file or path)")
    p.add_argument("--tol", type=float, default=stats.DEFAULT_SUB_POISSON_TOL)
    p.add_argument("--out")

    p = sub.add_parser("classicality", help="Hankel witness and classical measure fit")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--state")
    src.add_argument("--moments", help="file with factorial moments m_0..m_k (JSON list or CSV); '-' for stdin")
    p.add_argument("--order", type=int, default=witness.DEFAULT_ORDER)
    p.add_argument("--grid", type=int, default=witness.DEFAULT_GRID_POINTS)
    p.add_argument("--tol", type=float, default=witness.DEFAULT_PSD_TOL)
    p.add_argument("--fit-tol", type=float, default=witness.DEFAULT_FIT_TOL)
    p.add_argument("--out")

    p = sub.add_parser("g2", help="stationary P(tau)/g2(tau) of a quantum emitter")
    p.add_argument("--model", required=True)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-points", type=int)
    p.add_argument("--tol", type=float, default=ab.DEFAULT_DETECT_TOL)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("classical-process", help="Monte Carlo P(tau) of a classical intensity")
    p.add_argument("--model", required=True)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-points", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--tol", type=float, default=ab.DEFAULT_DETECT_TOL)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")

    p = sub.add_parser("k-landscape", help="minimize/scan K over distributions on a support")
    p.add_argument("--support", required=True, help="comma-separated occupation numbers")
    p.add_argument("--resolution", type=int, default=1001)
    p.add_argument("--method", choices=("vertex", "grid", "pgd"), default="vertex")
    p.add_argument("--scan-out", help="write the barycentric K scan as CSV")
    p.add_argument("--out")
    return parser


def _series_json(series: ab.CorrelationSeries, report: ab.AntibunchingReport, model: dict) -> dict:
    return {
        "model": model,
        "report": report.to_dict(),
        "schwarz_violation": bool(report.antibunched),
        "mean_intensity": series.mean_intensity,
        "tau": series.tau.tolist(),
        "p_raw": series.p_raw.tolist(),
        "g2": series.g2.tolist(),
        "stderr": None if series.stderr is None else series.stderr.tolist(),
    }


def _cmd_stats(args) -> str:
    _positive(args.tol, "--tol")
    state = parse_state_spec(args.state).build()
    _, report = stats.is_sub_poisson(state, args.tol)
    return _dump_json(report.to_dict())


def _cmd_classicality(args) -> str:
    _positive(args.tol, "--tol")
    _positive(args.fit_tol, "--fit-tol")
    if args.state is not None:
        state = parse_state_spec(args.state).build()
        moments = witness.factorial_moments(state, args.order)
    else:
        moments = parse_moments(_read_file(args.moments))
    report = witness.hankel_witness(moments, args.tol)
    fit = witness.fit_classical_measure(moments, n_grid=args.grid, tol=args.fit_tol)
    out = report.to_dict()
    out["moments"] = moments.moments.tolist()
    out["fit"] = fit.to_dict()
    return _dump_json(out)


def _tau_from(args, spec, default_max, default_points):
    tau_max = args.tau_max if args.tau_max is not None else spec.get("tau_max", default_max)
    points = args.tau_points if args.tau_points is not None else spec.get("tau_points", default_points)
    if not isinstance(points, int) or isinstance(points, bool):
        raise SpecParseError("tau_points must be an integer")
    return ab.tau_grid(float(tau_max), points)


def _cmd_g2(args) -> str:
    spec = _load_json(args.model, "model spec")
    if not isinstance(spec, dict):
        raise SpecParseError("model spec must be a JSON object")
    model = _emitter_from_spec(spec)
    taus = _tau_from(args, spec, 10.0 / model.gamma, 101)
    series = ab.g2_correlation(model, taus)
    if args.format == "csv":
        return series.to_csv()
    report = ab.detect_antibunching(series, args.tol)
    return _dump_json(_series_json(series, report, spec))


def _cmd_classical(args) -> str:
    spec = _load_json(args.model, "model spec")
    if not isinstance(spec, dict):
        raise SpecParseError("model spec must be a JSON object")
    model = _process_from_spec(spec)
    taus = _tau_from(args, spec, 3.0 / model.rate, 31)
    samples = args.samples if args.samples is not None else spec.get("samples", 100_000)
    seed = args.seed if args.seed is not None else spec.get("seed", 0)
    if not isinstance(samples, int) or not isinstance(seed, int):
        raise SpecParseError("samples and seed must be integers")
    series = ab.simulate_classical_intensity(model, taus, samples, seed, args.workers)
    if args.format == "csv":
        return series.to_csv()
    report = ab.detect_antibunching(series, args.tol)
    return _dump_json(_series_json(series, report, spec))


def _cmd_landscape(args) -> str:
    support = landscape.SupportSet.parse(args.support)
    method = {"pgd": "projected-gradient"}.get(args.method, args.method)
    result = landscape.minimize_k(support, method, args.resolution)
    if args.scan_out:
        pts, vals = landscape.scan_k(support, args.resolution)
        with open(args.scan_out, "w", encoding="utf-8", newline="") as fh:
            fh.write(landscape.scan_to_csv(support, pts, vals))
    return _dump_json(result.to_dict())


_COMMANDS = {
    "stats": _cmd_stats,
    "classicality": _cmd_classicality,
    "g2": _cmd_g2,
    "classical-process": _cmd_classical,
    "k-landscape": _cmd_landscape,
}


def run(argv=None, stdout=None, stderr=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    if not argv or argv[0] not in SUBCOMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            stdout.write(parser.format_help())
            return EXIT_OK
        stderr.write(parser.format_usage())
        if argv:
            stderr.write(f"unknown subcommand {argv[0]!r}\n")
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        stderr.write(parser.format_usage())
        stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help inside a subcommand
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        text = _COMMANDS[args.command](args)
    except SpecParseError as exc:
        stderr.write(f"parse error [{exc.code}]: {exc}\n")
        return EXIT_PARSE
    except NonclassicalError as exc:
        stderr.write(f"error [{exc.code}]: {exc}\n")
        return EXIT_PRECONDITION
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_OK


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
