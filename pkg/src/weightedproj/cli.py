"""Command-line entry point: ``wproj <command> ...``.

Reports are JSON by default (sorted keys, no timestamps, so identical
inputs give byte-identical output), with ``--output csv`` and
``--output text`` as alternatives.  Exit status: 0 on success, 2 on
argument errors, 3 on numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cohomology import CohomologyRing, complex_profile, real_profile
from .core import ArgumentError, DomainError, WeightVector, as_weights
from .flow import TOL_FIX, IntegrationError, find_fixed_points, min_class_separation
from .flow import distinct_classes as fixed_point_classes
from .hamiltonians import degree_report, from_spec, hamiltonian_bound, quadratic
from .spectrum import counting_certificate, eigenvalues_in
from .variational import CHORD, PERIODIC, TOL_NEWTON, FourierLoop, enumerate_solutions, ladder, observed_orders

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC = 0, 2, 3

COMMANDS = ("cohomology", "spectrum", "certify", "fixed-points", "variational", "intersections")

DEFAULT_TOLERANCES = {
    "fix": TOL_FIX,
    "newton": TOL_NEWTON,
    "class": 1e-6,
    "orbit": 1e-8,
    "sphere": 1e-10,
    "conserve": 1e-9,
}

EVEN_WEIGHT_REFUSAL = (
    "refusing: chord counting needs every weight odd (weights {weights} include even {even}). "
    "With an even weight the Z_2 action on chords has fixed points and the lower bound "
    "#(phi(RP^n(q)) cap RP^n(q)) >= n+1 is an open question, not a theorem."
)


class NonConvergence(RuntimeError):
    pass


@dataclass
class RunConfig:
    weights: WeightVector
    command: str
    tolerances: dict[str, float] = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    output: str = "json"
    seed: int = 0
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ArgumentError(f"unknown command {self.command!r}")
        if self.output not in ("json", "csv", "text"):
            raise ArgumentError(f"unknown output format {self.output!r}")
        for name, value in self.tolerances.items():
            if not value > 0:
                raise ArgumentError(f"tolerance {name} must be positive, got {value}")

    def as_dict(self) -> dict:
        return {
            "weights": list(self.weights.q),
            "command": self.command,
            "output": self.output,
            "seed": self.seed,
            "options": self.options,
        }


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    return x


# --- command bodies: each returns (result dict, csv rows, text lines) ---


def _cohomology(cfg: RunConfig):
    q = cfg.weights
    ring = CohomologyRing.of(q)
    sb, cl = complex_profile(q)
    rp = real_profile(q)
    result = {
        "l_table": {str(k): v for k, v in enumerate(ring.l, start=1)},
        "structure_constants": ring.matrix(),
        "complex_profile": {"sb": sb, "cl": cl},
        "real_profile": {
            "r": rp.r,
            "is_manifold": rp.is_manifold,
            "sb": rp.sb,
            "cl": rp.cl,
            "suspension_base": rp.suspension_base,
        },
    }
    if cfg.options.get("verbose"):
        result["boundary_cases"] = [
            {"k": k, "j": j, "value": ring.c[(k, j)], "note": "boundary case k+j=n: product rule and zero rule overlap"}
            for k, j in ring.boundary_pairs()
        ]
    rows = [["k", "l_k"]] + [[k, v] for k, v in enumerate(ring.l, start=1)]
    text = [
        f"CP^{q.n}({q}):  l = {list(ring.l)}",
        f"  products gamma_k gamma_j: {ring.matrix()}",
        f"  SB = {sb}, CL = {cl}",
        f"RP^{q.n}({q}):  r = {rp.r}, manifold = {rp.is_manifold}, SB = {rp.sb}, CL = {rp.cl}",
    ]
    return result, rows, text


def _spectrum(cfg: RunConfig):
    lo, hi = cfg.options["interval"]
    lines = eigenvalues_in(cfg.weights, lo, hi, half_open=not cfg.options.get("closed", False))
    result = {"interval": [lo, hi], "half_open": not cfg.options.get("closed", False), "count": len(lines),
              "lines": [ln.as_dict() for ln in lines]}
    rows = [["k", "j", "q_j", "mu"]] + [[ln.k, ln.j, ln.q_j, repr(ln.mu)] for ln in lines]
    text = [f"{len(lines)} lines in {'(' if result['half_open'] else '['}{lo}, {hi}]"] + [
        f"  mu = 2pi*{ln.k}/{ln.q_j} = {ln.mu:.12g}  (j={ln.j})" for ln in lines
    ]
    return result, rows, text


def _certify(cfg: RunConfig):
    M = cfg.options["bound"]
    cert = counting_certificate(cfg.weights, M, s=cfg.options.get("s"))
    result = cert.as_dict()
    rows = [["field", "value"]] + [[k, v] for k, v in result.items() if k != "notes"]
    text = [f"{k}: {v}" for k, v in result.items()]
    return result, rows, text


def _load_hamiltonian(cfg: RunConfig):
    spec = cfg.options.get("spec")
    if spec is not None:
        report = degree_report(spec)
        return from_spec(spec), report
    a = cfg.options.get("quadratic")
    if a is None:
        raise ArgumentError("need --spec FILE or --quadratic a1,...,a_{n+1}")
    H = quadratic(a, cfg.weights)
    return H, degree_report(H.to_spec())


def _fixed_points(cfg: RunConfig):
    H, report = _load_hamiltonian(cfg)
    M = hamiltonian_bound(H)
    cert = counting_certificate(H.q, M)
    records = find_fixed_points(
        H,
        n_seeds=cfg.options.get("seeds"),
        tol_fix=cfg.tolerances["fix"],
        workers=cfg.options.get("workers", 1),
    )
    if not records:
        raise NonConvergence("no seed converged to a fixed point")
    classes = fixed_point_classes(records, tol=cfg.tolerances["class"])
    result = {
        "term_checks": report,
        "records": [r.as_dict() for r in records],
        "count": len(records),
        "distinct_lambda_classes": len(classes),
        "min_class_separation": min_class_separation(records),
        "hamiltonian_bound_M": M,
        "certificate": cert.as_dict(),
        "lower_bound": cert.conclusion,
    }
    rows = [["lambda", "lambda_class", "residual", "rep"]] + [
        [repr(r.lam), repr(r.lambda_class), repr(r.residual), json.dumps(r.as_dict()["rep"])] for r in records
    ]
    text = [f"{len(records)} fixed points (certified lower bound {cert.conclusion})"] + [
        f"  lambda_class={r.lambda_class:.10f} residual={r.residual:.2e}" for r in records
    ]
    return result, rows, text


def _variational(cfg: RunConfig, mode: str | None = None):
    H, report = _load_hamiltonian(cfg)
    mode = mode or cfg.options.get("mode", PERIODIC)
    m = cfg.options.get("m", 16)
    enum = enumerate_solutions(
        H,
        mode,
        m=m,
        budget=cfg.options.get("budget", 256),
        rng_seed=cfg.seed,
        tol=cfg.tolerances["newton"],
        workers=cfg.options.get("workers", 1),
    )
    if not enum.solutions:
        raise NonConvergence("no seed converged to a critical point")
    result = {
        "term_checks": report,
        "mode": mode,
        "m": m,
        "solutions": [s.as_dict() for s in enum.solutions],
        "classes": enum.classes,
        "distinct_classes": enum.count,
        "bound": enum.bound,
        "seeds_tried": enum.seeds_tried,
        "converged": enum.converged,
        "summary": enum.summary,
    }
    if cfg.options.get("ladder"):
        levels = []
        mm = m
        while mm <= 4 * m:
            levels.append(mm)
            mm *= 2
        tracked = ladder(H, enum.solutions[0].loop, levels=tuple(levels), tol=cfg.tolerances["newton"])
        lams = [s.lam for s in tracked if s is not None]
        result["ladder"] = {"levels": levels[: len(lams)], "lambda": lams, "observed_orders": observed_orders(lams)}
    rows = [["lambda", "lambda_class", "value", "residual", "seed"]] + [
        [repr(s.lam), repr(s.lambda_class), repr(s.value), repr(s.residual), s.seed] for s in enum.solutions
    ]
    text = [enum.summary] + [
        f"  lambda={s.lam:.12f} class={s.lambda_class:.10f} residual={s.residual:.1e} ({s.seed})"
        for s in enum.solutions
    ]
    return result, rows, text


def _intersections(cfg: RunConfig):
    even = [x for x in cfg.weights.q if x % 2 == 0]
    if even:
        raise ArgumentError(EVEN_WEIGHT_REFUSAL.format(weights=str(cfg.weights), even=even))
    return _variational(cfg, mode=CHORD)


HANDLERS = {
    "cohomology": _cohomology,
    "spectrum": _spectrum,
    "certify": _certify,
    "fixed-points": _fixed_points,
    "variational": _variational,
    "intersections": _intersections,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Dispatch one command; returns (exit status, rendered report)."""
    report = {
        "tool": "weightedproj",
        "version": __version__,
        "config": cfg.as_dict(),
        "tolerances": cfg.tolerances,
    }
    try:
        result, rows, text = HANDLERS[cfg.command](cfg)
        status = EXIT_OK
    except (ArgumentError, DomainError) as exc:
        result, rows, text = {"error": str(exc)}, [["error"], [str(exc)]], [f"error: {exc}"]
        status = EXIT_ARGS
    except (NonConvergence, IntegrationError) as exc:
        result, rows, text = {"error": f"non-convergence: {exc}"}, [["error"], [str(exc)]], [f"non-convergence: {exc}"]
        status = EXIT_NUMERIC
    report["result"] = result
    report["status"] = status
    if cfg.output == "json":
        return status, json.dumps(_jsonable(report), sort_keys=True, indent=2)
    if cfg.output == "csv":
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(rows)
        return status, buf.getvalue().rstrip("\n")
    header = f"# weightedproj {__version__}  command={cfg.command} weights={cfg.weights} seed={cfg.seed}"
    tol = "# tolerances: " + ", ".join(f"{k}={v:g}" for k, v in sorted(cfg.tolerances.items()))
    return status, "\n".join([header, tol] + text)


# --- argument parsing -----------------------------------------------------


def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(x) for x in text.split(","))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected 'lo,hi', got {text!r}") from exc
    return lo, hi


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _tol(text: str) -> tuple[str, float]:
    name, _, value = text.partition("=")
    if name not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(f"unknown tolerance {name!r}; known: {sorted(DEFAULT_TOLERANCES)}")
    try:
        return name, float(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad tolerance value in {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wproj", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--weights", help="comma-separated positive integers, e.g. 2,2,3")
    common.add_argument("--output", choices=("json", "csv", "text"), default="json")
    common.add_argument("--json", action="store_const", const="json", dest="output")
    common.add_argument("--seed", type=int, default=0, help="RNG seed for random solver seeds")
    common.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--workers", type=int, default=1)

    ham = argparse.ArgumentParser(add_help=False)
    ham.add_argument("--spec", help="Hamiltonian spec file (JSON)")
    ham.add_argument("--quadratic", type=_floats, help="coefficients a_j of sum a_j |z_j|^2")

    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("cohomology", parents=[common], help="l-table, ring structure, profiles")
    p.add_argument("--verbose", action="store_true")
    p = sub.add_parser("spectrum", parents=[common], help="eigenvalues 2 pi k / q_j in an interval")
    p.add_argument("--interval", type=_pair, required=True, metavar="LO,HI")
    p.add_argument("--closed", action="store_true", help="use [lo, hi] instead of (lo, hi]")
    p = sub.add_parser("certify", parents=[common, ham], help="counting certificate for a bound M")
    p.add_argument("--bound", type=float, help="Hamiltonian bound M (default: estimated from --spec)")
    p.add_argument("--s", type=int, default=None)
    p = sub.add_parser("fixed-points", parents=[common, ham], help="fixed points of the time-one map")
    p.add_argument("--seeds", type=int, default=None)
    for name, mode in (("variational", None), ("intersections", CHORD)):
        p = sub.add_parser(name, parents=[common, ham], help="Galerkin critical points" if mode is None else "Lagrangian intersections (all-odd weights)")
        if mode is None:
            p.add_argument("--mode", choices=(PERIODIC, CHORD), default=PERIODIC)
        p.add_argument("--m", type=int, default=16)
        p.add_argument("--budget", type=int, default=256)
        p.add_argument("--ladder", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    options = {}
    spec = None
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            spec = json.load(fh)
        options["spec"] = spec
    if spec is not None and args.weights is None:
        weights = as_weights(spec["weights"])
    elif args.weights is not None:
        weights = WeightVector.parse(args.weights)
        if spec is not None and tuple(spec["weights"]) != weights.q:
            raise ArgumentError(f"--weights {weights} disagrees with spec weights {spec['weights']}")
    else:
        raise ArgumentError("need --weights (or a --spec file carrying weights)")
    for key in ("verbose", "interval", "closed", "s", "seeds", "mode", "m", "budget", "ladder", "quadratic"):
        value = getattr(args, key, None)
        if value not in (None, False):
            options[key] = list(value) if isinstance(value, tuple) else value
    if args.workers != 1:
        options["workers"] = args.workers
    if args.command == "certify":
        if args.bound is not None:
            options["bound"] = args.bound
        elif spec is not None or getattr(args, "quadratic", None):
            H = from_spec(spec) if spec is not None else quadratic(args.quadratic, weights)
            options["bound"] = hamiltonian_bound(H)
        else:
            raise ArgumentError("certify needs --bound M or a Hamiltonian (--spec / --quadratic)")
    tolerances = dict(DEFAULT_TOLERANCES)
    tolerances.update(dict(args.tol))
    return RunConfig(weights, args.command, tolerances, args.output, args.seed, options)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
    except (ArgumentError, DomainError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"wproj: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    status, out = run(cfg)
    print(out)
    if status == EXIT_ARGS and cfg.output != "json":
        print(f"wproj: {out.splitlines()[-1]}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
