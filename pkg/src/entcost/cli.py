"""Command-line front end.

Subcommands: eof, metrics, regularize, formation, verify, demo-divergence.
Every report is a JSON envelope {tool_version, seed, config, result} with
floats at 17 significant digits, so a rerun with the same configuration and
inputs is byte-identical.  Exit codes: 0 success, 1 property violation,
2 input or usage error.  The ENTCOST_SEED environment variable overrides the
default seed; an explicit --seed flag wins over both.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .eof import eof_optimize, eof_two_qubit_closed_form
from .formation import formation_protocol
from .metrics import metric_relation_check
from .qcore import (
    Ensemble,
    PureState,
    QuantumState,
    RandomSource,
    StateValidationError,
    ensemble_average,
)
from .regcost import cost_bracket
from .serialize import dumps_canonical, load_state
from .verify import run_verification

SEED_ENV_VAR = "ENTCOST_SEED"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_INPUT = 2


class InputError(Exception):
    pass


def _resolve_seed(args):
    if args.seed is not None:
        return int(args.seed)
    env = os.environ.get(SEED_ENV_VAR)
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise InputError(f"{SEED_ENV_VAR} must be an integer, got {env!r}") from exc
    return 0


def _load(path):
    try:
        return load_state(path)
    except FileNotFoundError as exc:
        raise InputError(f"no such file: {path}") from exc
    except (ValueError, KeyError, TypeError, StateValidationError) as exc:
        raise InputError(f"failed to load {path}: {exc}") from exc


def _as_density(obj):
    if isinstance(obj, QuantumState):
        return obj
    if isinstance(obj, PureState):
        return obj.to_state()
    if isinstance(obj, Ensemble):
        return ensemble_average(obj)
    raise InputError(f"unsupported input object {type(obj)!r}")


def _emit(text, path):
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
            if not text.endswith("\n"):
                fh.write("\n")
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _envelope(seed, config, result):
    return dumps_canonical({
        "tool_version": __version__,
        "seed": seed,
        "config": config,
        "result": result,
    })


def _csv(rows, header):
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for cell in row:
            if isinstance(cell, float):
                cells.append(format(cell, ".17g"))
            else:
                cells.append(str(cell))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def _cmd_eof(args):
    seed = _resolve_seed(args)
    rho = _as_density(_load(args.state))
    res = eof_optimize(rho, ensemble_size=args.ensemble_size,
                       restarts=args.restarts, rng=RandomSource(seed),
                       improvement_tol=args.tol)
    config = {"subcommand": "eof", "state": args.state,
              "ensemble_size": args.ensemble_size, "restarts": args.restarts,
              "tol": args.tol}
    _emit(_envelope(seed, config, res.to_json_obj()), args.output)
    return EXIT_OK


def _cmd_metrics(args):
    seed = _resolve_seed(args)
    rho = _as_density(_load(args.state_a))
    sigma = _as_density(_load(args.state_b))
    if rho.dims != sigma.dims:
        raise InputError(f"dims mismatch: {rho.dims} vs {sigma.dims}")
    report = metric_relation_check(rho, sigma)
    config = {"subcommand": "metrics", "state_a": args.state_a,
              "state_b": args.state_b}
    _emit(_envelope(seed, config, report.to_json_obj()), args.output)
    return EXIT_OK if report.chain_holds else EXIT_VIOLATION


def _cmd_regularize(args):
    seed = _resolve_seed(args)
    rho = _as_density(_load(args.state))
    trace, bracket = cost_bracket(rho, args.n_max, rng=RandomSource(seed),
                                  restarts=args.restarts,
                                  ensemble_size=args.ensemble_size)
    config = {"subcommand": "regularize", "state": args.state,
              "n_max": args.n_max, "restarts": args.restarts,
              "ensemble_size": args.ensemble_size}
    result = {"trace": trace.to_json_obj(), "bracket": bracket.to_json_obj()}
    _emit(_envelope(seed, config, result), args.output)
    if args.csv:
        rows = [(e.n, e.rate) for e in trace.entries]
        _emit(_csv(rows, ("n", "rate")), args.csv)
    return EXIT_OK


def _cmd_formation(args):
    seed = _resolve_seed(args)
    obj = _load(args.state)
    if isinstance(obj, Ensemble):
        ensemble = obj
        rho = ensemble_average(ensemble)
    else:
        rho = _as_density(obj)
        ensemble = eof_optimize(rho, restarts=args.restarts,
                                rng=RandomSource(seed)).ensemble
    try:
        res = formation_protocol(rho, ensemble, args.n, args.delta1,
                                 args.delta2, window=args.window,
                                 normalization=args.normalize)
    except (ValueError, StateValidationError) as exc:
        raise InputError(str(exc)) from exc
    config = {"subcommand": "formation", "state": args.state, "n": args.n,
              "delta1": args.delta1, "delta2": args.delta2,
              "window": args.window, "normalize": args.normalize,
              "restarts": args.restarts}
    _emit(_envelope(seed, config, res.to_json_obj()), args.output)
    if args.csv:
        rows = []
        for n in range(1, args.n + 1):
            r = formation_protocol(rho, ensemble, n, args.delta1, args.delta2,
                                   window=args.window,
                                   normalization=args.normalize)
            rows.append((n, r.m, r.rate, r.eps1, r.eps3, r.bures_bound,
                         r.exact_bures if r.exact_bures is not None else ""))
        _emit(_csv(rows, ("n", "m", "rate", "eps1", "eps3", "bures_bound",
                          "exact_bures")), args.csv)
    ok = res.fid1_holds is not False and res.fid2_holds is not False
    return EXIT_OK if ok else EXIT_VIOLATION


def _cmd_verify(args):
    seed = _resolve_seed(args)
    report, clean = run_verification(
        seed, pairs=args.pairs, channels=args.channels,
        perturbed=args.perturbed, quadruples=args.quadruples)
    config = {"subcommand": "verify", "pairs": args.pairs,
              "channels": args.channels, "perturbed": args.perturbed,
              "quadruples": args.quadruples}
    _emit(_envelope(seed, config, report), args.output)
    return EXIT_OK if clean else EXIT_VIOLATION


def _cmd_demo_divergence(args):
    seed = _resolve_seed(args)
    if not 0.0 <= args.fidelity <= 1.0:
        raise InputError("per-copy fidelity must lie in [0, 1]")
    rows = []
    for k in range(1, args.k_max + 1):
        fk = args.fidelity ** k
        dk = 2.0 * np.sqrt(max(0.0, 1.0 - fk))
        rows.append((k, fk, dk))
    if args.format == "csv":
        _emit(_csv(rows, ("k", "fidelity", "bures")), args.output)
    else:
        config = {"subcommand": "demo-divergence", "fidelity": args.fidelity,
                  "k_max": args.k_max}
        result = [{"k": k, "fidelity": f, "bures": d} for k, f, d in rows]
        _emit(_envelope(seed, config, result), args.output)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="entcost",
        description="Entanglement-of-formation laboratory: ensemble "
                    "optimization, metric checks, regularization traces, and "
                    "typical-set formation simulations.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None,
                       help="random seed (default 0, or ENTCOST_SEED)")
        p.add_argument("--output", default=None, help="output path (default stdout)")

    p = sub.add_parser("eof", help="optimize the entanglement of formation")
    p.add_argument("state", help="state or ensemble JSON file")
    p.add_argument("--ensemble-size", type=int, default=None)
    p.add_argument("--restarts", type=int, default=4)
    p.add_argument("--tol", type=float, default=1e-6,
                   help="per-cycle improvement tolerance in ebits")
    common(p)
    p.set_defaults(func=_cmd_eof)

    p = sub.add_parser("metrics", help="fidelity, Bures and trace distance report")
    p.add_argument("state_a")
    p.add_argument("state_b")
    common(p)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("regularize", help="finite-n regularization trace")
    p.add_argument("state")
    p.add_argument("--n-max", type=int, default=2)
    p.add_argument("--restarts", type=int, default=2)
    p.add_argument("--ensemble-size", type=int, default=None)
    p.add_argument("--csv", default=None, help="also write (n, rate) CSV here")
    common(p)
    p.set_defaults(func=_cmd_regularize)

    p = sub.add_parser("formation", help="simulate the typical-set formation protocol")
    p.add_argument("state", help="state or ensemble JSON file")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--delta1", type=float, default=0.5)
    p.add_argument("--delta2", type=float, default=0.25)
    p.add_argument("--window", choices=("paper", "plain"), default="paper")
    p.add_argument("--normalize", choices=("unit", "sub"), default="unit")
    p.add_argument("--restarts", type=int, default=4,
                   help="optimizer restarts when only a density matrix is given")
    p.add_argument("--csv", default=None, help="also write a sweep over n here")
    common(p)
    p.set_defaults(func=_cmd_formation)

    p = sub.add_parser("verify", help="run the property fuzzing suite")
    p.add_argument("--pairs", type=int, default=1000,
                   help="metric-chain sample pairs")
    p.add_argument("--channels", type=int, default=100,
                   help="monotonicity (state, channel) pairs")
    p.add_argument("--perturbed", type=int, default=100,
                   help="continuity perturbed pairs")
    p.add_argument("--quadruples", type=int, default=100,
                   help="multiplicativity tensor quadruples")
    common(p)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("demo-divergence",
                       help="tensor-power Bures divergence of a fixed per-copy fidelity")
    p.add_argument("--fidelity", type=float, default=0.99)
    p.add_argument("--k-max", type=int, default=200)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    common(p)
    p.set_defaults(func=_cmd_demo_divergence)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except StateValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
