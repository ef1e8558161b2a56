"""``beamcomb`` command line: simulate, solve, sweep, selftest.

Exit codes: 0 success, 1 configuration error, 2 runtime or solver error,
3 selftest failure.
"""
import argparse
import json
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from ..channel import Ccm
from ..combiner import PhaseAlphabet, efficiency
from ..errors import BeamcombError, ConfigError
from .. import solvers
from .config import (FULL_SCALE, ExperimentConfig, build_config, expand_sweep,
                     read_config_file)
from .experiment import run_experiment
from .report import FORMATS, emit_report
from .selftest import DEFAULT_TOLERANCES, run_selftest

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_SELFTEST = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _flag(name):
    return "--" + name.replace("_", "-")


def _add_config_flags(p):
    p.add_argument("--config", metavar="PATH", help="key = value configuration file")
    p.add_argument("--preset", choices=("desk", "full"), default="desk",
                   help="base parameter set before the file and flags are applied")
    for f in fields(ExperimentConfig):
        p.add_argument(_flag(f.name), dest=f.name, metavar="VALUE", default=None,
                       help=f"override '{f.name}' (default {f.default!r})")


def _add_output_flags(p):
    p.add_argument("--out", metavar="PATH", default="-", help="output file ('-' for stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")


def build_parser():
    parser = _Parser(prog="beamcomb", description="Discrete beam combination experiments.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    sim = sub.add_parser("simulate", help="run the Monte Carlo pipeline and write a report")
    _add_config_flags(sim)
    _add_output_flags(sim)

    sw = sub.add_parser("sweep", help="simulate over a grid; antennas/beams/users take lists")
    _add_config_flags(sw)
    _add_output_flags(sw)

    solve = sub.add_parser("solve", help="design combiners for one CCM read from a file")
    solve.add_argument("ccm", metavar="CCM_FILE", help="first line N, then N rows of a+bi entries")
    solve.add_argument("--scheme", default="bbbc", help="sgbc, bbbc or exhaustive")
    solve.add_argument("--bits", default="1")
    solve.add_argument("--rf-chains", dest="rf_chains", default="1")
    solve.add_argument("--epsilon", default="0")
    solve.add_argument("--node-budget", dest="node_budget", default=str(solvers.DEFAULT_NODE_BUDGET))
    _add_output_flags(solve)

    st = sub.add_parser("selftest", help="run the embedded invariant checks")
    st.add_argument("--seed", type=int, default=20240607)
    st.add_argument("--tolerance", action="append", default=[], metavar="CHECK=VALUE",
                    help=f"override a check tolerance; checks: {', '.join(DEFAULT_TOLERANCES)}")
    return parser


def _raw_config(args):
    raw = {}
    if args.preset == "full":
        raw.update({k: ",".join(map(str, v)) if isinstance(v, tuple) else str(v)
                    for k, v in FULL_SCALE.items()})
    if args.config:
        raw.update(read_config_file(args.config))
    for f in fields(ExperimentConfig):
        value = getattr(args, f.name)
        if value is not None:
            raw[f.name] = value
    return raw


def _cmd_simulate(args):
    cfg = build_config(_raw_config(args))
    emit_report(run_experiment(cfg), args.out, args.format)
    return EXIT_OK


def _cmd_sweep(args):
    points = expand_sweep(_raw_config(args))
    configs = [build_config(p) for p in points]
    records = []
    for cfg in configs:
        records.extend(run_experiment(cfg))
    emit_report(records, args.out, args.format)
    return EXIT_OK


def read_ccm_text(path):
    """Parse a CCM file: ``N`` then N rows of N ``a+bi`` entries."""
    try:
        lines = [ln.split() for ln in Path(path).read_text().splitlines() if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read CCM file {path}: {exc}") from exc
    try:
        n = int(lines[0][0])
        rows = [[complex(tok.replace("i", "j")) for tok in row] for row in lines[1:n + 1]]
    except (IndexError, ValueError) as exc:
        raise ConfigError(f"{path}: malformed CCM text ({exc})") from exc
    if n < 1 or len(rows) != n or any(len(r) != n for r in rows):
        raise ConfigError(f"{path}: expected {n} rows of {n} entries")
    return np.array(rows, dtype=np.complex128)


def _single(text, conv, name):
    items = [t for t in str(text).split(",") if t.strip()]
    if len(items) != 1:
        raise ConfigError(f"solve takes exactly one {name} value, got {text!r}")
    try:
        return conv(items[0])
    except ValueError as exc:
        raise ConfigError(f"bad {name}: {text!r}") from exc


def _cmd_solve(args):
    R = Ccm(read_ccm_text(args.ccm), "signal-estimate").matrix
    scheme = _single(args.scheme, str, "scheme")
    bits = _single(args.bits, int, "bits")
    K = _single(args.rf_chains, int, "rf-chains")
    eps = _single(args.epsilon, float, "epsilon")
    budget = _single(args.node_budget, lambda s: int(float(s)), "node-budget")
    if scheme not in ("sgbc", "bbbc", "exhaustive"):
        raise ConfigError(f"solve supports sgbc, bbbc, exhaustive; got {scheme!r}")
    if not 1 <= K <= R.shape[0]:
        raise ConfigError(f"rf-chains must lie in [1, {R.shape[0]}]")
    if bits < 1 or eps < 0 or budget < 1:
        raise ConfigError("bits and node-budget must be positive, epsilon non-negative")
    alphabet = PhaseAlphabet(bits)
    if scheme == "bbbc":
        comb, report = solvers.bb_bc(R, K, alphabet, epsilon=eps, budget=budget)
    elif scheme == "sgbc":
        comb, report = solvers.sg_bc(R, K, alphabet)
    else:
        comb, report = solvers.exhaustive(R, K, alphabet)
    eta = efficiency(comb, R, float(np.trace(R).real))
    if args.format == "json":
        text = json.dumps({"scheme": scheme, "bits": bits,
                           "indices": comb.indices.T.tolist(), "eta": eta,
                           "nodes": report.nodes_expanded, "certified": report.certified}) + "\n"
    else:
        text = "".join(" ".join(str(i) for i in col) + "\n" for col in comb.indices.T)
        text += f"eta {eta!r}\n"
    if args.out in (None, "-"):
        sys.stdout.write(text)
    else:
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise BeamcombError(f"cannot write {args.out}: {exc}") from exc
    return EXIT_OK


def _cmd_selftest(args):
    overrides = {}
    for item in args.tolerance:
        name, sep, value = item.partition("=")
        if not sep or name not in DEFAULT_TOLERANCES:
            raise ConfigError(f"bad --tolerance {item!r}; checks: {', '.join(DEFAULT_TOLERANCES)}")
        try:
            overrides[name] = float(value)
        except ValueError as exc:
            raise ConfigError(f"bad tolerance value in {item!r}") from exc
    ok, results = run_selftest(overrides, seed=args.seed)
    failed = [r.name for r in results if not r.passed]
    print("selftest: all checks passed" if ok else f"selftest: FAILED {', '.join(failed)}")
    return EXIT_OK if ok else EXIT_SELFTEST


COMMANDS = {"simulate": _cmd_simulate, "sweep": _cmd_sweep, "solve": _cmd_solve,
            "selftest": _cmd_selftest}


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BeamcombError, OSError, ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
