"""``qchan`` command-line interface.

Exit status: 0 on success, 1 on invalid input or I/O failure, 2 when
``oracle-check`` finds a discrepancy above the tolerance.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import harness
from .detectors import roc_auc
from .sampling import U64_MAX
from .scenario import ScenarioConfig, ScenarioError, load_scenario

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_ORACLE_FAIL = 2

SEED_ENV = "QCHAN_SEED"


class UsageError(Exception):
    pass


def _parse_u64(text: str, what: str) -> int:
    try:
        val = int(text, 10)
    except ValueError:
        raise UsageError(f"{what} must be a decimal unsigned 64-bit integer, got {text!r}") from None
    if not 0 <= val <= U64_MAX:
        raise UsageError(f"{what} out of range for an unsigned 64-bit integer: {text}")
    return val


def resolve_seed(cli_seed: str | None, config_seed: int) -> int:
    """Flag beats environment beats config file."""
    if cli_seed is not None:
        return _parse_u64(cli_seed, "--seed")
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        return _parse_u64(env, SEED_ENV)
    return config_seed


def _load(args) -> ScenarioConfig:
    sc = load_scenario(args.config)
    return sc.with_seed(resolve_seed(args.seed, sc.seed))


def _open_out(path: str):
    try:
        return open(path, "w", newline="")
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror or e}") from None


def _say(args, msg: str):
    if not args.quiet:
        print(msg)


def cmd_simulate(args) -> int:
    sc = _load(args)
    with _open_out(args.out) as fh:
        n = harness.write_simulation(sc, fh)
    _say(args, f"wrote {n} records ({sc.repetitions} repetition(s)) to {args.out}")
    return EXIT_OK


def cmd_detect(args) -> int:
    sc = _load(args)
    if sc.detector is None:
        raise UsageError("detect needs a scenario with a detector block")
    summary = harness.run_detection(sc)
    with _open_out(args.out) as fh:
        harness.write_detection(summary, fh)
    _say(args, summary.describe())
    return EXIT_OK


def cmd_roc(args) -> int:
    sc = _load(args)
    if sc.detector is None:
        raise UsageError("roc needs a scenario with a detector block")
    if sc.case_truth == "Case0" and sc.coupling.v == 0.0:
        raise UsageError("roc needs a nonzero coupling to build the Case1 variant")
    try:
        grid = harness.parse_grid(args.grid)
    except ValueError as e:
        raise UsageError(str(e)) from None
    points, s0, s1 = harness.run_roc(sc, grid)
    with _open_out(args.out) as fh:
        harness.write_roc(points, fh)
    _say(args, f"{len(points)} ROC points, AUC = {roc_auc(points):.4f}\n{s0.describe()}\n{s1.describe()}")
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    if args.tol < 0:
        raise UsageError("--tol must be non-negative")
    seed = resolve_seed(args.seed, 0)
    report = harness.oracle_check(args.trials, seed)
    if args.out:
        with _open_out(args.out) as fh:
            harness.write_oracle_report(report, args.tol, fh)
    ok = report.passed(args.tol)
    if ok:
        _say(args, f"oracle-check passed: max discrepancy {report.max_discrepancy:.3e} <= {args.tol:g}")
        return EXIT_OK
    # failures are always reported, even with --quiet
    print(f"oracle-check FAILED (tolerance {args.tol:g})\n{report.describe()}", file=sys.stderr)
    return EXIT_ORACLE_FAIL


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qchan", description="Two-qubit exchange channel simulator and intrusion detectors.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True, out_required=True):
        if config:
            sp.add_argument("--config", required=True, help="scenario JSON file")
        sp.add_argument("--out", required=out_required, help="output CSV path")
        sp.add_argument("--seed", help=f"u64 seed; overrides ${SEED_ENV} and the config")
        sp.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")

    sp = sub.add_parser("simulate", help="write one CSV row per outcome record")
    common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("detect", help="run the configured detector over all repetitions")
    common(sp)
    sp.set_defaults(func=cmd_detect)

    sp = sub.add_parser("roc", help="ROC points from the Case0 and Case1 variants of a scenario")
    common(sp)
    sp.add_argument("--grid", default="auto", help="auto | start:stop:num | t1,t2,...")
    sp.set_defaults(func=cmd_roc)

    sp = sub.add_parser("oracle-check", help="closed-form probabilities vs. brute-force unitary")
    common(sp, config=False, out_required=False)
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--tol", type=float, default=1e-12)
    sp.set_defaults(func=cmd_oracle_check)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ScenarioError, UsageError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
