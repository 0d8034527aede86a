"""Command-line front end.

Exit codes: 0 success, 1 configuration error (or a failed verify check),
2 when the trajectory leaves the coordinate chart. Errors are also written
to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import io as trajio
from .config import MODES, RunConfig, load_config, parse_config
from .dynamics import IntegratorConfig, integrate_riccati, integrate_schrodinger
from .errors import (
    ChartEscape,
    ChartSingular,
    ConfigError,
    DegenerateConfiguration,
    FlagRiccatiError,
    StepRejected,
)
from .frames import frame
from .superposition import (
    CANDIDATES,
    cross_ratio,
    drift_table_csv,
    integrate_ensemble,
    invariant_search,
    superpose,
)
from .verify import DEFAULT_PARTITIONS, BatteryConfig, run_battery

logger = logging.getLogger("flagriccati")

EXIT_OK, EXIT_CONFIG, EXIT_CHART = 0, 1, 2


def _error(kind: str, message: str, **extra) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message, **extra}) + "\n")


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _load(args) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required")
    return load_config(args.config, args.seed)


def _out_path(args, rc: RunConfig | None) -> str | None:
    if args.out is not None:
        return args.out
    return rc.output.get("path") if rc is not None else None


def _format(args, rc: RunConfig | None) -> str:
    if args.format is not None:
        return args.format
    return rc.output.get("format", "csv") if rc is not None else "csv"


def cmd_simulate(args) -> int:
    rc = _load(args)
    mode = args.mode or rc.mode or "full"
    p = rc.partition
    if mode == "grassmann" and p.nblocks != 2:
        raise ConfigError(f"mode grassmann needs a 2-block partition, got {p.sizes}")
    if mode == "flag" and p.nblocks != 3:
        raise ConfigError(f"mode flag needs a 3-block partition, got {p.sizes}")
    sample_every = int(rc.output.get("sample_every", 1))
    out, fmt = _out_path(args, rc), _format(args, rc)
    if mode == "full":
        U0 = rc.initial_unitary()
        if U0 is None:
            U0 = frame(rc.initial_coordinates()).matrix if rc.initial else np.eye(p.total)
        if U0.shape != (p.total, p.total):
            raise ConfigError(f"initial unitary must be {p.total}x{p.total}")
        try:
            traj = integrate_schrodinger(rc.hamiltonian, U0, rc.integrator, sample_every)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        try:
            traj = integrate_riccati(rc.initial_coordinates(), rc.hamiltonian, rc.integrator,
                                     sample_every)
        except ChartEscape as exc:
            if exc.partial is not None:
                _write(trajio.dumps(exc.partial, fmt), out)
            _error("ChartEscape", str(exc), time=exc.time, last_good_time=exc.last_good_time)
            return EXIT_CHART
    _write(trajio.dumps(traj, fmt), out)
    return EXIT_OK


def _battery_config(args, rc: RunConfig | None) -> BatteryConfig:
    v = rc.verify if rc is not None else {}
    integ = rc.integrator if rc is not None else IntegratorConfig()
    seed = args.seed if args.seed is not None else (rc.seed if rc is not None else 0)
    return BatteryConfig(
        partitions=[tuple(p) for p in v.get("partitions", DEFAULT_PARTITIONS)],
        draws=int(v.get("draws", 20)),
        seed=int(seed),
        integrator=integ,
        initial_scale=float(v.get("initial_scale", 0.5)),
        amp_scale=float(v.get("amp_scale", 0.5)),
    )


def _load_for_verify(args) -> RunConfig | None:
    """A verify config may omit the Hamiltonian; only its settings are used."""
    if args.config is None:
        return None
    try:
        d = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    if isinstance(d, dict) and "hamiltonian" not in d and "partition" not in d:
        d = dict(d, hamiltonian={"partition": [1, 1], "entries": []})
    return parse_config(d, args.seed)


def cmd_verify(args) -> int:
    rc = _load_for_verify(args)
    try:
        results = run_battery(_battery_config(args, rc))
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"invalid verify settings: {exc}") from exc
    report = {"checks": [r.as_dict() for r in results],
              "pass": all(r.passed for r in results)}
    _write(json.dumps(report, indent=2) + "\n", _out_path(args, rc))
    failed = [r.name for r in results if not r.passed]
    if failed:
        _error("CheckFailed", f"failed checks: {', '.join(failed)}", checks=failed)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_superpose(args) -> int:
    rc = _load(args)
    if rc.partition.sizes != (1, 1):
        raise ConfigError("superpose needs the two-level partition [1, 1]")
    initials = rc.ensemble_initials()
    if len(initials) < 4:
        raise ConfigError("an ensemble needs at least 4 members")
    e = integrate_ensemble(rc.hamiltonian, initials, rc.integrator,
                           int(rc.output.get("sample_every", 1)), jobs=args.jobs)
    zs = e.coordinate(0)[:4]
    try:
        e.check_distinct()
        k0 = cross_ratio(*zs[:, 0])
    except DegenerateConfiguration as exc:
        raise ConfigError(f"initial members are degenerate: {exc}") from exc

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t", "re_k", "im_k", "drift", "re_z_rec", "im_z_rec", "reconstruction_error"])
    max_drift = rec_err = 0.0
    argmax = float(e.times[0])
    degenerate = 0
    nan = float("nan")
    for i, t in enumerate(e.times):
        try:
            k = cross_ratio(*zs[:, i])
            drift = abs(k - k0) / (1 + abs(k0))
        except DegenerateConfiguration:
            k, drift = complex(nan, nan), nan
            degenerate += 1
        try:
            rec = superpose(k0, *zs[1:, i])
            err = abs(rec - zs[0, i])
        except DegenerateConfiguration:
            rec, err = complex(nan, nan), nan
            degenerate += 1
        if drift > max_drift:
            max_drift, argmax = drift, float(t)
        if err > rec_err:
            rec_err = err
        w.writerow([f"{x:.17g}" for x in (t, k.real, k.imag, drift, rec.real, rec.imag, err)])
    _write(buf.getvalue(), _out_path(args, rc))

    summary = io.StringIO()
    sw = csv.writer(summary, lineterminator="\n")
    sw.writerow(["members", "re_k0", "im_k0", "max_drift", "argmax_time",
                 "reconstruction_sup_error", "degeneracies"])
    sw.writerow([e.members] + [f"{x:.17g}" for x in (k0.real, k0.imag, max_drift, argmax, rec_err)]
                + [degenerate])
    if _out_path(args, rc) not in (None, "-"):
        sys.stdout.write(summary.getvalue())
    else:
        sys.stderr.write(summary.getvalue())
    return EXIT_OK


def cmd_search_invariants(args) -> int:
    rc = _load(args)
    if rc.partition.sizes != (1, 1, 1):
        raise ConfigError("search-invariants needs the three-level partition [1, 1, 1]")
    names = rc.candidates or list(CANDIDATES)
    unknown = [n for n in names if n not in CANDIDATES]
    if unknown:
        raise ConfigError(f"unknown candidates {unknown}; known: {sorted(CANDIDATES)}")
    initials = rc.ensemble_initials()
    if len(initials) < 4:
        raise ConfigError("an ensemble needs at least 4 members")
    e = integrate_ensemble(rc.hamiltonian, initials, rc.integrator,
                           int(rc.output.get("sample_every", 1)), jobs=args.jobs)
    try:
        rows = invariant_search(e, names)
    except DegenerateConfiguration as exc:
        raise ConfigError(f"ensemble rejected: {exc}") from exc
    _write(drift_table_csv(rows), _out_path(args, rc))
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "superpose": cmd_superpose,
    "search-invariants": cmd_search_invariants,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--mode", choices=MODES, help="simulation mode (simulate only)")
    common.add_argument("--out", help="output path (default: config output.path or stdout)")
    common.add_argument("--format", choices=("csv", "json"), help="trajectory format")
    common.add_argument("--jobs", type=int, default=1, help="worker threads for ensembles")
    common.add_argument("--seed", type=int, help="overrides the config seed")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="flagriccati",
        description="Unitary evolution reduced to Grassmann and flag manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common], help="integrate full or reduced dynamics")
    sub.add_parser("verify", parents=[common], help="run the cross-validation battery")
    sub.add_parser("superpose", parents=[common], help="cross-ratio drift and reconstruction (2-level)")
    sub.add_parser("search-invariants", parents=[common],
                   help="candidate invariant drift table (3-level)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.jobs < 1:
        _error("ConfigError", "--jobs must be >= 1")
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        _error("ConfigError", str(exc))
        return EXIT_CONFIG
    except StepRejected as exc:
        _error("StepRejected", str(exc), time=exc.time)
        return EXIT_CONFIG
    except (ChartEscape, ChartSingular) as exc:
        _error(type(exc).__name__, str(exc), time=getattr(exc, "time", None))
        return EXIT_CHART
    except FlagRiccatiError as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
