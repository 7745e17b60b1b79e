"""Command-line driver: protocol runs, sweeps, coupling reports, oracle checks.

Subcommands: ``gie`` and ``gid`` execute one protocol over the configured
tau grid, ``network`` is the same with M > 2 enforced, ``params`` turns a
double-well geometry into a coupling report, ``oracle-check`` replays a
small run on the dense engine and fails on drift, ``sweep`` repeats a run
over a list of N values and aggregates derived scalars.

Exit codes: 0 success, 2 config error, 3 validation or oracle failure,
4 dense size cap exceeded. Identical configs give bit-identical output
files; ``--threads`` changes wall time only. CSV floats carry 17
significant digits so files round-trip exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import (
    OPTIMAL,
    ConfigError,
    Output,
    ParamsConfig,
    RunConfig,
    load_params_config,
    load_run_config,
)
from .couplings import GridRefinementError, contact_strength, couplings_dw, solve_double_well
from .gid import GidEngine, GidSchedule, prepare_local
from .gie import gie_moments, reduced_state_gie
from .metrology import ZeroPolarizationError, fisher_local, witness_record
from .oracle import Couplings, SizeCapError, evolve_diagonal, oracle_table, product_state
from .spin import EnsembleDim, css_x, rotate

__all__ = ["main", "execute_run", "optimal_preparation_time", "ORACLE_TOL"]

ORACLE_TOL = 1e-8

_BASE_COLUMNS = ("tau", "xi2_loc", "xi2_col", "gamma_loc", "f_col", "c1", "c2")
_TILDE_COLUMNS = ("f_loc", "c1_tilde", "c2_tilde")
_GID_COLUMNS = ("beta", "theta", "theta0")

# preparation and dephasing rates on the rescaled axis
_PREP = Couplings(0.0, 1.0, 0.0, dimensionless=True)
_NONLOCAL = Couplings(0.0, 0.0, 1.0, dimensionless=True)


class ValidationFailure(RuntimeError):
    """A run produced unusable results; mapped to exit code 3."""


def _pmap(fn, items, threads):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))


def optimal_preparation_time(N: int) -> float:
    """Twisting time of best one-site squeezing, 3^(1/6) (N/2)^(-2/3).

    This is the standard large-N optimum of one-axis twisting. It is a
    closed form on purpose: resolving ``tau_rot = "optimal"`` stays exact
    and platform independent, which the bit-identical-output guarantee
    needs. Accurate for N of a few tens and up; for small N pass a
    numeric tau_rot instead.
    """
    return 3.0 ** (1.0 / 6.0) * (0.5 * N) ** (-2.0 / 3.0)


def _columns(cfg: RunConfig):
    cols = list(_BASE_COLUMNS)
    if cfg.metrology.compute_tilde:
        cols += _TILDE_COLUMNS
    if cfg.protocol.kind == "gid":
        cols += _GID_COLUMNS
        if cfg.N <= cfg.metrology.dense_cap:
            cols.append("purity")
    return cols


def _record_row(tau, rec, tilde):
    row = [tau, rec.xi2_loc, rec.xi2_col, rec.gamma_loc, rec.f_col, rec.c1, rec.c2]
    if tilde:
        row += [rec.f_loc, rec.c1_tilde, rec.c2_tilde]
    return row


@dataclass
class RunResult:
    kind: str
    columns: list
    rows: list
    tau_rot: Optional[float] = None
    n_pre: int = 0


def _run_gie(cfg: RunConfig, threads: int) -> RunResult:
    dim = EnsembleDim(cfg.N)
    tilde = cfg.metrology.compute_tilde
    c = cfg.couplings

    def row(t):
        t = float(t)
        table = gie_moments(dim, cfg.M, c, t)
        f_loc = fisher_local(reduced_state_gie(dim, cfg.M, c, t)) if tilde else None
        return _record_row(t, witness_record(table, f_loc=f_loc), tilde)

    rows = _pmap(row, cfg.protocol.grid.values(), threads)
    return RunResult(kind="gie", columns=_columns(cfg), rows=rows)


def _resolve_tau_rot(cfg: RunConfig) -> float:
    if cfg.protocol.tau_rot == OPTIMAL:
        return optimal_preparation_time(cfg.N)
    return float(cfg.protocol.tau_rot)


def _gid_engine(cfg: RunConfig, tau_rot: float) -> GidEngine:
    schedule = GidSchedule(tau_rot=tau_rot, beta=cfg.protocol.beta, theta=cfg.protocol.theta)
    return GidEngine(EnsembleDim(cfg.N), cfg.M, schedule)


def _run_gid(cfg: RunConfig, threads: int) -> RunResult:
    dim = EnsembleDim(cfg.N)
    tau_rot = _resolve_tau_rot(cfg)
    engine = _gid_engine(cfg, tau_rot)
    tilde = cfg.metrology.compute_tilde
    with_purity = cfg.N <= cfg.metrology.dense_cap
    meta = [engine.beta, engine.theta, engine.theta0]

    # composite axis: the twisting segment is sampled on its own linear
    # grid (same point count, endpoint left to the post segment), the
    # dephasing segment at tau_rot + tau for tau in the configured grid
    count = cfg.protocol.grid.count
    pre_taus = np.linspace(0.0, tau_rot, count, endpoint=False) if tau_rot > 0 else []

    def pre_row(s):
        s = float(s)
        table = gie_moments(dim, cfg.M, _PREP, s)
        rec = witness_record(table)
        if tilde:
            # pure product segment: local Fisher info is exactly 4x the
            # top eigenvalue of the one-site covariance block
            rec = witness_record(table, f_loc=4.0 * rec.gamma_loc)
        row = _record_row(s, rec, tilde) + meta
        if with_purity:
            row.append(1.0)
        return row

    def post_row(tp):
        tp = float(tp)
        table = engine.moments(tp)
        f_loc = fisher_local(engine.reduced_state(tp)) if tilde else None
        rec = witness_record(table, f_loc=f_loc)
        row = _record_row(tau_rot + tp, rec, tilde) + meta
        if with_purity:
            row.append(engine.purity(tp))
        return row

    rows = _pmap(pre_row, pre_taus, threads)
    rows += _pmap(post_row, cfg.protocol.grid.values(), threads)
    return RunResult(
        kind="gid", columns=_columns(cfg), rows=rows, tau_rot=tau_rot, n_pre=len(pre_taus)
    )


def execute_run(cfg: RunConfig, threads: int = 1) -> RunResult:
    if cfg.protocol.kind == "gie":
        return _run_gie(cfg, threads)
    return _run_gid(cfg, threads)


# ---------------------------------------------------------------- emission

def _ensure_dir(path):
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.16e}"


def write_csv(path, columns, rows):
    _ensure_dir(path)
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _json_safe(value):
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    value = float(value)
    return value if math.isfinite(value) else None


def write_json(path, doc):
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if path is None:
        sys.stdout.write(text)
        return
    _ensure_dir(path)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _run_document(cfg: RunConfig, result: RunResult) -> dict:
    doc = {
        "kind": result.kind,
        "ensemble": {"N": cfg.N, "M": cfg.M},
        "columns": result.columns,
        "rows": [[_json_safe(v) for v in row] for row in result.rows],
    }
    if result.kind == "gid":
        doc["tau_rot"] = _json_safe(result.tau_rot)
    return doc


def write_run(cfg: RunConfig, result: RunResult, out: Output):
    if out.format == "json":
        write_json(out.path, _run_document(cfg, result))
    else:
        write_csv(out.path, result.columns, result.rows)


# ------------------------------------------------------------------ params

def run_params(cfg: ParamsConfig) -> dict:
    pair = solve_double_well(cfg.spec)
    g = contact_strength(cfg.scattering_length, cfg.spec.mass)
    res = couplings_dw(pair, cfg.displacement, g, cfg.c_dd)

    def both_units(x):
        return {"rad_per_s": x, "cycles_per_s": x / (2.0 * math.pi)}

    return {
        "well": {
            "e_gs": pair.e_gs,
            "e_ex": pair.e_ex,
            "splitting": pair.splitting,
        },
        "i_contact": res.i_contact,
        "d_integrals": {
            "d_self": res.d_self,
            "d_lr": res.d_lr,
            "d_lalb": res.d_lalb,
            "d_rarb": res.d_rarb,
            "d_ralb": res.d_ralb,
            "d_larb": res.d_larb,
        },
        "chi": {
            "chi_cont": both_units(res.chi_cont),
            "chi_loc": both_units(res.chi_loc),
            "chi_nloc": both_units(res.chi_nloc),
            "chi_nz_ab": both_units(res.chi_nz_ab),
            "chi_nz_ba": both_units(res.chi_nz_ba),
        },
    }


# ------------------------------------------------------------ oracle check

def _table_deviation(fast, exact) -> float:
    dev = 0.0
    for key, val in exact.first.items():
        dev = max(dev, abs(fast.get_first(*key) - val))
    for (a, b), val in exact.second.items():
        dev = max(dev, abs(fast.get_second(a, b) - val))
    return dev


def run_oracle_check(cfg: RunConfig, out: Output, threads: int) -> int:
    dim = EnsembleDim(cfg.N)
    taus = [float(t) for t in cfg.protocol.grid.values()]
    if cfg.protocol.kind == "gie":
        base = product_state([css_x(dim)] * cfg.M)

        def dev_at(t):
            exact = oracle_table(evolve_diagonal(base, cfg.couplings, t), t)
            return _table_deviation(gie_moments(dim, cfg.M, cfg.couplings, t), exact)

    else:
        tau_rot = _resolve_tau_rot(cfg)
        engine = _gid_engine(cfg, tau_rot)
        psi = rotate(prepare_local(dim, tau_rot), "x", engine.theta)
        base = product_state([psi] * cfg.M)

        def dev_at(t):
            exact = oracle_table(evolve_diagonal(base, _NONLOCAL, t), t)
            return _table_deviation(engine.moments(t), exact)

    devs = _pmap(dev_at, taus, threads)
    for t, d in zip(taus, devs):
        print(f"tau = {t:.9g}  deviation = {d:.3e}")
    worst = max(devs)
    ok = worst <= ORACLE_TOL
    print(f"max deviation = {worst:.3e} (tolerance {ORACLE_TOL:.1e}): {'OK' if ok else 'FAIL'}")
    if out.path is not None:
        write_json(
            out.path,
            {
                "kind": cfg.protocol.kind,
                "ensemble": {"N": cfg.N, "M": cfg.M},
                "tolerance": ORACLE_TOL,
                "max_deviation": _json_safe(worst),
                "passed": ok,
                "deviations": [
                    {"tau": _json_safe(t), "deviation": _json_safe(d)}
                    for t, d in zip(taus, devs)
                ],
            },
        )
    return 0 if ok else 3


# ------------------------------------------------------------------- sweep

def _tau_deph(post_taus, xi2_values) -> float:
    """First post-rotation time with xi2_loc >= 1, linearly interpolated."""
    if xi2_values[0] >= 1.0:
        raise ValidationFailure(
            "xi2_loc >= 1 already at the first post-rotation grid point; "
            "the grid cannot bracket the crossing"
        )
    for i in range(1, len(xi2_values)):
        if xi2_values[i] >= 1.0:
            t0, t1 = post_taus[i - 1], post_taus[i]
            x0, x1 = xi2_values[i - 1], xi2_values[i]
            return t0 + (1.0 - x0) * (t1 - t0) / (x1 - x0)
    raise ValidationFailure("xi2_loc never returns to 1 on the grid; extend tau_grid")


def _derived_scalars(cfg: RunConfig, result: RunResult) -> dict:
    cols = result.columns
    if result.kind == "gid":
        xi = cols.index("xi2_loc")
        post = result.rows[result.n_pre:]
        td = _tau_deph([r[0] - result.tau_rot for r in post], [r[xi] for r in post])
        return {"N": cfg.N, "tau_rot": result.tau_rot, "tau_deph": td}
    c2 = cols.index("c2")
    k = min(range(len(result.rows)), key=lambda i: result.rows[i][c2])
    return {"N": cfg.N, "tau_min_c2": result.rows[k][0], "min_c2": result.rows[k][c2]}


def _tagged_path(path: str, tag: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_{tag}{ext}"


def run_sweep(cfg: RunConfig, out: Output, threads: int) -> int:
    derived_key = "tau_deph" if cfg.protocol.kind == "gid" else "tau_min_c2"
    successes, failures = [], []
    for value in cfg.sweep.values:
        sub = dataclasses.replace(cfg, N=value, sweep=None)
        try:
            result = execute_run(sub, threads)
            write_run(sub, result, Output(_tagged_path(out.path, f"N{value}"), out.format))
            successes.append(_derived_scalars(sub, result))
        except (ValidationFailure, ZeroPolarizationError, FloatingPointError) as exc:
            failures.append({"value": value, "error": str(exc)})
            print(f"N = {value}: {exc}", file=sys.stderr)

    exponent = float("nan")
    if len(successes) >= 2 and all(d[derived_key] > 0 for d in successes):
        slope, _ = np.polyfit(
            np.log([d["N"] for d in successes]),
            np.log([d[derived_key] for d in successes]),
            1,
        )
        exponent = float(slope)

    if out.format == "json":
        write_json(
            out.path,
            {
                "parameter": "N",
                "kind": cfg.protocol.kind,
                "values": [{k: _json_safe(v) for k, v in d.items()} for d in successes],
                "fit": {"exponent": exponent} if math.isfinite(exponent) else None,
                "failures": failures,
            },
        )
    else:
        if cfg.protocol.kind == "gid":
            columns = ("N", "tau_rot", "tau_deph", "fit_exponent")
            rows = [[d["N"], d["tau_rot"], d["tau_deph"], exponent] for d in successes]
        else:
            columns = ("N", "tau_min_c2", "min_c2", "fit_exponent")
            rows = [[d["N"], d["tau_min_c2"], d["min_c2"], exponent] for d in successes]
        write_csv(out.path, columns, rows)
    print(f"wrote {out.path}")
    if failures:
        print(f"{len(failures)} of {len(cfg.sweep.values)} sweep values failed", file=sys.stderr)
        return 3
    return 0


# -------------------------------------------------------------------- main

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinnet",
        description="Simulate and score entanglement protocols on coupled spin ensembles.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "gie": "run the entangling protocol over the configured tau grid",
        "gid": "run the preparation + dephasing protocol (composite time axis)",
        "network": "run either protocol with more than two ensembles",
        "params": "compute double-well coupling constants (JSON report)",
        "oracle-check": "compare the fast engines against the dense engine",
        "sweep": "repeat a run over a list of N values and aggregate",
    }
    for name, text in helps.items():
        sp = sub.add_parser(name, help=text)
        sp.add_argument("--config", required=True, help="TOML config file")
        sp.add_argument("--out", help="override output.path from the config")
        sp.add_argument("--format", choices=("csv", "json"), help="override output.format")
        sp.add_argument("--threads", type=int, help="parallel grid evaluation (default: all cores)")
        sp.add_argument("--seed", type=int, help="reserved; all engines are deterministic")
    return parser


def _resolve_output(cfg_out: Output, args, require_path=True) -> Output:
    path = args.out if args.out is not None else cfg_out.path
    fmt = args.format if args.format is not None else cfg_out.format
    if require_path and path is None:
        raise ConfigError("output.path: set it in the config or pass --out")
    return Output(path=path, format=fmt)


def _dispatch(args) -> int:
    threads = args.threads if args.threads is not None else (os.cpu_count() or 1)
    if threads < 1:
        raise ConfigError("--threads: must be at least 1")

    if args.command == "params":
        cfg = load_params_config(args.config)
        out = _resolve_output(cfg.output, args, require_path=False)
        if out.format != "json":
            raise ConfigError("output.format: coupling reports are JSON documents")
        write_json(out.path, run_params(cfg))
        if out.path is not None:
            print(f"wrote {out.path}")
        return 0

    cfg = load_run_config(args.config)
    if args.command == "sweep":
        if cfg.sweep is None:
            raise ConfigError("sweep: config has no [sweep] section")
        return run_sweep(cfg, _resolve_output(cfg.output, args), threads)
    if cfg.sweep is not None:
        raise ConfigError("sweep: section present; use the sweep subcommand")

    if args.command == "oracle-check":
        return run_oracle_check(cfg, _resolve_output(cfg.output, args, require_path=False), threads)

    if args.command == "network":
        if cfg.M <= 2:
            raise ConfigError("ensemble.M: network runs need M > 2")
    elif cfg.protocol.kind != args.command:
        raise ConfigError(
            f"protocol.kind: config declares {cfg.protocol.kind!r}, "
            f"subcommand is {args.command!r}"
        )

    out = _resolve_output(cfg.output, args)
    write_run(cfg, execute_run(cfg, threads), out)
    print(f"wrote {out.path}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SizeCapError as exc:
        print(f"size cap: {exc}", file=sys.stderr)
        return 4
    except (ValidationFailure, ZeroPolarizationError, GridRefinementError, FloatingPointError) as exc:
        print(f"validation failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
