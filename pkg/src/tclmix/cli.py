"""Command-line interface: reproducible spectral and simulation experiments.

Subcommands
-----------
spectrum     eigenvalue table at fixed (r, tau), or a beta-sweep of the
             four leading modes
bifurcation  tau-sweep at fixed r: fastest-mixing point, critical r*tau,
             splitting exponent
envelope     closed-form disorder envelopes, optionally with the
             quadrature oracle
simulate     one particle run -> series CSV + resolved config JSON
compare      particle run overlaid with the slow-mode theory -> report
fig1, fig3   frozen presets emitting the full figure datasets

Exit codes: 0 success, 1 numerical failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import harness, particle_sim
from .disorder import (
    KINDS,
    DisorderSpec,
    EnvelopePoleError,
    envelope,
    numeric_disorder_average,
)
from .lambert_w import ConvergenceError
from .quadrature import QuadratureError
from .spectral import (
    CRITICAL_RT,
    EnsembleParams,
    classify_regime,
    eigenvalue,
    spectral_residual,
    tau_sensitivity,
)

_NUMERICAL_ERRORS = (
    ConvergenceError,
    QuadratureError,
    EnvelopePoleError,
    ArithmeticError,
)


def _thread_count(args) -> int:
    if getattr(args, "threads", None):
        return max(1, args.threads)
    env = os.environ.get("TCL_THREADS")
    return max(1, int(env)) if env else 1


def _write_rows(path: Path, header, rows) -> None:
    import csv

    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _echo_config(out_dir: Path, payload: dict) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    harness.write_json(out_dir / "config.json", payload)
    print(json.dumps({"schema_version": harness.SCHEMA_VERSION, **payload}, sort_keys=True))


def _load_config_file(path: str | None) -> dict:
    if not path:
        return {}
    data = harness.read_json(path)
    data.pop("schema_version", None)
    return data


def _resolve(args, file_cfg: dict, key: str, default):
    """Flag beats config file beats default."""
    val = getattr(args, key.replace("-", "_"), None)
    if val is not None:
        return val
    if key in file_cfg:
        return file_cfg[key]
    return default


# ---------------------------------------------------------------------------
# subcommands


def cmd_spectrum(args) -> int:
    out = Path(args.out)
    p = EnsembleParams(tau=args.tau, r=args.r)
    if args.beta_sweep:
        bmin, bmax, steps = args.beta_sweep
        betas = np.linspace(bmin, bmax, int(steps))
        markers = (0.2, 0.3, 1.0, 5.0)
        rows = []
        for beta in betas:
            pb = EnsembleParams(tau=args.tau, r=4.0 * beta / args.tau)
            regime = classify_regime(pb)
            is_marker = int(any(abs(beta - m) < 0.5 * (betas[1] - betas[0]) for m in markers))
            for k, sign in ((0, -1), (-1, -1), (1, 1), (-1, 1)):
                lam = eigenvalue(k, sign, pb)
                rows.append(
                    [beta, k, sign, lam.real, lam.imag, regime, is_marker]
                )
        _write_rows(
            out,
            ["beta", "k", "sign", "re_lambda", "im_lambda", "regime", "is_marker"],
            rows,
        )
        print(f"wrote beta sweep ({len(rows)} rows) to {out}")
        return 0
    rows = []
    regime = classify_regime(p)
    for k in range(-args.kmax, args.kmax + 1):
        for sign in (1, -1):
            lam = eigenvalue(k, sign, p)
            rows.append(
                [
                    k,
                    sign,
                    lam.real,
                    lam.imag,
                    abs(spectral_residual(lam, sign, p)),
                    p.beta,
                    regime,
                ]
            )
    _write_rows(
        out,
        ["k", "sign", "re_lambda", "im_lambda", "residual", "beta", "regime"],
        rows,
    )
    print(f"wrote {len(rows)} eigenvalues to {out} (regime: {regime})")
    return 0


def cmd_bifurcation(args) -> int:
    out = Path(args.out)
    sweep = harness.bifurcation_sweep(args.r, args.tau_min, args.tau_max, args.steps)
    rows = [
        [t, l0.real, l0.imag, l1.real, l1.imag, int(abs(l0.imag) < 1e-9 * args.r)]
        for t, l0, l1 in zip(sweep.tau, sweep.lam0, sweep.lam1)
    ]
    _write_rows(
        out,
        ["tau", "re_lambda0", "im_lambda0", "re_lambda_m1", "im_lambda_m1", "is_real"],
        rows,
    )
    summary = {
        "tau_of_max_decay": sweep.tau_of_max_decay,
        "critical_rt_estimate": sweep.critical_rt_estimate,
        "critical_rt_reference": CRITICAL_RT,
        "splitting_exponent": sweep.splitting_exponent,
        "grid_step": sweep.grid_step(),
    }
    harness.write_json(out.with_suffix(".summary.json"), summary)
    print(
        f"fastest mixing at tau={sweep.tau_of_max_decay:.6g} "
        f"(r*tau={sweep.critical_rt_estimate:.6f}, reference {CRITICAL_RT:.6f}); "
        f"splitting exponent {sweep.splitting_exponent:.3f}"
    )
    return 0


def cmd_envelope(args) -> int:
    out_dir = Path(args.out)
    kinds = KINDS if args.kind == "all" else (args.kind,)
    p = EnsembleParams(tau=args.tau0, r=args.r)
    coeffs = tau_sensitivity(p)
    _echo_config(
        out_dir,
        {
            "command": "envelope",
            "kinds": list(kinds),
            "tau0": args.tau0,
            "delta": args.delta,
            "r": args.r,
            "t_end": args.t_end,
            "points": args.points,
            "oracle": bool(args.oracle),
        },
    )
    ts = np.linspace(0.0, args.t_end, args.points)
    summary = {}
    for kind in kinds:
        spec = DisorderSpec(kind, args.tau0, args.delta)
        rows = []
        for t in ts:
            if args.delta == 0.0:
                env_val, validity = 1.0 + 0j, "inside_window"
            else:
                try:
                    env_val, validity = envelope(spec, float(t), coeffs)
                except EnvelopePoleError:
                    rows.append([t, "", "", "", "pole", "", ""])
                    continue
            row = [t, env_val.real, env_val.imag, abs(env_val), validity]
            if args.oracle:
                oracle = numeric_disorder_average(spec, float(t), p)
                row += [oracle.real, oracle.imag]
            else:
                row += ["", ""]
            rows.append(row)
        _write_rows(
            out_dir / f"envelope_{kind}.csv",
            ["time", "re_envelope", "im_envelope", "abs_envelope", "validity",
             "re_oracle", "im_oracle"],
            rows,
        )
        finite = [r for r in rows if r[3] != ""]
        summary[kind] = float(finite[-1][3]) if finite else math.nan
    order = sorted(summary, key=summary.get)
    harness.write_json(out_dir / "summary.json", {"abs_envelope_at_t_end": summary,
                                                  "fastest_to_slowest": order})
    print("decay ordering at t_end (fastest first):", ", ".join(order))
    return 0


def _sim_config_from_args(args, file_cfg: dict) -> particle_sim.SimConfig:
    kind = _resolve(args, file_cfg, "kind", "gaussian")
    tau0 = float(_resolve(args, file_cfg, "tau0", harness.FIG3_PRESET["tau0"]))
    delta = float(_resolve(args, file_cfg, "delta", harness.FIG3_PRESET["delta"]))
    r = float(_resolve(args, file_cfg, "r", harness.FIG3_PRESET["r"]))
    return harness.make_sim_config(
        r=r,
        tau0=tau0,
        delta=delta,
        kind=kind,
        n_devices=int(_resolve(args, file_cfg, "n", harness.FIG3_PRESET["n_devices"])),
        t_end=float(_resolve(args, file_cfg, "t_end", 90.0)),
        x_down=float(_resolve(args, file_cfg, "x_down", -1.0)),
        x_up=float(_resolve(args, file_cfg, "x_up", 1.0)),
        seed=int(_resolve(args, file_cfg, "seed", harness.DEFAULT_SEED)),
        dt=_resolve(args, file_cfg, "dt", None),
        record_stride=_resolve(args, file_cfg, "record_stride", None),
    )


def cmd_simulate(args) -> int:
    file_cfg = _load_config_file(args.config)
    cfg = _sim_config_from_args(args, file_cfg)
    out_dir = Path(args.out)
    _echo_config(out_dir, {"command": "simulate", **harness.sim_config_to_dict(cfg)})
    series = particle_sim.run(cfg)
    harness.write_series_csv(out_dir / "series.csv", series)
    print(
        f"simulated {cfg.n_devices} devices to t={series.times[-1]:g} "
        f"(digest {series.config_digest})"
    )
    return 0


def cmd_compare(args) -> int:
    file_cfg = _load_config_file(args.config)
    cfg = _sim_config_from_args(args, file_cfg)
    out_dir = Path(args.out)
    _echo_config(out_dir, {"command": "compare", **harness.sim_config_to_dict(cfg)})
    spec = harness.ExperimentSpec(
        name="run",
        ensemble=cfg.ensemble,
        disorder=cfg.disorder if cfg.disorder.delta > 0 else None,
        sim=cfg,
    )
    series = particle_sim.run(cfg)
    report = harness.compare_theory_sim(spec, series)
    harness._write_job_outputs(out_dir, spec, series, report)
    harness.write_json(out_dir / "report.json", {"reports": {"run": report.to_dict()}})
    print(
        f"envelope error {report.max_rel_envelope_error:.3f}, "
        f"frequency error {report.frequency_error:.4f} (bin {report.frequency_bin:.4f}), "
        f"noise floor {report.noise_floor_estimate:.2e}"
    )
    return 0


def cmd_fig(args, preset_name: str) -> int:
    out_dir = Path(args.out)
    threads = _thread_count(args)
    overrides = {}
    if args.n is not None:
        overrides["n_devices"] = args.n
    if args.t_end is not None:
        overrides["t_end"] = args.t_end
    if preset_name == "fig1":
        preset = dict(harness.FIG1_PRESET, **overrides)
        report = harness.run_fig1(out_dir, threads=threads, seed=args.seed, preset=preset)
        slopes = report.get("tail_slopes", {})
        print(
            "fig1 dataset written; tail slopes: "
            + ", ".join(f"{k}={v['slope']:.2f}" for k, v in slopes.items())
        )
    else:
        preset = dict(harness.FIG3_PRESET, **overrides)
        reports = harness.run_fig3(out_dir, threads=threads, seed=args.seed, preset=preset)
        worst = max(r["max_rel_envelope_error"] for r in reports.values())
        print(f"fig3 dataset written; worst envelope error {worst:.3f}")
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tclmix",
        description="Spectral mixing theory and particle Monte Carlo for "
        "randomized thermostatic load ensembles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("spectrum", help="eigenvalue table / beta sweep")
    sp.add_argument("--r", type=float, default=10.0)
    sp.add_argument("--tau", type=float, default=3.0)
    sp.add_argument("--kmax", type=int, default=5)
    sp.add_argument("--beta-sweep", nargs=3, type=float, metavar=("MIN", "MAX", "STEPS"))
    sp.add_argument("--out", required=True)
    sp.set_defaults(func=cmd_spectrum)

    bp = sub.add_parser("bifurcation", help="tau sweep at fixed r")
    bp.add_argument("--r", type=float, required=True)
    bp.add_argument("--tau-min", type=float, required=True)
    bp.add_argument("--tau-max", type=float, required=True)
    bp.add_argument("--steps", type=int, default=10000)
    bp.add_argument("--out", required=True)
    bp.set_defaults(func=cmd_bifurcation)

    ep = sub.add_parser("envelope", help="disorder envelopes (+oracle)")
    ep.add_argument("--kind", choices=KINDS + ("all",), default="all")
    ep.add_argument("--tau0", type=float, default=3.0)
    ep.add_argument("--delta", type=float, default=0.1)
    ep.add_argument("--r", type=float, default=100.0)
    ep.add_argument("--t-end", type=float, default=60.0)
    ep.add_argument("--points", type=int, default=121)
    ep.add_argument("--oracle", action="store_true")
    ep.add_argument("--out", required=True)
    ep.set_defaults(func=cmd_envelope)

    def add_sim_flags(sp_):
        sp_.add_argument("--config", help="JSON config file (flags override it)")
        sp_.add_argument("--n", type=int)
        sp_.add_argument("--dt", type=float)
        sp_.add_argument("--r", type=float)
        sp_.add_argument("--tau0", type=float)
        sp_.add_argument("--delta", type=float)
        sp_.add_argument("--kind", choices=KINDS)
        sp_.add_argument("--seed", type=int)
        sp_.add_argument("--t-end", type=float)
        sp_.add_argument("--record-stride", type=int)
        sp_.add_argument("--out", required=True)

    sim = sub.add_parser("simulate", help="one particle run")
    add_sim_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    cmp_ = sub.add_parser("compare", help="particle run vs slow-mode theory")
    add_sim_flags(cmp_)
    cmp_.set_defaults(func=cmd_compare)

    for name in ("fig1", "fig3"):
        fp = sub.add_parser(name, help=f"frozen {name} dataset preset")
        fp.add_argument("--out", required=True)
        fp.add_argument("--seed", type=int, default=harness.DEFAULT_SEED)
        fp.add_argument("--threads", type=int)
        fp.add_argument("--n", type=int, help="override device count")
        fp.add_argument("--t-end", type=float, help="override end time")
        fp.set_defaults(func=lambda a, _n=name: cmd_fig(a, _n))

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, harness.ConfigurationError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except _NUMERICAL_ERRORS as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
