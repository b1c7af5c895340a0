"""Experiment orchestration: oracles, theory-vs-simulation comparison, I/O.

Contains the independent finite-volume integrator of the two-component
transport system (the cross-check for everything spectral), peak-envelope
extraction and power-law tail fits for simulated consumption series, the
comparison report used to reproduce the paper-style figures, and the
CSV/JSON run-directory format.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from . import particle_sim
from .disorder import DisorderSpec, averaged_delta_n, envelope
from .particle_sim import ConsumptionSeries, SimConfig, default_record_stride
from .spectral import (
    EnsembleParams,
    InitialCondition,
    eigenfunction_integrals,
    minus_modes,
    projection_coefficient,
    tau_sensitivity,
)

SCHEMA_VERSION = 1


class ConfigurationError(ValueError):
    """Inconsistent or unstable numerical configuration."""


class InsufficientDataError(RuntimeError):
    """Not enough envelope peaks in the requested window."""


# ---------------------------------------------------------------------------
# finite-volume reference integrator


@dataclass(frozen=True)
class FpSolution:
    """Output of the reference integrator."""

    times: np.ndarray
    n_up: np.ndarray
    x_centers: np.ndarray
    snapshots: dict
    mass_drift_per_step: float


def fp_reference_integrator(
    p: EnsembleParams,
    init: InitialCondition,
    t_end: float,
    cells_per_band: int = 2000,
    courant: float = 1.0,
    snapshot_times: tuple = (),
    pad_efolds: float = 30.0,
) -> FpSolution:
    """First-order upwind finite-volume integration of the transport system.

    The up-component advects left at speed u, the down-component right;
    after each advection step the out-of-band populations exchange by the
    exact per-step Poisson factor exp(-r*dt), which conserves probability
    to rounding.  Band edges coincide with cell interfaces, and at the
    default unit Courant number the advection is an exact cell shift, so
    the only discretization errors are the initial-condition projection
    and the O(dt) advection/switching splitting.

    Parameters
    ----------
    p, init, t_end
        Problem definition; init may be the delta start or a tabulated
        profile (sampled onto the grid and renormalized).
    cells_per_band : int
        Resolution of [x_down, x_up]; dt follows from the CFL condition.
    courant : float
        u*dt/dx, must be <= 1.
    snapshot_times : tuple of float
        Times at which full (up, down) profiles are stored (as the
        nearest time step).
    pad_efolds : float
        Domain padding beyond the band, in units of the out-of-band decay
        length u/r; 30 keeps the boundary outflow near 1e-13.
    """
    if not (0.0 < courant <= 1.0):
        raise ConfigurationError(f"CFL violation: need 0 < courant <= 1, got {courant}")
    dx = p.width / cells_per_band
    dt = courant * dx / p.u
    pad = pad_efolds * p.u / p.r
    n_pad = int(math.ceil(pad / dx))
    n_cells = cells_per_band + 2 * n_pad
    x_edges = p.x_down + (np.arange(n_cells + 1) - n_pad) * dx
    x_centers = 0.5 * (x_edges[:-1] + x_edges[1:])
    below = x_centers < p.x_down
    above = x_centers > p.x_up

    up = np.zeros(n_cells)
    down = np.zeros(n_cells)
    if init.kind == "delta_at_lower_boundary":
        # the mass starts moving down across the lower edge; seed the cell
        # just below it
        up[n_pad - 1] = 1.0 / dx
    else:
        up += np.interp(x_centers, init.x, init.up, left=0.0, right=0.0)
        down += np.interp(x_centers, init.x, init.down, left=0.0, right=0.0)
        total = (up.sum() + down.sum()) * dx
        up /= total
        down /= total

    decay = math.exp(-p.r * dt)
    n_steps = int(round(t_end / dt))
    times = np.arange(n_steps + 1) * dt
    n_up = np.empty(n_steps + 1)
    n_up[0] = up.sum() * dx
    want_snapshot = {int(round(ts / dt)) for ts in snapshot_times}
    snapshots = {}
    if 0 in want_snapshot:
        snapshots[0.0] = (x_centers.copy(), up.copy(), down.copy())
    c = courant
    max_loss = 0.0
    for s in range(1, n_steps + 1):
        # upwind advection: up moves left, down moves right
        loss = c * (up[0] + down[-1]) * dx
        max_loss = max(max_loss, loss)
        up[:-1] += c * (up[1:] - up[:-1])
        up[-1] -= c * up[-1]
        down[1:] += c * (down[:-1] - down[1:])
        down[0] -= c * down[0]
        # exact Poisson exchange toward the restoring state
        moved = up[below] * (1.0 - decay)
        up[below] -= moved
        down[below] += moved
        moved = down[above] * (1.0 - decay)
        down[above] -= moved
        up[above] += moved
        n_up[s] = up.sum() * dx
        if s in want_snapshot:
            snapshots[float(s * dt)] = (x_centers.copy(), up.copy(), down.copy())
    return FpSolution(
        times=times,
        n_up=n_up,
        x_centers=x_centers,
        snapshots=snapshots,
        mass_drift_per_step=max_loss,
    )


# ---------------------------------------------------------------------------
# theory curves


def two_mode_theory(
    p: EnsembleParams,
    disorder: DisorderSpec | None = None,
    mode_count: int = 2,
):
    """Theory curves (signed deviation, envelope) for the worst-case start.

    Returns (delta_n(t), envelope(t)) callables.  Without disorder these
    come from the mode_count leading '-' modes; with disorder, from the
    slow conjugate pair times the closed-form disorder envelope.
    """
    init = InitialCondition.delta()
    if disorder is not None and disorder.delta > 0.0:
        coeffs = tau_sensitivity(p.with_tau(disorder.tau0))

        def signed(t):
            return averaged_delta_n(disorder, t, p, coeffs)

        def env(t):
            t_arr = np.atleast_1d(np.asarray(t, dtype=float))
            out = np.empty(t_arr.shape)
            for i, ti in enumerate(t_arr):
                e = envelope(disorder, float(ti), coeffs)
                out[i] = 2.0 * abs(
                    np.exp(coeffs.phi0 - coeffs.lambda0 * float(ti)) * e.value
                )
            return out if np.asarray(t).ndim else float(out[0])

        return signed, env

    modes = minus_modes(p, mode_count)
    amps = [
        projection_coefficient(m, p, init) * eigenfunction_integrals(m, p).up
        for m in modes
    ]

    def signed(t):
        t_arr = np.asarray(t, dtype=float)
        tot = np.zeros(t_arr.shape, dtype=complex)
        for m, a in zip(modes, amps):
            tot += a * np.exp(-m.lam * t_arr)
        return tot.real if t_arr.ndim else float(tot.real)

    def env(t):
        t_arr = np.asarray(t, dtype=float)
        # envelope of the slow conjugate pair
        m, a = modes[0], amps[0]
        out = 2.0 * np.abs(a) * np.exp(-m.lam.real * t_arr)
        return out if t_arr.ndim else float(out)

    return signed, env


def envelope_validity_end(
    disorder: DisorderSpec | None, p: EnsembleParams, t_max: float
) -> float:
    """Last time the closed-form envelope is inside its validity window."""
    if disorder is None or disorder.delta == 0.0:
        return t_max
    coeffs = tau_sensitivity(p.with_tau(disorder.tau0))
    ts = np.linspace(0.0, t_max, 400)
    end = 0.0
    for ti in ts:
        if envelope(disorder, float(ti), coeffs).validity == "inside_window":
            end = float(ti)
        else:
            break
    return end


# ---------------------------------------------------------------------------
# envelope peaks, tail fits, comparison


def envelope_peaks(times: np.ndarray, values: np.ndarray):
    """Local maxima of |values| with parabolic sub-sample refinement."""
    v = np.abs(values)
    idx = np.flatnonzero((v[1:-1] >= v[:-2]) & (v[1:-1] > v[2:])) + 1
    t_pk = np.empty(idx.size)
    v_pk = np.empty(idx.size)
    for j, i in enumerate(idx):
        y0, y1, y2 = v[i - 1], v[i], v[i + 1]
        denom = y0 - 2.0 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0.0 else 0.0
        shift = float(np.clip(shift, -1.0, 1.0))
        t_pk[j] = times[i] + shift * (times[min(i + 1, len(times) - 1)] - times[i])
        v_pk[j] = y1 - 0.25 * (y0 - y2) * shift
    return t_pk, v_pk


@dataclass(frozen=True)
class TailSlopeFit:
    slope: float
    ci95: float
    n_peaks: int


def fit_tail_slope(
    series: ConsumptionSeries, window: tuple[float, float]
) -> TailSlopeFit:
    """Log-log slope of the peak envelope of |n_up - 1/2| over the window."""
    t0, t1 = window
    if t0 >= t1 or t0 < series.times[0] or t1 > series.times[-1]:
        raise InsufficientDataError(f"window {window} outside the data range")
    t_pk, v_pk = envelope_peaks(series.times, series.n_up_fraction - 0.5)
    keep = (t_pk >= t0) & (t_pk <= t1) & (v_pk > 0.0)
    t_pk, v_pk = t_pk[keep], v_pk[keep]
    if t_pk.size < 5:
        raise InsufficientDataError(
            f"only {t_pk.size} envelope peaks in window {window}; need >= 5"
        )
    lx, ly = np.log(t_pk), np.log(v_pk)
    (slope, _), cov = np.polyfit(lx, ly, 1, cov=True)
    return TailSlopeFit(
        slope=float(slope), ci95=float(1.96 * math.sqrt(cov[0, 0])), n_peaks=t_pk.size
    )


@dataclass(frozen=True)
class ExperimentSpec:
    """One theory-vs-simulation comparison job."""

    name: str
    ensemble: EnsembleParams
    disorder: DisorderSpec | None
    sim: SimConfig
    mode_count: int = 2

    def __post_init__(self):
        s, e = self.sim, self.ensemble
        if not (
            s.r == e.r and s.x_down == e.x_down and s.x_up == e.x_up
        ):
            raise ConfigurationError("sim and ensemble parameters disagree")
        if self.disorder is not None and s.disorder != self.disorder:
            raise ConfigurationError("sim and spec disorder disagree")


@dataclass(frozen=True)
class ComparisonReport:
    """Agreement metrics between a particle run and the two-mode theory."""

    max_rel_envelope_error: float
    frequency_error: float
    frequency_bin: float
    noise_floor_estimate: float
    tail_slope_fits: dict
    window: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def dominant_frequency(times: np.ndarray, values: np.ndarray) -> tuple[float, float]:
    """Peak non-DC frequency of the series and the DFT bin width."""
    dt = times[1] - times[0]
    spec = np.abs(np.fft.rfft(values - values.mean()))
    freqs = np.fft.rfftfreq(values.size, d=dt)
    if spec.size < 2:
        return 0.0, math.inf
    k = 1 + int(np.argmax(spec[1:]))
    return float(freqs[k]), float(freqs[1])


def compare_theory_sim(
    spec: ExperimentSpec, series: ConsumptionSeries | None = None
) -> ComparisonReport:
    """Overlay a particle run with the slow-mode theory and score it.

    The envelope comparison runs where the theory envelope exceeds
    10/sqrt(N) (and, with disorder, while the closed-form envelope is
    inside its validity window).  The noise floor is the RMS of the
    deviation over the final 15% of the run, and the dominant oscillation
    frequency must be read against the reported DFT bin width.
    """
    if series is None:
        series = particle_sim.run(spec.sim)
    p = spec.ensemble
    signed, env = two_mode_theory(p, spec.disorder, spec.mode_count)
    t = series.times
    dev = series.n_up_fraction - 0.5
    floor_scale = 10.0 / math.sqrt(spec.sim.n_devices)

    env_vals = env(t)
    t_window_end = float(t[-1])
    above = np.flatnonzero(env_vals < floor_scale)
    if above.size:
        t_window_end = float(t[above[0]])
    t_window_end = min(
        t_window_end, envelope_validity_end(spec.disorder, p, float(t[-1]))
    )
    window = (0.0, t_window_end)

    in_win = t <= t_window_end
    t_pk, v_pk = envelope_peaks(t[in_win], dev[in_win])
    if t_pk.size:
        rel = np.abs(v_pk - env(t_pk)) / env(t_pk)
        max_rel = float(np.max(rel))
    else:
        max_rel = math.nan

    f_sim, f_bin = dominant_frequency(t[in_win], dev[in_win])
    lam = (
        tau_sensitivity(p.with_tau(spec.disorder.tau0)).lambda0
        if spec.disorder is not None and spec.disorder.delta > 0.0
        else minus_modes(p, 1)[0].lam
    )
    f_theory = abs(lam.imag) / (2.0 * math.pi)
    freq_err = abs(f_sim - f_theory)

    tail_start = t[0] + 0.85 * (t[-1] - t[0])
    tail = dev[t >= tail_start]
    noise_floor = float(np.sqrt(np.mean(tail**2)))

    return ComparisonReport(
        max_rel_envelope_error=max_rel,
        frequency_error=freq_err,
        frequency_bin=f_bin,
        noise_floor_estimate=noise_floor,
        tail_slope_fits={},
        window=window,
    )


# ---------------------------------------------------------------------------
# file formats

_CSV_HEADER = ["time", "n_up_fraction", "theory_abs", "envelope_abs"]


def write_series_csv(
    path,
    series: ConsumptionSeries,
    theory_abs: np.ndarray | None = None,
    envelope_abs: np.ndarray | None = None,
) -> None:
    """Series CSV: header time,n_up_fraction,theory_abs,envelope_abs."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CSV_HEADER)
        for i in range(series.times.size):
            row = [repr(float(series.times[i])), repr(float(series.n_up_fraction[i]))]
            row.append("" if theory_abs is None else repr(float(theory_abs[i])))
            row.append("" if envelope_abs is None else repr(float(envelope_abs[i])))
            writer.writerow(row)


def read_series_csv(path):
    """Inverse of write_series_csv; absent columns come back as None."""
    path = Path(path)
    times, n_up, theory, env = [], [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != _CSV_HEADER:
            raise ValueError(f"unexpected series header {header!r} in {path}")
        for row in reader:
            times.append(float(row[0]))
            n_up.append(float(row[1]))
            theory.append(float(row[2]) if row[2] else math.nan)
            env.append(float(row[3]) if row[3] else math.nan)
    theory_arr = np.array(theory)
    env_arr = np.array(env)
    return (
        np.array(times),
        np.array(n_up),
        None if np.isnan(theory_arr).all() else theory_arr,
        None if np.isnan(env_arr).all() else env_arr,
    )


def write_json(path, payload: dict) -> None:
    path = Path(path)
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    path.write_text(json.dumps(payload, indent=2, sort_keys=True), encoding="utf-8")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


def sim_config_to_dict(cfg: SimConfig) -> dict:
    d = cfg.physical_dict()
    d["seed"] = cfg.seed
    d["record_stride"] = cfg.record_stride
    d["config_digest"] = particle_sim.config_digest(cfg)
    return d


def sim_config_from_dict(d: dict) -> SimConfig:
    dis = d["disorder"]
    return SimConfig(
        n_devices=int(d["n_devices"]),
        dt=float(d["dt"]),
        t_end=float(d["t_end"]),
        r=float(d["r"]),
        x_down=float(d["x_down"]),
        x_up=float(d["x_up"]),
        disorder=DisorderSpec(dis["kind"], float(dis["tau0"]), float(dis["delta"])),
        seed=int(d["seed"]),
        record_stride=int(d["record_stride"]),
    )


# ---------------------------------------------------------------------------
# figure presets

DEFAULT_SEED = 20260810
FIG3_PRESET = {
    "r": 10.0,
    "tau0": 3.0,
    "delta": 0.1,
    "x_down": -1.0,
    "x_up": 1.0,
    "n_devices": 100_000,
    "t_end": 180.0,  # 60 cycle times, deep into the noise floor
}
FIG1_PRESET = {
    "r": 100.0,
    "tau0": 3.0,
    "delta": 0.1,
    "x_down": -1.0,
    "x_up": 1.0,
    "n_devices": 100_000,
    "t_end": 180.0,
}


def make_sim_config(
    r: float,
    tau0: float,
    delta: float,
    kind: str = "gaussian",
    n_devices: int = 100_000,
    t_end: float = 90.0,
    x_down: float = -1.0,
    x_up: float = 1.0,
    seed: int = DEFAULT_SEED,
    dt: float | None = None,
    record_stride: int | None = None,
) -> SimConfig:
    """SimConfig with the step-size guards resolved automatically."""
    disorder = DisorderSpec(kind, tau0, delta)
    if dt is None:
        dt = min(0.05 / r, particle_sim.plausible_min_tau(disorder) / 200.0)
    if record_stride is None:
        record_stride = default_record_stride(tau0, dt)
    return SimConfig(
        n_devices=n_devices,
        dt=dt,
        t_end=t_end,
        r=r,
        x_down=x_down,
        x_up=x_up,
        disorder=disorder,
        seed=seed,
        record_stride=record_stride,
    )


def _run_one(spec: ExperimentSpec):
    series = particle_sim.run(spec.sim)
    return spec.name, series


def run_experiments(specs, threads: int = 1):
    """Run several independent jobs; results keep the given order."""
    if threads <= 1 or len(specs) <= 1:
        return [(s.name, particle_sim.run(s.sim)) for s in specs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(_run_one, specs))


def figure_experiment_specs(preset: dict, kinds, deltas, seed=None):
    """Experiment list for a figure preset: one job per (kind, delta)."""
    jobs = []
    for delta in deltas:
        for kind in kinds:
            cfg = make_sim_config(
                r=preset["r"],
                tau0=preset["tau0"],
                delta=delta,
                kind=kind,
                n_devices=preset["n_devices"],
                t_end=preset["t_end"],
                x_down=preset["x_down"],
                x_up=preset["x_up"],
                seed=preset.get("seed", DEFAULT_SEED) if seed is None else seed,
            )
            name = f"{kind}_delta{delta:g}" if delta > 0 else "homogeneous"
            jobs.append(
                ExperimentSpec(
                    name=name,
                    ensemble=cfg.ensemble,
                    disorder=cfg.disorder if delta > 0 else None,
                    sim=cfg,
                )
            )
            if delta == 0.0:
                break  # all kinds coincide at zero width
    return jobs


def _write_job_outputs(out_dir: Path, spec: ExperimentSpec, series, report):
    signed, env = two_mode_theory(spec.ensemble, spec.disorder, spec.mode_count)
    t = series.times
    write_series_csv(
        out_dir / f"series_{spec.name}.csv",
        series,
        theory_abs=np.abs(np.atleast_1d(signed(t))),
        envelope_abs=np.atleast_1d(env(t)),
    )
    return {"series_file": f"series_{spec.name}.csv", **report.to_dict()}


def run_comparison_bundle(
    out_dir, jobs, threads: int = 1, extra_config: dict | None = None
):
    """Run jobs, write config.json / series_*.csv / report.json, return reports.

    The fully resolved configuration is written before any computation so
    a crash still leaves an exact record of what was attempted.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    config_payload = {
        "jobs": {s.name: sim_config_to_dict(s.sim) for s in jobs},
        "threads": threads,
        **(extra_config or {}),
    }
    write_json(out_dir / "config.json", config_payload)
    results = run_experiments(jobs, threads=threads)
    by_name = dict(results)
    reports = {}
    for spec in jobs:
        series = by_name[spec.name]
        report = compare_theory_sim(spec, series)
        reports[spec.name] = _write_job_outputs(out_dir, spec, series, report)
    return reports, by_name


def run_fig3(out_dir, threads: int = 1, seed: int = DEFAULT_SEED, preset=None):
    """Slow-switching comparison dataset: homogeneous plus all four kinds."""
    preset = dict(FIG3_PRESET if preset is None else preset, seed=seed)
    from .disorder import KINDS

    jobs = figure_experiment_specs(preset, KINDS, (0.0, preset["delta"]))
    reports, _ = run_comparison_bundle(
        Path(out_dir), jobs, threads=threads, extra_config={"preset": "fig3"}
    )
    write_json(Path(out_dir) / "report.json", {"reports": reports})
    return reports


def analyze_power_tails(series_by_name: dict, preset: dict) -> dict:
    """Tail diagnostics of a weak-control dataset (one run per kind).

    Fits the peak envelope of each disordered run: log-log slopes for the
    slowly decaying laplacian and uniform kinds, a semilog straight-line
    fit (R^2) for the lorentzian, plus the decay hierarchy measured as
    the time each envelope last exceeds a fixed threshold.
    """
    tau0 = preset["tau0"]
    n = preset["n_devices"]
    floor = 0.5 / math.sqrt(n)
    out = {"tail_slopes": {}, "lorentzian_semilog_r2": None, "hierarchy": {}}
    for name, series in series_by_name.items():
        if name == "homogeneous":
            continue
        kind = name.split("_")[0]
        t_pk, v_pk = envelope_peaks(series.times, series.n_up_fraction - 0.5)
        above = v_pk > 3.0 * floor
        t_floor = float(t_pk[above][-1]) if above.any() else float(series.times[-1])
        window = (10.0 * tau0, t_floor)
        out["hierarchy"][kind] = _time_to_threshold(t_pk, v_pk, 0.01)
        if kind in ("laplacian", "uniform"):
            fit = fit_tail_slope(series, window)
            out["tail_slopes"][kind] = {
                "slope": fit.slope,
                "ci95": fit.ci95,
                "n_peaks": fit.n_peaks,
                "window": window,
            }
        elif kind == "lorentzian":
            keep = (t_pk >= window[0]) & (t_pk <= window[1]) & (v_pk > 0)
            x, y = t_pk[keep], np.log(v_pk[keep])
            slope, intercept = np.polyfit(x, y, 1)
            resid = y - (slope * x + intercept)
            ss_tot = float(np.sum((y - y.mean()) ** 2))
            out["lorentzian_semilog_r2"] = (
                1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 0.0
            )
            out["lorentzian_decay_rate"] = -float(slope)
    return out


def _time_to_threshold(t_pk, v_pk, threshold: float) -> float:
    above = v_pk >= threshold
    return float(t_pk[above][-1]) if above.any() else 0.0


def run_fig1(out_dir, threads: int = 1, seed: int = DEFAULT_SEED, preset=None):
    """Weak-control disorder-comparison dataset: four kinds, one report."""
    preset = dict(FIG1_PRESET if preset is None else preset, seed=seed)
    from .disorder import KINDS

    jobs = figure_experiment_specs(preset, KINDS, (preset["delta"],))
    reports, by_name = run_comparison_bundle(
        Path(out_dir), jobs, threads=threads, extra_config={"preset": "fig1"}
    )
    tails = analyze_power_tails(by_name, preset)
    write_json(Path(out_dir) / "report.json", {"reports": reports, **tails})
    return {"reports": reports, **tails}


# ---------------------------------------------------------------------------
# bifurcation sweep


@dataclass(frozen=True)
class BifurcationSweep:
    tau: np.ndarray
    lam0: np.ndarray
    lam1: np.ndarray
    tau_of_max_decay: float
    critical_rt_estimate: float
    splitting_exponent: float

    def grid_step(self) -> float:
        return float(self.tau[1] - self.tau[0])


def bifurcation_sweep(
    r: float, tau_min: float, tau_max: float, steps: int
) -> BifurcationSweep:
    """Sweep tau at fixed r: locate the fastest-mixing point and the
    real-to-complex transition, and fit the splitting exponent below it."""
    from .spectral import CRITICAL_RT, EnsembleParams, eigenvalue

    taus = np.linspace(tau_min, tau_max, steps)
    lam0 = np.empty(steps, dtype=complex)
    lam1 = np.empty(steps, dtype=complex)
    for i, tau in enumerate(taus):
        p = EnsembleParams(tau=float(tau), r=r)
        lam0[i] = eigenvalue(0, -1, p)
        lam1[i] = eigenvalue(-1, -1, p)
    i_max = int(np.argmax(lam0.real))
    tau_star = float(taus[i_max])
    # splitting exponent: |lam1 - lam0| ~ (C - r*tau)^nu just below critical
    gaps = np.geomspace(1e-7, 1e-4, 12)
    seps = []
    for gap in gaps:
        p = EnsembleParams(tau=(CRITICAL_RT - gap) / r, r=r)
        seps.append(abs(eigenvalue(-1, -1, p) - eigenvalue(0, -1, p)))
    nu = float(np.polyfit(np.log(gaps), np.log(seps), 1)[0])
    return BifurcationSweep(
        tau=taus,
        lam0=lam0,
        lam1=lam1,
        tau_of_max_decay=tau_star,
        critical_rt_estimate=r * tau_star,
        splitting_exponent=nu,
    )
