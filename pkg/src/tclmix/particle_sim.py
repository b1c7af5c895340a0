"""Monte Carlo simulation of a fleet of independently cycling devices.

Each device carries a temperature x, an on/off state sigma, and its own
cycle time tau drawn once from the disorder law.  Per step of size dt:
the temperature moves by u*dt (down while on, up while off, with
u = 2*band/tau), then a device that finds itself outside the band
switches toward the restoring state with probability 1 - exp(-r*dt).
A device already moving back toward the band keeps its state - only the
restoring transition exists, matching the transport operator the
spectral solution diagonalizes (below the band only on->off, above only
off->on).

All randomness is counter-based and keyed by (seed, device, step), so a
run is bit-for-bit reproducible regardless of how the work is scheduled;
the only cross-device reduction is an exact integer count of switched-on
devices.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

import numpy as np
from numba import njit, uint64

from . import _rng
from .disorder import DisorderSpec, dpd_ppf
from .spectral import EnsembleParams

_REJECTION_CAP = 10**6
_STREAM_STEP = _rng.STREAM_STEP
_SEED_MASK = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class SimConfig:
    """Full specification of one particle run."""

    n_devices: int
    dt: float
    t_end: float
    r: float
    x_down: float
    x_up: float
    disorder: DisorderSpec
    seed: int
    record_stride: int

    def __post_init__(self):
        if self.n_devices < 1:
            raise ValueError("n_devices must be positive")
        if not (self.dt > 0.0 and self.t_end > 0.0):
            raise ValueError("dt and t_end must be positive")
        if not (self.x_down < self.x_up):
            raise ValueError("band must satisfy x_down < x_up")
        if self.record_stride < 1:
            raise ValueError("record_stride must be positive")
        if self.r * self.dt > 0.05:
            raise ValueError(
                f"time step too coarse for the switching rate: r*dt = "
                f"{self.r * self.dt:.3g} > 0.05"
            )
        if 200.0 * self.dt > plausible_min_tau(self.disorder):
            raise ValueError(
                f"time step too coarse for the fastest plausible cycle: need "
                f"dt <= {plausible_min_tau(self.disorder) / 200.0:.3g}"
            )

    @property
    def ensemble(self) -> EnsembleParams:
        return EnsembleParams(
            tau=self.disorder.tau0, r=self.r, x_down=self.x_down, x_up=self.x_up
        )

    def physical_dict(self) -> dict:
        """Parameters that determine the physics and the trajectory law."""
        return {
            "n_devices": self.n_devices,
            "dt": self.dt,
            "t_end": self.t_end,
            "r": self.r,
            "x_down": self.x_down,
            "x_up": self.x_up,
            "disorder": {
                "kind": self.disorder.kind,
                "tau0": self.disorder.tau0,
                "delta": self.disorder.delta,
            },
        }


def plausible_min_tau(disorder: DisorderSpec) -> float:
    """Resolution guard scale: the shortest cycle time worth resolving.

    Uniform disorder has hard support; the unbounded kinds use a 6-width
    excursion clipped at tau0/5 (rarer outliers exist but carry no
    ensemble weight).
    """
    if disorder.kind == "uniform":
        return disorder.tau0 - disorder.delta
    return max(disorder.tau0 - 6.0 * disorder.delta, disorder.tau0 / 5.0)


def default_record_stride(tau0: float, dt: float, points_per_cycle: int = 40) -> int:
    """Stride recording at least points_per_cycle samples per cycle time."""
    return max(1, int(round(tau0 / (points_per_cycle * dt))))


def config_digest(cfg: SimConfig) -> str:
    """Hash of the physical parameters; the seed is carried separately."""
    payload = json.dumps(cfg.physical_dict(), sort_keys=True).encode()
    return hashlib.sha256(payload).hexdigest()[:16]


@dataclass(frozen=True)
class DeviceState:
    """Read-only view of one device; u is its personal in-band speed."""

    x: float
    sigma: int
    tau: float
    u: float

    def __post_init__(self):
        if self.tau <= 0.0 or self.u <= 0.0:
            raise ValueError("tau and u must be positive")
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")


@dataclass
class DeviceEnsemble:
    """Structure-of-arrays state of the whole fleet."""

    x: np.ndarray
    sigma: np.ndarray  # int8, +1 on / -1 off
    tau: np.ndarray
    x_down: float
    x_up: float

    def __len__(self) -> int:
        return self.x.shape[0]

    @property
    def u(self) -> np.ndarray:
        return 2.0 * (self.x_up - self.x_down) / self.tau

    def device(self, i: int) -> DeviceState:
        return DeviceState(
            x=float(self.x[i]),
            sigma=int(self.sigma[i]),
            tau=float(self.tau[i]),
            u=2.0 * (self.x_up - self.x_down) / float(self.tau[i]),
        )


@dataclass(frozen=True)
class ConsumptionSeries:
    """Recorded trajectory of the switched-on fraction."""

    times: np.ndarray
    n_up_fraction: np.ndarray
    config_digest: str
    seed: int

    def __post_init__(self):
        if self.times.shape != self.n_up_fraction.shape:
            raise ValueError("times and n_up_fraction must have equal length")


def sample_cycle_times(cfg: SimConfig) -> np.ndarray:
    """Per-device tau from counter-based substreams of the master seed.

    Device i consumes draw j of its own stream on its j-th rejection, so
    the result never depends on how other devices' draws went.
    """
    n = cfg.n_devices
    if cfg.disorder.delta == 0.0:
        return np.full(n, cfg.disorder.tau0)
    tau = np.empty(n)
    pending = np.arange(n, dtype=np.uint64)
    rejected = 0
    attempt = 0
    while pending.size:
        u = _rng.uniforms(cfg.seed, _rng.STREAM_INIT, attempt, pending)
        draw = dpd_ppf(cfg.disorder, u)
        good = draw > 0.0
        tau[pending[good].astype(np.intp)] = draw[good]
        rejected += int(np.count_nonzero(~good))
        if rejected > _REJECTION_CAP:
            raise RuntimeError(
                f"rejected more than {_REJECTION_CAP} non-positive cycle times "
                f"for {cfg.disorder}"
            )
        pending = pending[~good]
        attempt += 1
    return tau


def init_ensemble(cfg: SimConfig) -> DeviceEnsemble:
    """Least-mixed start: every device at the lower band edge, switched on."""
    tau = sample_cycle_times(cfg)
    return DeviceEnsemble(
        x=np.full(cfg.n_devices, cfg.x_down, dtype=np.float64),
        sigma=np.ones(cfg.n_devices, dtype=np.int8),
        tau=tau,
        x_down=cfg.x_down,
        x_up=cfg.x_up,
    )


@njit(cache=True)
def _advance(x, sigma, step_inc, x_down, x_up, p_flip, seed, step0, n_steps,
             record_stride, rec_counts):
    """Advance all devices n_steps; record on-counts every record_stride.

    Returns the number of records written.  Draws one uniform per
    out-of-band device per step, keyed by (seed, device, global step), so
    results do not depend on iteration order.
    """
    n = x.shape[0]
    n_rec = 0
    for s in range(n_steps):
        gstep = step0 + s
        key = _rng.mix64(
            _rng.mix64(uint64(seed) ^ uint64(_STREAM_STEP)) + uint64(gstep)
        )
        for i in range(n):
            if sigma[i] > 0:
                x[i] -= step_inc[i]
                if x[i] < x_down:
                    if _rng.device_uniform(key, i) < p_flip:
                        sigma[i] = -1
            else:
                x[i] += step_inc[i]
                if x[i] > x_up:
                    if _rng.device_uniform(key, i) < p_flip:
                        sigma[i] = 1
        if record_stride > 0 and (gstep + 1) % record_stride == 0:
            c = 0
            for i in range(n):
                if sigma[i] > 0:
                    c += 1
            rec_counts[n_rec] = c
            n_rec += 1
    return n_rec


def step(ens: DeviceEnsemble, cfg: SimConfig, step_index: int) -> DeviceEnsemble:
    """Advance the ensemble by one time step, in place.

    The restoring-switch probability is 1 - exp(-r*dt), the exact Poisson
    clock over a step of any size (it reduces to r*dt as dt -> 0).
    step_index keys the randomness: iterating step() reproduces run()
    bit for bit.
    """
    step_inc = ens.u * cfg.dt
    p_flip = -math.expm1(-cfg.r * cfg.dt)
    _advance(
        ens.x, ens.sigma, step_inc, cfg.x_down, cfg.x_up, p_flip,
        np.uint64(cfg.seed & _SEED_MASK), step_index, 1,
        0, np.empty(0, dtype=np.int64),
    )
    return ens


def run(cfg: SimConfig) -> ConsumptionSeries:
    """Simulate the full trajectory of the switched-on fraction.

    Deterministic for a fixed config and seed; devices are mutually
    independent, and the recorded fraction is an exact integer count over
    the fleet.  The recorded grid starts at t=0 and steps by
    dt*record_stride; t_end is rounded down to a whole number of strides.
    """
    ens = init_ensemble(cfg)
    n_steps = int(round(cfg.t_end / cfg.dt))
    n_rec = n_steps // cfg.record_stride
    n_steps = n_rec * cfg.record_stride
    if n_rec < 1:
        raise ValueError("t_end shorter than one recording stride")
    counts = np.empty(n_rec, dtype=np.int64)
    step_inc = ens.u * cfg.dt
    p_flip = -math.expm1(-cfg.r * cfg.dt)
    written = _advance(
        ens.x, ens.sigma, step_inc, cfg.x_down, cfg.x_up, p_flip,
        np.uint64(cfg.seed & _SEED_MASK), 0, n_steps,
        cfg.record_stride, counts,
    )
    assert written == n_rec
    times = np.arange(n_rec + 1) * (cfg.dt * cfg.record_stride)
    fraction = np.empty(n_rec + 1)
    fraction[0] = 1.0  # every device starts switched on
    fraction[1:] = counts / cfg.n_devices
    return ConsumptionSeries(
        times=times,
        n_up_fraction=fraction,
        config_digest=config_digest(cfg),
        seed=cfg.seed,
    )
