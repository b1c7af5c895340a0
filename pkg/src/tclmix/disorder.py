"""Cycle-time disorder: densities, samplers, and decay envelopes.

Fleet diversity is modeled as an i.i.d. draw of each device's cycle time
tau from one of four distributions (gaussian, lorentzian, laplacian,
uniform) centered at tau0 with width delta.  Averaging the slow-mode
decay exp(phi - lambda*t) over that draw multiplies it by a closed-form
envelope - the moment generating function of the scaled offset
s = tau/tau0 - 1 evaluated at phi' - t*lambda'.  The envelope shape at
large t is set by the regularity of the density at its peak: gaussian
disorder gives gaussian-in-t decay, lorentzian exponential, laplacian
1/t^2 and uniform 1/t.

A brute-force quadrature of the full tau-average (using the exact
per-tau eigenvalue and amplitude) serves as the oracle that the
closed forms are checked against, and exposes the late-time 1/t
crossover of the truncated-at-zero lorentzian.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import ndtr, ndtri

from .quadrature import adaptive_quad
from .spectral import (
    CRITICAL_RT,
    AsymptoticCoeffs,
    DegenerateParameterError,
    EnsembleParams,
    leading_eigenvalue,
    worst_case_phi,
)

KINDS = ("gaussian", "lorentzian", "laplacian", "uniform")

# validity-window prefactors, frozen after calibration against the
# quadrature oracle at delta/tau0 = 1/30 (5% agreement inside each window).
# The gaussian one is small because the saddle point drifts away from tau0
# as t grows, so curvature corrections ~delta^4 t^3 bite well before the
# nominal tau0^3/delta^2 scale.
_GAUSSIAN_WINDOW_FACTOR = 0.007  # t <= 0.007 * tau0^3 / delta^2
_LORENTZIAN_WINDOW_FACTOR = 0.1  # t <= 0.1 * tau0^2 / delta
_MGF_ARG_LIMIT = 0.8             # |Re(b*A)| below the laplacian pole at 1
_UNIFORM_OVERFLOW_LIMIT = 50.0   # sinh argument guard


class SampleRejectionError(RuntimeError):
    """Positivity rejection exceeded its draw budget."""


class EnvelopePoleError(ArithmeticError):
    """Laplacian envelope evaluated at its pole; carries the pole times."""

    def __init__(self, t: float, pole_times):
        super().__init__(
            f"laplacian envelope has a pole at t={t} (real pole times ~ {pole_times})"
        )
        self.t = t
        self.pole_times = pole_times


@dataclass(frozen=True)
class DisorderSpec:
    """One disorder law over cycle times: kind, center tau0, width delta."""

    kind: str
    tau0: float
    delta: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if not (self.tau0 > 0.0):
            raise ValueError(f"tau0 must be positive, got {self.tau0}")
        if not (0.0 <= self.delta <= self.tau0):
            raise ValueError(
                f"width must satisfy 0 <= delta <= tau0, got delta={self.delta}"
            )


class EnvelopeResult(NamedTuple):
    """Disorder-average factor and whether t sits inside the validity window."""

    value: complex
    validity: str


def dpd_density(spec: DisorderSpec, tau) -> np.ndarray | float:
    """Density g(tau), vectorized; integrates to 1 over the whole real line."""
    tau = np.asarray(tau, dtype=float)
    t0, d = spec.tau0, spec.delta
    if d == 0.0:
        raise ValueError("delta=0 is a point mass; no density to evaluate")
    s = tau - t0
    if spec.kind == "gaussian":
        out = np.exp(-(s**2) / (2.0 * d * d)) / (math.sqrt(2.0 * math.pi) * d)
    elif spec.kind == "lorentzian":
        out = (d / math.pi) / (s**2 + d * d)
    elif spec.kind == "laplacian":
        out = np.exp(-np.abs(s) / d) / (2.0 * d)
    else:
        out = np.where(np.abs(s) <= d, 1.0 / (2.0 * d), 0.0)
    return float(out) if out.ndim == 0 else out


def dpd_cdf(spec: DisorderSpec, tau) -> np.ndarray | float:
    """Cumulative distribution of the untruncated density."""
    tau = np.asarray(tau, dtype=float)
    t0, d = spec.tau0, spec.delta
    if d == 0.0:
        out = np.where(tau >= t0, 1.0, 0.0)
        return float(out) if out.ndim == 0 else out
    s = (tau - t0) / d
    if spec.kind == "gaussian":
        out = ndtr(s)
    elif spec.kind == "lorentzian":
        out = 0.5 + np.arctan(s) / math.pi
    elif spec.kind == "laplacian":
        out = np.where(s < 0, 0.5 * np.exp(s), 1.0 - 0.5 * np.exp(-s))
    else:
        out = np.clip(0.5 * (s + 1.0), 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def dpd_ppf(spec: DisorderSpec, u) -> np.ndarray:
    """Inverse CDF; u must lie strictly inside (0, 1)."""
    u = np.asarray(u, dtype=float)
    t0, d = spec.tau0, spec.delta
    if spec.kind == "gaussian":
        return t0 + d * ndtri(u)
    if spec.kind == "lorentzian":
        return t0 + d * np.tan(math.pi * (u - 0.5))
    if spec.kind == "laplacian":
        return t0 - d * np.sign(u - 0.5) * np.log1p(-2.0 * np.abs(u - 0.5))
    return t0 + d * (2.0 * u - 1.0)


_REJECTION_CAP = 10**6


def dpd_sample(spec: DisorderSpec, rng: np.random.Generator, size=None):
    """Draw cycle times, rejecting non-positive values.

    Statistically exact for the density restricted to tau > 0.  Raises
    SampleRejectionError once 10^6 draws have been rejected (possible for
    pathological widths, e.g. a lorentzian with delta ~ tau0).
    """
    scalar = size is None
    n = 1 if scalar else int(size)
    if spec.delta == 0.0:
        out = np.full(n, spec.tau0)
        return float(out[0]) if scalar else out
    out = np.empty(n)
    pending = np.arange(n)
    rejected = 0
    while pending.size:
        u = (rng.integers(0, 1 << 53, size=pending.size) + 0.5) * 2.0**-53
        draw = dpd_ppf(spec, u)
        good = draw > 0.0
        out[pending[good]] = draw[good]
        rejected += int(np.count_nonzero(~good))
        if rejected > _REJECTION_CAP:
            raise SampleRejectionError(
                f"rejected more than {_REJECTION_CAP} non-positive draws for {spec}"
            )
        pending = pending[~good]
    return float(out[0]) if scalar else out


def envelope(spec: DisorderSpec, t: float, coeffs: AsymptoticCoeffs) -> EnvelopeResult:
    """Closed-form disorder-average factor multiplying exp(phi - lambda*t).

    The factor is the average of exp((tau/tau0 - 1) * (phi' - t*lambda'))
    over the disorder; with b = delta/tau0 and A = phi' - t*lambda':

    - gaussian:   exp(b^2 A^2 / 2), valid while t << tau0^3/delta^2
    - lorentzian: exp(-i b A), relevant while t << tau0^2/delta (beyond
      that the positivity truncation takes over and the true average
      crosses to a 1/t decay)
    - laplacian:  1 / (1 - b^2 A^2), with a pole where b*Re(A) reaches 1
    - uniform:    sinh(b A) / (b A)

    The validity window is returned as data, never enforced, so callers
    can plot straight through the breakdown.
    """
    if spec.delta == 0.0:
        return EnvelopeResult(1.0 + 0.0j, "inside_window")
    b = spec.delta / spec.tau0
    a_arg = coeffs.phi_prime - t * coeffs.lambda_prime
    ba = b * a_arg
    if spec.kind == "gaussian":
        value = cmath.exp(0.5 * ba * ba)
        inside = t <= _GAUSSIAN_WINDOW_FACTOR * spec.tau0**3 / spec.delta**2
    elif spec.kind == "lorentzian":
        value = cmath.exp(-1j * ba)
        inside = t <= _LORENTZIAN_WINDOW_FACTOR * spec.tau0**2 / spec.delta
    elif spec.kind == "laplacian":
        denom = 1.0 - ba * ba
        if abs(denom) < 1e-9:
            poles = [
                ((coeffs.phi_prime - s / b) / coeffs.lambda_prime).real
                for s in (1.0, -1.0)
            ]
            raise EnvelopePoleError(t, sorted(poles))
        value = 1.0 / denom
        inside = abs(ba.real) <= _MGF_ARG_LIMIT
    else:
        if abs(ba) < 1e-6:
            value = 1.0 + ba * ba / 6.0  # sinh(x)/x series
        else:
            value = cmath.sinh(ba) / ba
        inside = abs(ba.real) <= _UNIFORM_OVERFLOW_LIMIT
    return EnvelopeResult(value, "inside_window" if inside else "outside_window")


def averaged_delta_n(
    spec: DisorderSpec, t, p0: EnsembleParams, coeffs: AsymptoticCoeffs
):
    """Disorder-averaged deviation of the on-fraction from 1/2.

    The slow conjugate pair contributes exp(phi - lambda*t) times the
    envelope, plus the complex conjugate (same worst-case start), hence
    twice the real part.  Valid under the spectral gap condition at tau0.
    """
    t_arr = np.asarray(t, dtype=float)
    out = np.empty(t_arr.shape, dtype=float)
    flat = out.reshape(-1)
    for i, ti in enumerate(np.atleast_1d(t_arr)):
        env = envelope(spec, float(ti), coeffs)
        flat[i] = (
            2.0
            * (
                cmath.exp(coeffs.phi0 - coeffs.lambda0 * float(ti)) * env.value
            ).real
        )
    if t_arr.ndim == 0:
        return float(out)
    return out


def _integration_breakpoints(spec: DisorderSpec, p0: EnsembleParams):
    """Core tau-breakpoints covering the disorder mass.

    The domain is clipped to the oscillatory regime tau > CRITICAL_RT/r:
    below it the slow-mode amplitude formula leaves its asymptotic domain
    (it even grows like 1/tau toward the origin), while the true
    contribution of such fast-relaxing cycle times is exponentially dead.
    """
    t0, d = spec.tau0, spec.delta
    tau_floor = (CRITICAL_RT / p0.r) * (1.0 + 1e-9)
    if spec.kind == "uniform":
        lo, hi = max(t0 - d, tau_floor), t0 + d
        return [lo, min(t0, hi), hi], False
    if spec.kind == "gaussian":
        halfwidth, heavy = 12.0 * d, False
    elif spec.kind == "laplacian":
        halfwidth, heavy = 45.0 * d, False
    else:
        halfwidth, heavy = 50.0 * d, True
    lo = max(t0 - halfwidth, tau_floor)
    hi = t0 + halfwidth
    pts = [lo, t0 - d, t0, t0 + d, hi]
    return sorted(set(pt for pt in pts if lo <= pt <= hi)), heavy


def numeric_disorder_average(
    spec: DisorderSpec, t: float, p0: EnsembleParams, rel_tol: float = 1e-6
) -> complex:
    """Brute-force oracle: integral of g(tau) exp(phi(tau) - lambda(tau) t).

    Uses the exact per-tau leading eigenvalue and worst-case amplitude
    under the integral, adaptively refined to the requested relative
    accuracy, with the domain truncated to tau > 0.  The slowly decaying
    lorentzian tail is extended block by block until it stops
    contributing, which is what reproduces the late-time 1/t crossover.
    """
    if spec.delta == 0.0:
        lam = leading_eigenvalue(p0)
        return cmath.exp(worst_case_phi(p0.with_tau(spec.tau0)) - lam * t)

    def integrand(taus):
        out = np.empty(taus.shape, dtype=complex)
        for i, tau in enumerate(taus):
            pt = p0.with_tau(float(tau))
            lam = leading_eigenvalue(pt)
            try:
                expo = worst_case_phi(pt) - lam * t
            except DegenerateParameterError:
                # node fell onto the bifurcation point: the amplitude pole is
                # integrable and exponentially suppressed by its decay rate
                out[i] = 0.0
                continue
            out[i] = cmath.exp(expo) if expo.real > -745.0 else 0.0
        return out * dpd_density(spec, taus)

    points, heavy_tail = _integration_breakpoints(spec, p0)
    value, _ = adaptive_quad(integrand, points, rel_tol=rel_tol, abs_floor=1e-14)
    if heavy_tail:
        # extend right: tail integrand ~ delta/(pi s^2) with bounded amplitude
        edge = points[-1]
        width = max(spec.tau0, 50.0 * spec.delta)
        for _ in range(60):
            block, _ = adaptive_quad(
                integrand, [edge, edge + width], rel_tol=rel_tol, abs_floor=1e-14
            )
            value += block
            edge += width
            if abs(block) <= max(rel_tol * abs(value), 1e-14):
                break
            width *= 2.0
    return value
