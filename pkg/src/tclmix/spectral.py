"""Exact spectral solution of the two-component switching transport system.

The ensemble density P = (P_up, P_down) obeys a coupled transport
equation: in-band motion at constant speed (down for switched-on
devices, up for switched-off ones) plus Poisson restoring switches at
rate r outside the comfort band [x_down, x_up].  Its generator has a
discrete spectrum indexed by an integer k and a sign tag; eigenvalues
are Lambert-W values of +/- beta*e^beta with beta = r*tau/4, and the
eigenfunctions and their adjoints are explicit piecewise exponentials.

This module evaluates eigenvalues, eigenfunctions, adjoints, spectral
projections of initial conditions, the bifurcation between oscillatory
and purely relaxational decay at r*tau = 4*W0(1/e), the worst-case
amplitude phi, and the small-1/(r*tau) expansions used by the disorder
envelopes.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .lambert_w import LogArgument, lambert_w, lambert_w_log
from .quadrature import adaptive_quad

__all__ = [
    "CRITICAL_RT",
    "AsymptoticCoeffs",
    "DegenerateModeError",
    "DegenerateParameterError",
    "EnsembleParams",
    "InitialCondition",
    "SpectralMode",
    "TwoVector",
    "adjoint_eigenfunction",
    "classify_regime",
    "eigenfunction",
    "eigenfunction_integrals",
    "eigenvalue",
    "inner_product",
    "leading_eigenvalue",
    "leading_modes",
    "mode",
    "pdf_reconstruction",
    "projection_coefficient",
    "spectral_residual",
    "tau_sensitivity",
    "theory_delta_n",
    "weak_control_series",
    "worst_case_phi",
]


class DegenerateModeError(ValueError):
    """A mode hit a parameter point where its closed form degenerates."""


class DegenerateParameterError(ValueError):
    """Parameters sit on (or too close to) a singular denominator."""


@dataclass(frozen=True)
class EnsembleParams:
    """Homogeneous ensemble: cycle time tau, switching rate r, band edges."""

    tau: float
    r: float
    x_down: float = -1.0
    x_up: float = 1.0

    def __post_init__(self):
        if not (self.tau > 0.0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (self.r > 0.0):
            raise ValueError(f"r must be positive, got {self.r}")
        if not (self.x_down < self.x_up):
            raise ValueError(
                f"band must satisfy x_down < x_up, got [{self.x_down}, {self.x_up}]"
            )

    @property
    def width(self) -> float:
        return self.x_up - self.x_down

    @property
    def u(self) -> float:
        """In-band speed: one full cycle of 2*width takes time tau."""
        return 2.0 * self.width / self.tau

    @property
    def beta(self) -> float:
        return self.r * self.tau / 4.0

    @property
    def gamma(self) -> float:
        """Inverse speed tau / (2*width); the exponent scale of all modes."""
        return self.tau / (2.0 * self.width)

    def with_tau(self, tau: float) -> "EnsembleParams":
        return EnsembleParams(tau, self.r, self.x_down, self.x_up)


@dataclass(frozen=True)
class SpectralMode:
    """One eigenpair label: branch k, sign tag (+1/-1), eigenvalue."""

    k: int
    sign: int
    lam: complex

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")


class TwoVector(NamedTuple):
    """(up, down) component pair; entries may be scalars or arrays."""

    up: complex
    down: complex


@dataclass(frozen=True)
class InitialCondition:
    """Either the point mass at the lower band edge or a tabulated profile."""

    kind: str
    x: np.ndarray | None = None
    up: np.ndarray | None = None
    down: np.ndarray | None = None

    _NORM_TOL = 1e-6

    def __post_init__(self):
        if self.kind == "delta_at_lower_boundary":
            return
        if self.kind != "tabulated":
            raise ValueError(f"unknown initial condition kind {self.kind!r}")
        if self.x is None or self.up is None or self.down is None:
            raise ValueError("tabulated initial condition needs x, up, down")
        total = float(np.trapz(np.asarray(self.up) + np.asarray(self.down), self.x))
        if abs(total - 1.0) > self._NORM_TOL:
            raise ValueError(
                f"tabulated profile integrates to {total}, expected 1 "
                f"within {self._NORM_TOL}"
            )

    @classmethod
    def delta(cls) -> "InitialCondition":
        return cls(kind="delta_at_lower_boundary")

    @classmethod
    def tabulated(cls, x, up, down) -> "InitialCondition":
        return cls(
            kind="tabulated",
            x=np.asarray(x, dtype=float),
            up=np.asarray(up),
            down=np.asarray(down),
        )


@dataclass(frozen=True)
class AsymptoticCoeffs:
    """Leading eigenvalue/amplitude and their scaled tau-derivatives at tau0."""

    lambda0: complex
    lambda_prime: complex
    phi0: complex
    phi_prime: complex
    epsilon: float


def _critical_rt() -> float:
    return 4.0 * lambert_w(0, math.exp(-1.0)).real


#: Bifurcation value of r*tau: two real decaying modes merge here and turn
#: into a complex conjugate pair (oscillatory decay) above it.
CRITICAL_RT: float = _critical_rt()


def eigenvalue(k: int, sign: int, p: EnsembleParams) -> complex:
    """Eigenvalue lambda_{k;sign} = (r/2) * (1 - W_k(sign*beta*e^beta)/beta).

    Evaluated through the overflow-safe logarithmic Lambert-W form, so
    beta = r*tau/4 may be arbitrarily large.  The (0, +) mode is the
    stationary one with lambda = 0 exactly.
    """
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    if k == 0 and sign == 1:
        return 0.0 + 0.0j
    beta = p.beta
    w = lambert_w_log(k, LogArgument(sign, math.log(beta) + beta))
    lam = (p.r / 2.0) * (1.0 - w / beta)
    # Newton-polish on the defining relation: pushes the residual to the
    # rounding floor of the expression itself.  Rejected near the critical
    # point where the root is double and f' vanishes.
    for _ in range(2):
        e = cmath.exp(lam * p.tau / 2.0)
        f = p.r - 2.0 * lam - sign * p.r * e
        fp = -2.0 - sign * (p.r * p.tau / 2.0) * e
        if fp == 0.0:
            break
        step = f / fp
        if not abs(step) < 1e-6 * (abs(lam) + p.r):
            break
        lam -= step
        if abs(step) <= 1e-16 * abs(lam):
            break
    return lam


def spectral_residual(lam: complex, sign: int, p: EnsembleParams) -> complex:
    """Defect of the eigenvalue relation: r - 2*lam -/+ r*exp(lam*tau/2)."""
    return p.r - 2.0 * lam - sign * p.r * cmath.exp(lam * p.tau / 2.0)


def mode(k: int, sign: int, p: EnsembleParams) -> SpectralMode:
    """Convenience constructor bundling the eigenvalue with its labels."""
    return SpectralMode(k=k, sign=sign, lam=eigenvalue(k, sign, p))


def leading_eigenvalue(p: EnsembleParams) -> complex:
    """Slowest decaying nonzero mode, lambda_{0;-}; complex above CRITICAL_RT."""
    return eigenvalue(0, -1, p)


def classify_regime(p: EnsembleParams, tol: float = 1e-9) -> str:
    """'oscillatory_decay', 'pure_relaxation', or 'critical' by r*tau vs C."""
    rt = p.r * p.tau
    if abs(rt - CRITICAL_RT) <= tol:
        return "critical"
    return "oscillatory_decay" if rt > CRITICAL_RT else "pure_relaxation"


def _mode_sort_key(m: SpectralMode):
    # Re ascending; conjugate partners tie-broken |Im| then sign (- first),
    # then Im < 0 first, then branch index: gives a reproducible order with
    # the principal member of each conjugate pair leading.
    return (
        m.lam.real,
        abs(m.lam.imag),
        0 if m.sign == -1 else 1,
        0 if m.lam.imag < 0 else 1,
        m.k,
    )


def leading_modes(p: EnsembleParams, count: int, kmax: int | None = None):
    """The count slowest-decaying nonzero modes, deterministically ordered."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if kmax is None:
        kmax = max(count + 2, 3)
    modes = []
    for k in range(-kmax, kmax + 1):
        for sign in (-1, 1):
            if k == 0 and sign == 1:
                continue  # stationary mode excluded
            modes.append(mode(k, sign, p))
    modes.sort(key=_mode_sort_key)
    return modes[:count]


def minus_modes(p: EnsembleParams, count: int):
    """Leading '-' family modes (the only ones entering the on-fraction)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    kmax = count // 2 + 3
    modes = [mode(k, -1, p) for k in range(-kmax, kmax + 1)]
    modes.sort(key=_mode_sort_key)
    return modes[:count]


def _check_not_degenerate(lam: complex, sign: int, p: EnsembleParams):
    if sign == 1 and abs(p.r - 2.0 * lam) < 1e-12 * p.r:
        raise DegenerateModeError(
            f"'+' eigenfunction degenerates at lambda = r/2 (lambda={lam})"
        )


def eigenfunction(m: SpectralMode, p: EnsembleParams, x) -> TwoVector:
    """Right eigenfunction evaluated at x (scalar or array).

    Piecewise exponential in three regions split at the band edges; the
    down-component is continuous at the edges by virtue of the eigenvalue
    relation.  Decays at -inf like exp(gamma*(r - Re lam)*x).
    """
    _check_not_degenerate(m.lam, m.sign, p)
    lam, r, g = m.lam, p.r, p.gamma
    xd, xu = p.x_down, p.x_up
    x = np.asarray(x, dtype=float)
    below = x < xd
    above = x > xu
    mid = ~(below | above)

    up = np.zeros(x.shape, dtype=complex)
    down = np.zeros(x.shape, dtype=complex)

    e_below = np.exp(g * (r - lam) * x[below])
    up[below] = e_below
    down[below] = (r / (r - 2.0 * lam)) * e_below

    up[mid] = np.exp(g * (r * xd - lam * x[mid]))
    down[mid] = ((r - 2.0 * lam) / r) * np.exp(g * (r * xd + lam * (x[mid] - 2.0 * xu)))

    e_above = np.exp(g * ((lam - r) * x[above] + r * (xd + xu) - 2.0 * lam * xu))
    up[above] = e_above
    down[above] = ((r - 2.0 * lam) / r) * e_above

    if x.ndim == 0:
        return TwoVector(complex(up), complex(down))
    return TwoVector(up, down)


def adjoint_eigenfunction(m: SpectralMode, p: EnsembleParams, x) -> TwoVector:
    """Adjoint (left) eigenfunction at x, normalized against eigenfunction.

    Carries the prefactor tau / (2*width*((r - 2*conj(lam))*tau + 4)) so
    that <adjoint_{k,s}, eigenfunction_{k,s}> = 1.  Grows exponentially in
    the tails; it is only ever integrated against decaying right modes.
    """
    _check_not_degenerate(m.lam, m.sign, p)
    lc = m.lam.conjugate()
    r, g, tau = p.r, p.gamma, p.tau
    xd, xu = p.x_down, p.x_up
    denom = (r - 2.0 * lc) * tau + 4.0
    if abs(denom) < 1e-12 * (r * tau + 4.0):
        raise DegenerateModeError(
            f"adjoint normalization degenerates ((r-2*lam)*tau+4 ~ 0) at lam={m.lam}"
        )
    pref = g / denom
    x = np.asarray(x, dtype=float)
    below = x < xd
    above = x > xu
    mid = ~(below | above)

    up = np.zeros(x.shape, dtype=complex)
    down = np.zeros(x.shape, dtype=complex)

    e_below = np.exp(-g * (r * xd + lc * (x[below] - 2.0 * xd)))
    up[below] = (r - 2.0 * lc) * e_below
    # square-over-r factor: the down channel is free below the band, so the
    # component follows the up one through the switching balance
    down[below] = ((r - 2.0 * lc) ** 2 / r) * e_below

    up[mid] = (r - 2.0 * lc) * np.exp(-g * (r * xd - lc * x[mid]))
    down[mid] = r * np.exp(-g * (r * xd + lc * (x[mid] - 2.0 * xu)))

    e_above = np.exp(-g * (r * xd - lc * x[above]))
    up[above] = (r - 2.0 * lc) * e_above
    down[above] = r * e_above

    up *= pref
    down *= pref
    if x.ndim == 0:
        return TwoVector(complex(up), complex(down))
    return TwoVector(up, down)


def eigenfunction_integrals(m: SpectralMode, p: EnsembleParams) -> TwoVector:
    """Closed-form integrals of the eigenfunction components over all x.

    Valid while Re(lam) < r so the left tail decays.  These are the
    weights with which each mode feeds the total on/off fractions.
    """
    lam, r, g = m.lam, p.r, p.gamma
    xd, xu = p.x_down, p.x_up
    if r - lam.real <= 0.0:
        raise DegenerateModeError(
            f"eigenfunction of lambda={lam} is not integrable (Re lam >= r)"
        )
    a = cmath.exp(-g * lam * xd)
    b = cmath.exp(-g * lam * xu)
    scale = cmath.exp(g * r * xd) / g
    if abs(lam) * p.tau < 1e-14:
        mid_up = g * (xu - xd)
        mid_dn = mid_up
    else:
        mid_up = (a - b) / lam
        mid_dn = (b - b * b / a) / lam
    up = scale * (a / (r - lam) + mid_up + b / (r - lam))
    down = scale * (
        (r / (r - 2.0 * lam)) * a / (r - lam)
        + ((r - 2.0 * lam) / r) * mid_dn
        + ((r - 2.0 * lam) / r) * b / (r - lam)
    )
    return TwoVector(up, down)


def _tail_halfwidth(p: EnsembleParams, decay_rate: float) -> float:
    # distance over which an exp(-decay_rate * s) tail drops below 1e-14
    return 40.0 / max(decay_rate, 1e-6)


def inner_product(
    g_fn: Callable[[np.ndarray], TwoVector],
    f_fn: Callable[[np.ndarray], TwoVector],
    p: EnsembleParams,
    rel_tol: float = 1e-8,
    abs_floor: float = 0.0,
    tail_decay: float | None = None,
) -> complex:
    """Scalar product <g, f> = integral of conj(g)^T f dx.

    The first argument is conjugated.  Integration runs over the band
    plus exponential tails, split exactly at the band edges where the
    closed forms change branch.

    Parameters
    ----------
    g_fn, f_fn : callable
        Vectorized profiles x -> TwoVector.
    p : EnsembleParams
        Supplies the band geometry and default tail decay scale.
    rel_tol : float
        Requested relative accuracy of the adaptive quadrature.
    abs_floor : float
        Absolute accuracy floor; set it for integrals that vanish by
        orthogonality.
    tail_decay : float, optional
        Decay rate (per unit x) of the combined integrand in the tails;
        defaults to the stationary-mode rate gamma*r.
    """

    def integrand(x):
        gu, gd = g_fn(x)
        fu, fd = f_fn(x)
        return np.conj(gu) * fu + np.conj(gd) * fd

    rate = tail_decay if tail_decay is not None else p.gamma * p.r
    m_tail = _tail_halfwidth(p, rate)
    points = [p.x_down - m_tail, p.x_down, p.x_up, p.x_up + m_tail]
    value, _ = adaptive_quad(integrand, points, rel_tol=rel_tol, abs_floor=abs_floor)
    return value


def mode_inner_product(
    mg: SpectralMode, mf: SpectralMode, p: EnsembleParams, rel_tol: float = 1e-9
) -> complex:
    """<adjoint of mg, eigenfunction of mf>; equals delta_{mg,mf} exactly."""
    # in both tails the product decays like exp(-gamma*(r - Re lam_g - Re
    # lam_f)*|x|): the adjoint grows with Re lam_g, the mode decays with
    # r - Re lam_f
    rate = p.gamma * (p.r - mg.lam.real - mf.lam.real)
    if rate <= 0.0:
        raise DegenerateModeError(
            "adjoint/eigenfunction product is not integrable for "
            f"lam_g={mg.lam}, lam_f={mf.lam}"
        )
    return inner_product(
        lambda x: adjoint_eigenfunction(mg, p, x),
        lambda x: eigenfunction(mf, p, x),
        p,
        rel_tol=rel_tol,
        abs_floor=1e-11,
        tail_decay=rate,
    )


def projection_coefficient(
    m: SpectralMode, p: EnsembleParams, init: InitialCondition
) -> complex:
    """Expansion coefficient a_{k;s} = <adjoint, P0> of an initial condition.

    For the point mass at the lower band edge this is the closed-form
    boundary value conj(adjoint_up(x_down)); tabulated profiles are
    integrated on their own grid.
    """
    if init.kind == "delta_at_lower_boundary":
        lam, r, g, tau = m.lam, p.r, p.gamma, p.tau
        denom = (r - 2.0 * lam) * tau + 4.0
        if abs(denom) < 1e-12 * (r * tau + 4.0):
            raise DegenerateModeError(
                f"projection degenerates ((r-2*lam)*tau+4 ~ 0) at lam={m.lam}"
            )
        return (
            g
            * (r - 2.0 * lam)
            * cmath.exp(-g * (r - lam) * p.x_down)
            / denom
        )
    adj_up, adj_dn = adjoint_eigenfunction(m, p, init.x)
    values = np.conj(adj_up) * init.up + np.conj(adj_dn) * init.down
    return complex(np.trapz(values, init.x))


def worst_case_phi(p: EnsembleParams) -> complex:
    """Log-amplitude of the slowest mode for the least-mixed start.

    phi = log( 2r(r-2*lam) / (lam (r-lam) (tau(r-2*lam)+4)) ) with
    lam the leading eigenvalue; exp(phi) equals the product of the
    projection coefficient and the mode's up-integral.
    """
    lam = leading_eigenvalue(p)
    r, tau = p.r, p.tau
    denom_gap = tau * (r - 2.0 * lam) + 4.0
    if (
        abs(lam) < 1e-12 * r
        or abs(r - lam) < 1e-12 * r
        or abs(denom_gap) < 1e-9 * (r * tau + 4.0)
    ):
        raise DegenerateParameterError(
            f"worst-case amplitude is singular at lam={lam} (r*tau={r * tau}); "
            "this occurs at the bifurcation point r*tau = CRITICAL_RT"
        )
    return cmath.log(2.0 * r * (r - 2.0 * lam) / (lam * (r - lam) * denom_gap))


def tau_sensitivity(p: EnsembleParams) -> AsymptoticCoeffs:
    """Scaled tau-derivatives of the leading eigenvalue and amplitude.

    Differentiates the eigenvalue relation r - 2*lam = -r*exp(lam*tau/2)
    implicitly: tau*d(lam)/dtau = -lam*(r-2*lam)*tau / (tau*(r-2*lam)+4),
    and chains through the closed form of phi.  Requires the oscillatory
    regime r*tau > CRITICAL_RT where the Taylor expansion in tau is
    legitimate.
    """
    rt = p.r * p.tau
    if rt <= CRITICAL_RT:
        raise DegenerateParameterError(
            f"tau sensitivity needs r*tau > {CRITICAL_RT:.6f}, got {rt}"
        )
    lam = leading_eigenvalue(p)
    r, tau = p.r, p.tau
    gap = r - 2.0 * lam
    denom = tau * gap + 4.0
    if abs(denom) < 1e-9 * (r * tau + 4.0):
        raise DegenerateParameterError(
            f"sensitivity denominator tau*(r-2*lam)+4 vanishes at r*tau={rt}"
        )
    lam_prime = -lam * gap * tau / denom
    phi_prime = (
        lam_prime * (-2.0 / gap - 1.0 / lam + 1.0 / (r - lam) + 2.0 * tau / denom)
        - tau * gap / denom
    )
    return AsymptoticCoeffs(
        lambda0=lam,
        lambda_prime=lam_prime,
        phi0=worst_case_phi(p),
        phi_prime=phi_prime,
        epsilon=1.0 / rt,
    )


def weak_control_series(epsilon: float) -> dict:
    """Second-order small-epsilon truncations of the sensitivity quantities.

    epsilon = 1/(r*tau0).  Keys: 'lambda_tau0', 'lambda_prime_tau0',
    'phi', 'phi_prime'; the first two are scaled by tau0.  The expanded
    member of the conjugate pair is the one with Im(lambda) < 0.
    """
    e = epsilon
    two_pi_i = 2j * math.pi
    pi2 = math.pi**2
    return {
        "lambda_tau0": -two_pi_i * (1.0 - 4.0 * e + 16.0 * e * e) + 16.0 * pi2 * e * e,
        "lambda_prime_tau0": two_pi_i * (1.0 - 8.0 * e + 48.0 * e * e)
        - 48.0 * pi2 * e * e,
        "phi": -cmath.log(-1j * math.pi)
        - two_pi_i * (e - 8.0 * e * e)
        - 2.0 * pi2 * e * e,
        "phi_prime": two_pi_i * (e - 16.0 * e * e) + 4.0 * pi2 * e * e,
    }


def theory_delta_n(
    t,
    p: EnsembleParams,
    init: InitialCondition | None = None,
    mode_count: int = 2,
) -> np.ndarray | float:
    """Deviation of the on-fraction from 1/2, from the leading '-' modes.

    Only '-' modes contribute (the '+' family integrates to zero), each
    as a_k * integral(up component) * exp(-lam_k t).  The default two
    modes are the slowest conjugate pair.  Returns the real part; for
    conjugate-complete truncations the imaginary residue is ~1e-16.
    """
    if init is None:
        init = InitialCondition.delta()
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros(t_arr.shape, dtype=complex)
    for m in minus_modes(p, mode_count):
        a = projection_coefficient(m, p, init)
        i_up = eigenfunction_integrals(m, p).up
        total += a * i_up * np.exp(-m.lam * t_arr)
    out = total.real
    if t_arr.ndim == 0:
        return float(out)
    return out


def pdf_reconstruction(
    x_grid,
    t: float,
    p: EnsembleParams,
    init: InitialCondition | None = None,
    K: int = 20,
) -> TwoVector:
    """Truncated spectral sum of the density profile at time t.

    Sums a_{k;s} * eigenfunction_{k;s}(x) * exp(-lam t) over |k| <= K and
    both signs, including the stationary (0,+) term.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if init is None:
        init = InitialCondition.delta()
    x_grid = np.asarray(x_grid, dtype=float)
    up = np.zeros(x_grid.shape, dtype=complex)
    down = np.zeros(x_grid.shape, dtype=complex)
    for k in range(-K, K + 1):
        for sign in (-1, 1):
            m = mode(k, sign, p)
            a = projection_coefficient(m, p, init)
            if a == 0.0:
                continue
            xi_up, xi_dn = eigenfunction(m, p, x_grid)
            damp = a * cmath.exp(-m.lam * t)
            up += damp * xi_up
            down += damp * xi_dn
    return TwoVector(up.real, down.real)
