"""All-branch complex Lambert-W evaluation.

Solves w*exp(w) = z for any integer branch index k, following the branch
layout of Corless et al. (Adv. Comput. Math. 5, 1996): branch k has
Im(w) in the strip around 2*pi*k, and values on the negative real axis
are the limits from the upper half plane (so the k=0 and k=-1 values
form a complex conjugate pair left of the branch point -1/e).

A separate logarithmic form solves the equivalent equation
w + Log(w) = c for arguments given as sign * exp(log_magnitude).  This
stays finite where z itself would overflow, e.g. z = beta*exp(beta) with
beta of a few hundred.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

_E = math.e
_BRANCH_POINT = -math.exp(-1.0)
_MAX_ITER = 100
_TARGET_REL = 1e-13        # iteration target, one polish step follows
_CONTRACT_REL = 1e-12      # guaranteed defining residual


class ConvergenceError(ArithmeticError):
    """Root iteration failed; carries the last iterate and its residual."""

    def __init__(self, message: str, last_iterate: complex, residual: float):
        super().__init__(
            f"{message} (last iterate {last_iterate}, residual {residual:.3e})"
        )
        self.last_iterate = last_iterate
        self.residual = residual


@dataclass(frozen=True)
class LogArgument:
    """Argument z = sign * exp(log_magnitude), never formed explicitly."""

    sign: int
    log_magnitude: float

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        if not math.isfinite(self.log_magnitude):
            raise ValueError("log_magnitude must be finite")


def _initial_guess(k: int, z: complex) -> complex:
    """Branch-aware starting point for the Halley iteration."""
    if k == 0:
        if abs(z) < 0.3:
            # Taylor series at the origin
            return z * (1.0 - z + 1.5 * z * z)
        p2 = 2.0 * (_E * z + 1.0)
        if abs(p2) < 1.6:
            # expansion about the branch point -1/e
            p = cmath.sqrt(p2)
            return -1.0 + p - p * p / 3.0
        if abs(z) < 8.0:
            return cmath.log(1.0 + z)
    elif k == -1:
        if z.imag == 0.0 and -0.27 < z.real < 0.0:
            # real branch on (-1/e, 0)
            lz = math.log(-z.real)
            return complex(lz - math.log(-lz), 0.0)
        p2 = 2.0 * (_E * z + 1.0)
        if abs(p2) < 1.6 and z.imag >= 0.0:
            p = cmath.sqrt(p2)
            return -1.0 - p - p * p / 3.0
    # asymptotic series on the k-th sheet
    big_l = cmath.log(z) + 2j * math.pi * k
    if abs(big_l) < 0.5:
        return complex(0.5)
    return big_l - cmath.log(big_l)


def lambert_w(k: int, z: complex) -> complex:
    """Branch k of the Lambert-W function, w*exp(w) = z.

    Parameters
    ----------
    k : int
        Branch index; any integer is accepted, |k| <= 64 is the tested range.
    z : complex
        Argument.  Real z < -1/e is treated as the limit from above the
        real axis, so ``lambert_w(0, z)`` and ``lambert_w(-1, z)`` return
        complex conjugates there.

    Returns
    -------
    complex
        w with |w*exp(w) - z| <= 1e-12 * max(1, |z|).

    Raises
    ------
    ValueError
        If z == 0 with k != 0 (every branch but the principal one has a
        logarithmic singularity at the origin).
    ConvergenceError
        If the iteration stalls (carries the last iterate and residual).
    """
    z = complex(z)
    if z == 0:
        if k == 0:
            return 0.0 + 0.0j
        raise ValueError(f"W_{k}(0) diverges; z must be nonzero for k != 0")
    if k in (0, -1) and z.imag == 0.0 and abs(z.real - _BRANCH_POINT) < 2e-16:
        return -1.0 + 0.0j

    w = _initial_guess(k, z)
    tol = _TARGET_REL * max(1.0, abs(z))
    converged = False
    for _ in range(_MAX_ITER):
        ew = cmath.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        if wp1 == 0.0:
            dw = f / ew
        else:
            dw = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w -= dw
        if abs(f) <= tol or abs(dw) <= 4e-16 * (abs(w) + 1e-300):
            if converged:
                break
            converged = True  # run one extra polish pass
    residual = abs(w * cmath.exp(w) - z)
    if residual > _CONTRACT_REL * max(1.0, abs(z)):
        raise ConvergenceError(
            f"Lambert-W iteration did not converge for k={k}, z={z}", w, residual
        )
    return w


def _real_log_branch(target: float, k: int) -> complex:
    """Real roots of w + log(-w) = target, i.e. w*e^w = -exp(target) < 0.

    For exp(target) <= 1/e there are two real roots; k=0 selects the one
    in [-1, 0), k=-1 the one in (-inf, -1].
    """
    s = math.exp(target + 1.0)  # = e*|z|, in (0, 1] here
    if s >= 1.0 - 1e-15:
        return complex(-1.0)
    p = math.sqrt(2.0 * (1.0 - s))
    if k == 0:
        w = -1.0 + p - p * p / 3.0 if s > 0.7 else -math.exp(target)
        w = min(max(w, -1.0 + 1e-17), -1e-300)
    else:
        w = -1.0 - p - p * p / 3.0 if s > 0.7 else target - math.log(-target)
        w = min(w, -1.0)
    dw = math.inf
    for _ in range(_MAX_ITER):
        f = w + math.log(-w) - target
        dw = f / (1.0 + 1.0 / w)
        w_new = w - dw
        # keep the iterate on its branch
        if k == 0:
            w_new = min(max(w_new, -1.0), -1e-300)
        elif w_new > -1.0:
            w_new = 0.5 * (w - 1.0)
        w = w_new
        if abs(dw) <= 4e-16 * (abs(w) + 1e-300):
            break
    residual = abs(w + math.log(-w) - target)
    if residual > _CONTRACT_REL * max(1.0, abs(target)):
        raise ConvergenceError(
            f"log-form Lambert-W iteration did not converge (real branch k={k}, "
            f"log_magnitude={target})",
            complex(w),
            residual,
        )
    return complex(w)


def lambert_w_log(k: int, a: LogArgument) -> complex:
    """W_k at z = a.sign * exp(a.log_magnitude), computed in log variables.

    Solves w + Log(w) = a.log_magnitude + i*pi*(1-sign)/2 + 2*pi*i*k with
    the principal Log, which is the branch-k Lambert-W equation rewritten
    so that only log(|z|) enters.  Negative real arguments are again the
    limits from the upper half plane.  The pair of real roots existing for
    sign=-1 with |z| <= 1/e (branches 0 and -1) is handled explicitly,
    since both satisfy the k=0 form of the log equation.

    Agrees with :func:`lambert_w` to ~1e-10 wherever z is representable,
    but remains usable for log_magnitude of several hundred.
    """
    lm = a.log_magnitude
    if a.sign == -1 and k in (0, -1):
        if abs(lm + 1.0) < 4e-16:
            return complex(-1.0)  # branch point z = -1/e
        if lm < -1.0:
            return _real_log_branch(lm, k)
    c = complex(lm, math.pi * (1 - a.sign) / 2 + 2.0 * math.pi * k)

    if a.sign == -1 and k in (0, -1) and lm < 0.0:
        # just past the branch point: w = -1 +/- i*q, q small
        q = math.sqrt(max(2.0 * (math.exp(lm + 1.0) - 1.0), 1e-280))
        w = complex(-1.0, q if k == 0 else -q)
    elif c.real > 1.0 or abs(c) > 4.0:
        w = c - cmath.log(c)
    else:
        w = cmath.exp(c)
        if w == 0.0 or abs(w) < 1e-300:
            w = c - cmath.log(c)

    tol = _TARGET_REL * max(1.0, abs(c))
    converged = False
    for _ in range(_MAX_ITER):
        f = w + cmath.log(w) - c
        fp = 1.0 + 1.0 / w
        if fp == 0.0:
            w += 1e-12 * (1.0 + 0.5j)  # nudge off the branch point
            continue
        # Halley step with f'' = -1/w^2
        dw = f / (fp + f / (2.0 * w * w * fp))
        w -= dw
        if w == 0.0:
            w = complex(1e-300)
        if abs(f) <= tol or abs(dw) <= 4e-16 * (abs(w) + 1e-300):
            if converged:
                break
            converged = True
    residual = abs(w + cmath.log(w) - c)
    if residual > _CONTRACT_REL * max(1.0, abs(c)):
        raise ConvergenceError(
            f"log-form Lambert-W iteration did not converge for k={k}, "
            f"sign={a.sign}, log_magnitude={lm}",
            w,
            residual,
        )
    return w
