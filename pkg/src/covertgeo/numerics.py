"""Special functions and scalar solvers shared by the analytical modules."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate, optimize, special

__all__ = [
    "ToleranceSpec",
    "DEFAULT_TOL",
    "NumericalError",
    "BracketError",
    "ConvergenceError",
    "QuadratureError",
    "erf",
    "erfc",
    "inv_erf",
    "reg_upper_gamma",
    "bracketed_root",
    "semiinf_quadrature",
]


class NumericalError(ArithmeticError):
    """Base class for numerical failures inside covertgeo."""


class BracketError(NumericalError):
    """The supplied interval does not bracket a sign change."""


class ConvergenceError(NumericalError):
    """An iterative method hit its iteration cap or lost precision."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested accuracy."""


@dataclass(frozen=True)
class ToleranceSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_iter: int = 200

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if not self.abs_tol >= 0:
            raise ValueError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be an integer >= 1, got {self.max_iter}")


DEFAULT_TOL = ToleranceSpec()

erf = special.erf
erfc = special.erfc

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)


def inv_erf(p):
    """Inverse error function on (-1, 1).

    Starts from scipy's rational approximation and applies one Newton step on
    ``erf`` so the round trip holds to the last few ulps.
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(np.abs(p_arr) >= 1.0) or np.any(np.isnan(p_arr)):
        raise ValueError("inv_erf is defined only for |p| < 1")
    x = special.erfinv(p_arr)
    x = x - (special.erf(x) - p_arr) / (_TWO_OVER_SQRT_PI * np.exp(-x * x))
    return float(x) if np.ndim(x) == 0 else x


def reg_upper_gamma(n, x):
    """Regularized upper incomplete gamma ``Gamma(n, x) / Gamma(n)``."""
    if np.any(np.asarray(n) < 1):
        raise ValueError("shape n must be >= 1")
    if np.any(np.asarray(x) < 0):
        raise ValueError("x must be >= 0")
    out = special.gammaincc(n, x)
    return float(out) if np.ndim(out) == 0 else out


def bracketed_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: ToleranceSpec = DEFAULT_TOL,
) -> float:
    """Root of a continuous scalar function on ``[lo, hi]`` (Brent's method).

    Raises BracketError when ``f(lo)`` and ``f(hi)`` share a sign and
    ConvergenceError when ``tol.max_iter`` iterations are not enough.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return float(lo)
    if fhi == 0.0:
        return float(hi)
    if not (np.isfinite(flo) and np.isfinite(fhi)) or np.sign(flo) == np.sign(fhi):
        raise BracketError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    # brentq rejects rtol below 4*eps
    rtol = max(tol.rel_tol, 4 * np.finfo(float).eps)
    try:
        root, info = optimize.brentq(
            f, lo, hi, xtol=tol.abs_tol, rtol=rtol, maxiter=int(tol.max_iter),
            full_output=True, disp=False,
        )
    except RuntimeError as exc:  # pragma: no cover - disp=False path returns info
        raise ConvergenceError(str(exc)) from exc
    if not info.converged:
        raise ConvergenceError(
            f"bracketed_root: {info.flag} after {info.iterations} iterations"
        )
    return float(root)


def semiinf_quadrature(
    g: Callable[[float], float],
    weight_rate: float,
    tol: ToleranceSpec = DEFAULT_TOL,
) -> float:
    """``int_0^inf g(x) * rate * exp(-rate * x) dx`` for bounded ``g``.

    The integral is taken in the scaled variable ``s = rate * x`` and truncated
    at ``s_max = -ln(abs_tol)``, which drops exponential mass below ``abs_tol``.
    """
    if not weight_rate > 0:
        raise ValueError(f"weight_rate must be > 0, got {weight_rate}")
    abs_tol = tol.abs_tol if tol.abs_tol > 0 else 1e-15
    s_max = -math.log(abs_tol)

    def integrand(s):
        return g(s / weight_rate) * math.exp(-s)

    # split points keep the subdivision near the origin where the weight is largest
    edges = [0.0, 0.5, 2.0, 6.0, 14.0, s_max]
    edges = sorted({e for e in edges if e <= s_max})
    total = 0.0
    err_total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err, *_ = integrate.quad(
                integrand, a, b, epsabs=abs_tol, epsrel=tol.rel_tol,
                limit=int(tol.max_iter), full_output=1,
            )
        total += val
        err_total += err
    if not np.isfinite(total) or err_total > max(1e-8, 1e3 * tol.rel_tol * abs(total)):
        raise QuadratureError(
            f"semiinf_quadrature did not converge: value={total!r}, error~{err_total:.3g}"
        )
    return total
