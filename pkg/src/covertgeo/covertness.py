"""Average covert probability under Willie's optimal radiometer threshold.

With N -> inf Willie errs unless his threshold lands in ``[s2, s2 + P_w]``, so
the probability he detects Alice is the interference mass in the window
``(gamma - P_w, gamma)``.  He picks the gamma maximising that mass;
``xi_bar = 1 - E[max window mass]``.  At alpha = 4 the window mass is an erf
difference and its stationarity condition, written with ``u = (gamma-P_w)/P_w``
and ``beta = b/P_w``, is

    1.5 ln(u / (1+u)) + beta / (u (1+u)) = 0,

a single sign change (the window mass is strictly quasiconcave in gamma).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from . import kernels
from .interference import (
    Fading,
    InterferenceLaw,
    NetworkConfig,
    levy_interval,
    levy_scale,
    stable_tail,
)
from .numerics import (
    DEFAULT_TOL,
    BracketError,
    ConvergenceError,
    NumericalError,
    ToleranceSpec,
    bracketed_root,
    semiinf_quadrature,
)

__all__ = [
    "ThresholdSolution",
    "SolverError",
    "NumericalInconsistencyError",
    "detection_window_prob",
    "optimal_threshold",
    "optimal_threshold_awgn",
    "optimal_thresholds",
    "max_window_prob",
    "window_prob_general",
    "optimal_threshold_general",
    "avg_covert_prob_nonfading",
    "avg_covert_prob_fading",
    "avg_covert_prob",
    "covert_outage",
    "solve_pa_star",
    "normalized_config",
]


class SolverError(NumericalError):
    """The threshold bracket could not be established."""


class NumericalInconsistencyError(NumericalError):
    """A quantity that must be monotone was observed not to be."""


@dataclass(frozen=True)
class ThresholdSolution:
    gamma_opt: float
    window_prob: float
    iterations: int


def detection_window_prob(gamma: float, p_w: float, b: float) -> float:
    """Levy mass of ``(gamma - p_w, gamma)``: Willie's detection probability at ``gamma``."""
    if not (p_w > 0 and b > 0):
        raise ValueError("p_w and b must be > 0")
    if not gamma > p_w:
        raise ValueError(f"threshold must exceed p_w ({gamma!r} <= {p_w!r})")
    return levy_interval(gamma - p_w, gamma, b)


def _stationarity(log_u: float, beta: float) -> float:
    u = math.exp(log_u)
    return -1.5 * math.log1p(math.exp(-log_u)) + beta / (u * (1.0 + u))


def optimal_threshold(p_w: float, b: float, tol: ToleranceSpec = DEFAULT_TOL) -> ThresholdSolution:
    """Willie's optimal threshold for received power ``p_w`` and Levy scale ``b``.

    Expands the bracket geometrically upward from ``p_w (1 + 1e-6)`` until the
    slope of the window mass changes sign, then polishes with Brent's method.
    The search runs in ``ln((gamma - p_w)/p_w)`` so that it is scale free.
    """
    if not (p_w > 0 and b > 0):
        raise ValueError("p_w and b must be > 0")
    beta = b / p_w
    cap = math.log(1e3 * (p_w + b) / p_w)
    iterations = 0
    lo = math.log(1e-6)
    # tiny beta puts the root below the starting point; walk down first
    while _stationarity(lo, beta) <= 0:
        lo -= math.log(2.0)
        iterations += 1
        if lo < -700:
            raise SolverError(f"no positive slope near gamma = p_w (beta={beta:.3g})")
    hi = lo
    while _stationarity(hi, beta) > 0:
        lo = hi
        hi += math.log(2.0)
        iterations += 1
        if hi > cap:
            raise SolverError(
                f"bracket expansion passed 1e3 (p_w + b) without a sign change (beta={beta:.3g})"
            )
    # |ln u| can be large, so the relative tolerance on it is kept near eps
    log_u = bracketed_root(lambda v: _stationarity(v, beta), lo, hi,
                           ToleranceSpec(min(tol.rel_tol, 1e-15), 1e-14, tol.max_iter))
    u = math.exp(log_u)
    gamma = p_w * (1.0 + u)
    return ThresholdSolution(gamma, levy_interval(u * p_w, gamma, b), iterations)


def optimal_threshold_awgn(p_w: float, b: float, sigma_zw2: float,
                           tol: ToleranceSpec = DEFAULT_TOL) -> ThresholdSolution:
    """Optimal threshold with known noise power at Willie: the noiseless one shifted by it."""
    sol = optimal_threshold(p_w, b, tol)
    return ThresholdSolution(sol.gamma_opt + sigma_zw2, sol.window_prob, sol.iterations)


def optimal_thresholds(p_w, b: float) -> np.ndarray:
    """Vectorised optimal thresholds for an array of received powers (compiled kernel)."""
    p_w = np.asarray(p_w, dtype=float)
    u = kernels.threshold_offsets(b / p_w)
    return p_w * (1.0 + u)


def max_window_prob(p_w, b: float):
    """Window mass at the optimal threshold, for scalar or array ``p_w``."""
    p_w = np.asarray(p_w, dtype=float)
    if p_w.ndim == 0:
        if p_w <= 0:
            return 0.0
        return optimal_threshold(float(p_w), b).window_prob
    out = np.zeros_like(p_w)
    pos = p_w > 0
    gam = optimal_thresholds(p_w[pos], b)
    out[pos] = levy_interval(gam - p_w[pos], gam, b)
    return out


# -- general path-loss exponent (best effort) ---------------------------------


def window_prob_general(gamma: float, p_w: float, law: InterferenceLaw) -> float:
    if not gamma > p_w:
        raise ValueError("threshold must exceed p_w")
    return stable_tail(gamma - p_w, law) - stable_tail(gamma, law)


def optimal_threshold_general(p_w: float, law: InterferenceLaw) -> ThresholdSolution:
    """Numerical maximisation of the window mass for any alpha > 2.

    Quasiconcavity is only established for alpha = 4, so a log-spaced scan
    picks the best cell before a bounded Brent refinement.
    """
    if not p_w > 0:
        raise ValueError("p_w must be > 0")
    scale = law.scale

    def neg(log_y):
        y = math.exp(log_y)
        return -window_prob_general(p_w + y, p_w, law)

    lo = math.log(min(p_w, scale) * 1e-6)
    hi = math.log(max(p_w, scale) * 1e4)
    grid = np.linspace(lo, hi, 121)
    vals = np.array([neg(g) for g in grid])
    i = int(np.argmin(vals))
    a, c = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(neg, bounds=(a, c), method="bounded",
                                   options={"xatol": 1e-10, "maxiter": 500})
    best_v, best_x = (res.fun, res.x) if res.fun <= vals[i] else (vals[i], grid[i])
    y = math.exp(best_x)
    return ThresholdSolution(p_w + y, -best_v, int(res.nfev) + len(grid))


def _general_window(p_w: float, law: InterferenceLaw) -> float:
    return optimal_threshold_general(p_w, law).window_prob if p_w > 0 else 0.0


# -- average covert probability -----------------------------------------------


def avg_covert_prob_nonfading(p_a: float, cfg: NetworkConfig) -> float:
    """``xi_bar`` without fading; AWGN at Willie is irrelevant (his threshold absorbs it)."""
    if cfg.fading is not Fading.NONFADING:
        raise ValueError("avg_covert_prob_nonfading needs a non-fading config")
    if not p_a > 0:
        raise ValueError("p_a must be > 0")
    p_w = p_a * cfg.d_aw ** (-cfg.alpha)
    if cfg.is_alpha4:
        w = optimal_threshold(p_w, levy_scale(cfg)).window_prob
    else:
        w = _general_window(p_w, InterferenceLaw.series(cfg))
    return min(max(1.0 - w, 0.0), 1.0)


def avg_covert_prob_fading(p_a: float, cfg: NetworkConfig, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """``xi_bar`` under Rayleigh fading: the optimal threshold is re-solved for every
    received power ``P_w ~ Exp(mean p_a / d_aw^alpha)`` inside the expectation."""
    if cfg.fading is not Fading.RAYLEIGH:
        raise ValueError("avg_covert_prob_fading needs a Rayleigh config")
    if not p_a > 0:
        raise ValueError("p_a must be > 0")
    rate = cfg.d_aw ** cfg.alpha / p_a
    if cfg.is_alpha4:
        b = levy_scale(cfg)

        def g(p_w):
            return optimal_threshold(p_w, b).window_prob if p_w > 0 else 0.0

        w = semiinf_quadrature(g, rate, tol)
    else:
        law = InterferenceLaw.series(cfg)
        w = semiinf_quadrature(lambda p_w: _general_window(p_w, law), rate,
                               ToleranceSpec(1e-7, 1e-9, 100))
    return min(max(1.0 - w, 0.0), 1.0)


def avg_covert_prob(p_a: float, cfg: NetworkConfig) -> float:
    if cfg.fading is Fading.NONFADING:
        return avg_covert_prob_nonfading(p_a, cfg)
    return avg_covert_prob_fading(p_a, cfg)


def covert_outage(p_a: float, cfg: NetworkConfig) -> float:
    """Probability the slot is detectable: ``1 - xi_bar`` (xi is Bernoulli as N -> inf)."""
    return 1.0 - avg_covert_prob(p_a, cfg)


# -- maximum covert transmit power ----------------------------------------------


def _interference_scale(cfg: NetworkConfig) -> float:
    return levy_scale(cfg) if cfg.is_alpha4 else InterferenceLaw.series(cfg).scale


def normalized_config(cfg: NetworkConfig) -> NetworkConfig:
    """Same scene with ``lambda_I = 1`` and ``P_I`` chosen so the interference scale is 1."""
    unit = cfg.replace(lambda_i=1.0, p_i=1.0)
    return unit.replace(p_i=1.0 / _interference_scale(unit))


def solve_pa_star(eps: float, cfg: NetworkConfig, tol: ToleranceSpec = DEFAULT_TOL,
                  normalize: bool = False) -> float:
    """Largest Alice power meeting ``xi_bar >= 1 - eps``.

    One-sided search doubles ``p_a`` from a seed giving ``P_w = 1e-3 b`` until the
    constraint breaks, then bisects in ``ln p_a``.  With ``normalize`` the
    search runs once in units where the interference scale is 1 and is mapped
    back (``p_a*`` is proportional to the scale ``lambda^(alpha/2) P_I``).
    """
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")
    if normalize:
        ncfg = normalized_config(cfg)
        rho = _normalized_pa_star(eps, ncfg.alpha, ncfg.fading, ncfg.d_aw, ncfg.p_i, tol)
        return rho * _interference_scale(cfg)
    return _search_pa_star(eps, cfg, tol)


@functools.lru_cache(maxsize=256)
def _normalized_pa_star(eps, alpha, fading, d_aw, p_i, tol):
    ncfg = NetworkConfig(lambda_i=1.0, p_i=p_i, alpha=alpha, d_aw=d_aw, fading=fading)
    return _search_pa_star(eps, ncfg, tol)


def _search_pa_star(eps: float, cfg: NetworkConfig, tol: ToleranceSpec) -> float:
    target = 1.0 - eps

    def xi(p):
        return avg_covert_prob(p, cfg)

    lo = 1e-3 * _interference_scale(cfg) * cfg.d_aw ** cfg.alpha
    xlo = xi(lo)
    while xlo < target:
        lo *= 0.5
        xlo = xi(lo)
        if lo < 1e-300:
            raise NumericalInconsistencyError("xi_bar stays below target as p_a -> 0")
    hi = 2.0 * lo
    xhi = xi(hi)
    while xhi >= target:
        if xhi > xlo + 1e-9:
            raise NumericalInconsistencyError("xi_bar increased with p_a during the search")
        lo, xlo = hi, xhi
        hi *= 2.0
        xhi = xi(hi)
        if hi > 1e300:
            raise NumericalInconsistencyError("xi_bar never dropped below target")
    a, c = math.log(lo), math.log(hi)
    for _ in range(int(tol.max_iter)):
        if c - a < tol.rel_tol:
            break
        m = 0.5 * (a + c)
        xm = xi(math.exp(m))
        if not (xhi - 1e-9 <= xm <= xlo + 1e-9):
            raise NumericalInconsistencyError(
                f"xi_bar not monotone in p_a: {xm!r} outside [{xhi!r}, {xlo!r}]"
            )
        if abs(xm - target) < tol.abs_tol:
            return math.exp(m)
        if xm >= target:
            a, xlo = m, xm
        else:
            c, xhi = m, xm
    else:
        raise ConvergenceError("bisection for p_a* hit max_iter")
    return math.exp(0.5 * (a + c))
