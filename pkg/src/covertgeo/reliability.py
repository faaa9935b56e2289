"""Connection outage at Bob and the rate that meets an outage budget.

Outage happens when the interference at Bob exceeds
``t = [P_b / (2^R - 1) - sigma_zb^2]^+``; when ``t = 0`` the noise alone
already breaks the link and the outage probability is 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .interference import Fading, InterferenceLaw, NetworkConfig, levy_scale, levy_tail, stable_tail
from .numerics import DEFAULT_TOL, ToleranceSpec, bracketed_root, inv_erf, semiinf_quadrature

__all__ = [
    "LinkBudget",
    "InfeasibleRateError",
    "conn_outage_nonfading",
    "conn_outage_fading",
    "conn_outage",
    "rate_for_outage",
]


class InfeasibleRateError(ValueError):
    """No positive rate meets the outage budget; ``rate`` is 0."""

    rate = 0.0


@dataclass(frozen=True)
class LinkBudget:
    p_a: float
    r: float
    sigma_zb2: float = 0.0

    def __post_init__(self):
        if not self.p_a > 0:
            raise ValueError(f"p_a must be > 0, got {self.p_a}")
        if not self.r > 0:
            raise ValueError(f"rate must be > 0, got {self.r}")
        if not self.sigma_zb2 >= 0:
            raise ValueError("sigma_zb2 must be >= 0")


def _tail(t: float, cfg: NetworkConfig) -> float:
    if t <= 0:
        return 1.0
    if cfg.is_alpha4:
        return levy_tail(t, levy_scale(cfg))
    return stable_tail(t, InterferenceLaw.series(cfg))


def conn_outage_nonfading(lb: LinkBudget, cfg: NetworkConfig) -> float:
    p_b = lb.p_a * cfg.d_ab ** (-cfg.alpha)
    t = p_b / math.expm1(lb.r * math.log(2.0)) - lb.sigma_zb2
    return _tail(t, cfg)


def conn_outage_fading(lb: LinkBudget, cfg: NetworkConfig, tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Rayleigh link: ``P_b ~ Exp(mean p_a / d_ab^alpha)``."""
    snr_gap = math.expm1(lb.r * math.log(2.0))
    if cfg.is_alpha4 and lb.sigma_zb2 == 0:
        x = math.pi ** 2 * cfg.lambda_i * cfg.d_ab ** 2 * math.sqrt(cfg.p_i * snr_gap) \
            / (2.0 * math.sqrt(lb.p_a))
        return -math.expm1(-x)
    rate = cfg.d_ab ** cfg.alpha / lb.p_a
    # the [.]^+ = 0 region (p_b below sigma^2 (2^R-1)) has outage 1; integrate the rest
    p0 = lb.sigma_zb2 * snr_gap
    tail_mass = math.exp(-rate * p0)
    inner = semiinf_quadrature(lambda s: _tail(s / snr_gap, cfg), rate,
                               tol if cfg.is_alpha4 else ToleranceSpec(1e-8, 1e-10, 100))
    return (1.0 - tail_mass) + tail_mass * inner


def conn_outage(lb: LinkBudget, cfg: NetworkConfig) -> float:
    if cfg.fading is Fading.NONFADING:
        return conn_outage_nonfading(lb, cfg)
    return conn_outage_fading(lb, cfg)


def _closed_form_rate(p_a: float, delta: float, cfg: NetworkConfig) -> float:
    d4 = cfg.d_ab ** 4
    if cfg.fading is Fading.NONFADING:
        snr = 4.0 * p_a * inv_erf(delta) ** 2 / (cfg.p_i * math.pi ** 3 * cfg.lambda_i ** 2 * d4)
    else:
        snr = 4.0 * p_a * math.log1p(-delta) ** 2 / (cfg.p_i * math.pi ** 4 * cfg.lambda_i ** 2 * d4)
    return math.log2(1.0 + snr)


def rate_for_outage(p_a: float, delta: float, cfg: NetworkConfig, sigma_zb2: float | None = None,
                    tol: ToleranceSpec = DEFAULT_TOL) -> float:
    """Largest rate with connection outage ``<= delta``.

    Closed forms at alpha = 4 without noise at Bob; otherwise a bracketed root
    below the noiseless rate (noise only lowers the feasible rate).
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    if not p_a > 0:
        raise ValueError("p_a must be > 0")
    s2 = cfg.sigma_zb2 if sigma_zb2 is None else sigma_zb2
    if cfg.is_alpha4 and s2 == 0:
        return _closed_form_rate(p_a, delta, cfg)
    noisy = cfg.replace(sigma_zb2=s2)

    def excess(r):
        return conn_outage(LinkBudget(p_a, r, s2), noisy) - delta

    r_lo = 1e-12
    if excess(r_lo) > 0:
        raise InfeasibleRateError(f"outage exceeds {delta} even as R -> 0")
    if cfg.is_alpha4:
        r_hi = _closed_form_rate(p_a, delta, cfg)
        if excess(r_hi) <= 0:
            return r_hi
    else:
        r_hi = 1.0
        while excess(r_hi) <= 0:
            r_hi *= 2.0
            if r_hi > 1e4:
                raise InfeasibleRateError("rate search diverged")
    return bracketed_root(excess, r_lo, r_hi, ToleranceSpec(tol.rel_tol, 1e-14, tol.max_iter))
