"""Willie's radiometer: error probabilities for N samples and the N -> inf limit."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import reg_upper_gamma

__all__ = ["DetectorInput", "DegenerateNullError", "p_fa", "p_md", "xi_finite", "xi_asymptotic"]


class DegenerateNullError(ValueError):
    """Zero received power under H0 leaves the test statistic degenerate."""


@dataclass(frozen=True)
class DetectorInput:
    gamma: float
    sigma_vw2: float
    p_w: float
    sigma_zw2: float = 0.0

    def __post_init__(self):
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if min(self.sigma_vw2, self.p_w, self.sigma_zw2) < 0:
            raise ValueError("powers must be >= 0")

    @property
    def null_power(self) -> float:
        return self.sigma_vw2 + self.sigma_zw2


def _null_power(inp: DetectorInput) -> float:
    s2 = inp.null_power
    if s2 <= 0:
        raise DegenerateNullError("interference-plus-noise power under H0 is zero")
    return s2


def p_fa(n: int, inp: DetectorInput) -> float:
    """False alarm: the mean sample energy exceeds gamma with Alice silent."""
    s2 = _null_power(inp)
    return reg_upper_gamma(n, n * inp.gamma / s2)


def p_md(n: int, inp: DetectorInput) -> float:
    """Misdetection: the mean sample energy stays below gamma while Alice transmits."""
    s2 = _null_power(inp)
    return 1.0 - reg_upper_gamma(n, n * inp.gamma / (inp.p_w + s2))


def xi_finite(n: int, inp: DetectorInput) -> float:
    """``P_FA + P_MD`` (unclamped; exceeds 1 for a poorly chosen threshold)."""
    return p_fa(n, inp) + p_md(n, inp)


def xi_asymptotic(gamma, sigma_vw2=None, p_w=None, sigma_zw2=0.0):
    """Detection error as N -> inf: 0 inside ``[s2, p_w + s2]``, 1 otherwise.

    Works elementwise on arrays; the interval is closed.  Also accepts a
    single DetectorInput.
    """
    if isinstance(gamma, DetectorInput):
        gamma, sigma_vw2, p_w, sigma_zw2 = gamma.gamma, gamma.sigma_vw2, gamma.p_w, gamma.sigma_zw2
    s2 = np.asarray(sigma_vw2, dtype=float) + sigma_zw2
    inside = (s2 <= gamma) & (gamma <= np.asarray(p_w) + s2)
    out = np.where(inside, 0, 1)
    return int(out) if out.ndim == 0 else out
