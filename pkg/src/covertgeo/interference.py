"""Aggregate interference power from a homogeneous Poisson field of interferers.

The shot noise ``sum_i P_I |h_i|^2 / d_i^alpha`` is a one-sided stable law with
index ``delta = 2 / alpha``.  Its Laplace transform is ``exp(-c s^delta)`` with

    c = pi * lambda_I * Gamma(1 - delta) * E[|h|^(2 delta)] * P_I^delta,

which is the base of the power series used below.  For ``alpha = 4`` the law is
Levy with ``P(X > t) = erf(sqrt(b / t))`` and ``b = c^2 / 4``.

Units are linear watts throughout; dBm only appears at the CLI boundary.
"""

from __future__ import annotations

import dataclasses
import enum
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, special

from .numerics import DEFAULT_TOL, ConvergenceError, ToleranceSpec, erf, erfc

log = logging.getLogger(__name__)

__all__ = [
    "Fading",
    "NetworkConfig",
    "LawKind",
    "InterferenceLaw",
    "UnsupportedRegimeError",
    "fading_moment",
    "series_base",
    "stable_scale",
    "series_pdf",
    "series_tail",
    "stable_tail",
    "stable_tail_integral",
    "levy_scale",
    "levy_pdf",
    "levy_tail",
    "levy_interval",
    "sample_levy",
    "series_clamp_count",
]


class UnsupportedRegimeError(ValueError):
    """Closed forms requested outside the path-loss exponent they exist for."""


class Fading(str, enum.Enum):
    NONFADING = "nonfading"
    RAYLEIGH = "rayleigh"


@dataclass(frozen=True)
class NetworkConfig:
    """Physical scene.  Defaults are the evaluation defaults used throughout:
    P_I = 20 dBm, lambda_I = 1e-3, d_ab = 2, d_aw = 5, alpha = 4, noise -50 dBm.
    """

    lambda_i: float = 1e-3
    p_i: float = 0.1
    alpha: float = 4.0
    d_ab: float = 2.0
    d_aw: float = 5.0
    sigma_zb2: float = 1e-8
    sigma_zw2: float = 1e-8
    fading: Fading = Fading.NONFADING

    def __post_init__(self):
        object.__setattr__(self, "fading", Fading(self.fading))
        if not self.lambda_i > 0:
            raise ValueError(f"lambda_i must be > 0, got {self.lambda_i}")
        if not self.p_i > 0:
            raise ValueError(f"p_i must be > 0, got {self.p_i}")
        if not self.alpha >= 2:
            raise ValueError(f"alpha must be >= 2, got {self.alpha}")
        if not (self.d_ab > 0 and self.d_aw > 0):
            raise ValueError("distances d_ab and d_aw must be > 0")
        if not (self.sigma_zb2 >= 0 and self.sigma_zw2 >= 0):
            raise ValueError("noise powers must be >= 0")

    def replace(self, **changes) -> "NetworkConfig":
        return dataclasses.replace(self, **changes)

    @property
    def interference_limited(self) -> bool:
        return self.sigma_zb2 == 0 and self.sigma_zw2 == 0

    @property
    def is_alpha4(self) -> bool:
        return self.alpha == 4


class LawKind(str, enum.Enum):
    SERIES = "series"
    LEVY = "levy"


@dataclass(frozen=True)
class InterferenceLaw:
    """Distribution of the aggregate interference power.

    Carries no receiver position: by stationarity of the PPP every receiver
    sees the same law.
    """

    kind: LawKind
    alpha: float
    lambda_i: float
    p_i: float
    fading_moment: float
    scale_b: float | None = None

    @classmethod
    def series(cls, cfg: NetworkConfig) -> "InterferenceLaw":
        return cls(LawKind.SERIES, cfg.alpha, cfg.lambda_i, cfg.p_i,
                   fading_moment(cfg.alpha, cfg.fading))

    @classmethod
    def levy(cls, cfg: NetworkConfig) -> "InterferenceLaw":
        return cls(LawKind.LEVY, cfg.alpha, cfg.lambda_i, cfg.p_i,
                   fading_moment(cfg.alpha, cfg.fading), levy_scale(cfg))

    @classmethod
    def for_config(cls, cfg: NetworkConfig) -> "InterferenceLaw":
        return cls.levy(cfg) if cfg.is_alpha4 else cls.series(cfg)

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def base(self) -> float:
        if self.alpha <= 2:
            raise UnsupportedRegimeError("alpha = 2 gives infinite aggregate interference")
        return math.pi * self.lambda_i * math.gamma(1.0 - self.delta) \
            * self.fading_moment * self.p_i ** self.delta

    @property
    def scale(self) -> float:
        """Stable scale ``c^(1/delta)``; equals ``4 b`` at alpha = 4."""
        return self.base ** (1.0 / self.delta)

    def tail(self, t: float) -> float:
        if self.kind is LawKind.LEVY:
            return levy_tail(t, self.scale_b)
        return stable_tail(t, self)


def fading_moment(alpha: float, fading: Fading) -> float:
    """``E[|h|^(4/alpha)]`` of the interferer channel gain."""
    if alpha < 2:
        raise ValueError(f"alpha must be >= 2, got {alpha}")
    if Fading(fading) is Fading.NONFADING:
        return 1.0
    return math.gamma((alpha + 2.0) / alpha)


def series_base(cfg: NetworkConfig) -> float:
    return InterferenceLaw.series(cfg).base


def stable_scale(cfg: NetworkConfig) -> float:
    return InterferenceLaw.series(cfg).scale


_clamps = 0


def series_clamp_count() -> int:
    """How many series evaluations were clamped from a tiny negative to zero."""
    return _clamps


def _sin_factor(k: np.ndarray, delta: float) -> np.ndarray:
    # sin(k*pi*(1 - delta)) with exact zeros where the argument is a multiple of pi
    m = np.mod(k * (1.0 - delta), 2.0)
    s = np.sin(math.pi * m)
    s[np.abs(m - np.round(m)) < 1e-12] = 0.0
    return s


def _stable_series(z: float, delta: float, shift: float, tol: ToleranceSpec) -> float:
    """``(1/pi) sum_k Gamma(shift + k delta) / k! * z^k * sin(k pi (1-delta))``."""
    kmax = int(tol.max_iter)
    k = np.arange(1, kmax + 1, dtype=float)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        direct = special.gamma(shift + k * delta) / special.gamma(k + 1.0) * z ** k
        logmag = special.gammaln(shift + k * delta) - special.gammaln(k + 1.0) + k * math.log(z)
        env = np.where(np.isfinite(direct) & (direct > 0), direct, np.exp(logmag))
    if not np.all(np.isfinite(env)):
        raise ConvergenceError(f"series terms overflow (argument {z:.3g})")
    terms = env * _sin_factor(k, delta)
    peak = int(np.argmax(env))
    partial = np.cumsum(terms)
    cutoff = None
    for i in range(max(peak, 1), kmax):
        if env[i] < tol.abs_tol * abs(partial[i - 1]):
            cutoff = i
            break
    if cutoff is None:
        raise ConvergenceError(
            f"series did not converge within {kmax} terms (argument {z:.3g})"
        )
    total = math.fsum(terms[:cutoff]) / math.pi
    # each term carries a few ulps of error; refuse results drowned by cancellation
    if env[peak] * np.finfo(float).eps > 1e-6 * abs(total) * math.pi:
        raise ConvergenceError(
            f"series lost precision to cancellation (argument {z:.3g})"
        )
    return total


def series_pdf(x: float, law: InterferenceLaw, trunc: ToleranceSpec = DEFAULT_TOL) -> float:
    """Density of the aggregate interference power by its power series in ``x^(-2/alpha)``.

    Raises ConvergenceError for small ``x``, where the alternating series
    cancels catastrophically; callers fall back to the Levy form or Monte Carlo.
    """
    global _clamps
    if not x > 0:
        raise ValueError("series_pdf requires x > 0")
    z = law.base * x ** (-law.delta)
    val = _stable_series(z, law.delta, 1.0, trunc) / x
    if val < 0:
        _clamps += 1
        log.debug("series_pdf clamped %.3g to 0 at x=%.3g", val, x)
        val = 0.0
    return val


def series_tail(t: float, law: InterferenceLaw, trunc: ToleranceSpec = DEFAULT_TOL) -> float:
    """``P(X > t)`` by term-wise integration of the density series."""
    if not t > 0:
        raise ValueError("series_tail requires t > 0")
    z = law.base * t ** (-law.delta)
    return min(max(_stable_series(z, law.delta, 0.0, trunc), 0.0), 1.0)


def stable_tail_integral(t: float, law: InterferenceLaw) -> float:
    """``P(X > t)`` from the one-sided stable integral representation.

    ``P(X <= t) = (1/pi) int_0^pi exp(-A(u) (t/s)^(-delta/(1-delta))) du`` with
    ``A(u) = sin(delta u)^(delta/(1-delta)) sin((1-delta) u) / sin(u)^(1/(1-delta))``
    and ``s`` the stable scale.  Well conditioned where the series is not.
    """
    if not t > 0:
        raise ValueError("t must be > 0")
    d = law.delta
    w = (t / law.scale) ** (-d / (1.0 - d))

    def integrand(u):
        a = (math.sin(d * u) ** (d / (1.0 - d)) * math.sin((1.0 - d) * u)
             / math.sin(u) ** (1.0 / (1.0 - d)))
        return math.exp(-a * w)

    cdf, _ = integrate.quad(integrand, 0.0, math.pi, epsabs=1e-13, epsrel=1e-11, limit=200)
    return min(max(1.0 - cdf / math.pi, 0.0), 1.0)


def stable_tail(t: float, law: InterferenceLaw, trunc: ToleranceSpec = DEFAULT_TOL) -> float:
    """``P(X > t)`` for any alpha > 2: series where it is accurate, integral otherwise."""
    if t <= 0:
        return 1.0
    try:
        return series_tail(t, law, trunc)
    except ConvergenceError:
        return stable_tail_integral(t, law)


def levy_scale(cfg: NetworkConfig) -> float:
    """Levy exponent scale ``b`` of the alpha = 4 interference law (watts)."""
    if not cfg.is_alpha4:
        raise UnsupportedRegimeError(f"Levy closed form needs alpha = 4, got {cfg.alpha}")
    if cfg.fading is Fading.NONFADING:
        return math.pi ** 3 * cfg.lambda_i ** 2 * cfg.p_i / 4.0
    return math.pi ** 4 * cfg.lambda_i ** 2 * cfg.p_i / 16.0


def levy_pdf(x, b: float):
    """``sqrt(b/pi) x^(-3/2) exp(-b/x)``."""
    x = np.asarray(x, dtype=float)
    out = math.sqrt(b / math.pi) * x ** -1.5 * np.exp(-b / x)
    return float(out) if out.ndim == 0 else out


def levy_tail(t, b: float):
    """``P(X > t) = erf(sqrt(b/t))``."""
    out = erf(np.sqrt(b / np.asarray(t, dtype=float)))
    return float(out) if np.ndim(out) == 0 else out


def levy_interval(a, c, b: float):
    """``P(a < X < c)``; uses the erfc difference when both arguments are large."""
    a = np.asarray(a, dtype=float)
    c = np.asarray(c, dtype=float)
    za = np.sqrt(b / a)
    zc = np.sqrt(b / c)
    out = np.where(zc > 1.0, erfc(zc) - erfc(za), erf(za) - erf(zc))
    return float(out) if out.ndim == 0 else out


def sample_levy(b: float, rng: np.random.Generator, size=None):
    """Draw ``2 b / Z^2`` with ``Z`` standard normal.

    ``P(2b/Z^2 > t) = P(|Z| < sqrt(2b/t)) = erf(sqrt(b/t))``, matching ``levy_tail``.
    """
    if not b > 0:
        raise ValueError("b must be > 0")
    z = rng.standard_normal(size)
    return 2.0 * b / (z * z)
