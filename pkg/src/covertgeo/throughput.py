"""Covert throughput and the interferer-invariance / AWGN-monotonicity checks.

``eta`` is found sequentially: the largest Alice power satisfying
``xi_bar >= 1 - eps`` first, then the largest rate whose connection outage is
at most ``delta`` at that power.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from .covertness import avg_covert_prob, solve_pa_star
from .interference import NetworkConfig
from .numerics import DEFAULT_TOL, ToleranceSpec
from .reliability import InfeasibleRateError, LinkBudget, conn_outage, rate_for_outage

log = logging.getLogger(__name__)

__all__ = [
    "CovertRequirements",
    "ThroughputResult",
    "covert_throughput",
    "InvarianceReport",
    "invariance_report",
    "MonotonicityReport",
    "awgn_monotonicity_report",
    "INVARIANCE_RTOL",
]

# absorbs quadrature and root-finder noise across independent solver runs
INVARIANCE_RTOL = 1e-3


@dataclass(frozen=True)
class CovertRequirements:
    eps: float = 0.1
    delta: float = 0.1

    def __post_init__(self):
        for name in ("eps", "delta"):
            v = getattr(self, name)
            if not 0 < v < 1:
                raise ValueError(f"{name} must lie in the open interval (0, 1), got {v}")


@dataclass(frozen=True)
class ThroughputResult:
    pa_star: float
    eta: float
    xi_at_pa: float
    outage_at_eta: float
    normalized: bool
    diagnostic: str = ""


def covert_throughput(req: CovertRequirements, cfg: NetworkConfig, normalize: bool = True,
                      tol: ToleranceSpec = DEFAULT_TOL) -> ThroughputResult:
    # xi_bar ignores noise at Willie, so the normalised power search is exact with AWGN too
    pa = solve_pa_star(req.eps, cfg, tol, normalize=normalize)
    xi = avg_covert_prob(pa, cfg)
    try:
        eta = rate_for_outage(pa, req.delta, cfg, tol=tol)
    except InfeasibleRateError as exc:
        log.warning("no feasible rate: %s", exc)
        return ThroughputResult(pa, 0.0, xi, 1.0, normalize, f"infeasible rate: {exc}")
    out = conn_outage(LinkBudget(pa, eta, cfg.sigma_zb2), cfg)
    return ThroughputResult(pa, eta, xi, out, normalize)


def _scaled(cfg: NetworkConfig, parameter: str, u: float) -> NetworkConfig:
    return cfg.replace(**{parameter: getattr(cfg, parameter) * u})


@dataclass
class InvarianceReport:
    """Rows ``(u, pa_star, eta)`` for ``parameter -> u * parameter``.

    Interference-limited theory says ``eta`` is constant and ``pa_star`` scales
    as ``u^(alpha/2)`` for the density and as ``u`` for the interferer power.
    """

    parameter: str
    exponent: float
    rows: list = field(default_factory=list)
    rtol: float = INVARIANCE_RTOL
    max_eta_dev: float = 0.0
    max_pa_dev: float = 0.0

    @property
    def passed(self) -> bool:
        return self.max_eta_dev <= self.rtol and self.max_pa_dev <= self.rtol


def invariance_report(req: CovertRequirements, cfg: NetworkConfig, scale_factors,
                      parameter: str = "lambda_i", normalize: bool = False) -> InvarianceReport:
    """Re-solve the full problem for each scaled scene and measure the deviations.

    Each row is an independent solve (``normalize=False`` by default) so the
    invariance is observed rather than built in.
    """
    if parameter not in ("lambda_i", "p_i"):
        raise ValueError("parameter must be 'lambda_i' or 'p_i'")
    if not cfg.interference_limited:
        raise ValueError("invariance only holds without receiver noise")
    exponent = cfg.alpha / 2.0 if parameter == "lambda_i" else 1.0
    base = covert_throughput(req, cfg, normalize=normalize)
    rep = InvarianceReport(parameter, exponent)
    for u in scale_factors:
        res = base if u == 1 else covert_throughput(req, _scaled(cfg, parameter, u), normalize=normalize)
        eta_dev = abs(res.eta / base.eta - 1.0)
        pa_dev = abs(res.pa_star / (base.pa_star * u ** exponent) - 1.0)
        rep.rows.append((u, res.pa_star, res.eta, eta_dev, pa_dev))
        rep.max_eta_dev = max(rep.max_eta_dev, eta_dev)
        rep.max_pa_dev = max(rep.max_pa_dev, pa_dev)
    return rep


@dataclass
class MonotonicityReport:
    parameter: str
    rows: list = field(default_factory=list)
    strictly_increasing: bool = True
    plateau_rel_delta: float = math.inf

    def plateaus(self, rtol: float = INVARIANCE_RTOL) -> bool:
        return self.plateau_rel_delta < rtol


def awgn_monotonicity_report(req: CovertRequirements, cfg: NetworkConfig, grid,
                             parameter: str = "lambda_i") -> MonotonicityReport:
    """``eta`` along an increasing grid of interferer density or power with noise at Bob.

    Expected: strictly increasing while noise matters, flattening once the
    network is interference-limited.  ``plateau_rel_delta`` is the relative
    change over the last grid step.
    """
    if parameter not in ("lambda_i", "p_i"):
        raise ValueError("parameter must be 'lambda_i' or 'p_i'")
    if not cfg.sigma_zb2 > 0:
        raise ValueError("the AWGN monotonicity check needs sigma_zb2 > 0")
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    rep = MonotonicityReport(parameter)
    etas = []
    for v in grid:
        res = covert_throughput(req, cfg.replace(**{parameter: v}))
        rep.rows.append((v, res.pa_star, res.eta))
        etas.append(res.eta)
    rep.strictly_increasing = all(b > a for a, b in zip(etas, etas[1:]))
    if len(etas) >= 2:
        rep.plateau_rel_delta = abs(etas[-1] - etas[-2]) / abs(etas[-1])
    return rep
