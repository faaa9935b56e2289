"""Monte Carlo oracle: Poisson interferer fields, fading draws and radiometer decisions.

Trials are split into fixed-size blocks.  Block ``k`` of stream ``s`` draws from
a Philox generator keyed by ``(seed, s, k)``, so results are bit-identical for
any worker count and blocks are reduced in index order.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import kernels
from .covertness import optimal_threshold, optimal_threshold_general, optimal_thresholds
from .detection import xi_asymptotic
from .interference import Fading, InterferenceLaw, NetworkConfig, levy_scale, sample_levy
from .throughput import CovertRequirements

log = logging.getLogger(__name__)

__all__ = [
    "SimConfig",
    "McEstimate",
    "SlotSample",
    "BruteForceResult",
    "default_threads",
    "required_window_radius",
    "truncation_bias",
    "block_rng",
    "sample_slot",
    "estimate_xi_bar",
    "estimate_conn_outage",
    "estimate_rate_quantile",
    "estimate_slot_metrics",
    "brute_force_throughput",
]

Z95 = 1.959963984540054


def _env_threads() -> int | None:
    try:
        return max(1, int(os.environ["COVERTGEO_THREADS"]))
    except (KeyError, ValueError):
        return None


def default_threads(requested: int | None = None) -> int:
    """Worker count: ``requested`` (default 1), capped by ``COVERTGEO_THREADS``."""
    cap = _env_threads()
    n = requested if requested is not None else (cap or 1)
    return max(1, min(n, cap) if cap else n)


@dataclass(frozen=True)
class SimConfig:
    """``slot_samples_n=None`` means Willie collects infinitely many samples per slot.

    ``backend``: ``"ppp"`` samples interferer positions, ``"levy"`` draws the
    exact alpha = 4 interference law, ``"auto"`` picks levy at alpha = 4.
    ``window_radius=None`` sizes the PPP disk from the truncation-bias rule.
    """

    trials: int = 100_000
    window_radius: float | None = None
    seed: int = 0
    slot_samples_n: int | None = None
    backend: str = "auto"
    threads: int | None = None
    block_size: int = 4096

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise ValueError("trials must be an integer >= 1")
        if self.backend not in ("auto", "ppp", "levy"):
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.slot_samples_n is not None and self.slot_samples_n < 1:
            raise ValueError("slot_samples_n must be >= 1")
        if self.block_size < 1:
            raise ValueError("block_size must be >= 1")
        if self.window_radius is not None and not self.window_radius > 0:
            raise ValueError("window_radius must be > 0")

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class McEstimate:
    mean: float
    half_width_95: float
    trials: int

    @property
    def std_error(self) -> float:
        return self.half_width_95 / Z95

    def brackets(self, value: float, extra_se: float = 3.0) -> bool:
        """``value`` inside the 95% interval widened by ``extra_se`` standard errors."""
        return abs(value - self.mean) <= self.half_width_95 + extra_se * self.std_error


class SlotSample(NamedTuple):
    sigma_vb2: np.ndarray
    sigma_vw2: np.ndarray
    p_b: np.ndarray
    p_w: np.ndarray


# -- PPP window -----------------------------------------------------------------


def _gain_mean(cfg: NetworkConfig) -> float:
    return 1.0  # E|h|^2 for both unit gains and unit-mean Rayleigh power


def truncation_bias(cfg: NetworkConfig, radius: float) -> float:
    """Upper bound on the mean interference from beyond the disk, at either receiver."""
    if cfg.alpha <= 2:
        return math.inf
    d = radius - max(cfg.d_ab, cfg.d_aw)
    if d <= 0:
        return math.inf
    return 2 * math.pi * cfg.lambda_i * cfg.p_i * _gain_mean(cfg) * d ** (2 - cfg.alpha) / (cfg.alpha - 2)


def required_window_radius(cfg: NetworkConfig, rel: float = 1e-3) -> float:
    """Smallest disk radius whose truncation bias is below ``rel`` times the interference scale."""
    proxy = InterferenceLaw.series(cfg).scale
    reach = (2 * math.pi * cfg.lambda_i * cfg.p_i * _gain_mean(cfg)
             / ((cfg.alpha - 2) * rel * proxy)) ** (1.0 / (cfg.alpha - 2))
    return max(cfg.d_ab, cfg.d_aw) + reach


def _radius(cfg: NetworkConfig, sim: SimConfig) -> float:
    need = required_window_radius(cfg)
    r = sim.window_radius
    if r is None:
        return need
    if r <= max(cfg.d_ab, cfg.d_aw):
        raise ValueError("window_radius must exceed both receiver distances")
    if r < need:
        log.info("window_radius %.4g raised to %.4g to bound truncation bias", r, need)
        return need
    return r


def _backend(cfg: NetworkConfig, sim: SimConfig) -> str:
    if sim.backend == "auto":
        return "levy" if cfg.is_alpha4 else "ppp"
    if sim.backend == "levy" and not cfg.is_alpha4:
        raise ValueError("the exact Levy backend needs alpha = 4")
    return sim.backend


# -- sampling ---------------------------------------------------------------------


def block_rng(seed: int, stream: int, block: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, block))
    return np.random.Generator(np.random.Philox(ss))


def _draw(cfg: NetworkConfig, backend: str, radius: float, rng: np.random.Generator, n: int):
    """Interference at Bob/Willie and Alice's channel power gains for ``n`` slots."""
    fading = cfg.fading is Fading.RAYLEIGH
    if backend == "levy":
        b = levy_scale(cfg)
        svb = sample_levy(b, rng, n)
        svw = sample_levy(b, rng, n)
    else:
        # PPP on the bounding square thinned to the disk: in-disk counts stay
        # Poisson(lambda pi r^2) and no trigonometry is needed
        sq = rng.poisson(cfg.lambda_i * 4.0 * radius * radius, n).astype(np.int64)
        tot = int(sq.sum())
        u = rng.random(tot)
        v = rng.random(tot)
        gb = rng.standard_exponential(tot) if fading else None
        gw = rng.standard_exponential(tot) if fading else None
        # Alice at the origin, Bob and Willie on opposite sides
        svb, svw = kernels.disk_shot_noise_sums(u, v, gb, gw, sq, radius, (cfg.d_ab, 0.0),
                                                (-cfg.d_aw, 0.0), cfg.p_i, float(cfg.alpha))
    if fading:
        hab = rng.standard_exponential(n)
        haw = rng.standard_exponential(n)
    else:
        hab = haw = np.ones(n)
    return svb, svw, hab, haw


def sample_slot(cfg: NetworkConfig, sim: SimConfig, rng: np.random.Generator,
                p_a: float = 1.0, size: int = 1) -> SlotSample:
    """Draw ``size`` independent slots; one interferer field feeds both receivers."""
    svb, svw, hab, haw = _draw(cfg, _backend(cfg, sim), _radius(cfg, sim), rng, size)
    return SlotSample(svb, svw, p_a * hab * cfg.d_ab ** -cfg.alpha, p_a * haw * cfg.d_aw ** -cfg.alpha)


def _map_blocks(cfg: NetworkConfig, sim: SimConfig, fn: Callable, stream: int = 0) -> list:
    """Run ``fn(rng, svb, svw, hab, haw)`` per block; results in block order."""
    backend = _backend(cfg, sim)
    radius = _radius(cfg, sim) if backend == "ppp" else math.inf
    nblocks = -(-sim.trials // sim.block_size)

    def run(k):
        n = min(sim.block_size, sim.trials - k * sim.block_size)
        rng = block_rng(sim.seed, stream, k)
        return fn(rng, *_draw(cfg, backend, radius, rng, n))

    threads = default_threads(sim.threads)
    if threads <= 1 or nblocks == 1:
        return [run(k) for k in range(nblocks)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, range(nblocks)))


def _estimate(parts, total: int) -> McEstimate:
    s = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    mean = s / total
    var = max(s2 / total - mean * mean, 0.0) * total / max(total - 1, 1)
    return McEstimate(mean, Z95 * math.sqrt(var / total), total)


# -- Willie ------------------------------------------------------------------------


def _threshold_table(cfg: NetworkConfig):
    law = InterferenceLaw.series(cfg)
    ratios = np.logspace(-6, 6, 241)
    gam = np.array([optimal_threshold_general(r * law.scale, law).gamma_opt for r in ratios])
    return law.scale, np.log(ratios), np.log(gam / (ratios * law.scale) - 1.0)


def _thresholds(cfg: NetworkConfig, p_w: np.ndarray, table=None) -> np.ndarray:
    """Willie's optimal thresholds (noise excluded) for received powers ``p_w``."""
    if cfg.is_alpha4:
        b = levy_scale(cfg)
        if cfg.fading is Fading.NONFADING:
            return np.full_like(p_w, optimal_threshold(float(p_w[0]), b).gamma_opt)
        return optimal_thresholds(p_w, b)
    if cfg.fading is Fading.NONFADING:
        law = InterferenceLaw.series(cfg)
        return np.full_like(p_w, optimal_threshold_general(float(p_w[0]), law).gamma_opt)
    # general alpha with fading: interpolate the offset over a log grid of P_w / scale
    scale, lr, lu = table
    u = np.exp(np.interp(np.log(p_w / scale), lr, lu))
    return p_w * (1.0 + u)


def estimate_xi_bar(p_a: float, cfg: NetworkConfig, sim: SimConfig, gamma: float | None = None,
                    stream: int = 0) -> McEstimate:
    """Empirical Willie error ``P_FA + P_MD`` per slot, averaged.

    Willie uses the analytical optimal threshold for his received power, shifted
    by his known noise power, unless a fixed ``gamma`` (watts) is given.  With
    ``slot_samples_n`` set the radiometer statistic is drawn from its Gamma laws.
    """
    table = None
    if gamma is None and not cfg.is_alpha4 and cfg.fading is Fading.RAYLEIGH:
        table = _threshold_table(cfg)
    n_samples = sim.slot_samples_n

    def fn(rng, svb, svw, hab, haw):
        p_w = p_a * haw * cfg.d_aw ** -cfg.alpha
        if gamma is None:
            g = _thresholds(cfg, p_w, table) + cfg.sigma_zw2
        else:
            g = np.full_like(p_w, gamma)
        if n_samples is None:
            xi = xi_asymptotic(g, svw, p_w, cfg.sigma_zw2).astype(float)
        else:
            s0 = svw + cfg.sigma_zw2
            t0 = rng.gamma(n_samples, s0 / n_samples)
            t1 = rng.gamma(n_samples, (p_w + s0) / n_samples)
            xi = (t0 > g).astype(float) + (t1 <= g)
        return float(xi.sum()), float((xi * xi).sum())

    return _estimate(_map_blocks(cfg, sim, fn, stream), sim.trials)


def estimate_conn_outage(p_a: float, r_rate: float, cfg: NetworkConfig, sim: SimConfig,
                         stream: int = 0) -> McEstimate:
    """Fraction of slots where ``log2(1 + P_b / (sigma_vb^2 + sigma_zb^2)) < R``."""
    gap = math.expm1(r_rate * math.log(2.0))

    def fn(rng, svb, svw, hab, haw):
        p_b = p_a * hab * cfg.d_ab ** -cfg.alpha
        out = (svb + cfg.sigma_zb2 > p_b / gap).astype(float)
        return float(out.sum()), float(out.sum())

    return _estimate(_map_blocks(cfg, sim, fn, stream), sim.trials)


def estimate_slot_metrics(p_a: float, r_rate: float, cfg: NetworkConfig, sim: SimConfig,
                          sigma_zb2_values=None, stream: int = 0):
    """``xi_bar`` and connection outage from one shared set of simulated slots.

    Returns ``(xi_estimate, outage_estimates)`` with one outage estimate per
    entry of ``sigma_zb2_values`` (default: the config's Bob noise).  Each
    estimate equals what :func:`estimate_xi_bar` / :func:`estimate_conn_outage`
    give on the same stream; the point is to pay for PPP draws once.
    """
    noises = (cfg.sigma_zb2,) if sigma_zb2_values is None else tuple(sigma_zb2_values)
    gap = math.expm1(r_rate * math.log(2.0))
    table = None
    if not cfg.is_alpha4 and cfg.fading is Fading.RAYLEIGH:
        table = _threshold_table(cfg)

    def fn(rng, svb, svw, hab, haw):
        p_w = p_a * haw * cfg.d_aw ** -cfg.alpha
        g = _thresholds(cfg, p_w, table) + cfg.sigma_zw2
        xi = xi_asymptotic(g, svw, p_w, cfg.sigma_zw2).astype(float)
        p_b = p_a * hab * cfg.d_ab ** -cfg.alpha
        outs = [float((svb + nz > p_b / gap).sum()) for nz in noises]
        return float(xi.sum()), float((xi * xi).sum()), outs

    parts = _map_blocks(cfg, sim, fn, stream)
    xi = _estimate([(p[0], p[1]) for p in parts], sim.trials)
    outs = tuple(_estimate([(p[2][k], p[2][k]) for p in parts], sim.trials)
                 for k in range(len(noises)))
    return xi, outs


def estimate_rate_quantile(p_a: float, delta: float, cfg: NetworkConfig, sim: SimConfig,
                           stream: int = 0) -> McEstimate:
    """Largest rate whose empirical outage is ``<= delta`` at power ``p_a``.

    The half-width comes from the binomial order-statistic interval.
    """
    def fn(rng, svb, svw, hab, haw):
        p_b = p_a * hab * cfg.d_ab ** -cfg.alpha
        return np.log2(1.0 + p_b / (svb + cfg.sigma_zb2))

    cap = np.sort(np.concatenate(_map_blocks(cfg, sim, fn, stream)))
    n = cap.size
    k = min(int(math.floor(n * delta)), n - 1)
    spread = Z95 * math.sqrt(n * delta * (1 - delta))
    lo = cap[max(int(math.floor(k - spread)), 0)]
    hi = cap[min(int(math.ceil(k + spread)), n - 1)]
    return McEstimate(float(cap[k]), float(0.5 * (hi - lo)), n)


@dataclass(frozen=True)
class BruteForceResult:
    pa: float
    eta: float
    pa_index: int
    r_index: int
    xi_estimates: tuple
    outage_estimates: tuple
    pa_resolution: float
    r_resolution: float
    diagnostic: str = ""


def brute_force_throughput(req: CovertRequirements, cfg: NetworkConfig, sim: SimConfig,
                           pa_grid, r_grid, stream: int = 0) -> BruteForceResult:
    """Grid search of the covert throughput with simulated constraints.

    Every grid probe sees the same simulated slots (common random numbers).
    Picks the largest grid ``P_a`` whose estimated ``xi_bar`` meets ``1 - eps``,
    then the largest grid rate whose estimated outage is within ``delta``.
    """
    pa_grid = np.asarray(sorted(pa_grid), dtype=float)
    r_grid = np.asarray(sorted(r_grid), dtype=float)
    gaps = np.expm1(r_grid * math.log(2.0))
    table = None
    if not cfg.is_alpha4 and cfg.fading is Fading.RAYLEIGH:
        table = _threshold_table(cfg)

    def fn(rng, svb, svw, hab, haw):
        xi_sum = np.zeros(pa_grid.size)
        out_sum = np.zeros((pa_grid.size, r_grid.size))
        s_b = svb + cfg.sigma_zb2
        for i, pa in enumerate(pa_grid):
            p_w = pa * haw * cfg.d_aw ** -cfg.alpha
            g = _thresholds(cfg, p_w, table) + cfg.sigma_zw2
            xi_sum[i] = xi_asymptotic(g, svw, p_w, cfg.sigma_zw2).sum()
            p_b = pa * hab * cfg.d_ab ** -cfg.alpha
            sinr = p_b / s_b
            out_sum[i] = (sinr[None, :] < gaps[:, None]).sum(axis=1)
        return xi_sum, out_sum

    parts = _map_blocks(cfg, sim, fn, stream)
    n = sim.trials
    xi_hat = sum(p[0] for p in parts) / n
    out_hat = sum(p[1] for p in parts) / n
    ok = np.nonzero(xi_hat >= 1 - req.eps)[0]
    pa_res = float(np.max(np.diff(pa_grid))) if pa_grid.size > 1 else 0.0
    r_res = float(np.max(np.diff(r_grid))) if r_grid.size > 1 else 0.0
    if ok.size == 0:
        return BruteForceResult(0.0, 0.0, -1, -1, tuple(xi_hat), (), pa_res, r_res,
                                "covertness infeasible on the P_a grid")
    i = int(ok[-1])
    okr = np.nonzero(out_hat[i] <= req.delta)[0]
    if okr.size == 0:
        return BruteForceResult(float(pa_grid[i]), 0.0, i, -1, tuple(xi_hat), tuple(out_hat[i]),
                                pa_res, r_res, "reliability infeasible on the rate grid")
    j = int(okr[-1])
    return BruteForceResult(float(pa_grid[i]), float(r_grid[j]), i, j, tuple(xi_hat),
                            tuple(out_hat[i]), pa_res, r_res)
