"""Numerical checks of the main analytical claims, runnable on any configuration.

Each ``check_*`` function returns a :class:`VerifyReport` with one
:class:`Assertion` per property.  A failing assertion is a finding about the
configuration or the solvers and is reported, not raised.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .covertness import (
    avg_covert_prob,
    optimal_threshold,
    optimal_threshold_awgn,
)
from .interference import (
    Fading,
    InterferenceLaw,
    NetworkConfig,
    levy_interval,
    levy_pdf,
    levy_scale,
    levy_tail,
    series_pdf,
    series_tail,
)
from .numerics import erf, semiinf_quadrature
from .reliability import LinkBudget, conn_outage, rate_for_outage
from .throughput import (
    INVARIANCE_RTOL,
    CovertRequirements,
    awgn_monotonicity_report,
    invariance_report,
)

__all__ = [
    "Assertion",
    "VerifyReport",
    "TARGETS",
    "run_check",
    "check_invariance",
    "check_awgn_monotonicity",
    "check_prop3",
    "check_series_vs_levy",
    "check_rate_roundtrip",
]

THM_SCALES = (0.25, 1.0, 4.0, 100.0)
COR_LAMBDA_GRID = (1e-5, 3e-5, 1e-4, 3e-4, 1e-3, 3e-3)
COR_PI_GRID = (1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0)


@dataclass
class Assertion:
    name: str
    passed: bool
    deviation: float
    tolerance: float
    detail: str = ""


@dataclass
class VerifyReport:
    target: str
    assertions: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    def add(self, name: str, deviation: float, tolerance: float, detail: str = "",
            passed: bool | None = None) -> Assertion:
        ok = deviation <= tolerance if passed is None else passed
        a = Assertion(name, bool(ok), float(deviation), float(tolerance), detail)
        self.assertions.append(a)
        return a

    def to_dict(self) -> dict:
        return {"target": self.target, "passed": self.passed,
                "assertions": [asdict(a) for a in self.assertions]}


def _quiet(cfg: NetworkConfig) -> NetworkConfig:
    return cfg.replace(sigma_zb2=0.0, sigma_zw2=0.0)


def check_invariance(req: CovertRequirements, cfg: NetworkConfig, fading: Fading,
                     scales=THM_SCALES) -> VerifyReport:
    """Interference-limited ``eta`` is unchanged when ``lambda_I`` or ``P_I`` is scaled,
    and ``P_a*`` scales as ``u^(alpha/2)`` / ``u``.  Receiver noise is removed."""
    base = _quiet(cfg).replace(fading=fading)
    rep = VerifyReport("thm1" if fading is Fading.NONFADING else "thm2")
    for parameter in ("lambda_i", "p_i"):
        inv = invariance_report(req, base, scales, parameter)
        rows = "; ".join(f"u={u:g} pa={pa:.6e} eta={eta:.9f}" for u, pa, eta, _, _ in inv.rows)
        rep.add(f"eta constant under {parameter} scaling", inv.max_eta_dev, inv.rtol, rows)
        rep.add(f"pa_star ~ u^{inv.exponent:g} under {parameter} scaling", inv.max_pa_dev, inv.rtol)
    return rep


def check_awgn_monotonicity(req: CovertRequirements, cfg: NetworkConfig, fading: Fading,
                            lambda_grid=COR_LAMBDA_GRID, p_i_grid=COR_PI_GRID) -> VerifyReport:
    """With noise at Bob, ``eta`` rises strictly with interferer density and power and
    flattens at the top of each grid."""
    base = cfg.replace(fading=fading)
    if not base.sigma_zb2 > 0:
        base = base.replace(sigma_zb2=1e-8)
    rep = VerifyReport("cor1" if fading is Fading.NONFADING else "cor2")
    for parameter, grid in (("lambda_i", lambda_grid), ("p_i", p_i_grid)):
        mono = awgn_monotonicity_report(req, base, grid, parameter)
        etas = [row[2] for row in mono.rows]
        worst = min((b - a) / abs(a) for a, b in zip(etas, etas[1:]))
        rows = "; ".join(f"{v:g}:{eta:.9f}" for v, _, eta in mono.rows)
        rep.add(f"eta strictly increasing in {parameter}", -worst, 0.0, rows,
                passed=mono.strictly_increasing)
        rep.add(f"eta plateau in {parameter}", mono.plateau_rel_delta, INVARIANCE_RTOL,
                passed=mono.plateaus())
    return rep


def check_prop3(cfg: NetworkConfig, p_a: float, noise_levels=(1e-8, 1e-5)) -> VerifyReport:
    """Noise at Willie leaves ``xi_bar`` unchanged: the optimal threshold shifts by the
    noise power and the detection window keeps its mass."""
    rep = VerifyReport("prop3")
    for fading in Fading:
        quiet = cfg.replace(sigma_zw2=0.0, fading=fading)
        ref = avg_covert_prob(p_a, quiet)
        for s2 in noise_levels:
            got = avg_covert_prob(p_a, quiet.replace(sigma_zw2=s2))
            rep.add(f"xi_bar unchanged, {fading.value}, sigma_zw2={s2:g}", abs(got - ref), 0.0)
    if cfg.is_alpha4:
        b = levy_scale(cfg)
        p_w = p_a * cfg.d_aw ** -4
        sol = optimal_threshold(p_w, b)
        for s2 in noise_levels:
            noisy = optimal_threshold_awgn(p_w, b, s2)
            # window with noise: gamma - s2 - p_w < sigma_v^2 <= gamma - s2
            g = noisy.gamma_opt - s2
            w_noisy = levy_interval(g - p_w, g, b)
            rep.add(f"window mass after shift, sigma_zw2={s2:g}",
                    abs(w_noisy - sol.window_prob), 1e-12)
            rep.add(f"threshold shift equals noise, sigma_zw2={s2:g}",
                    abs(noisy.gamma_opt - sol.gamma_opt - s2) / s2, 1e-12)
    return rep


SERIES_SETS = (
    {"lambda_i": 1e-3, "p_i": 0.1},
    {"lambda_i": 1e-2, "p_i": 1.0},
    {"lambda_i": 1e-4, "p_i": 0.01},
)


def check_series_vs_levy(cfg: NetworkConfig, sets=SERIES_SETS, points: int = 50,
                         rtol: float = 1e-6) -> VerifyReport:
    """Power series against the closed-form Levy density and tail at alpha = 4."""
    rep = VerifyReport("series-vs-levy")
    for fading in Fading:
        for params in sets:
            c = cfg.replace(alpha=4.0, fading=fading, **params)
            b = levy_scale(c)
            law = InterferenceLaw.series(c)
            xs = b * np.logspace(-1, 4, points)
            pdf_dev = max(abs(series_pdf(x, law) / levy_pdf(x, b) - 1.0) for x in xs)
            tail_dev = max(abs(series_tail(x, law) / levy_tail(x, b) - 1.0) for x in xs)
            tag = f"{fading.value}, lambda_i={c.lambda_i:g}, p_i={c.p_i:g}"
            rep.add(f"density, {tag}", pdf_dev, rtol)
            rep.add(f"tail, {tag}", tail_dev, rtol)
    return rep


def check_rate_roundtrip(cfg: NetworkConfig, p_a: float,
                         deltas=tuple(np.linspace(0.01, 0.9, 10))) -> VerifyReport:
    """Rate inversion followed by the outage formula returns the outage budget."""
    rep = VerifyReport("rate-roundtrip")
    for fading in Fading:
        c = cfg.replace(fading=fading, sigma_zb2=0.0)
        dev = max(abs(conn_outage(LinkBudget(p_a, rate_for_outage(p_a, d, c), 0.0), c) - d)
                  for d in deltas)
        rep.add(f"noiseless round trip, {fading.value}", dev, 1e-9)
        if cfg.sigma_zb2 > 0:
            cn = cfg.replace(fading=fading)
            dev = 0.0
            for d in deltas:
                try:
                    r = rate_for_outage(p_a, d, cn)
                except ValueError:
                    continue
                dev = max(dev, abs(conn_outage(LinkBudget(p_a, r, cn.sigma_zb2), cn) - d))
            rep.add(f"noisy round trip, {fading.value}", dev, 1e-9)
    # exponential-erf identity: int erf(sqrt(c/x)) mu e^{-mu x} dx = 1 - exp(-2 sqrt(c mu))
    worst = 0.0
    for c_, mu in ((1.0, 1.0), (1e-6, 3e2), (4.0, 0.01)):
        q = semiinf_quadrature(lambda x: float(erf(math.sqrt(c_ / x))) if x > 0 else 1.0, mu)
        worst = max(worst, abs(q - (1.0 - math.exp(-2.0 * math.sqrt(c_ * mu)))))
    rep.add("exponential-erf identity by quadrature", worst, 1e-6)
    return rep


TARGETS = ("thm1", "thm2", "cor1", "cor2", "prop3", "series-vs-levy", "rate-roundtrip")


def run_check(which: str, cfg: NetworkConfig, req: CovertRequirements, p_a: float) -> VerifyReport:
    if which == "thm1":
        return check_invariance(req, cfg, Fading.NONFADING)
    if which == "thm2":
        return check_invariance(req, cfg, Fading.RAYLEIGH)
    if which == "cor1":
        return check_awgn_monotonicity(req, cfg, Fading.NONFADING)
    if which == "cor2":
        return check_awgn_monotonicity(req, cfg, Fading.RAYLEIGH)
    if which == "prop3":
        return check_prop3(cfg, p_a)
    if which == "series-vs-levy":
        return check_series_vs_levy(cfg)
    if which == "rate-roundtrip":
        return check_rate_roundtrip(cfg, p_a)
    raise ValueError(f"unknown verify target {which!r}; expected one of {', '.join(TARGETS)}")
