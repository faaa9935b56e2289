import math

import numpy as np
import pytest
from scipy import optimize

from covertgeo.covertness import (
    avg_covert_prob,
    avg_covert_prob_fading,
    avg_covert_prob_nonfading,
    covert_outage,
    detection_window_prob,
    max_window_prob,
    optimal_threshold,
    optimal_threshold_awgn,
    optimal_threshold_general,
    optimal_thresholds,
    solve_pa_star,
    window_prob_general,
)
from covertgeo.interference import Fading, InterferenceLaw, NetworkConfig, levy_scale, levy_tail

QUIET = dict(sigma_zb2=0.0, sigma_zw2=0.0)


def grid_max_window(p_w, b, points=10_000):
    # brute force over gamma = p_w (1 + u), u log-spaced far past both scales
    u = np.logspace(-14, 8, points) * max(b / p_w, 1.0)
    g = p_w * (1 + u)
    w = levy_tail(g - p_w, b) - levy_tail(g, b)
    i = int(np.argmax(w))
    return g[i], w[i], g


def test_window_prob_is_interval_mass():
    b, p_w, g = 1.0, 0.4, 1.5
    assert detection_window_prob(g, p_w, b) == pytest.approx(levy_tail(g - p_w, b) - levy_tail(g, b))
    with pytest.raises(ValueError):
        detection_window_prob(0.3, p_w, b)


@pytest.mark.parametrize("p_w,b", [(1e-6, 1e-7), (1.0, 1.0), (3e-4, 2e-8), (1e-9, 5e-3)])
def test_optimal_threshold_matches_grid_maximiser(p_w, b):
    sol = optimal_threshold(p_w, b)
    g_grid, w_grid, grid = grid_max_window(p_w, b)
    assert sol.window_prob >= w_grid - 1e-12
    i = int(np.searchsorted(grid, g_grid))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    assert lo <= sol.gamma_opt <= hi
    assert 0.0 <= sol.window_prob <= 1.0 and sol.gamma_opt > p_w


def test_optimal_threshold_stationary_by_finite_difference():
    p_w, b = 2e-5, 7e-6
    g = optimal_threshold(p_w, b).gamma_opt
    h = 1e-5 * g
    d = (detection_window_prob(g + h, p_w, b) - detection_window_prob(g - h, p_w, b)) / (2 * h)
    curv = (detection_window_prob(g + h, p_w, b) - 2 * detection_window_prob(g, p_w, b)
            + detection_window_prob(g - h, p_w, b)) / h ** 2
    assert abs(d * g) < 1e-8
    assert curv < 0


@pytest.mark.parametrize("u", [0.1, 3.0, 1e3])
def test_optimal_threshold_scale_equivariance(u):
    p_w, b = 3e-5, 1e-6
    base = optimal_threshold(p_w, b).gamma_opt
    assert optimal_threshold(u * u * p_w, u * u * b).gamma_opt == pytest.approx(u * u * base, rel=1e-10)


def test_awgn_threshold_is_shifted():
    p_w, b, s2 = 3e-5, 1e-6, 2e-6
    assert optimal_threshold_awgn(p_w, b, s2).gamma_opt == pytest.approx(
        optimal_threshold(p_w, b).gamma_opt + s2, rel=1e-14)


def test_vectorised_thresholds_agree_with_scalar():
    b = 2.4e-8
    p_w = np.logspace(-12, -4, 40)
    vec = optimal_thresholds(p_w, b)
    ref = np.array([optimal_threshold(p, b).gamma_opt for p in p_w])
    assert np.allclose(vec, ref, rtol=1e-10, atol=0)
    assert np.allclose(max_window_prob(p_w, b), [optimal_threshold(p, b).window_prob for p in p_w],
                       rtol=1e-9, atol=1e-15)


def test_general_threshold_reduces_to_alpha4():
    cfg = NetworkConfig()
    law = InterferenceLaw.series(cfg)
    p_w = 1e-3 * 5.0 ** -4
    gen = optimal_threshold_general(p_w, law)
    ref = optimal_threshold(p_w, levy_scale(cfg))
    assert gen.window_prob == pytest.approx(ref.window_prob, rel=1e-8)
    assert gen.gamma_opt == pytest.approx(ref.gamma_opt, rel=1e-4)
    assert window_prob_general(ref.gamma_opt, p_w, law) == pytest.approx(ref.window_prob, rel=1e-8)


def test_nonfading_xi_bar_closed_form_and_limits():
    cfg = NetworkConfig(**QUIET)
    p_a = 1e-3
    p_w = p_a * cfg.d_aw ** -4
    b = levy_scale(cfg)
    f = lambda y: -(levy_tail(p_w * math.exp(y), b) - levy_tail(p_w * (1 + math.exp(y)), b))
    r = optimize.minimize_scalar(f, bounds=(-30, 30), method="bounded", options={"xatol": 1e-12})
    assert avg_covert_prob_nonfading(p_a, cfg) == pytest.approx(1 + r.fun, abs=1e-10)
    assert avg_covert_prob(1e-15, cfg) > 1 - 1e-6
    xs = [avg_covert_prob(p, cfg) for p in np.logspace(-6, -1, 12)]
    assert all(b_ < a_ for a_, b_ in zip(xs, xs[1:]))
    assert covert_outage(p_a, cfg) == pytest.approx(1 - avg_covert_prob(p_a, cfg))


def test_fading_xi_bar_against_independent_integration():
    cfg = NetworkConfig(fading=Fading.RAYLEIGH, **QUIET)
    p_a = 1e-3
    b = levy_scale(cfg)
    mean_pw = p_a * cfg.d_aw ** -4

    def best_window(p_w):
        # bounded scalar maximisation, independent of the stationarity solver
        f = lambda y: -(levy_tail(p_w * math.exp(y), b) - levy_tail(p_w * (1 + math.exp(y)), b))
        r = optimize.minimize_scalar(f, bounds=(-40, 30), method="bounded", options={"xatol": 1e-10})
        return -r.fun

    # E over P_w ~ Exp(mean): substitute P_w = mean * e^t and integrate on a fine log grid
    t = np.linspace(-25, 4.5, 6001)
    pw = mean_pw * np.exp(t)
    dens = np.exp(t - np.exp(t))
    w = np.array([best_window(p) for p in pw])
    want = 1.0 - np.trapezoid(w * dens, t)
    assert avg_covert_prob_fading(p_a, cfg) == pytest.approx(want, abs=2e-6)


def test_xi_bar_ignores_noise_at_willie():
    for fading in Fading:
        cfg = NetworkConfig(fading=fading, **QUIET)
        ref = avg_covert_prob(1e-3, cfg)
        for s2 in (1e-8, 1e-5):
            assert avg_covert_prob(1e-3, cfg.replace(sigma_zw2=s2)) == ref


@pytest.mark.parametrize("fading", list(Fading))
def test_pa_star_hits_covert_target(fading):
    cfg = NetworkConfig(fading=fading, **QUIET)
    for eps in (0.05, 0.1, 0.3):
        pa = solve_pa_star(eps, cfg)
        assert avg_covert_prob(pa, cfg) == pytest.approx(1 - eps, abs=1e-8)
        assert avg_covert_prob(pa * 1.001, cfg) < 1 - eps


@pytest.mark.parametrize("fading", list(Fading))
def test_normalised_and_direct_pa_star_agree(fading):
    cfg = NetworkConfig(fading=fading, lambda_i=4e-3, p_i=0.3, **QUIET)
    assert solve_pa_star(0.1, cfg, normalize=True) == pytest.approx(solve_pa_star(0.1, cfg), rel=1e-6)


def test_pa_star_tighter_eps_is_smaller():
    cfg = NetworkConfig()
    assert solve_pa_star(0.05, cfg) < solve_pa_star(0.1, cfg) < solve_pa_star(0.2, cfg)


def test_pa_star_rejects_bad_eps():
    with pytest.raises(ValueError):
        solve_pa_star(1.0, NetworkConfig())


def test_general_alpha_xi_bar_is_a_probability_and_monotone():
    cfg = NetworkConfig(alpha=3.5, **QUIET)
    xs = [avg_covert_prob(p, cfg) for p in (1e-5, 1e-4, 1e-3)]
    assert all(0 <= x <= 1 for x in xs)
    assert xs[0] > xs[1] > xs[2]
