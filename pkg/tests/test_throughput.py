import numpy as np
import pytest

from covertgeo.interference import Fading, NetworkConfig
from covertgeo.reliability import LinkBudget, conn_outage
from covertgeo.throughput import (
    CovertRequirements,
    awgn_monotonicity_report,
    covert_throughput,
    invariance_report,
)

QUIET = dict(sigma_zb2=0.0, sigma_zw2=0.0)


def test_requirements_open_interval():
    for bad in (dict(eps=0.0), dict(eps=1.0), dict(delta=1.5), dict(delta=-0.1)):
        with pytest.raises(ValueError):
            CovertRequirements(**bad)


@pytest.mark.parametrize("fading", list(Fading))
def test_result_meets_both_constraints(fading):
    req = CovertRequirements(0.1, 0.1)
    cfg = NetworkConfig(fading=fading)
    res = covert_throughput(req, cfg)
    assert res.xi_at_pa == pytest.approx(0.9, abs=1e-8)
    assert res.outage_at_eta == pytest.approx(0.1, abs=1e-8)
    assert res.eta > 0 and res.normalized
    assert conn_outage(LinkBudget(res.pa_star, res.eta * 1.01, cfg.sigma_zb2), cfg) > 0.1


@pytest.mark.parametrize("fading", list(Fading))
def test_eta_nondecreasing_in_eps_and_delta(fading):
    cfg = NetworkConfig(fading=fading)
    vals = [0.02, 0.05, 0.1, 0.2, 0.4]
    eta = np.array([[covert_throughput(CovertRequirements(e, d), cfg).eta for d in vals] for e in vals])
    assert np.all(np.diff(eta, axis=0) >= 0)
    assert np.all(np.diff(eta, axis=1) >= 0)


@pytest.mark.parametrize("fading", list(Fading))
def test_normalised_and_direct_paths_agree(fading):
    req = CovertRequirements()
    cfg = NetworkConfig(fading=fading, lambda_i=2e-3, p_i=0.05, **QUIET)
    a = covert_throughput(req, cfg, normalize=True)
    b = covert_throughput(req, cfg, normalize=False)
    assert a.pa_star == pytest.approx(b.pa_star, rel=1e-6)
    assert a.eta == pytest.approx(b.eta, rel=1e-6)


@pytest.mark.parametrize("fading", list(Fading))
def test_awgn_strictly_reduces_eta(fading):
    req = CovertRequirements()
    quiet = NetworkConfig(fading=fading, **QUIET)
    assert covert_throughput(req, quiet.replace(sigma_zb2=1e-8)).eta < covert_throughput(req, quiet).eta


@pytest.mark.parametrize("fading", list(Fading))
def test_noise_to_zero_recovers_interference_limited_eta(fading):
    req = CovertRequirements()
    quiet = NetworkConfig(fading=fading, **QUIET)
    ref = covert_throughput(req, quiet).eta
    etas = [covert_throughput(req, quiet.replace(sigma_zb2=s)).eta for s in (1e-8, 1e-12)]
    assert etas[0] < etas[1] < ref
    assert etas[1] == pytest.approx(ref, rel=1e-6)


def test_invariance_report_nonfading():
    rep = invariance_report(CovertRequirements(), NetworkConfig(**QUIET), [0.25, 1.0, 4.0, 100.0])
    assert rep.passed and rep.exponent == 2.0
    u, pa, eta, eta_dev, pa_dev = rep.rows[1]
    assert u == 1.0 and eta_dev == 0.0 and pa_dev == 0.0
    assert rep.rows[2][1] / pa == pytest.approx(16.0, rel=1e-3)


def test_invariance_report_rayleigh_power():
    rep = invariance_report(CovertRequirements(), NetworkConfig(fading=Fading.RAYLEIGH, **QUIET),
                            [0.1, 10.0], parameter="p_i")
    assert rep.passed and rep.exponent == 1.0
    assert rep.max_eta_dev < 1e-3


def test_invariance_report_needs_interference_limited():
    with pytest.raises(ValueError):
        invariance_report(CovertRequirements(), NetworkConfig(), [1.0, 2.0])


def test_monotonicity_report():
    rep = awgn_monotonicity_report(CovertRequirements(), NetworkConfig(), [1e-5, 1e-4, 1e-3, 1e-2])
    assert rep.strictly_increasing
    assert rep.plateaus()
    assert [r[0] for r in rep.rows] == [1e-5, 1e-4, 1e-3, 1e-2]


def test_monotonicity_report_validation():
    with pytest.raises(ValueError):
        awgn_monotonicity_report(CovertRequirements(), NetworkConfig(**QUIET), [1e-4, 1e-3])
    with pytest.raises(ValueError):
        awgn_monotonicity_report(CovertRequirements(), NetworkConfig(), [1e-3, 1e-4])
