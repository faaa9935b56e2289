import numpy as np
import pytest
from scipy import stats

from covertgeo.detection import (
    DegenerateNullError,
    DetectorInput,
    p_fa,
    p_md,
    xi_asymptotic,
    xi_finite,
)


def test_error_probabilities_against_gamma_laws():
    inp = DetectorInput(gamma=1.3, sigma_vw2=1.0, p_w=0.6, sigma_zw2=0.05)
    for n in (1, 7, 100):
        # mean of n squared complex samples: Gamma(shape n, scale power/n)
        h0 = stats.gamma(n, scale=1.05 / n)
        h1 = stats.gamma(n, scale=1.65 / n)
        assert p_fa(n, inp) == pytest.approx(h0.sf(1.3), rel=1e-10)
        assert p_md(n, inp) == pytest.approx(h1.cdf(1.3), rel=1e-10)
        assert xi_finite(n, inp) == pytest.approx(h0.sf(1.3) + h1.cdf(1.3), rel=1e-10)


def test_finite_n_approaches_asymptotic():
    inside = DetectorInput(gamma=1.3, sigma_vw2=1.0, p_w=0.6)
    outside = DetectorInput(gamma=1.8, sigma_vw2=1.0, p_w=0.6)
    xin = [xi_finite(n, inside) for n in (10 ** 2, 10 ** 4, 10 ** 6)]
    xout = [xi_finite(n, outside) for n in (10 ** 2, 10 ** 4, 10 ** 6)]
    assert xin[0] > xin[1] > xin[2] and xin[2] < 1e-12
    assert xout[0] < xout[1] <= xout[2] and abs(xout[2] - 1.0) < 1e-12
    assert xi_asymptotic(inside) == 0 and xi_asymptotic(outside) == 1


def test_xi_asymptotic_window_and_vectorisation():
    s = np.array([0.5, 1.0, 1.2, 2.0])
    got = xi_asymptotic(1.2, s, 0.2, 0.0)
    assert got.tolist() == [1, 0, 0, 1]
    # closed interval at both ends
    assert xi_asymptotic(1.0, 1.0, 0.5) == 0
    assert xi_asymptotic(1.5, 1.0, 0.5) == 0
    # noise widens nothing, only shifts
    assert xi_asymptotic(1.3, 1.0, 0.5, 0.3) == 0
    assert xi_asymptotic(1.29, 1.0, 0.5, 0.3) == 1


def test_zero_null_power_is_degenerate():
    inp = DetectorInput(gamma=0.1, sigma_vw2=0.0, p_w=1.0)
    with pytest.raises(DegenerateNullError):
        p_fa(10, inp)


def test_detector_input_validation():
    with pytest.raises(ValueError):
        DetectorInput(gamma=-1.0, sigma_vw2=1.0, p_w=1.0)
    with pytest.raises(ValueError):
        DetectorInput(gamma=1.0, sigma_vw2=-1.0, p_w=1.0)
