import json

import pytest

from covertgeo.config import ConfigError, bundle_to_dict, dbm_to_w, load_config, resolve_config, w_to_dbm
from covertgeo.interference import Fading


def write(tmp_path, obj):
    p = tmp_path / "cfg.json"
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return p


def test_dbm_conversion():
    assert dbm_to_w(0) == pytest.approx(1e-3)
    assert dbm_to_w(20) == pytest.approx(0.1)
    assert dbm_to_w(-50) == pytest.approx(1e-8)
    assert w_to_dbm(dbm_to_w(13.0)) == pytest.approx(13.0)


def test_empty_config_gives_defaults(tmp_path):
    for bundle in (load_config(write(tmp_path, "")), load_config(write(tmp_path, {})), load_config(None)):
        n, r, s = bundle.network, bundle.req, bundle.sim
        assert (n.lambda_i, n.alpha, n.d_ab, n.d_aw, n.fading) == (1e-3, 4.0, 2.0, 5.0, Fading.NONFADING)
        assert n.p_i == pytest.approx(0.1)
        assert n.sigma_zb2 == pytest.approx(1e-8) and n.sigma_zw2 == pytest.approx(1e-8)
        assert (r.eps, r.delta) == (0.1, 0.1)
        assert bundle.p_a == pytest.approx(1e-3)
        assert s.trials == 100_000 and s.seed == 0


def test_units_and_overrides():
    b = resolve_config({"p_i_dbm": 0, "sigma_zb_w": 0, "sigma_zw_dbm": -60, "fading": "rayleigh",
                        "p_a_w": 2e-4, "rate": 0.3, "trials": 10, "backend": "ppp"})
    assert b.network.p_i == pytest.approx(0.001)
    assert b.network.sigma_zb2 == 0.0 and b.network.sigma_zw2 == pytest.approx(1e-9)
    assert b.network.fading is Fading.RAYLEIGH
    assert (b.p_a, b.rate, b.sim.trials, b.sim.backend) == (2e-4, 0.3, 10, "ppp")
    assert resolve_config({"sigma_z_dbm": float("-inf")}).network.interference_limited


@pytest.mark.parametrize("raw,field", [
    ({"eps": 1.5}, "eps"),
    ({"delta": 0}, "delta"),
    ({"p_i_dbm": 10, "p_i_w": 0.01}, "p_i"),
    ({"lambda_i": -1}, "lambda_i"),
    ({"alpha": 2}, "alpha"),
    ({"fading": "rician"}, "fading"),
    ({"trials": 0}, "trials"),
    ({"trials": 2.5}, "trials"),
    ({"window_radius": 3}, "window_radius"),
    ({"backend": "levy", "alpha": 3.5}, "backend"),
    ({"d_ab": "far"}, "d_ab"),
    ({"p_a_w": 0}, "p_a"),
    ({"speed": 3}, "speed"),
])
def test_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError) as info:
        resolve_config(raw)
    assert info.value.field == field
    assert field in str(info.value)


def test_malformed_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "{not json"))
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, "[1, 2]"))
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")


def test_resolved_dict_round_trips():
    b = resolve_config({"lambda_i": 2e-3, "fading": "rayleigh"})
    d = bundle_to_dict(b)
    raw = {k: v for k, v in d.items() if v is not None and k not in ("sigma_zb_w", "sigma_zw_w")}
    raw.update(sigma_zb_w=d["sigma_zb_w"], sigma_zw_w=d["sigma_zw_w"])
    assert resolve_config(raw) == b
