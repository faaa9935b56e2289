"""Flat JSON configuration files and unit conversion at the CLI boundary.

Powers carry a unit suffix, ``_dbm`` or ``_w``, and each power may be given
in only one unit.  Everything inside the library is linear watts.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, NamedTuple

from .interference import Fading, NetworkConfig
from .mcsim import SimConfig
from .throughput import CovertRequirements

__all__ = [
    "ConfigError",
    "ConfigBundle",
    "DEFAULTS",
    "POWER_KEYS",
    "dbm_to_w",
    "w_to_dbm",
    "load_config",
    "read_raw",
    "resolve_config",
    "bundle_to_dict",
]


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


def dbm_to_w(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def w_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0 if w > 0 else -math.inf


# unsuffixed name -> default in watts; sigma_z sets both receivers at once
POWER_KEYS = {
    "p_i": dbm_to_w(20.0),
    "p_a": dbm_to_w(0.0),
    "sigma_z": dbm_to_w(-50.0),
    "sigma_zb": None,
    "sigma_zw": None,
}

DEFAULTS: dict[str, Any] = {
    "lambda_i": 1e-3,
    "alpha": 4.0,
    "d_ab": 2.0,
    "d_aw": 5.0,
    "fading": "nonfading",
    "eps": 0.1,
    "delta": 0.1,
    "rate": None,
    "trials": 100_000,
    "seed": 0,
    "window_radius": None,
    "slot_samples_n": None,
    "backend": "auto",
    "block_size": 4096,
    "threads": None,
}


class ConfigBundle(NamedTuple):
    network: NetworkConfig
    req: CovertRequirements
    sim: SimConfig
    p_a: float
    rate: float | None


def _number(raw: dict, key: str, kind=float, allow_none=False):
    v = raw.get(key, DEFAULTS.get(key))
    if v is None and allow_none:
        return None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(key, f"expected a number, got {v!r}")
    if kind is int:
        if int(v) != v:
            raise ConfigError(key, f"expected an integer, got {v!r}")
        return int(v)
    if not math.isfinite(v):
        raise ConfigError(key, f"must be finite, got {v!r}")
    return float(v)


def _power(raw: dict, name: str, default: float | None) -> float | None:
    dbm, w = raw.get(name + "_dbm"), raw.get(name + "_w")
    if dbm is not None and w is not None:
        raise ConfigError(name, f"give exactly one of {name}_dbm and {name}_w")
    if dbm is not None:
        if isinstance(dbm, bool) or not isinstance(dbm, (int, float)) or math.isnan(dbm):
            raise ConfigError(name + "_dbm", f"expected a number, got {dbm!r}")
        return dbm_to_w(float(dbm))  # -inf dBm is a zero power
    if w is not None:
        if isinstance(w, bool) or not isinstance(w, (int, float)) or not math.isfinite(w):
            raise ConfigError(name + "_w", f"expected a finite number, got {w!r}")
        if w < 0:
            raise ConfigError(name + "_w", f"power must be >= 0, got {w!r}")
        return float(w)
    return default


def _known_keys() -> set[str]:
    keys = set(DEFAULTS)
    for name in POWER_KEYS:
        keys.update((name + "_dbm", name + "_w"))
    return keys


def resolve_config(raw: dict) -> ConfigBundle:
    """Validate a flat key/value mapping and fill in the defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    unknown = sorted(set(raw) - _known_keys())
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")

    sigma = _power(raw, "sigma_z", POWER_KEYS["sigma_z"])
    sigma_zb = _power(raw, "sigma_zb", sigma)
    sigma_zw = _power(raw, "sigma_zw", sigma)
    p_i = _power(raw, "p_i", POWER_KEYS["p_i"])
    p_a = _power(raw, "p_a", POWER_KEYS["p_a"])
    if not p_i > 0:
        raise ConfigError("p_i", "interferer power must be > 0")
    if not p_a > 0:
        raise ConfigError("p_a", "Alice's power must be > 0")

    fading = raw.get("fading", DEFAULTS["fading"])
    try:
        fading = Fading(fading)
    except ValueError:
        raise ConfigError("fading", f"expected 'nonfading' or 'rayleigh', got {fading!r}") from None

    def build(field, ctor, **kw):
        try:
            return ctor(**kw)
        except ValueError as exc:
            raise ConfigError(field, str(exc)) from None

    net_kw = dict(lambda_i=_number(raw, "lambda_i"), p_i=p_i, alpha=_number(raw, "alpha"),
                  d_ab=_number(raw, "d_ab"), d_aw=_number(raw, "d_aw"),
                  sigma_zb2=sigma_zb, sigma_zw2=sigma_zw, fading=fading)
    for key in ("lambda_i", "d_ab", "d_aw"):
        if not net_kw[key] > 0:
            raise ConfigError(key, f"must be > 0, got {net_kw[key]!r}")
    if not net_kw["alpha"] > 2:
        raise ConfigError("alpha", f"path-loss exponent must exceed 2, got {net_kw['alpha']!r}")
    network = build("network", NetworkConfig, **net_kw)

    eps, delta = _number(raw, "eps"), _number(raw, "delta")
    for key, v in (("eps", eps), ("delta", delta)):
        if not 0 < v < 1:
            raise ConfigError(key, f"must lie in the open interval (0, 1), got {v!r}")
    req = CovertRequirements(eps, delta)

    trials = _number(raw, "trials", int)
    if trials < 1:
        raise ConfigError("trials", "must be >= 1")
    radius = _number(raw, "window_radius", allow_none=True)
    if radius is not None and radius <= max(network.d_ab, network.d_aw):
        raise ConfigError("window_radius", "must exceed both receiver distances")
    n_samp = _number(raw, "slot_samples_n", int, allow_none=True)
    if n_samp is not None and n_samp < 1:
        raise ConfigError("slot_samples_n", "must be >= 1")
    backend = raw.get("backend", DEFAULTS["backend"])
    if backend not in ("auto", "ppp", "levy"):
        raise ConfigError("backend", f"expected auto, ppp or levy, got {backend!r}")
    if backend == "levy" and network.alpha != 4:
        raise ConfigError("backend", "the levy backend needs alpha = 4")
    block = _number(raw, "block_size", int)
    if block < 1:
        raise ConfigError("block_size", "must be >= 1")
    threads = _number(raw, "threads", int, allow_none=True)
    if threads is not None and threads < 1:
        raise ConfigError("threads", "must be >= 1")
    seed = _number(raw, "seed", int)
    if seed < 0:
        raise ConfigError("seed", "must be >= 0")
    sim = SimConfig(trials=trials, window_radius=radius, seed=seed, slot_samples_n=n_samp,
                    backend=backend, threads=threads, block_size=block)

    rate = _number(raw, "rate", allow_none=True)
    if rate is not None and not rate > 0:
        raise ConfigError("rate", f"must be > 0, got {rate!r}")
    return ConfigBundle(network, req, sim, p_a, rate)


def read_raw(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path} ({exc.strerror})") from None
    if not text.strip():
        return {}
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"malformed JSON ({exc})") from None
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "configuration must be a JSON object")
    return raw


def load_config(path: str | Path | None) -> ConfigBundle:
    """Read a JSON config; ``None`` or an empty file gives the default set."""
    return resolve_config(read_raw(path))


def bundle_to_dict(bundle: ConfigBundle) -> dict:
    """Fully resolved configuration in watts, for provenance headers."""
    n, r, s = bundle.network, bundle.req, bundle.sim
    return {
        "lambda_i": n.lambda_i, "p_i_w": n.p_i, "alpha": n.alpha, "d_ab": n.d_ab, "d_aw": n.d_aw,
        "sigma_zb_w": n.sigma_zb2, "sigma_zw_w": n.sigma_zw2, "fading": n.fading.value,
        "eps": r.eps, "delta": r.delta, "p_a_w": bundle.p_a, "rate": bundle.rate,
        "trials": s.trials, "seed": s.seed, "window_radius": s.window_radius,
        "slot_samples_n": s.slot_samples_n, "backend": s.backend, "block_size": s.block_size,
    }
