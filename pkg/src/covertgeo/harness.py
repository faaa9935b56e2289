"""Command execution, parameter sweeps, figure tables and CSV/JSON output.

Every output starts with ``#`` lines echoing the fully resolved configuration,
then a CSV header row.  Numbers are written in scientific notation with 12
significant digits so repeated runs diff cleanly.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .config import ConfigBundle, ConfigError, DEFAULTS, POWER_KEYS, bundle_to_dict, resolve_config
from .covertness import avg_covert_prob, solve_pa_star
from .interference import Fading, UnsupportedRegimeError
from .mcsim import estimate_rate_quantile, estimate_slot_metrics, estimate_xi_bar
from .numerics import NumericalError
from .reliability import InfeasibleRateError, LinkBudget, conn_outage
from .throughput import covert_throughput
from .verify import TARGETS, run_check

log = logging.getLogger(__name__)

__all__ = [
    "COMMANDS",
    "EXIT_OK",
    "EXIT_USAGE",
    "EXIT_NUMERICAL",
    "EXIT_VERIFY",
    "ExperimentSpec",
    "Table",
    "FIGURES",
    "parse_sweep",
    "run_experiment",
    "run_figure",
    "run_verify",
    "format_value",
]

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("eval", "covert-prob", "outage", "throughput", "simulate", "figure", "verify")

# failures that become an error column instead of aborting a sweep
ROW_ERRORS = (NumericalError, UnsupportedRegimeError, InfeasibleRateError, ValueError)


def _sweepable() -> set[str]:
    keys = {k for k in DEFAULTS if k not in ("trials", "seed", "block_size", "threads", "backend",
                                             "window_radius", "slot_samples_n")}
    for name in POWER_KEYS:
        keys.update((name + "_dbm", name + "_w"))
    return keys


def parse_sweep(text: str) -> tuple[str, tuple]:
    """``"key=v1,v2,..."`` -> ``(key, values)``; values are numbers except for ``fading``."""
    key, sep, rest = text.partition("=")
    key = key.strip()
    if not sep or not rest.strip():
        raise ConfigError("sweep", f"expected key=v1,v2,... got {text!r}")
    if key not in _sweepable():
        raise ConfigError("sweep", f"{key!r} is not a sweepable network or requirement field")
    items = [v.strip() for v in rest.split(",") if v.strip()]
    if key == "fading":
        return key, tuple(items)
    try:
        return key, tuple(float(v) for v in items)
    except ValueError:
        raise ConfigError("sweep", f"non-numeric value in {text!r}") from None


def _with(raw: dict, key: str, value) -> dict:
    """Copy of ``raw`` with ``key`` set, dropping the other unit of the same power."""
    out = dict(raw)
    for suffix, other in (("_dbm", "_w"), ("_w", "_dbm")):
        if key.endswith(suffix) and key[: -len(suffix)] in POWER_KEYS:
            out.pop(key[: -len(suffix)] + other, None)
    if key == "sigma_z_dbm" or key == "sigma_z_w":
        for k in ("sigma_zb_dbm", "sigma_zb_w", "sigma_zw_dbm", "sigma_zw_w"):
            out.pop(k, None)
    out[key] = value
    return out


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.11e}"
    return str(v)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    header: list = field(default_factory=list)

    @property
    def errors(self) -> int:
        return sum(1 for r in self.rows if r.get("error"))

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.header:
            buf.write(f"# {line}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([format_value(r.get(c)) for c in self.columns])
        return buf.getvalue()


@dataclass(frozen=True)
class ExperimentSpec:
    command: str
    config: dict = field(default_factory=dict)
    sweep: tuple | None = None
    fig: int | None = None
    target: str | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ConfigError("command", f"unknown command {self.command!r}")
        if self.sweep is not None and self.sweep[0] not in _sweepable():
            raise ConfigError("sweep", f"{self.sweep[0]!r} is not sweepable")


def _config_header(bundle: ConfigBundle) -> str:
    return "config " + json.dumps(bundle_to_dict(bundle), sort_keys=True)


def _row(fn: Callable[[ConfigBundle], dict], bundle: ConfigBundle) -> dict:
    try:
        return fn(bundle)
    except ROW_ERRORS as exc:
        msg = f"{type(exc).__name__}: {exc}"
        log.warning("row failed: %s", msg)
        return {"error": msg}


# -- single-point commands -------------------------------------------------------------


def _need_rate(bundle: ConfigBundle) -> float:
    if bundle.rate is None:
        raise ConfigError("rate", "this command needs a transmission rate (config key 'rate')")
    return bundle.rate


def _eval(bundle: ConfigBundle) -> dict:
    net, req = bundle.network, bundle.req
    res = covert_throughput(req, net)
    out = {"xi_bar": avg_covert_prob(bundle.p_a, net), "pa_star": res.pa_star, "eta": res.eta,
           "error": res.diagnostic or None}
    if bundle.rate is not None:
        out["conn_outage"] = conn_outage(LinkBudget(bundle.p_a, bundle.rate, net.sigma_zb2), net)
    return out


def _covert_prob(bundle: ConfigBundle) -> dict:
    xi = avg_covert_prob(bundle.p_a, bundle.network)
    return {"xi_bar": xi, "covert_outage": 1.0 - xi}


def _outage(bundle: ConfigBundle) -> dict:
    net = bundle.network
    return {"conn_outage": conn_outage(LinkBudget(bundle.p_a, bundle.rate, net.sigma_zb2), net)}


def _throughput(bundle: ConfigBundle) -> dict:
    res = covert_throughput(bundle.req, bundle.network)
    return {"pa_star": res.pa_star, "eta": res.eta, "xi_at_pa": res.xi_at_pa,
            "outage_at_eta": res.outage_at_eta, "error": res.diagnostic or None}


def _simulate(bundle: ConfigBundle) -> dict:
    net, sim = bundle.network, bundle.sim
    if bundle.rate is None:
        xi = estimate_xi_bar(bundle.p_a, net, sim)
    else:
        # one pass over the simulated slots feeds both estimates
        xi, (oc,) = estimate_slot_metrics(bundle.p_a, bundle.rate, net, sim)
    out = {"xi_bar": avg_covert_prob(bundle.p_a, net), "xi_bar_mc": xi.mean,
           "xi_bar_half_width": xi.half_width_95}
    if bundle.rate is not None:
        lb = LinkBudget(bundle.p_a, bundle.rate, net.sigma_zb2)
        out.update(conn_outage=conn_outage(lb, net), conn_outage_mc=oc.mean,
                   conn_outage_half_width=oc.half_width_95)
    return out


_COMMANDS = {
    "eval": (_eval, ["xi_bar", "pa_star", "eta", "conn_outage"]),
    "covert-prob": (_covert_prob, ["xi_bar", "covert_outage"]),
    "outage": (_outage, ["conn_outage"]),
    "throughput": (_throughput, ["pa_star", "eta", "xi_at_pa", "outage_at_eta"]),
    "simulate": (_simulate, ["xi_bar", "xi_bar_mc", "xi_bar_half_width", "conn_outage",
                             "conn_outage_mc", "conn_outage_half_width"]),
}


def run_experiment(spec: ExperimentSpec) -> Table:
    """Evaluate a point command once, or once per sweep value.

    Bad sweep values are usage errors and are rejected before any work;
    numerical failures land in the ``error`` column of their row.
    """
    if spec.command in ("figure", "verify"):
        raise ValueError("use run_figure / run_verify for this command")
    fn, cols = _COMMANDS[spec.command]
    base = resolve_config(spec.config)
    points = [(None, base)]
    if spec.sweep is not None:
        key, values = spec.sweep
        points = [(v, resolve_config(_with(spec.config, key, v))) for v in values]
    if spec.command == "outage":
        for _, b in points:
            _need_rate(b)
    columns = ([spec.sweep[0]] if spec.sweep else []) + cols + ["error"]
    header = [_config_header(base)]
    if spec.sweep:
        header.append(f"sweep {spec.sweep[0]} = " + ",".join(format_value(v) for v in spec.sweep[1]))
    table = Table(columns, header=header)
    for v, b in points:
        row = _row(fn, b)
        if spec.sweep:
            row[spec.sweep[0]] = v
        table.rows.append(row)
    return table


# -- figures --------------------------------------------------------------------------


@dataclass(frozen=True)
class FigureSpec:
    x_key: str
    grid: tuple
    series_key: str
    series: tuple
    metric: str  # "xi_bar" or "eta"
    title: str


FIGURES = {
    2: FigureSpec("lambda_i", tuple(np.logspace(-5, -1, 9)), "p_i_dbm", (10.0, 20.0, 30.0),
                  "xi_bar", "average covert probability vs interferer density, no fading"),
    3: FigureSpec("lambda_i", tuple(np.logspace(-5, -1, 9)), "p_i_dbm", (10.0, 20.0, 30.0),
                  "xi_bar", "average covert probability vs interferer density, Rayleigh fading"),
    4: FigureSpec("lambda_i", tuple(np.logspace(-6, -1, 11)), "fading", ("nonfading", "rayleigh"),
                  "eta", "covert throughput vs interferer density"),
    5: FigureSpec("p_i_dbm", tuple(np.arange(-20.0, 45.0, 5.0)), "fading", ("nonfading", "rayleigh"),
                  "eta", "covert throughput vs interferer power"),
    6: FigureSpec("eps", (0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5), "fading",
                  ("nonfading", "rayleigh"), "eta", "covert throughput vs covertness slack"),
    7: FigureSpec("sigma_z_dbm", tuple(np.arange(-90.0, -5.0, 5.0)), "fading",
                  ("nonfading", "rayleigh"), "eta", "covert throughput vs noise power"),
}


def _figure_row(metric: str, bundle: ConfigBundle) -> dict:
    net, sim = bundle.network, bundle.sim
    if metric == "xi_bar":
        est = estimate_xi_bar(bundle.p_a, net, sim)
        return {"analytic": avg_covert_prob(bundle.p_a, net), "mc_mean": est.mean,
                "mc_half_width": est.half_width_95}
    res = covert_throughput(bundle.req, net)
    row = {"analytic": res.eta, "pa_star": res.pa_star, "error": res.diagnostic or None}
    # Monte Carlo: empirical delta-quantile of the link capacity at the analytic power
    est = estimate_rate_quantile(res.pa_star, bundle.req.delta, net, sim)
    row.update(mc_mean=est.mean, mc_half_width=est.half_width_95)
    return row


def run_figure(fig_id: int, raw: dict, grid: Sequence | None = None) -> Table:
    """Plot-ready table for figure ``fig_id`` (2-7), one row per (series, x) point."""
    if fig_id not in FIGURES:
        raise ConfigError("fig", f"expected one of {sorted(FIGURES)}, got {fig_id!r}")
    spec = FIGURES[fig_id]
    grid = tuple(spec.grid if grid is None else grid)
    raw = dict(raw)
    if fig_id in (2, 3):
        raw["fading"] = "nonfading" if fig_id == 2 else "rayleigh"
    base = resolve_config(raw)
    points = []
    for s in spec.series:
        for x in grid:
            points.append((s, x, resolve_config(_with(_with(raw, spec.series_key, s), spec.x_key, x))))
    columns = [spec.series_key, spec.x_key, "analytic", "mc_mean", "mc_half_width"]
    if spec.metric == "eta":
        columns.insert(3, "pa_star")
    columns.append("error")
    header = [
        _config_header(base),
        f"figure {fig_id}: {spec.title}",
        f"grid {spec.x_key} = " + ",".join(format_value(x) for x in grid),
        f"series {spec.series_key} = " + ",".join(format_value(s) for s in spec.series),
    ]
    if spec.metric == "eta":
        header.append("mc column: empirical delta-quantile of log2(1+SINR) at the analytic pa_star")
    else:
        header.append(f"mc column: simulated xi_bar at p_a = {format_value(base.p_a)} W")
    table = Table(columns, header=header)
    for s, x, b in points:
        row = _row(lambda bb: _figure_row(spec.metric, bb), b)
        row[spec.series_key] = s
        row[spec.x_key] = x
        table.rows.append(row)
    return table


def gnuplot_stub(fig_id: int, csv_path: str) -> str:
    spec = FIGURES[fig_id]
    logx = "set logscale x\n" if spec.x_key == "lambda_i" else ""
    return (
        f"# {spec.title}\n"
        "set datafile separator ','\n"
        f"{logx}set xlabel '{spec.x_key}'\nset ylabel '{spec.metric}'\n"
        f"plot '{csv_path}' using 2:{4 if spec.metric == 'xi_bar' else 5} with points title 'analytic'\n"
    )


# -- verify ---------------------------------------------------------------------------


def run_verify(which: str, raw: dict) -> dict:
    """Run one named check and return its JSON-ready report."""
    if which not in TARGETS:
        raise ConfigError("target", f"expected one of {', '.join(TARGETS)}, got {which!r}")
    bundle = resolve_config(raw)
    rep = run_check(which, bundle.network, bundle.req, bundle.p_a)
    out = rep.to_dict()
    out["config"] = bundle_to_dict(bundle)
    for a in out["assertions"]:
        if not math.isfinite(a["deviation"]):
            a["deviation"] = str(a["deviation"])
    return out
