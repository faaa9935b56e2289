"""Covert communication in a Poisson field of interferers.

Analytical covertness, reliability and covert-throughput metrics with a Monte
Carlo network simulator as an independent oracle.
"""

__version__ = "0.1.0"

from .interference import Fading, NetworkConfig
from .throughput import CovertRequirements, covert_throughput
from .covertness import avg_covert_prob, solve_pa_star
from .reliability import LinkBudget, conn_outage, rate_for_outage
from .mcsim import SimConfig

__all__ = [
    "Fading",
    "NetworkConfig",
    "CovertRequirements",
    "covert_throughput",
    "avg_covert_prob",
    "solve_pa_star",
    "LinkBudget",
    "conn_outage",
    "rate_for_outage",
    "SimConfig",
]
