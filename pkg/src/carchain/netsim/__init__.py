"""Seeded discrete-event simulation of the peer-to-peer network."""

from .doublespend import catch_up_probability, double_spend_experiment
from .sim import SimConfig, SimReport, convergence_experiment, run_simulation

__all__ = [
    "SimConfig",
    "SimReport",
    "run_simulation",
    "convergence_experiment",
    "double_spend_experiment",
    "catch_up_probability",
]
