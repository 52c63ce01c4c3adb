"""Distributed hypothesis testing over agent networks with arithmetic and geometric belief pooling."""

__version__ = "0.1.0"

from .errors import *  # noqa: F401,F403
from .learning import RuleKind, SimulationTrace, run
from .observation import ObservationModel, two_hypothesis_exponential, two_hypothesis_gaussian
from .topology import CombinationMatrix, NetworkKind, NetworkSpec

__all__ = [
    "CombinationMatrix",
    "NetworkKind",
    "NetworkSpec",
    "ObservationModel",
    "RuleKind",
    "SimulationTrace",
    "run",
    "two_hypothesis_exponential",
    "two_hypothesis_gaussian",
]
