"""Two-action network games with heterogeneous preferences.

Coordination and anticoordination games on Erdos-Renyi and Barabasi-Albert
graphs, played under synchronous best response (complete or incomplete
information) or proportional imitation, with seeded parameter sweeps.
"""

from .dynamics import DynamicsSpec, Info, Init, PopulationState, Rule, RunResult, Termination, run
from .equilibrium import EquilibriumClass, classify, enumerate_equilibria, observables
from .errors import ConfigError, ResultsFormatError, UsageError
from .experiments import SweepConfig, aggregate, default_grid, run_sweep
from .game import GameKind, PayoffParams, best_response_complete, best_response_incomplete, payoff
from .graph import Graph, TopologySpec, generate_ba, generate_er

__version__ = "0.1.0"
