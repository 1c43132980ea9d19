"""MOEA/D with surrogate-guided uniform weight adjustment.

The package is split into benchmark problems (:mod:`~umoead.problems`),
aggregation and weight parameterizations (:mod:`~umoead.scalarize`), the
evolutionary core (:mod:`~umoead.moead`), the front surrogate
(:mod:`~umoead.pfl`), max-min separation (:mod:`~umoead.uniformity`),
quality indicators (:mod:`~umoead.metrics`) and the end-to-end driver
(:mod:`~umoead.harness`).
"""

from .errors import ConfigurationError, DomainError, NoIntersectionError, NotAvailableError, UmoeadError
from .harness import AdjustConfig, PflConfig, RunConfig, RunReport, export, run
from .metrics import MetricsRecord, hypervolume, report, sparsity, spacing
from .moead import OperatorConfig, PopulationState, generation_step, init_population
from .pfl import PflModel, pfl_init, pfl_train
from .problems import Problem, analytic_h, evaluate, get_problem, numeric_h_oracle
from .scalarize import angle_to_weight, das_dennis, mtche, weight_to_angle
from .uniformity import adjust_angles, min_pairwise, soft_min_pairwise

__version__ = "0.1.0"

__all__ = [
    "AdjustConfig",
    "ConfigurationError",
    "DomainError",
    "MetricsRecord",
    "NoIntersectionError",
    "NotAvailableError",
    "OperatorConfig",
    "PflConfig",
    "PflModel",
    "PopulationState",
    "Problem",
    "RunConfig",
    "RunReport",
    "UmoeadError",
    "adjust_angles",
    "analytic_h",
    "angle_to_weight",
    "das_dennis",
    "evaluate",
    "export",
    "generation_step",
    "get_problem",
    "hypervolume",
    "init_population",
    "min_pairwise",
    "mtche",
    "numeric_h_oracle",
    "pfl_init",
    "pfl_train",
    "report",
    "run",
    "soft_min_pairwise",
    "spacing",
    "sparsity",
    "weight_to_angle",
]
