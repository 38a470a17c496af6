"""Fiducial density construction and sampling for standard one-parameter
models, joint densities via Gibbs composition, and conjugate-posterior
reference oracles."""

__version__ = "0.1.0"

from .core import (
    FiducialArgument,
    GpdFunction,
    LpdFunction,
    ParamDomain,
    PrimaryRvLaw,
    SampleBatch,
)
from .models import (
    BinomialProblem,
    MultinomialProblem,
    NormalMeanProblem,
    NormalVarianceProblem,
    PoissonProblem,
)
from .principle1 import classify_argument, fiducial_density_p1, weight_ratio
from .principle2 import P2Problem, density_p2_grid, sample_p2

__all__ = [
    "__version__",
    "FiducialArgument", "GpdFunction", "LpdFunction", "ParamDomain",
    "PrimaryRvLaw", "SampleBatch",
    "BinomialProblem", "MultinomialProblem", "NormalMeanProblem",
    "NormalVarianceProblem", "PoissonProblem",
    "classify_argument", "fiducial_density_p1", "weight_ratio",
    "P2Problem", "density_p2_grid", "sample_p2",
]
