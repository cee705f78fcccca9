"""Directed dependence measures (xi, R^2, Lambda) with exact, Markov-product
and nearest-neighbor computation paths."""
from .errors import DepmarkError, ValidationError
from .model import (
    Dataset,
    DistributionModel,
    MixedLaw1D,
    collision_probability,
    conditional_law,
    law_cdf,
    law_quantile,
    marginal_law_Y,
    sample_joint,
    validate_model,
)
from .markov import MarkovDataset, markov_cdf, sample_markov, transform_markov, empirical_transform
from .exact import (
    MeasureReport,
    lambda_exact,
    lambda_via_markov,
    r2_exact,
    r2_via_markov,
    relative_effect,
    xi_exact,
    xi_via_markov,
)
from .catalog import example_model

__version__ = "0.1.0"
