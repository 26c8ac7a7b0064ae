"""Fire-sale overlap networks from bank portfolios, embedded in hyperbolic space."""

from .embedding import (
    DissimilarityMatrix,
    EuclideanEmbedding,
    HyperboloidEmbedding,
    OptimizerOptions,
    descend_stress,
    embed_euclidean,
    embed_hyperbolic,
    spectral_init_hyperbolic,
    stress,
)
from .errors import DegenerateDataError, SchemaError
from .geometry import (
    HyperbolicCenter,
    PoincarePolar,
    center_points,
    from_poincare,
    hyperbolic_mean,
    hyperboloid_distance,
    lorentz_boost,
    minkowski_product,
    poincare_distance,
    to_poincare,
)
from .network import (
    OverlapNetwork,
    PortfolioMatrix,
    build_network,
    capital_weights,
    lwpo,
    market_depths,
    normalize_weights,
    to_dissimilarity,
    weight_deciles,
)
from .stats import (
    BankCoordinate,
    TestResult,
    circular_anova,
    circular_correlation,
    match_samples,
    pearson_correlation,
    radial_ranking,
    wilcoxon_mann_whitney,
)

__version__ = "0.1.0"
