"""Numerical laboratory for resonances of 1-D Schrodinger operators with
compactly supported potentials, and for the entire-function machinery
(Fourier transforms, zero scans, truncated canonical products) built on them.
"""

from .dickson import (
    CurvilinearCount, DicksonGeometry, ExpPolynomial, ExpTerm, SideData,
    StripData, containment_exceptions, curvilinear_count, dickson_geometry,
    recommended_H, recommended_alpha0, strip_membership, two_cosine_model,
)
from .hadamard import (
    ContourCountError, ConvergenceCurve, CountDifference,
    ProductOverflowError, StabilityRow, StabilityTable, TruncatedProduct,
    build_product, convergence_curve, count_difference, eval_product,
    fit_prefactor, perturb_zeros, stability_experiment,
)
from .ftransform import (
    ExpansionResult, FourierEval, PairEval, asymptotic_residual,
    conj_symmetry_residual, erdelyi_expansion, fourier, fourier_many,
    fourier_pair, fourier_pair_many, indicator_estimate,
)
from .potential import (
    NormalizationReport, Potential, RelativeDistance,
    make_poly_bump, make_truncated_gaussian, load_table, relative_sup_distance,
)
from .quadrature import QuadratureError, adaptive_quadrature, quad_scalar
from .rootscan import (
    BoundaryZeroError, CartwrightStats, MatchResult, Rectangle, RootScanError,
    ZeroSet, cartwright_stats, locate_zeros, match_zero_sets, wind_count,
)
from .scatter import (
    FroeseComparison, FroesePair, JostData, JostIntegrationError,
    ScatteringMatrix, froese_compare, jost_solve, resonances,
    scattering_matrix, xhat_function,
)
from .cli import (
    SUBCOMMANDS, ExperimentConfig, emit_plot_data, run_subcommand,
)

__version__ = "0.1.0"
