"""Soft-DTW, its debiased divergences and their exact gradients."""

from .alignment import (
    TransitionTensor, alignment_count, delannoy, directional_derivative, expected_alignment,
    hard_dtw, hessian_product, mean_cost, sdtw_value_and_grad, soft_dtw_forward,
)
from .barycenter import AveragingProblem, frechet_mean, interpolate, minimize
from .classify import (
    CentroidModel, centroid_predict, fit_centroids, knn_predict, pairwise, select_gamma,
)
from .costs import CostKind, build_cost, cost_jvp, cost_vjp
from .dataio import LabeledDataset, ResultReport, load_ucr, read_report, write_report
from .divergences import (
    DivergenceKind, Tag, discrepancy, divergence, divergence_grad_x, evaluate, self_term,
)
from .oracle import GibbsStats, enumerate_alignments, oracle_stats
from .verify import fourier_gauss_series, gram_matrix, gram_min_eig

__version__ = "0.1.0"
