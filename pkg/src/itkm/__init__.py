"""Iterative thresholding and K-means dictionary learning (ITKsM / ITKrM)."""

from .dictionary import (
    Dictionary,
    DictionaryMetrics,
    PerturbationDecomposition,
    compute_metrics,
    decompose,
    distance_asym,
    distance_sym,
    make_dirac_dct,
    perturb_init,
    random_dictionary,
    recovery_stats,
    restricted_isometry,
)
from .model import CoefficientSpec, GapStatistics, SignalBatch, draw_batch, draw_signal, statistics
from .sparse import ProjectionWorkspace, Support, count_failures, oracle_residual_s, project, threshold
from .learn import (
    DatasetSampler,
    IterationMetrics,
    LearnerConfig,
    SyntheticGenerator,
    itkrm_iteration,
    itksm_iteration,
    learn,
    replace_degenerate,
)
from . import bounds, dataio, harness

__version__ = "0.1.0"
