"""Faithfulness evaluation for pixel-salience explanations.

Scores an explanation by how well its salience distribution matches the
classifier's measured sensitivity to pixel groups (a pairwise coefficient in
[-1, 1]), alongside the four standard cumulative-perturbation metrics.
"""

__version__ = "0.1.0"

from ._kernels import NUMBA_ENABLED
from .analysis import (
    CorrelationReport,
    ScoreMatrix,
    correlation_report,
    kendall_tau,
    spearman_rho,
)
from .baseline_metrics import (
    LERF,
    MORF,
    MetricScores,
    PerturbationCurve,
    aopc_score,
    auc_score,
    build_curve,
    comp_score,
    dataset_accuracy_auc,
    lodds_score,
    score_curves,
)
from .baselines import (
    SeededGenerator,
    anti_oracle_attribution,
    oracle_attribution,
    random_attribution,
)
from .conformance import validate_adapter
from .engine import SampleEvaluation, evaluate_sample
from .errors import (
    AlignmentError,
    ConfigError,
    CorruptionError,
    FaithevalError,
    FormatError,
    ManifestError,
    ParameterError,
    TransportError,
    UndefinedCorrelationError,
    ValidationError,
)
from .partition import SubsetPartition, partition_by_salience
from .perturbation import (
    CUMULATIVE_LERF,
    CUMULATIVE_MORF,
    INDIVIDUAL,
    PerturbationPlan,
    apply_replacement,
    build_plan,
    sample_mean,
)
from .predictor import (
    CachingPredictor,
    HttpPredictor,
    LinearSoftmaxModel,
    PredictionRecord,
    Predictor,
    StdioPredictor,
)
from .saco import (
    FaithfulnessResult,
    SubsetMeasurements,
    delta_pred,
    evaluate_saco,
    saco_coefficient,
)
from .tensor_io import (
    DatasetManifest,
    ImageTensor,
    ManifestEntry,
    SalienceMap,
    load_image,
    load_manifest,
    load_salience,
    read_array,
    read_tensor,
    write_array,
    write_tensor,
)
