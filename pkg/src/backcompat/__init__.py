"""backcompat: backward-compatibility analysis for ML model updates.

Core ideas: compare an old model h1 with its update h2 on a fixed test set
via BTC (trust preserved) and BEC (errors not new); reproduce noisy-update
and retraining-stochasticity effects at desk scale with the built-in SGD
trainer and noise lab; propagate per-character accuracy drops into word-level
blacklist failure estimates for pipelines.
"""

from .compat import (
    BEC_DENOM_ZERO,
    BTC_DENOM_ZERO,
    CompatibilityReport,
    ConfidenceHistogram,
    GroupRow,
    Quadrants,
    UpdateComparison,
    align,
    bec,
    btc,
    compare,
    confidence_histogram,
    group_breakdown,
)
from .data import Dataset, load_dataset, save_dataset
from .errors import BackcompatError, ParseError, ValidationError
from .experiments import (
    BaselineResult,
    SweepCell,
    SweepResult,
    TrialResult,
    lambda_sweep,
    noise_sweep,
    saturation_curve,
    stochasticity_baseline,
)
from .forgetting import (
    ForgettingCounts,
    ForgettingRow,
    count_forgetting_events,
    forgetting_by_quadrant,
)
from .logs import PredictionLog, PredictionRecord, load_prediction_log, save_prediction_log
from .models import (
    LINEAR,
    MLP,
    ModelParams,
    load_params,
    params_equal,
    predict,
    save_params,
    softmax,
)
from .noise import (
    FEATURE_OCCLUSION,
    GROUP_FLIP,
    LABEL_SWAP,
    OUTLIER_MERGE,
    NoiseSpec,
    apply_noise,
    inject_feature_occlusion,
    inject_group_flip,
    inject_label_noise,
    inject_outlier_noise,
)
from .pipeline import (
    Blacklist,
    BlacklistRow,
    CharAccuracyTable,
    blacklist_report,
    char_accuracy_from_log,
    word_error,
)
from .synth import make_dataset, stratified_head
from .training import EpochEvalLog, TrainConfig, load_epoch_log, loss, save_epoch_log, train

__version__ = "0.1.0"
