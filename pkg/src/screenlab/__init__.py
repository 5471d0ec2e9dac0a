"""Toddler autism screening toolkit: Q-CHAT-10 scoring, from-scratch
tree/ensemble/network classifiers, caret-style evaluation, and a small
prediction service."""

from .betadist import betainc, betainc_inv, binom_tail_geq, clopper_pearson
from .ensemble import (
    EnsembleModel,
    EnsembleParams,
    bootstrap_sample,
    default_mtry,
    fit_ensemble,
    oob_accuracy,
    predict_ensemble,
)
from .evaluation import (
    ConfusionMatrix,
    CvResult,
    EdaSummary,
    MetricsReport,
    RocCurve,
    confusion,
    cross_validate,
    eda_summary,
    fold_assignment,
    metrics,
    nir_test,
    report_lines,
    report_mapping,
    roc,
)
from .features import (
    Column,
    FeatureMatrix,
    FeatureSchema,
    SplitSpec,
    build_schema,
    encode,
    encode_record,
    split,
    split_indices,
)
from .ingest import (
    ConsistencyReport,
    HeaderMap,
    IngestError,
    IngestResult,
    read_csv,
    validate_consistency,
    write_csv,
)
from .mlp import (
    GRADIENT_DESCENT,
    HIDDEN_SIZES,
    RPROP,
    MlpModel,
    Normalization,
    TrainParams,
    fit_mlp,
    fit_normalization,
    forward,
    gradient,
    predict_mlp,
    predict_mlp_many,
)
from .persist import PersistError, load, model_digest, model_kind, save
from .records import (
    LIKERT_ANSWERS,
    FieldError,
    ScreeningRecord,
    ValidationError,
    derive_label,
    parse_likert,
    qchat_score,
    record_from_payload,
    score_item,
    validate_record,
)
from .synth import generate, mixture_for_prevalence
from .tree import (
    SplitRule,
    TreeModel,
    TreeNode,
    TreeParams,
    best_split,
    entropy,
    fit_tree,
    gain_ratio,
    gini,
    predict_tree,
    prune_tree,
)

__version__ = "1.0.0"
