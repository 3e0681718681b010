"""Entity typing as textual entailment.

A mention-in-context is typed by rendering each candidate type label into
a natural-language hypothesis, scoring whether the sentence entails it,
and keeping the labels whose scores clear a tuned threshold. Because
candidates are scored by their text rather than by a fixed output head,
labels never seen in training remain predictable.
"""

from .corpus import (
    Dataset,
    FewShotSplitSpec,
    MentionInstance,
    fewshot_manifest,
    format_bucket,
    frequency_buckets,
    instance_to_record,
    load_ufet_jsonl,
    make_fewshot_split,
    render_premise,
    split_label_set,
    train_label_counts,
)
from .errors import (
    ConfigError,
    DatasetLoadError,
    EntailTypingError,
    EvaluationError,
    ProtocolError,
    RenderingError,
    SamplingError,
    SchemaError,
    SplitError,
    TrainingError,
    TransportError,
    UnsupportedTemplateError,
    ValidationError,
)
from .evaluation import (
    EvaluationReport,
    bucket_report,
    evaluate,
    loose_macro,
    micro,
    report_to_json,
    report_to_text,
    strict_accuracy,
)
from .inference import (
    DEFAULT_GRID,
    FallbackPolicy,
    PredictionConfig,
    PredictionSet,
    ScoredLabel,
    predict,
    predict_dataset,
    prediction_to_record,
    rank_all_candidates,
    tune_threshold,
)
from .labelspace import (
    DependencyPair,
    LabelVocabulary,
    Tier,
    TypeLabel,
    ancestors,
    induce_dependency_pairs,
    load_vocabulary,
    parse_label,
    positive_label_set,
    sample_negative_ancestor,
    sample_negative_type,
)
from .scoring import (
    CachedScorer,
    EntailmentScorer,
    ExternalScorer,
    ExternalTrainableScorer,
    OverlapScorer,
    ScoreCache,
    TableScorer,
    TrainableScorer,
    TrainableTableScorer,
    overlap_score,
    scorer_from_spec,
)
from .templates import (
    PairKind,
    PremiseHypothesisPair,
    TemplateKind,
    build_dependency_pair,
    build_type_pair,
    pair_to_record,
    render_description,
)
from .training import (
    FrozenScorerAdapter,
    LossReport,
    RankedExample,
    TrainingConfig,
    build_examples_for_instance,
    instance_loss,
    margin_ranking_loss,
    train,
)

__version__ = "0.1.0"

__all__ = [
    "CachedScorer",
    "ConfigError",
    "DEFAULT_GRID",
    "Dataset",
    "DatasetLoadError",
    "DependencyPair",
    "EntailTypingError",
    "EntailmentScorer",
    "EvaluationError",
    "EvaluationReport",
    "ExternalScorer",
    "ExternalTrainableScorer",
    "FallbackPolicy",
    "FewShotSplitSpec",
    "FrozenScorerAdapter",
    "LabelVocabulary",
    "LossReport",
    "MentionInstance",
    "OverlapScorer",
    "PairKind",
    "PredictionConfig",
    "PredictionSet",
    "PremiseHypothesisPair",
    "ProtocolError",
    "RankedExample",
    "RenderingError",
    "SamplingError",
    "SchemaError",
    "ScoreCache",
    "ScoredLabel",
    "SplitError",
    "TableScorer",
    "TemplateKind",
    "Tier",
    "TrainableScorer",
    "TrainableTableScorer",
    "TrainingConfig",
    "TrainingError",
    "TransportError",
    "TypeLabel",
    "UnsupportedTemplateError",
    "ValidationError",
    "ancestors",
    "bucket_report",
    "build_dependency_pair",
    "build_examples_for_instance",
    "build_type_pair",
    "evaluate",
    "fewshot_manifest",
    "format_bucket",
    "frequency_buckets",
    "induce_dependency_pairs",
    "instance_loss",
    "instance_to_record",
    "load_ufet_jsonl",
    "load_vocabulary",
    "loose_macro",
    "make_fewshot_split",
    "margin_ranking_loss",
    "micro",
    "overlap_score",
    "pair_to_record",
    "parse_label",
    "positive_label_set",
    "predict",
    "predict_dataset",
    "prediction_to_record",
    "rank_all_candidates",
    "render_description",
    "render_premise",
    "report_to_json",
    "report_to_text",
    "scorer_from_spec",
    "split_label_set",
    "strict_accuracy",
    "train",
    "train_label_counts",
    "tune_threshold",
]
