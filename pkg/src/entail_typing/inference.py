"""Candidate ranking, threshold prediction, and dev-set threshold tuning.

Every vocabulary label is rendered into a hypothesis for the instance and
scored; labels at or above the threshold form the prediction set. When
nothing clears the threshold a fallback policy decides between the
top-ranked label, a designated catch-all label, or an empty set.
"""

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .corpus import Dataset, MentionInstance
from .errors import ConfigError, RenderingError, ValidationError
from .evaluation import loose_macro
from .labelspace import LabelVocabulary, TypeLabel
from .scoring import EntailmentScorer
from .templates import TemplateKind, build_type_pair

# Tuning grid used when none is supplied: 0.05 through 0.95 in steps of 0.05.
DEFAULT_GRID = tuple(i / 20 for i in range(1, 20))


@dataclass(frozen=True)
class FallbackPolicy:
    """What to predict when no label clears the threshold."""

    kind: str
    label: str | None = None

    _KINDS = ("top1", "other", "empty")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ConfigError(f"unknown fallback kind {self.kind!r}")
        if self.kind == "other" and not self.label:
            raise ConfigError("fallback kind 'other' requires a label")
        if self.kind != "other" and self.label is not None:
            raise ConfigError(f"fallback kind {self.kind!r} takes no label")

    @classmethod
    def top1(cls) -> "FallbackPolicy":
        return cls(kind="top1")

    @classmethod
    def empty(cls) -> "FallbackPolicy":
        return cls(kind="empty")

    @classmethod
    def other(cls, label: str) -> "FallbackPolicy":
        return cls(kind="other", label=label)

    @classmethod
    def parse(cls, text: str) -> "FallbackPolicy":
        """Parse the config spelling: "top1", "empty", or "other:<label>"."""
        if text == "top1":
            return cls.top1()
        if text == "empty":
            return cls.empty()
        if text.startswith("other:"):
            return cls.other(text[len("other:"):])
        raise ConfigError(f"unknown fallback spec {text!r}")

    def spec(self) -> str:
        return f"other:{self.label}" if self.kind == "other" else self.kind


@dataclass(frozen=True)
class PredictionConfig:
    """Threshold, fallback, and template for one prediction run.

    Thresholds outside [0, 1] are accepted and behave as the obvious
    extremes: at or below 0 everything is chosen, above 1 only the
    fallback fires.
    """

    threshold: float
    fallback: FallbackPolicy = field(default_factory=FallbackPolicy.top1)
    template: TemplateKind = TemplateKind.TAXONOMIC


@dataclass(frozen=True)
class ScoredLabel:
    label: TypeLabel
    score: float

    def __post_init__(self):
        if not 0.0 <= self.score <= 1.0:
            raise ValidationError(
                f"score {self.score} outside [0, 1] for label {self.label.raw!r}"
            )


@dataclass(frozen=True)
class PredictionSet:
    """Chosen labels plus the full ranking they were drawn from."""

    instance_id: str
    chosen: frozenset[str]
    ranking: tuple[ScoredLabel, ...]


def rank_all_candidates(
    instance: MentionInstance,
    vocab: LabelVocabulary,
    scorer: EntailmentScorer,
    template: TemplateKind,
    on_render_error: Callable[[TypeLabel, RenderingError], None] | None = None,
) -> list[ScoredLabel]:
    """Score every vocabulary label's hypothesis for this instance.

    Labels whose hypothesis cannot be rendered score 0 and are reported
    through ``on_render_error`` when a handler is given. The result is
    sorted by descending score, ties broken by ascending raw label.
    """
    if len(vocab) == 0:
        raise ValidationError("cannot rank against an empty vocabulary")
    renderable = []
    failed = []
    for label in vocab:
        try:
            renderable.append((label, build_type_pair(instance, label, template)))
        except RenderingError as exc:
            failed.append(label)
            if on_render_error is not None:
                on_render_error(label, exc)
    scores = scorer.score_batch([pair for _, pair in renderable])
    scored = [ScoredLabel(label=label, score=s) for (label, _), s in zip(renderable, scores)]
    scored.extend(ScoredLabel(label=label, score=0.0) for label in failed)
    scored.sort(key=lambda s: (-s.score, s.label.raw))
    return scored


def predict(
    ranking: Sequence[ScoredLabel],
    config: PredictionConfig,
    instance_id: str = "",
) -> PredictionSet:
    """Apply the threshold to a ranking, falling back when nothing clears it."""
    if not ranking:
        raise ValidationError("cannot predict from an empty ranking")
    chosen = {s.label.raw for s in ranking if s.score >= config.threshold}
    if not chosen:
        if config.fallback.kind == "top1":
            chosen = {ranking[0].label.raw}
        elif config.fallback.kind == "other":
            chosen = {config.fallback.label}
    return PredictionSet(
        instance_id=instance_id,
        chosen=frozenset(chosen),
        ranking=tuple(ranking),
    )


def predict_dataset(
    dataset: Dataset,
    vocab: LabelVocabulary,
    scorer: EntailmentScorer,
    config: PredictionConfig,
    on_render_error: Callable[[TypeLabel, RenderingError], None] | None = None,
) -> list[PredictionSet]:
    """Rank and threshold every instance of a split, in dataset order."""
    return [
        predict(
            rank_all_candidates(inst, vocab, scorer, config.template, on_render_error),
            config,
            instance_id=inst.id,
        )
        for inst in dataset
    ]


def tune_threshold(
    dev: Dataset,
    vocab: LabelVocabulary,
    scorer: EntailmentScorer,
    template: TemplateKind,
    grid: Sequence[float] = DEFAULT_GRID,
    objective: Callable[[Sequence[PredictionSet], Mapping[str, set[str]]], float] | None = None,
    fallback: FallbackPolicy | None = None,
) -> float:
    """Pick the grid threshold maximizing the objective on the dev split.

    Instances are scored once; each grid value only re-applies the
    threshold. The default objective is loose macro F1 and ties go to the
    larger threshold.
    """
    if not grid:
        raise ValidationError("threshold grid is empty")
    for a, b in zip(grid, grid[1:]):
        if b <= a:
            raise ValidationError("threshold grid must be strictly increasing")
    if objective is None:
        objective = lambda preds, golds: loose_macro(preds, golds)[2]
    if fallback is None:
        fallback = FallbackPolicy.top1()

    rankings = [
        (inst.id, rank_all_candidates(inst, vocab, scorer, template)) for inst in dev
    ]
    golds = {inst.id: set(inst.gold_labels) for inst in dev}

    best_threshold = grid[0]
    best_value = float("-inf")
    for threshold in grid:
        config = PredictionConfig(threshold=threshold, fallback=fallback, template=template)
        preds = [predict(ranking, config, instance_id=iid) for iid, ranking in rankings]
        value = objective(preds, golds)
        if value >= best_value:
            best_value = value
            best_threshold = threshold
    return best_threshold


def prediction_to_record(pred: PredictionSet, topk: int = 10) -> dict:
    """Serialize a prediction for the JSONL dump; ranking truncated to topk."""
    return {
        "instance_id": pred.instance_id,
        "chosen": sorted(pred.chosen),
        "topk": [
            {"label": s.label.raw, "score": s.score} for s in pred.ranking[:topk]
        ],
    }
