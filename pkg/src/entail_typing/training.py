"""Ranked-example construction, margin losses, and the epoch training loop.

Each training instance yields one ranked example per positive label (gold
labels plus induced ancestors) and one per label-dependency pair, each
positive contrasted against k sampled negatives. The joint objective per
instance is the mean type-example loss plus a weighted mean
dependency-example loss; the loop shuffles examples into fixed-size
batches, accumulates losses on a trainable scorer, and keeps the
checkpoint with the best dev F1.
"""

from dataclasses import dataclass
from typing import Sequence

from ._util import substream
from .corpus import Dataset, MentionInstance
from .errors import ConfigError, TrainingError, ValidationError
from .evaluation import loose_macro
from .inference import PredictionConfig, predict_dataset
from .labelspace import (
    DependencyPair,
    LabelVocabulary,
    ancestors,
    induce_dependency_pairs,
    positive_label_set,
    sample_negative_ancestor,
    sample_negative_type,
)
from .scoring import EntailmentScorer, TrainableScorer
from .templates import (
    PairKind,
    PremiseHypothesisPair,
    TemplateKind,
    build_dependency_pair,
    build_type_pair,
)


@dataclass(frozen=True)
class TrainingConfig:
    """Knobs for the ranking objective and the epoch loop."""

    margin: float = 0.1
    dependency_weight: float = 0.05
    negatives_per_positive: int = 1
    batch_size: int = 16
    max_epochs: int = 30
    eval_every: int = 30
    template: TemplateKind = TemplateKind.TAXONOMIC
    seed: int = 0

    def __post_init__(self):
        if self.margin < 0:
            raise ConfigError(f"margin must be nonnegative, got {self.margin}")
        if self.dependency_weight < 0:
            raise ConfigError(
                f"dependency_weight must be nonnegative, got {self.dependency_weight}"
            )
        if self.negatives_per_positive < 1:
            raise ConfigError(
                f"negatives_per_positive must be at least 1, got {self.negatives_per_positive}"
            )
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        if self.max_epochs < 1:
            raise ConfigError(f"max_epochs must be positive, got {self.max_epochs}")
        if self.eval_every < 1:
            raise ConfigError(f"eval_every must be positive, got {self.eval_every}")


@dataclass(frozen=True)
class RankedExample:
    """One positive pair to be ranked above its sampled negative pairs."""

    positive: PremiseHypothesisPair
    negatives: tuple[PremiseHypothesisPair, ...]
    kind: PairKind

    def __post_init__(self):
        if self.positive.kind is not self.kind:
            raise ValidationError(
                f"positive pair kind {self.positive.kind.value} does not match "
                f"example kind {self.kind.value}"
            )
        for neg in self.negatives:
            if neg.premise != self.positive.premise:
                raise ValidationError(
                    f"negative premise differs from positive premise for "
                    f"instance {self.positive.instance_id!r}"
                )


@dataclass(frozen=True)
class LossReport:
    """Per-instance (or per-batch) loss summary."""

    type_loss: float
    dependency_loss: float
    joint: float
    n_type: int
    n_dependency: int


def margin_ranking_loss(pos_score: float, neg_score: float, margin: float) -> float:
    """Hinge penalty when the positive fails to beat the negative by the margin."""
    return max(neg_score - pos_score + margin, 0.0)


def _gold_labels(instance: MentionInstance, vocab: LabelVocabulary):
    return {vocab.resolve(raw) for raw in instance.gold_labels}


def _true_ancestor_raws(
    dep: DependencyPair, gold: set, vocab: LabelVocabulary
) -> set[str]:
    """Labels that must never be sampled as a false ancestor for this pair."""
    if vocab.has_ontology:
        return {a.raw for a in ancestors(dep.descendant, vocab)}
    return {
        g.raw
        for g in gold
        if g.tier.comparable
        and dep.descendant.tier.comparable
        and dep.descendant.tier.fineness < g.tier.fineness
    }


def build_examples_for_instance(
    instance: MentionInstance,
    vocab: LabelVocabulary,
    config: TrainingConfig,
    rng,
) -> list[RankedExample]:
    """Build the instance's ranked examples: type examples, then dependency.

    Positives are the gold labels closed under implicit ancestors. Under
    the substitution template dependency examples are skipped entirely
    (their rendering is undefined there).
    """
    if not instance.gold_labels:
        raise ValidationError(f"instance {instance.id!r} has no gold labels")
    gold = _gold_labels(instance, vocab)
    positives = positive_label_set(gold, vocab)
    positive_raws = {l.raw for l in positives}
    k = config.negatives_per_positive
    examples = []
    for label in sorted(positives, key=lambda l: l.raw):
        pos_pair = build_type_pair(instance, label, config.template)
        negs = tuple(
            build_type_pair(
                instance, sample_negative_type(vocab, positive_raws, rng), config.template
            )
            for _ in range(k)
        )
        examples.append(RankedExample(positive=pos_pair, negatives=negs, kind=PairKind.TYPE))
    if config.template is TemplateKind.SUBSTITUTION:
        return examples
    deps = sorted(
        induce_dependency_pairs(gold, vocab),
        key=lambda d: (d.descendant.raw, d.ancestor.raw),
    )
    for dep in deps:
        pos_pair = build_dependency_pair(instance, dep, config.template)
        excluded = _true_ancestor_raws(dep, gold, vocab)
        negs = tuple(
            build_dependency_pair(
                instance,
                DependencyPair(
                    descendant=dep.descendant,
                    ancestor=sample_negative_ancestor(dep, vocab, excluded, rng),
                ),
                config.template,
            )
            for _ in range(k)
        )
        examples.append(
            RankedExample(positive=pos_pair, negatives=negs, kind=PairKind.DEPENDENCY)
        )
    return examples


def _example_loss(
    example: RankedExample, scores: dict[tuple[str, str], float], margin: float
) -> float:
    """Mean margin loss of one example's negatives, from precomputed scores."""
    pos = scores[(example.positive.premise, example.positive.hypothesis)]
    total = 0.0
    for neg in example.negatives:
        total += margin_ranking_loss(pos, scores[(neg.premise, neg.hypothesis)], margin)
    return total / len(example.negatives)


def instance_loss(
    examples: Sequence[RankedExample], scorer: EntailmentScorer, config: TrainingConfig
) -> LossReport:
    """Joint loss of one instance's examples under the current scorer state."""
    unique_pairs: dict[tuple[str, str], PremiseHypothesisPair] = {}
    for example in examples:
        for pair in (example.positive, *example.negatives):
            unique_pairs.setdefault((pair.premise, pair.hypothesis), pair)
    keys = list(unique_pairs)
    values = scorer.score_batch([unique_pairs[k] for k in keys])
    scores = dict(zip(keys, values))

    sums = {PairKind.TYPE: 0.0, PairKind.DEPENDENCY: 0.0}
    counts = {PairKind.TYPE: 0, PairKind.DEPENDENCY: 0}
    for example in examples:
        sums[example.kind] += _example_loss(example, scores, config.margin)
        counts[example.kind] += 1
    type_loss = sums[PairKind.TYPE] / counts[PairKind.TYPE] if counts[PairKind.TYPE] else 0.0
    dep_count = counts[PairKind.DEPENDENCY]
    dependency_loss = sums[PairKind.DEPENDENCY] / dep_count if dep_count else 0.0
    return LossReport(
        type_loss=type_loss,
        dependency_loss=dependency_loss,
        joint=type_loss + config.dependency_weight * dependency_loss,
        n_type=counts[PairKind.TYPE],
        n_dependency=dep_count,
    )


class FrozenScorerAdapter(TrainableScorer):
    """Give a fixed scorer the trainable interface for dry-run training.

    Losses are computed but produce no parameter movement; snapshot and
    restore are trivial because there is only one state.
    """

    def __init__(self, inner: EntailmentScorer):
        self.inner = inner

    @property
    def version_tag(self) -> str:
        return self.inner.version_tag

    def score(self, pair: PremiseHypothesisPair) -> float:
        return self.inner.score(pair)

    def score_batch(self, pairs: Sequence[PremiseHypothesisPair]) -> list[float]:
        return self.inner.score_batch(pairs)

    def accumulate_ranking_loss(
        self,
        pos_pair: PremiseHypothesisPair,
        neg_pairs: Sequence[PremiseHypothesisPair],
        margin: float,
        weight: float = 1.0,
    ) -> float:
        pos = self.score(pos_pair)
        total = sum(margin_ranking_loss(pos, self.score(n), margin) for n in neg_pairs)
        return total / len(neg_pairs) if neg_pairs else 0.0

    def apply_update(self) -> None:
        pass

    def snapshot(self) -> str:
        return "frozen"

    def restore(self, tag: str) -> None:
        if tag != "frozen":
            raise ValidationError(f"unknown checkpoint tag {tag!r}")


def train(
    train_set: Dataset,
    dev_set: Dataset,
    vocab: LabelVocabulary,
    scorer: TrainableScorer,
    config: TrainingConfig,
    predict_config: PredictionConfig,
) -> tuple[str, list[dict]]:
    """Run the epoch loop; return the best dev checkpoint tag and the log.

    Negatives are resampled fresh each epoch. Examples are shuffled across
    instances and batched; each batch accumulates weighted losses and
    applies one update. Every ``eval_every`` epochs the dev split is
    predicted and scored, and the scorer is snapshotted when the loose
    macro F1 improves.
    """
    if len(train_set) == 0 or len(dev_set) == 0:
        raise ValidationError("training requires nonempty train and dev sets")
    dev_golds = {inst.id: set(inst.gold_labels) for inst in dev_set}

    best_tag = scorer.snapshot()
    best_f1 = float("-inf")
    log: list[dict] = []
    instances = list(train_set)

    for epoch in range(1, config.max_epochs + 1):
        shuffle_rng = substream(config.seed, "shuffle", str(epoch))
        order = list(range(len(instances)))
        shuffle_rng.shuffle(order)

        # (example, weight, instance index); weights fold the per-instance
        # normalization and the dependency term's global weight into the
        # batch mean.
        weighted: list[tuple[RankedExample, float, int]] = []
        for idx in order:
            instance = instances[idx]
            sample_rng = substream(config.seed, "sampling", str(epoch), instance.id)
            examples = build_examples_for_instance(instance, vocab, config, sample_rng)
            n_type = sum(1 for e in examples if e.kind is PairKind.TYPE)
            n_dep = sum(1 for e in examples if e.kind is PairKind.DEPENDENCY)
            for example in examples:
                if example.kind is PairKind.TYPE:
                    weight = 1.0 / n_type
                else:
                    weight = config.dependency_weight / n_dep
                weighted.append((example, weight, idx))

        per_instance_sums: dict[int, dict[PairKind, float]] = {}
        per_instance_counts: dict[int, dict[PairKind, int]] = {}
        for start in range(0, len(weighted), config.batch_size):
            batch = weighted[start : start + config.batch_size]
            batch_instances = len({idx for _, _, idx in batch})
            for example, weight, idx in batch:
                loss = scorer.accumulate_ranking_loss(
                    example.positive,
                    example.negatives,
                    config.margin,
                    weight=weight / batch_instances,
                )
                sums = per_instance_sums.setdefault(
                    idx, {PairKind.TYPE: 0.0, PairKind.DEPENDENCY: 0.0}
                )
                counts = per_instance_counts.setdefault(
                    idx, {PairKind.TYPE: 0, PairKind.DEPENDENCY: 0}
                )
                sums[example.kind] += loss
                counts[example.kind] += 1
            try:
                scorer.apply_update()
            except Exception as exc:
                try:
                    scorer.restore(best_tag)
                except Exception:
                    pass
                raise TrainingError(
                    f"scorer update failed in epoch {epoch}: {exc}", best_tag=best_tag
                ) from exc

        type_means = []
        dep_means = []
        for idx, counts in per_instance_counts.items():
            sums = per_instance_sums[idx]
            if counts[PairKind.TYPE]:
                type_means.append(sums[PairKind.TYPE] / counts[PairKind.TYPE])
            if counts[PairKind.DEPENDENCY]:
                dep_means.append(sums[PairKind.DEPENDENCY] / counts[PairKind.DEPENDENCY])
        epoch_type_loss = sum(type_means) / len(type_means) if type_means else 0.0
        epoch_dep_loss = sum(dep_means) / len(dep_means) if dep_means else 0.0

        if epoch % config.eval_every == 0:
            preds = predict_dataset(dev_set, vocab, scorer, predict_config)
            dev_p, dev_r, dev_f1 = loose_macro(preds, dev_golds)
            record = {
                "epoch": epoch,
                "dev_p": dev_p,
                "dev_r": dev_r,
                "dev_f1": dev_f1,
                "type_loss": epoch_type_loss,
                "dep_loss": epoch_dep_loss,
            }
            if dev_f1 > best_f1:
                best_f1 = dev_f1
                best_tag = scorer.snapshot()
                record["checkpoint"] = best_tag
            log.append(record)

    return best_tag, log
