"""Hypothesis templates: turn (mention, label) into entailment-ready text.

Three template families are supported. Two wrap the mention and label
surface in a fixed frame ("X is a Y.", "In this context, X is referring to
Y.") and one substitutes the label surface into the original sentence at
the mention's position. The same family is used for training pairs and for
candidate ranking at inference time.
"""

import enum
from dataclasses import dataclass

from .corpus import MentionInstance, mention_span_in_premise, render_premise
from .errors import RenderingError, UnsupportedTemplateError, ValidationError
from .labelspace import DependencyPair, TypeLabel


class TemplateKind(enum.Enum):
    TAXONOMIC = "taxonomic"
    CONTEXTUAL = "contextual"
    SUBSTITUTION = "substitution"


class PairKind(enum.Enum):
    TYPE = "type"
    DEPENDENCY = "dependency"


@dataclass(frozen=True)
class PremiseHypothesisPair:
    """One scorer input: a premise sentence and a candidate type description.

    Type-kind pairs ground a label description against the mention's
    sentence. Dependency-kind pairs put two label descriptions in an
    entailment relation (finer description as premise, coarser as
    hypothesis); ``label_raw`` then names the descendant.
    """

    premise: str
    hypothesis: str
    kind: PairKind
    instance_id: str
    label_raw: str
    template: TemplateKind

    def __post_init__(self):
        if not self.premise:
            raise ValidationError(f"empty premise for instance {self.instance_id!r}")
        if not self.hypothesis:
            raise ValidationError(f"empty hypothesis for instance {self.instance_id!r}")


def render_description(
    template: TemplateKind, instance: MentionInstance, label: TypeLabel
) -> str:
    """Render the hypothesis asserting that the mention has the given type."""
    if not instance.mention:
        raise RenderingError(
            f"instance {instance.id!r} has an empty mention; no description possible"
        )
    if not label.surface:
        raise RenderingError(f"label {label.raw!r} has an empty surface form")
    if template is TemplateKind.TAXONOMIC:
        return f"{instance.mention} is a {label.surface}."
    if template is TemplateKind.CONTEXTUAL:
        return f"In this context, {instance.mention} is referring to {label.surface}."
    premise = render_premise(instance)
    start, end = mention_span_in_premise(instance)
    if premise[start:end] != instance.mention:
        raise RenderingError(
            f"mention {instance.mention!r} cannot be located in the premise of "
            f"instance {instance.id!r}"
        )
    surface = label.surface
    if start == 0:
        surface = surface[0].upper() + surface[1:]
    return premise[:start] + surface + premise[end:]


def build_type_pair(
    instance: MentionInstance, label: TypeLabel, template: TemplateKind
) -> PremiseHypothesisPair:
    """Pair the instance's sentence with one candidate type description."""
    return PremiseHypothesisPair(
        premise=render_premise(instance),
        hypothesis=render_description(template, instance, label),
        kind=PairKind.TYPE,
        instance_id=instance.id,
        label_raw=label.raw,
        template=template,
    )


def build_dependency_pair(
    instance: MentionInstance, dep: DependencyPair, template: TemplateKind
) -> PremiseHypothesisPair:
    """Pair a finer type description (premise) with a coarser one (hypothesis).

    Only the framed templates apply: substituting two different labels into
    the sentence yields two unrelated sentences, so substitution runs must
    skip dependency pairs.
    """
    if template is TemplateKind.SUBSTITUTION:
        raise UnsupportedTemplateError(
            "dependency pairs cannot be rendered with the substitution template"
        )
    return PremiseHypothesisPair(
        premise=render_description(template, instance, dep.descendant),
        hypothesis=render_description(template, instance, dep.ancestor),
        kind=PairKind.DEPENDENCY,
        instance_id=instance.id,
        label_raw=dep.descendant.raw,
        template=template,
    )


def pair_to_record(pair: PremiseHypothesisPair) -> dict:
    """Serialize a pair for the JSONL dump consumed by external tooling."""
    return {
        "premise": pair.premise,
        "hypothesis": pair.hypothesis,
        "kind": pair.kind.value,
        "instance_id": pair.instance_id,
        "label": pair.label_raw,
        "template": pair.template.value,
    }
