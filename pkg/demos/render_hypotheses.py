"""Turn type labels into natural-language hypotheses.

Each candidate label is rendered against a mention in context using one
of three templates. The taxonomic template asserts category membership,
the contextual template hedges on the surrounding sentence, and the
substitution template swaps the type name into the mention's slot.
"""

from entail_typing import (
    LabelVocabulary,
    MentionInstance,
    TemplateKind,
    Tier,
    UnsupportedTemplateError,
    build_dependency_pair,
    build_type_pair,
    induce_dependency_pairs,
    parse_label,
    render_description,
    render_premise,
)


def main():
    instance = MentionInstance(
        id="demo-000000",
        left_tokens=(),
        mention="Jay",
        right_tokens=tuple(
            "is currently working on his Spring 09 collection , which is "
            "being sponsored by the YKK Group .".split()
        ),
        gold_labels=frozenset({"producer", "person"}),
    )
    print("premise:", render_premise(instance))
    print()

    for template in TemplateKind:
        hypothesis = render_description(template, instance, parse_label("producer"))
        print(f"{template.value:>13}: {hypothesis}")
    print()

    # multiword surfaces come from underscores in the raw label
    fancy = parse_label("record_producer")
    print("multiword surface:", render_description(TemplateKind.TAXONOMIC, instance, fancy))
    print()

    # a full pair carries bookkeeping for dumps and caching
    pair = build_type_pair(instance, parse_label("person"), TemplateKind.CONTEXTUAL)
    print("pair premise:   ", pair.premise)
    print("pair hypothesis:", pair.hypothesis)
    print("pair kind:      ", pair.kind.value)
    print()

    # dependency pairs rephrase one hypothesis as the premise of another,
    # which has no meaning under substitution and is rejected there
    partition = {
        Tier.GENERAL: frozenset({"person"}),
        Tier.FINE: frozenset({"sportsman"}),
        Tier.ULTRAFINE: frozenset({"boxer"}),
    }
    vocab = LabelVocabulary.from_raws(["person", "sportsman", "boxer"], partition)
    gold = {vocab.get(r) for r in ("person", "sportsman", "boxer")}
    dep = sorted(
        induce_dependency_pairs(gold, vocab),
        key=lambda d: (d.descendant.raw, d.ancestor.raw),
    )[0]
    rendered = build_dependency_pair(instance, dep, TemplateKind.TAXONOMIC)
    print("dependency premise:   ", rendered.premise)
    print("dependency hypothesis:", rendered.hypothesis)
    try:
        build_dependency_pair(instance, dep, TemplateKind.SUBSTITUTION)
    except UnsupportedTemplateError as exc:
        print("substitution dependency:", exc)


if __name__ == "__main__":
    main()
