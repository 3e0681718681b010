"""Derive is-a dependencies between labels and sample training negatives.

Two label space layouts support dependency induction. Hierarchical path
labels like /location/city carry their ancestry in the label text, and
every strict path prefix found or implied in the gold set becomes an
ancestor. Flat labels with a coarseness partition instead pair every
gold label with each strictly coarser gold label.
"""

import random

from entail_typing import (
    LabelVocabulary,
    SamplingError,
    Tier,
    induce_dependency_pairs,
    positive_label_set,
    sample_negative_ancestor,
    sample_negative_type,
)


def show_pairs(title, gold_raws, vocab):
    gold = {vocab.get(r) for r in gold_raws}
    pairs = sorted(
        induce_dependency_pairs(gold, vocab),
        key=lambda d: (d.descendant.raw, d.ancestor.raw),
    )
    print(title)
    print("  gold:", sorted(gold_raws))
    for pair in pairs:
        print(f"  {pair.descendant.raw}  ->  {pair.ancestor.raw}")
    if not pairs:
        print("  (no pairs)")
    positives = sorted(l.raw for l in positive_label_set(gold, vocab))
    print("  positives:", positives)
    print()
    return gold, pairs


def main():
    partition = {
        Tier.GENERAL: frozenset({"person", "organization", "location"}),
        Tier.FINE: frozenset({"sportsman", "artist"}),
        Tier.ULTRAFINE: frozenset({"boxer", "guitarist"}),
    }
    tiered = LabelVocabulary.from_raws(
        ["person", "organization", "location", "sportsman", "artist", "boxer", "guitarist"],
        partition,
    )
    show_pairs("coarseness tiers", ["person", "sportsman", "boxer"], tiered)

    paths = LabelVocabulary.from_raws(
        ["/location", "/location/city", "/person", "/person/artist", "/organization"]
    )
    # the ancestor /location joins the positive set even though only the
    # leaf was annotated
    show_pairs("path hierarchy", ["/location/city"], paths)

    flat = LabelVocabulary.from_raws(["currency", "person", "event"])
    show_pairs("flat labels", ["currency"], flat)

    # negatives are drawn uniformly outside the positive set
    rng = random.Random(7)
    gold = {tiered.get(r) for r in ("person", "sportsman", "boxer")}
    positives = {label.raw for label in positive_label_set(gold, tiered)}
    draws = sorted({sample_negative_type(tiered, positives, rng).raw for _ in range(200)})
    print("type negatives drawn over 200 tries:", draws)

    # ancestor negatives respect the ancestor's tier and skip true ancestors
    pair = sorted(
        induce_dependency_pairs(gold, tiered),
        key=lambda d: (d.descendant.raw, d.ancestor.raw),
    )[1]
    print(f"for the pair ({pair.descendant.raw}, {pair.ancestor.raw}):")
    true_ancestors = {"person", "sportsman"}
    draws = set()
    for _ in range(200):
        try:
            draws.add(sample_negative_ancestor(pair, tiered, true_ancestors, rng).raw)
        except SamplingError as exc:
            print("  sampling failed:", exc)
            break
    print("  ancestor negatives:", sorted(draws))


if __name__ == "__main__":
    main()
