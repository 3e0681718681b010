"""Shared builders for test fixtures."""

import json

import pytest

from entail_typing import (
    LabelVocabulary,
    MentionInstance,
    PairKind,
    PremiseHypothesisPair,
    TemplateKind,
    Tier,
)


def mk_instance(id="i-0", left=(), mention="Jay", right=(), gold=("producer",), extras=None):
    return MentionInstance(
        id=id,
        left_tokens=tuple(left),
        mention=mention,
        right_tokens=tuple(right),
        gold_labels=frozenset(gold),
        extras=dict(extras or {}),
    )


def mk_pair(premise="p", hypothesis="h", kind=PairKind.TYPE, instance_id="i-0", label="l"):
    return PremiseHypothesisPair(
        premise=premise,
        hypothesis=hypothesis,
        kind=kind,
        instance_id=instance_id,
        label_raw=label,
        template=TemplateKind.TAXONOMIC,
    )


@pytest.fixture
def tier_vocab():
    """The three-generation boxing vocabulary with a few distractors."""
    partition = {
        Tier.GENERAL: frozenset({"person", "organization", "location"}),
        Tier.FINE: frozenset({"sportsman", "artist"}),
        Tier.ULTRAFINE: frozenset({"boxer", "guitarist"}),
    }
    raws = ["person", "organization", "location", "sportsman", "artist", "boxer", "guitarist"]
    return LabelVocabulary.from_raws(raws, partition)


@pytest.fixture
def onto_vocab():
    """A small path-structured vocabulary."""
    raws = [
        "/location",
        "/location/city",
        "/location/transit/bridge",
        "/person",
        "/person/artist",
        "/organization",
    ]
    return LabelVocabulary.from_raws(raws)


@pytest.fixture
def flat_vocab():
    return LabelVocabulary.from_raws(["currency", "person", "event", "athlete", "location"])


def write_jsonl(path, records):
    path.write_text(
        "".join(json.dumps(r, ensure_ascii=False) + "\n" for r in records),
        encoding="utf-8",
    )


def ufet_record(left, mention, right, y_str, **extras):
    record = {
        "left_context_token": list(left),
        "mention_span": mention,
        "right_context_token": list(right),
        "y_str": list(y_str),
    }
    record.update(extras)
    return record
