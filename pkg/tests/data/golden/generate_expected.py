"""Regenerate the golden end-to-end fixture and its expected outputs.

Run: python3 tests/data/golden/generate_expected.py

Everything written here is deterministic. The expected report is computed
with the brute-force reference implementations in tests/oracles.py and
plain string formatting; the library under test is never imported, so the
committed expectations stay independent of it.
"""

import json
import random
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE.parents[1]))

from oracles import oracle_predict, oracle_rank, oracle_report  # noqa: E402

VOCAB = [
    "athlete", "city", "coach", "company", "country", "event",
    "festival", "musician", "person", "politician", "river", "team",
]

# rows: (left tokens, mention, right tokens, gold labels)
TRAIN = [
    ([], "Serena", ["trains", "daily", "."], ["person", "athlete"]),
    ([], "Dylan", ["toured", "."], ["person", "musician"]),
    ([], "Oslo", ["froze", "."], ["city"]),
    ([], "France", ["paused", "."], ["country"]),
    (["young"], "Ada", ["wrote", "."], ["person"]),
    (["the"], "startup", ["folded", "."], ["company"]),
    (["the"], "squad", ["won", "."], ["team"]),
    (["the"], "gala", ["opened", "."], ["event"]),
    ([], "Vienna", ["voted", "."], ["city"]),
    ([], "Norway", ["and", "Oslo", "celebrated", "."], ["country", "city"]),
    ([], "Bolt", ["retired", "."], ["person", "athlete"]),
    (["the"], "summit", ["closed", "."], ["event"]),
]

TEST = [
    ([], "Serena", ["won", "the", "final", "."], ["person", "athlete"]),
    (["the"], "Thames", ["flooded", "."], ["river"]),
    ([], "Oslo", ["hosted", "talks", "."], ["city"]),
    (["the"], "startup", ["went", "public", "."], ["company"]),
    ([], "Senator Pratt", ["spoke", "."], ["person", "politician"]),
    ([], "Dylan", ["played", "hits", "."], ["person", "musician"]),
    (["the"], "carnival", ["began", "."], ["event", "festival"]),
    ([], "Arsenal", ["won", "away", "."], ["team"]),
    ([], "France", ["voted", "."], ["country"]),
    ([], "Coach Reyes", ["retired", "."], ["person", "coach"]),
    (["the", "city"], "marathon", ["drew", "crowds", "."], ["event"]),
    ([], "Vienna", ["gleamed", "."], ["city"]),
    (["the"], "Nile", ["rose", "."], ["river"]),
    ([], "Keys", ["sang", "late", "."], ["person", "musician"]),
    (["the"], "team", ["lost", "."], ["team"]),
    ([], "Brazil", ["rejoiced", "."], ["country"]),
    ([], "Bolt", ["sprinted", "."], ["person", "athlete"]),
    (["the"], "festival", ["closed", "."], ["festival", "event"]),
    ([], "Mayor Chen", ["resigned", "."], ["person", "politician"]),
    ([], "Ferguson", ["managed", "well", "."], ["person", "coach"]),
]

THRESHOLD = 0.5
BUCKET_EDGES = [0, 1, 3]

# instances whose scores all sit below the threshold, forcing the fallback
FALLBACK = {
    3: {"company": 0.45},                     # top1 recovers the gold label
    11: {"city": 0.45, "country": 0.45},      # tie at the top, broken by label text
    14: {"person": 0.45, "team": 0.40},       # top1 picks the wrong label
}
# deliberate scoring mistakes above/below the threshold
FALSE_POSITIVE = {0: ("coach", 0.58), 8: ("city", 0.61)}
FALSE_NEGATIVE = {18: ("politician", 0.42)}


def premise_of(row):
    left, mention, right, _ = row
    return " ".join(left + [mention] + right)


def hypothesis_of(row, label):
    return f"{row[1]} is a {label}."


def build_scores():
    rng = random.Random(20260817)
    score_maps = []
    for index, row in enumerate(TEST):
        gold = set(row[3])
        scores = {}
        for label in VOCAB:
            if index in FALLBACK:
                lo, hi = (0.30, 0.44) if label in gold else (0.05, 0.30)
            elif label in gold:
                lo, hi = 0.55, 0.92
            else:
                lo, hi = 0.08, 0.45
            scores[label] = round(rng.uniform(lo, hi), 3)
        for label, value in FALLBACK.get(index, {}).items():
            scores[label] = value
        if index in FALSE_POSITIVE:
            label, value = FALSE_POSITIVE[index]
            assert label not in gold
            scores[label] = value
        if index in FALSE_NEGATIVE:
            label, value = FALSE_NEGATIVE[index]
            assert label in gold
            scores[label] = value
        if index in FALLBACK:
            assert max(scores.values()) < THRESHOLD, (index, scores)
        else:
            assert any(scores[g] >= THRESHOLD for g in gold), (index, scores)
        score_maps.append(scores)
    return score_maps


def bucket_assignments():
    counts = {}
    for _, _, _, labels in TRAIN:
        for label in labels:
            counts[label] = counts.get(label, 0) + 1
    test_labels = set()
    for _, _, _, labels in TEST:
        test_labels.update(labels)
    sets = {}
    for label in sorted(test_labels):
        count = counts.get(label, 0)
        for i, lo in enumerate(BUCKET_EDGES):
            hi = BUCKET_EDGES[i + 1] if i + 1 < len(BUCKET_EDGES) else None
            if count >= lo and (hi is None or count < hi):
                sets.setdefault((lo, hi), set()).add(label)
                break
    named = {}
    for (lo, hi), labels in sets.items():
        name = f"[{lo},{hi})" if hi is not None else f"[{lo},inf)"
        named[name] = ((lo, hi), labels)
    return named


def write_jsonl(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")


def main():
    score_maps = build_scores()

    write_jsonl(
        HERE / "corpus_train.jsonl",
        [
            {
                "left_context_token": left,
                "mention_span": mention,
                "right_context_token": right,
                "y_str": labels,
            }
            for left, mention, right, labels in TRAIN
        ],
    )
    write_jsonl(
        HERE / "corpus_test.jsonl",
        [
            {
                "left_context_token": left,
                "mention_span": mention,
                "right_context_token": right,
                "y_str": labels,
            }
            for left, mention, right, labels in TEST
        ],
    )
    (HERE / "vocab.txt").write_text(
        "".join(label + "\n" for label in VOCAB), encoding="utf-8"
    )

    table_rows = []
    for row, scores in zip(TEST, score_maps):
        for label in VOCAB:
            table_rows.append(
                {
                    "premise": premise_of(row),
                    "hypothesis": hypothesis_of(row, label),
                    "score": scores[label],
                }
            )
    write_jsonl(HERE / "table.jsonl", table_rows)

    config = {
        "train_path": "corpus_train.jsonl",
        "test_path": "corpus_test.jsonl",
        "vocab_path": "vocab.txt",
        "scorer": "table:table.jsonl",
        "template": "taxonomic",
        "threshold": THRESHOLD,
        "fallback": "top1",
        "split": "test",
        "bucket_edges": BUCKET_EDGES,
        "seed": 7,
        "out_dir": "out",
    }
    (HERE / "config.json").write_text(
        json.dumps(config, indent=2) + "\n", encoding="utf-8"
    )

    chosen_sets = [
        oracle_predict(scores, THRESHOLD, "top1") for scores in score_maps
    ]
    gold_sets = [set(row[3]) for row in TEST]
    report = oracle_report(chosen_sets, gold_sets, bucket_assignments())
    (HERE / "expected_report.json").write_text(
        json.dumps(report, indent=2) + "\n", encoding="utf-8"
    )

    expected_predictions = {
        f"test-{i:06d}": sorted(chosen)
        for i, chosen in enumerate(chosen_sets)
    }
    (HERE / "expected_predictions.json").write_text(
        json.dumps(expected_predictions, indent=2) + "\n", encoding="utf-8"
    )

    rankings = {
        f"test-{i:06d}": oracle_rank(scores) for i, scores in enumerate(score_maps)
    }
    (HERE / "expected_top1.json").write_text(
        json.dumps({k: v[0] for k, v in rankings.items()}, indent=2) + "\n",
        encoding="utf-8",
    )
    print("golden fixture regenerated in", HERE)


if __name__ == "__main__":
    main()
