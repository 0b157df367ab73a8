#!/usr/bin/env python3
"""Regenerate tests/data/journal_fixture.jsonl and its frozen expectation.

The journal is a deterministic simulated annotation run: 24 pairs across the
four pipelines, five annotators, seeded label noise, a few duplicate
submissions, and one all-skip pair. The expected aggregation is computed here
with the naive oracle (exact rational threshold comparison), NOT with the
library, so the committed expectation stays independent of the code under
test. Rerunning this script must be a no-op unless the fixture design changes.
"""

import json
import random
import sys
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import aggregate_oracle  # noqa: E402

SEED = 2026
MIN_VOTES = 3
THRESHOLD = Fraction(4, 5)
ANNOTATORS = [f"a{i}" for i in range(1, 6)]
# rough per-pipeline chance a judge calls the pair a paraphrase
PROPENSITY = {"m1": 0.55, "m2": 0.60, "m3": 0.45, "m4": 0.30}
SKIP_RATE = 0.1


def build_triples() -> list[tuple[str, str, str]]:
    rng = random.Random(SEED)
    triples = []
    for pipeline in ("m1", "m2", "m3", "m4"):
        for i in range(1, 7):
            pair_id = f"{pipeline}:p{i:04d}"
            for annotator in ANNOTATORS:
                roll = rng.random()
                if roll < SKIP_RATE:
                    label = "skip"
                elif roll < SKIP_RATE + PROPENSITY[pipeline]:
                    label = "paraphrase"
                else:
                    label = "not_paraphrase"
                triples.append((pair_id, annotator, label))
    # one pair every judge declined
    for annotator in ANNOTATORS:
        triples.append(("m4:p0006", annotator, "skip"))
    triples = [t for t in triples if not (t[0] == "m4:p0006" and t[2] != "skip")]
    # duplicate submissions: replays must keep the first and drop these
    triples.append(("m1:p0001", "a1", "not_paraphrase"))
    triples.append(("m2:p0003", "a4", "skip"))
    return triples


def main() -> None:
    triples = build_triples()
    data_dir = ROOT / "tests" / "data"

    lines = []
    for n, (pair_id, annotator, label) in enumerate(triples):
        ts = f"2026-08-19T10:{n // 60:02d}:{n % 60:02d}.000000Z"
        lines.append(json.dumps({
            "pair_id": pair_id,
            "annotator_id": annotator,
            "label": label,
            "ts": ts,
        }, ensure_ascii=False))
    (data_dir / "journal_fixture.jsonl").write_text(
        "\n".join(lines) + "\n", encoding="utf-8")

    universe = sorted({f"{p}:p{i:04d}" for p in PROPENSITY for i in range(1, 7)})
    verdicts = aggregate_oracle(triples, min_votes=MIN_VOTES, threshold=THRESHOLD)

    labels = {}
    rates: dict[str, Fraction] = {}
    counts: dict[str, int] = {}
    for pair_id in universe:
        votes_p, votes_n, correct = verdicts.get(pair_id, (0, 0, False))
        labels[pair_id] = {
            "votes_paraphrase": votes_p,
            "votes_not": votes_n,
            "votes_total": votes_p + votes_n,
            "high_confidence_correct": correct,
        }
        pipeline = pair_id.split(":", 1)[0]
        rates[pipeline] = rates.get(pipeline, Fraction(0)) + int(correct)
        counts[pipeline] = counts.get(pipeline, 0) + 1

    expected = {
        "policy": {"target_overlap": 5, "min_votes": MIN_VOTES, "threshold": 0.8},
        "labels": labels,
        "rates": {p: float(rates[p] / counts[p]) for p in sorted(rates)},
    }
    (data_dir / "journal_fixture_expected.json").write_text(
        json.dumps(expected, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"wrote {len(lines)} journal lines, {len(universe)} expected labels")


if __name__ == "__main__":
    main()
