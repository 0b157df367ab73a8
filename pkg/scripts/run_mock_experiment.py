#!/usr/bin/env python3
"""Run the whole offline workflow against the bundled mock config.

generate -> score -> simulated annotation -> aggregate -> report, writing
every artifact under out/. No network and no real models: the mock backends
are deterministic, and five seeded annotators with per-pipeline propensities
stand in for the crowd. The markdown table printed at the end is the report
command's output, unedited.
"""

import random
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from parabench.annotation import AnnotationStore, Journal, pairs_from_candidates
from parabench.cli import load_config, main
from parabench.corpus import read_candidates_jsonl

CONFIG = ROOT / "configs" / "mock.toml"
OUT = ROOT / "out"
SEED = 7
ANNOTATORS = [f"sim{i}" for i in range(1, 6)]
# rough chance a simulated judge calls the pipeline's output a paraphrase
PROPENSITY = {"m1": 0.7, "m2": 0.85, "m3": 0.5, "m4": 0.35}
SKIP_RATE = 0.05


def run(argv: list[str]) -> None:
    print("$ parabench " + " ".join(argv))
    code = main(argv)
    if code != 0:
        sys.exit(f"step failed with exit code {code}")


def simulate_annotators(config) -> None:
    records = read_candidates_jsonl(config.paths["candidates"])
    pairs = pairs_from_candidates(records)
    journal_path = Path(config.paths["journal"])
    journal_path.unlink(missing_ok=True)  # fresh run, fresh journal
    store = AnnotationStore(
        pairs, policy=config.policy, journal=Journal(journal_path))

    rng = random.Random(SEED)
    busy = True
    while busy:
        busy = False
        for annotator in ANNOTATORS:
            task = store.next_task(annotator)
            if task is None:
                continue
            busy = True
            pipeline = task.id.split(":", 1)[0]
            if rng.random() < SKIP_RATE:
                label = "skip"
            elif rng.random() < PROPENSITY.get(pipeline, 0.5):
                label = "paraphrase"
            else:
                label = "not_paraphrase"
            store.submit(task.id, annotator, label)

    progress = store.progress()
    print(f"simulated {progress['judgments_total']} judgments over "
          f"{progress['pairs_complete']}/{progress['pairs_total']} pairs")


def main_script() -> None:
    OUT.mkdir(exist_ok=True)
    config = load_config(CONFIG)
    candidates = str(config.paths["candidates"])
    journal = str(config.paths["journal"])
    labels = str(OUT / "labels.jsonl")
    report_path = str(config.paths["reports"])

    partials = []
    for pipeline in ("m1", "m2", "m3", "m4"):
        part = str(OUT / f"candidates-{pipeline}.jsonl")
        run(["generate", "--config", str(CONFIG), "--pipeline", pipeline,
             "--seed", str(SEED), "--out", part])
        partials.append(part)
    with open(candidates, "w", encoding="utf-8") as merged:
        for part in partials:
            merged.write(Path(part).read_text(encoding="utf-8"))

    run(["score", "--in", candidates])
    simulate_annotators(config)
    run(["aggregate", "--journal", journal, "--config", str(CONFIG),
         "--out", labels])
    run(["report", "--scores", candidates, "--labels", labels,
         "--format", "markdown", "--out", report_path])
    print()
    print(Path(report_path).read_text(encoding="utf-8"), end="")


if __name__ == "__main__":
    main_script()
