#!/usr/bin/env python3
"""Regenerate the frozen brute-force BLEU sweep under tests/data/.

Enumerates every token list of length 1..5 over the alphabet {a, b, c}
(363 sequences, 131769 ordered pairs) and runs the nested-loop oracle from
tests/oracles.py on each pair. The resulting doubles are written gzipped in
row-major pair order next to a small JSON header describing the enumeration,
so the equivalence test can replay the sweep against the library without
paying the oracle's runtime. Rerunning this script must be a no-op.
"""

import gzip
import hashlib
import itertools
import json
import sys
import time
from array import array
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from oracles import bleu_oracle  # noqa: E402

ALPHABET = "abc"
MAX_LEN = 5
DATA_DIR = ROOT / "tests" / "data"
PAYLOAD_PATH = DATA_DIR / "bleu_oracle_sweep.bin.gz"
HEADER_PATH = DATA_DIR / "bleu_oracle_sweep.json"


def enumerate_sequences() -> list[list[str]]:
    seqs: list[list[str]] = []
    for length in range(1, MAX_LEN + 1):
        seqs.extend(list(p) for p in itertools.product(ALPHABET, repeat=length))
    return seqs


def main() -> None:
    seqs = enumerate_sequences()
    values = array("d")
    started = time.perf_counter()
    for cand in seqs:
        for ref in seqs:
            values.append(bleu_oracle(cand, ref))
    elapsed = time.perf_counter() - started

    raw = values.tobytes()
    # fixed mtime so regeneration is byte-stable
    with open(PAYLOAD_PATH, "wb") as fh:
        with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0) as gz:
            gz.write(raw)
    header = {
        "alphabet": ALPHABET,
        "max_len": MAX_LEN,
        "sequences": len(seqs),
        "pairs": len(values),
        "order": "row-major, candidate outer, shorter lengths first",
        "dtype": "float64 little-endian",
        "sha256": hashlib.sha256(raw).hexdigest(),
    }
    HEADER_PATH.write_text(json.dumps(header, indent=2) + "\n", encoding="utf-8")

    print(f"{len(seqs)} sequences, {len(values)} pairs in {elapsed:.2f}s")
    print(f"wrote {PAYLOAD_PATH} ({PAYLOAD_PATH.stat().st_size} bytes)")
    print(f"wrote {HEADER_PATH}")


if __name__ == "__main__":
    if sys.byteorder != "little":
        sys.exit("refusing to freeze on a big-endian host")
    main()
