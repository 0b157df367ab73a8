"""Human-judgment collection and aggregation.

Native speakers judge Malayalam (source, candidate) pairs as paraphrase /
not_paraphrase / skip. Assignment targets a fixed overlap per pair; votes
aggregate into a per-pair high-confidence verdict and per-pipeline rates.
The single source of truth is an append-only JSONL journal: every accepted
judgment is durably on disk before the caller hears "accepted", and replaying
the journal reconstructs the store bit-for-bit.
"""

import json
import os
import threading
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable

from .corpus import PIPELINES, CandidateRecord, SentencePair

LABELS = ("paraphrase", "not_paraphrase", "skip")
_VOTE_LABELS = ("paraphrase", "not_paraphrase")  # skip is an abstention

ACCEPTED = "accepted"
DUPLICATE = "duplicate"


def format_ts(ts: datetime) -> str:
    """RFC 3339 UTC with a Z suffix, microsecond precision."""
    return (
        ts.astimezone(timezone.utc)
        .isoformat(timespec="microseconds")
        .replace("+00:00", "Z")
    )


def parse_ts(text: str) -> datetime:
    # datetime.fromisoformat on 3.10 rejects the Z suffix
    ts = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        raise ValueError(f"timestamp {text!r} lacks a UTC offset")
    return ts


@dataclass(frozen=True)
class Judgment:
    pair_id: str
    annotator_id: str
    label: str
    ts: datetime

    def __post_init__(self):
        if not self.pair_id:
            raise ValueError("pair_id must be non-empty")
        if not self.annotator_id:
            raise ValueError("annotator_id must be non-empty")
        if self.label not in LABELS:
            raise ValueError(f"label must be one of {LABELS}, got {self.label!r}")
        if self.ts.tzinfo is None:
            raise ValueError("ts must be timezone-aware")

    def to_json_obj(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "annotator_id": self.annotator_id,
            "label": self.label,
            "ts": format_ts(self.ts),
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "Judgment":
        return cls(
            pair_id=obj["pair_id"],
            annotator_id=obj["annotator_id"],
            label=obj["label"],
            ts=parse_ts(obj["ts"]),
        )


@dataclass(frozen=True)
class OverlapPolicy:
    target_overlap: int = 5
    min_votes: int = 3
    threshold: float = 0.8

    def __post_init__(self):
        if self.target_overlap < 1:
            raise ValueError("target_overlap must be >= 1")
        if self.min_votes < 1:
            raise ValueError("min_votes must be >= 1")
        if not 0.5 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0.5, 1], got {self.threshold}")


@dataclass(frozen=True)
class AggregatedLabel:
    pair_id: str
    votes_paraphrase: int
    votes_not: int
    votes_total: int
    high_confidence_correct: bool

    def to_json_obj(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "votes_paraphrase": self.votes_paraphrase,
            "votes_not": self.votes_not,
            "votes_total": self.votes_total,
            "high_confidence_correct": self.high_confidence_correct,
        }


@dataclass
class AggregateResult:
    labels: list[AggregatedLabel]
    rates: dict[str, float]  # pipeline -> fraction high-confidence correct


def pipeline_of(pair_id: str) -> str | None:
    """Pairs built from candidates carry ids like "m2:p0007"."""
    head = pair_id.split(":", 1)[0]
    return head if head in PIPELINES else None


def pairs_from_candidates(records: Iterable[CandidateRecord]) -> list[SentencePair]:
    """Annotation dataset from generated candidates; error records are dropped."""
    pairs: list[SentencePair] = []
    seen: set[str] = set()
    for record in records:
        if not record.ok:
            continue
        pair_id = f"{record.pipeline}:{record.id}"
        if pair_id in seen:
            raise ValueError(f"duplicate pair id {pair_id!r}")
        seen.add(pair_id)
        pairs.append(
            SentencePair(
                id=pair_id,
                source=record.source_ml,
                candidate=record.paraphrase_ml,
                source_lang="ml",
                candidate_lang="ml",
            )
        )
    return pairs


def aggregate(
    judgments: Iterable[Judgment],
    policy: OverlapPolicy,
    pair_ids: Iterable[str] | None = None,
) -> AggregateResult:
    """Per-pair verdicts plus per-pipeline high-confidence rates.

    Skips are excluded from votes. A pair is high-confidence correct when it
    has at least min_votes votes and the paraphrase share meets the threshold.
    Rates divide by every pair of the pipeline (pass pair_ids for the full
    universe; unjudged pairs count as not-correct), so missing annotations
    can only lower a rate, never raise it.
    """
    votes: dict[str, Counter] = {}
    for judgment in judgments:
        if judgment.label in _VOTE_LABELS:
            votes.setdefault(judgment.pair_id, Counter())[judgment.label] += 1
        else:
            votes.setdefault(judgment.pair_id, Counter())

    universe = set(votes)
    if pair_ids is not None:
        universe |= set(pair_ids)

    labels: list[AggregatedLabel] = []
    per_pipeline: dict[str, list[bool]] = {}
    for pair_id in sorted(universe):
        counter = votes.get(pair_id, Counter())
        votes_p = counter["paraphrase"]
        votes_n = counter["not_paraphrase"]
        total = votes_p + votes_n
        correct = total >= policy.min_votes and votes_p / total >= policy.threshold
        labels.append(
            AggregatedLabel(
                pair_id=pair_id,
                votes_paraphrase=votes_p,
                votes_not=votes_n,
                votes_total=total,
                high_confidence_correct=correct,
            )
        )
        pipeline = pipeline_of(pair_id)
        if pipeline is not None:
            per_pipeline.setdefault(pipeline, []).append(correct)

    rates = {
        pipeline: sum(flags) / len(flags)
        for pipeline, flags in sorted(per_pipeline.items())
    }
    return AggregateResult(labels=labels, rates=rates)


def agreement_kappa(judgments: Iterable[Judgment]) -> float | None:
    """Fleiss' kappa over {paraphrase, not_paraphrase}.

    Skips are excluded first; items are then filtered to the modal rater
    count so every remaining item has the same number of raters. Returns
    None when expected agreement is 1 (kappa undefined), never NaN.
    """
    by_pair: dict[str, Counter] = {}
    for judgment in judgments:
        if judgment.label in _VOTE_LABELS:
            by_pair.setdefault(judgment.pair_id, Counter())[judgment.label] += 1

    totals = [sum(c.values()) for c in by_pair.values() if sum(c.values()) >= 2]
    if not totals:
        raise ValueError("need at least 2 items with at least 2 non-skip votes each")
    frequency = Counter(totals)
    top = max(frequency.values())
    n = max(count for count, freq in frequency.items() if freq == top)
    items = [c for c in by_pair.values() if sum(c.values()) == n]
    if len(items) < 2:
        raise ValueError(f"need at least 2 items with the modal rater count ({n})")

    big_n = len(items)
    category_totals = {lab: sum(c[lab] for c in items) for lab in _VOTE_LABELS}
    p = {lab: t / (big_n * n) for lab, t in category_totals.items()}
    p_bar = sum(
        sum(c[lab] * (c[lab] - 1) for lab in _VOTE_LABELS) / (n * (n - 1))
        for c in items
    ) / big_n
    p_e = sum(v * v for v in p.values())
    if 1.0 - p_e == 0.0:
        return None
    return (p_bar - p_e) / (1.0 - p_e)


class JournalCorruptionError(RuntimeError):
    """Unreadable complete journal line; str() is "line N: <problem>"."""

    def __init__(self, line: int, message: str, path: Path | None = None):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.path = path


@dataclass
class RecoveredJournal:
    judgments: list[Judgment]
    quarantined: bytes | None  # truncated final line moved aside, if any


class Journal:
    """Append-only JSONL of judgments; the crash-safe system of record.

    Appends are flushed and fsynced before returning. Recovery keeps every
    complete line, repairs a missing final newline, and quarantines an
    unparseable final line fragment (the torn write of a crash) to a
    .quarantine sidecar. An unparseable *complete* line is real corruption
    and raises instead.
    """

    def __init__(self, path: Path):
        self.path = Path(path)

    def append(self, judgment: Judgment) -> None:
        line = json.dumps(judgment.to_json_obj(), ensure_ascii=False) + "\n"
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with self.path.open("a", encoding="utf-8") as fh:
            fh.write(line)
            fh.flush()
            os.fsync(fh.fileno())

    def recover(self) -> RecoveredJournal:
        if not self.path.exists():
            return RecoveredJournal(judgments=[], quarantined=None)
        raw = self.path.read_bytes()
        if not raw:
            return RecoveredJournal(judgments=[], quarantined=None)

        body, tail = raw, b""
        if not raw.endswith(b"\n"):
            cut = raw.rfind(b"\n") + 1  # 0 when the file is a single torn line
            body, tail = raw[:cut], raw[cut:]

        judgments: list[Judgment] = []
        seen: set[tuple[str, str]] = set()
        lines = body.split(b"\n")[:-1] if body else []
        for lineno, line in enumerate(lines, start=1):
            judgment = self._parse_line(line, lineno)
            key = (judgment.pair_id, judgment.annotator_id)
            if key in seen:  # replay mirrors submit: later duplicates lose
                continue
            seen.add(key)
            judgments.append(judgment)

        quarantined = None
        if tail:
            try:
                judgment = self._parse_line(tail, len(lines) + 1)
            except JournalCorruptionError:
                # torn final write: move it aside, keep the journal clean
                sidecar = self.path.with_name(self.path.name + ".quarantine")
                with sidecar.open("ab") as fh:
                    fh.write(tail + b"\n")
                with self.path.open("r+b") as fh:
                    fh.truncate(len(body))
                quarantined = tail
            else:
                key = (judgment.pair_id, judgment.annotator_id)
                if key not in seen:
                    judgments.append(judgment)
                with self.path.open("ab") as fh:  # repair the missing newline
                    fh.write(b"\n")
        return RecoveredJournal(judgments=judgments, quarantined=quarantined)

    def _parse_line(self, line: bytes, lineno: int) -> Judgment:
        try:
            obj = json.loads(line.decode("utf-8"))
            if not isinstance(obj, dict):
                raise ValueError("expected a JSON object")
            for key in ("pair_id", "annotator_id", "label", "ts"):
                if key not in obj:
                    raise ValueError(f"missing field {key}")
            return Judgment.from_json_obj(obj)
        except (ValueError, TypeError, AttributeError, UnicodeDecodeError) as exc:
            message = getattr(exc, "msg", None) or str(exc)
            raise JournalCorruptionError(lineno, message, self.path) from exc


class AnnotationStore:
    """In-memory judgment state over a fixed pair set, journal-backed.

    Thread-safe: a single lock serializes submissions and snapshots, so the
    journal is written by one appender at a time.
    """

    def __init__(
        self,
        pairs: list[SentencePair],
        policy: OverlapPolicy = OverlapPolicy(),
        journal: Journal | None = None,
    ):
        self.pairs: dict[str, SentencePair] = {}
        for pair in pairs:
            if pair.id in self.pairs:
                raise ValueError(f"duplicate pair id {pair.id!r}")
            self.pairs[pair.id] = pair
        self._order = sorted(self.pairs)
        self.policy = policy
        self.journal = journal
        self._judgments: dict[tuple[str, str], Judgment] = {}
        self._counts: Counter = Counter()  # pair_id -> stored judgments
        self._lock = threading.Lock()
        self.recovered: RecoveredJournal | None = None
        if journal is not None:
            self.recovered = journal.recover()
            for lineno, judgment in enumerate(self.recovered.judgments, start=1):
                if judgment.pair_id not in self.pairs:
                    raise JournalCorruptionError(
                        lineno, f"unknown pair_id {judgment.pair_id!r}", journal.path
                    )
                self._remember(judgment)

    def _remember(self, judgment: Judgment) -> None:
        self._judgments[(judgment.pair_id, judgment.annotator_id)] = judgment
        self._counts[judgment.pair_id] += 1

    def judgments(self) -> list[Judgment]:
        with self._lock:
            return list(self._judgments.values())

    def next_task(self, annotator_id: str) -> SentencePair | None:
        """Fewest-judged pair this annotator has not seen; lowest id on ties."""
        if not annotator_id:
            raise ValueError("annotator_id must be non-empty")
        with self._lock:
            best: tuple[int, str] | None = None
            for pair_id in self._order:
                count = self._counts[pair_id]
                if count >= self.policy.target_overlap:
                    continue
                if (pair_id, annotator_id) in self._judgments:
                    continue
                if best is None or count < best[0]:
                    best = (count, pair_id)
            return self.pairs[best[1]] if best else None

    def submit(
        self, pair_id: str, annotator_id: str, label: str, ts: datetime | None = None
    ) -> str:
        """Returns ACCEPTED or DUPLICATE; durably journaled before returning."""
        if pair_id not in self.pairs:
            raise KeyError(f"unknown pair_id {pair_id!r}")
        judgment = Judgment(
            pair_id=pair_id,
            annotator_id=annotator_id,
            label=label,
            ts=ts if ts is not None else datetime.now(timezone.utc),
        )
        with self._lock:
            if (pair_id, annotator_id) in self._judgments:
                return DUPLICATE
            if self.journal is not None:
                self.journal.append(judgment)
            self._remember(judgment)
            return ACCEPTED

    def progress(self) -> dict:
        with self._lock:
            per_annotator: Counter = Counter()
            for _, annotator_id in self._judgments:
                per_annotator[annotator_id] += 1
            complete = sum(
                1
                for pair_id in self._order
                if self._counts[pair_id] >= self.policy.target_overlap
            )
            return {
                "pairs_total": len(self.pairs),
                "pairs_complete": complete,
                "judgments_total": len(self._judgments),
                "per_annotator": dict(sorted(per_annotator.items())),
            }

    def pair_info(self, pair_id: str) -> dict:
        if pair_id not in self.pairs:
            raise KeyError(f"unknown pair_id {pair_id!r}")
        pair = self.pairs[pair_id]
        with self._lock:
            votes = Counter(
                j.label for j in self._judgments.values() if j.pair_id == pair_id
            )
        return {
            "pair_id": pair_id,
            "source": pair.source,
            "candidate": pair.candidate,
            "votes": {label: votes[label] for label in LABELS},
        }

    def aggregate_all(self) -> AggregateResult:
        return aggregate(self.judgments(), self.policy, pair_ids=self.pairs)
