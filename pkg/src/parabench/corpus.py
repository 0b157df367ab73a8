"""Data model and file I/O: sentence pairs, synonym lexicons, candidate records.

Formats are line-oriented on purpose (TSV, CSV, JSONL) so corpora stream, diff,
and append cleanly. All readers report failures with 1-based line numbers.
"""

import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

from .backends import BeamParams

LANGS = ("en", "ml")
PIPELINES = ("m1", "m2", "m3", "m4")
METRIC_NAMES = ("bleu", "meteor", "cosine")

# candidates JSONL key order, fixed for byte-stable output
_RECORD_KEYS = (
    "id",
    "pipeline",
    "source_en",
    "source_ml",
    "paraphrase_ml",
    "params",
    "scores",
    "unchanged",
)


class CorpusFormatError(ValueError):
    """Malformed input line; str() is "line N: <problem>", path kept separately."""

    def __init__(self, line: int, message: str, path: Path | None = None):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.path = path


@dataclass(frozen=True)
class SentencePair:
    id: str
    source: str
    candidate: str
    source_lang: str
    candidate_lang: str

    def __post_init__(self):
        if not self.id:
            raise ValueError("pair id must be non-empty")
        if not self.source.strip():
            raise ValueError(f"pair {self.id}: source is empty")
        if not self.candidate.strip():
            raise ValueError(f"pair {self.id}: candidate is empty")
        for tag in (self.source_lang, self.candidate_lang):
            if tag not in LANGS:
                raise ValueError(f"pair {self.id}: unknown language tag {tag!r}")


@dataclass(frozen=True)
class SynonymLexicon:
    """Symmetric word→synonyms map; keys and values lowercase, lists sorted."""

    entries: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def lookup(self, word: str) -> list[str]:
        return list(self.entries.get(word.lower(), ()))

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> tuple["SynonymLexicon", int]:
        """Build bidirectional entries; returns (lexicon, self-pairs skipped)."""
        raw: dict[str, set[str]] = {}
        skipped = 0
        for a, b in pairs:
            a, b = a.lower(), b.lower()
            if a == b:
                skipped += 1
                continue
            raw.setdefault(a, set()).add(b)
            raw.setdefault(b, set()).add(a)
        entries = {word: tuple(sorted(syns)) for word, syns in raw.items()}
        return cls(entries), skipped


@dataclass
class CandidateRecord:
    """One pipeline output, stored flat in the candidates JSONL schema.

    scores, when present, always carries all metric keys with None for
    metrics not yet computed. error is set only on per-record pipeline
    failures; such records have an empty paraphrase.
    """

    id: str
    pipeline: str
    source_en: str
    source_ml: str
    paraphrase_ml: str
    params: BeamParams | None = None
    scores: dict[str, float | None] | None = None
    unchanged: bool = False
    error: str | None = None

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        if self.scores is not None:
            self.scores = normalize_scores(self.scores)

    @property
    def ok(self) -> bool:
        return self.error is None

    def pair(self) -> SentencePair:
        """The Malayalam (source, candidate) view that metrics score."""
        return SentencePair(
            id=self.id,
            source=self.source_ml,
            candidate=self.paraphrase_ml,
            source_lang="ml",
            candidate_lang="ml",
        )

    def with_scores(self, scores: dict[str, float | None]) -> "CandidateRecord":
        return replace(self, scores=normalize_scores(scores))

    def to_json_obj(self) -> dict:
        obj = {
            "id": self.id,
            "pipeline": self.pipeline,
            "source_en": self.source_en,
            "source_ml": self.source_ml,
            "paraphrase_ml": self.paraphrase_ml,
            "params": self.params.to_json_obj() if self.params else None,
            "scores": dict(self.scores) if self.scores is not None else None,
            "unchanged": self.unchanged,
        }
        if self.error is not None:
            obj["error"] = self.error
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "CandidateRecord":
        params = obj["params"]
        return cls(
            id=obj["id"],
            pipeline=obj["pipeline"],
            source_en=obj["source_en"],
            source_ml=obj["source_ml"],
            paraphrase_ml=obj["paraphrase_ml"],
            params=BeamParams.from_json_obj(params) if params is not None else None,
            scores=obj["scores"],
            unchanged=obj["unchanged"],
            error=obj.get("error"),
        )


def normalize_scores(scores: dict[str, float | None]) -> dict[str, float | None]:
    """Expand to the full metric key set; reject unknown names and bad ranges."""
    for name, value in scores.items():
        if name not in METRIC_NAMES:
            raise ValueError(f"unknown metric {name!r}")
        if value is not None and not 0.0 <= value <= 1.0:
            raise ValueError(f"score {name}={value} outside [0,1]")
    return {name: scores.get(name) for name in METRIC_NAMES}


def load_pairs_tsv(path: Path) -> list[SentencePair]:
    """One pair per non-blank line, `source<TAB>candidate`, both tagged "en".

    Ids are zero-padded ordinals over the non-blank lines ("p0001", ...),
    stable across repeated loads. Fields are whitespace-trimmed, nothing else.
    """
    path = Path(path)
    pairs: list[SentencePair] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise CorpusFormatError(
                    lineno, f"expected 2 fields, found {len(fields)}", path
                )
            source, candidate = (f.strip() for f in fields)
            if not source:
                raise CorpusFormatError(lineno, "empty field 1", path)
            if not candidate:
                raise CorpusFormatError(lineno, "empty field 2", path)
            pairs.append(
                SentencePair(
                    id=f"p{len(pairs) + 1:04d}",
                    source=source,
                    candidate=candidate,
                    source_lang="en",
                    candidate_lang="en",
                )
            )
    return pairs


def load_synonyms_csv(path: Path) -> tuple[SynonymLexicon, int]:
    """`word,synonym` per line, no header. Returns (lexicon, self-pairs skipped)."""
    path = Path(path)
    raw_pairs: list[tuple[str, str]] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            fields = line.split(",")
            if len(fields) != 2:
                raise CorpusFormatError(
                    lineno, f"expected 2 fields, found {len(fields)}", path
                )
            a, b = (f.strip() for f in fields)
            if not a or not b:
                raise CorpusFormatError(lineno, "empty token", path)
            if any(ch.isspace() for ch in a + b):
                raise CorpusFormatError(lineno, "tokens must not contain whitespace", path)
            raw_pairs.append((a, b))
    return SynonymLexicon.from_pairs(raw_pairs)


def write_candidates_jsonl(records: list[CandidateRecord], path: Path) -> int:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_obj(), ensure_ascii=False) + "\n")
    return len(records)


def read_candidates_jsonl(path: Path) -> list[CandidateRecord]:
    path = Path(path)
    records: list[CandidateRecord] = []
    with path.open(encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(lineno, f"invalid JSON: {exc.msg}", path) from exc
            if not isinstance(obj, dict):
                raise CorpusFormatError(lineno, "expected a JSON object", path)
            for key in _RECORD_KEYS:
                if key not in obj:
                    raise CorpusFormatError(lineno, f"missing field {key}", path)
            try:
                records.append(CandidateRecord.from_json_obj(obj))
            except (ValueError, KeyError, TypeError) as exc:
                raise CorpusFormatError(lineno, str(exc), path) from exc
    return records
