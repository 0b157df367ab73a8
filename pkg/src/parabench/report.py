"""Summary tables and metric-vs-human alignment statistics.

Two views of the same question ("do the automated metrics track human
judgment?"): per-pipeline mean scores next to human high-confidence rates,
and Pearson/Spearman correlations between each metric and the human label,
computed both pair-level (statistically meaningful, n = pairs) and
model-level (n = pipelines, the headline comparison).

Correlations on degenerate input (zero variance) are reported as None, the
undefined sentinel, never coerced to 0.
"""

import csv
import io
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

from .annotation import AggregatedLabel
from .corpus import METRIC_NAMES, PIPELINES, CandidateRecord

logger = logging.getLogger(__name__)

DISPLAY_NAMES = {
    "m1": "MultiIndic Paraphrase",
    "m2": "Synonym Replacement",
    "m3": "BART",
    "m4": "OPUS",
}

FORMATS = ("markdown", "json", "csv")

_MD_COLUMNS = ("Model", "BLEU", "METEOR", "cosine similarity", "human labels")


def pearson(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Sample correlation; None when either side has zero variance."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise ValueError("correlation needs at least 2 points")
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    dx = [a - mean_x for a in x]
    dy = [b - mean_y for b in y]
    sxx = sum(a * a for a in dx)
    syy = sum(b * b for b in dy)
    if sxx == 0.0 or syy == 0.0:
        return None
    r = sum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def average_ranks(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = rank
        i = j + 1
    return ranks


def spearman(x: Sequence[float], y: Sequence[float]) -> float | None:
    """Pearson correlation of average ranks."""
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    return pearson(average_ranks(x), average_ranks(y))


@dataclass
class ReportRow:
    pipeline: str
    model: str
    bleu_mean: float | None
    meteor_mean: float | None
    cosine_mean: float | None
    human_rate: float | None
    n_pairs: int

    def mean_for(self, metric: str) -> float | None:
        return {"bleu": self.bleu_mean, "meteor": self.meteor_mean,
                "cosine": self.cosine_mean}[metric]

    def to_json_obj(self) -> dict:
        return {
            "pipeline": self.pipeline,
            "model": self.model,
            "bleu_mean": self.bleu_mean,
            "meteor_mean": self.meteor_mean,
            "cosine_mean": self.cosine_mean,
            "human_rate": self.human_rate,
            "n_pairs": self.n_pairs,
        }


@dataclass
class EvaluationReport:
    rows: list[ReportRow]
    # metric -> {"pearson": r|None, "spearman": rho|None}
    pair_level: dict[str, dict[str, float | None]] = field(default_factory=dict)
    model_level: dict[str, dict[str, float | None]] = field(default_factory=dict)

    @classmethod
    def from_model_means(
        cls, means: dict[str, tuple[float, float, float, float]]
    ) -> "EvaluationReport":
        """Build from stored per-model (bleu, meteor, cosine, human) tuples.

        The fixture path: no per-pair records exist, so only model-level
        correlations are computed.
        """
        rows = [
            ReportRow(
                pipeline=pipeline,
                model=DISPLAY_NAMES.get(pipeline, pipeline),
                bleu_mean=mb, meteor_mean=mm, cosine_mean=mc,
                human_rate=mh, n_pairs=0,
            )
            for pipeline, (mb, mm, mc, mh) in means.items()
        ]
        rows.sort(key=lambda r: r.pipeline)
        report = cls(rows=rows)
        report.model_level = _model_level_correlations(rows)
        return report


def _model_level_correlations(rows: list[ReportRow]) -> dict:
    out: dict[str, dict[str, float | None]] = {}
    for metric in METRIC_NAMES:
        points = [
            (row.mean_for(metric), row.human_rate)
            for row in rows
            if row.mean_for(metric) is not None and row.human_rate is not None
        ]
        if len(points) < 2:
            out[metric] = {"pearson": None, "spearman": None}
            continue
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        out[metric] = {"pearson": pearson(xs, ys), "spearman": spearman(xs, ys)}
    return out


def build_report(
    records: list[CandidateRecord], labels: list[AggregatedLabel]
) -> EvaluationReport:
    """Join scored records with aggregated human labels.

    Records and labels meet on the composite pair id "<pipeline>:<id>".
    Pipelines with no scored records are omitted from the rows (logged).
    Pair-level correlations pool all pipelines; a record enters a metric's
    correlation only if it carries that score and a human verdict.
    """
    verdicts = {label.pair_id: label.high_confidence_correct for label in labels}

    rows: list[ReportRow] = []
    pair_points: dict[str, list[tuple[float, float]]] = {m: [] for m in METRIC_NAMES}
    for pipeline in PIPELINES:
        scored = [
            r for r in records
            if r.pipeline == pipeline and r.ok and r.scores is not None
        ]
        if not scored:
            logger.warning("pipeline %s has no scored records; row omitted", pipeline)
            continue
        means: dict[str, float | None] = {}
        for metric in METRIC_NAMES:
            values = [r.scores[metric] for r in scored if r.scores[metric] is not None]
            means[metric] = sum(values) / len(values) if values else None
        pipeline_verdicts = [
            verdicts[f"{pipeline}:{r.id}"]
            for r in scored
            if f"{pipeline}:{r.id}" in verdicts
        ]
        human_rate = (
            sum(pipeline_verdicts) / len(pipeline_verdicts)
            if pipeline_verdicts else None
        )
        rows.append(
            ReportRow(
                pipeline=pipeline,
                model=DISPLAY_NAMES[pipeline],
                bleu_mean=means["bleu"],
                meteor_mean=means["meteor"],
                cosine_mean=means["cosine"],
                human_rate=human_rate,
                n_pairs=len(scored),
            )
        )
        for record in scored:
            verdict = verdicts.get(f"{pipeline}:{record.id}")
            if verdict is None:
                continue
            for metric in METRIC_NAMES:
                value = record.scores[metric]
                if value is not None:
                    pair_points[metric].append((value, 1.0 if verdict else 0.0))

    pair_level: dict[str, dict[str, float | None]] = {}
    for metric, points in pair_points.items():
        if len(points) < 2:
            pair_level[metric] = {"pearson": None, "spearman": None}
            continue
        xs = [p[0] for p in points]
        ys = [p[1] for p in points]
        pair_level[metric] = {"pearson": pearson(xs, ys), "spearman": spearman(xs, ys)}

    return EvaluationReport(
        rows=rows,
        pair_level=pair_level,
        model_level=_model_level_correlations(rows),
    )


def _fmt2(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.2f}"


def render_markdown(report: EvaluationReport) -> str:
    """Fixed five-column table, 2-decimal values, best value per column bold."""
    columns = [
        lambda r: r.bleu_mean,
        lambda r: r.meteor_mean,
        lambda r: r.cosine_mean,
        lambda r: r.human_rate,
    ]
    best: list[float | None] = []
    for get in columns:
        values = [get(r) for r in report.rows if get(r) is not None]
        best.append(max(values) if values else None)

    lines = [
        "| " + " | ".join(_MD_COLUMNS) + " |",
        "|" + "|".join(" --- " for _ in _MD_COLUMNS) + "|",
    ]
    for row in report.rows:
        cells = [row.model]
        for get, top in zip(columns, best):
            value = get(row)
            text = _fmt2(value)
            if value is not None and value == top:
                text = f"**{text}**"
            cells.append(text)
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def render_json(report: EvaluationReport) -> str:
    obj = {
        "rows": [row.to_json_obj() for row in report.rows],
        "pair_level": report.pair_level,
        "model_level": report.model_level,
    }
    return json.dumps(obj, ensure_ascii=False, indent=2) + "\n"


def render_csv(report: EvaluationReport) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["pipeline", "model", "bleu_mean", "meteor_mean", "cosine_mean",
         "human_rate", "n_pairs"]
    )
    for row in report.rows:
        writer.writerow(
            [row.pipeline, row.model,
             _csv_num(row.bleu_mean), _csv_num(row.meteor_mean),
             _csv_num(row.cosine_mean), _csv_num(row.human_rate), row.n_pairs]
        )
    return buf.getvalue()


def _csv_num(value: float | None) -> str:
    return "" if value is None else repr(value)


def render(report: EvaluationReport, fmt: str) -> str:
    if fmt == "markdown":
        return render_markdown(report)
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    raise ValueError(f"unknown format {fmt!r}; valid: {list(FORMATS)}")
