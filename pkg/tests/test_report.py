import json
import math
import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from oracles import spearman_oracle
from parabench.annotation import AggregatedLabel
from parabench.corpus import CandidateRecord
from parabench.report import (
    DISPLAY_NAMES,
    EvaluationReport,
    ReportRow,
    average_ranks,
    build_report,
    pearson,
    render,
    render_csv,
    render_json,
    render_markdown,
    spearman,
)

TABLE_MEANS = {
    "m1": (0.04, 0.25, 0.70, 0.37),
    "m2": (0.05, 0.28, 0.60, 0.42),
    "m3": (0.20, 0.31, 0.96, 0.31),
    "m4": (0.34, 0.63, 0.83, 0.23),
}


class TestPearson:
    def test_perfect_positive(self):
        assert pearson([1, 2, 3], [10, 20, 30]) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_negative(self):
        assert pearson([1, 2, 3], [5, 3, 1]) == pytest.approx(-1.0, abs=1e-12)

    def test_zero_variance_is_undefined(self):
        assert pearson([1, 1, 1], [1, 2, 3]) is None
        assert pearson([1, 2, 3], [7, 7, 7]) is None

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            pearson([1, 2], [1, 2, 3])

    def test_too_few_points(self):
        with pytest.raises(ValueError, match="at least 2"):
            pearson([1], [2])

    def test_matches_scipy(self):
        from scipy.stats import pearsonr

        rng = random.Random(3)
        x = [rng.uniform(-5, 5) for _ in range(30)]
        y = [rng.uniform(-5, 5) for _ in range(30)]
        assert pearson(x, y) == pytest.approx(pearsonr(x, y)[0], abs=1e-10)

    @given(st.lists(st.tuples(st.floats(-100, 100), st.floats(-100, 100)),
                    min_size=2, max_size=30))
    @settings(max_examples=100, deadline=None)
    def test_always_in_range_or_none(self, points):
        x = [p[0] for p in points]
        y = [p[1] for p in points]
        r = pearson(x, y)
        assert r is None or -1.0 <= r <= 1.0

    @given(st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)),
                    min_size=3, max_size=20),
           st.floats(0.1, 10), st.floats(-5, 5))
    @settings(max_examples=100, deadline=None)
    def test_invariant_under_positive_affine_maps(self, points, scale, shift):
        x = [p[0] for p in points]
        y = [p[1] for p in points]
        # near-constant columns make the correlation numerically meaningless
        assume(max(x) - min(x) > 0.01 and max(y) - min(y) > 0.01)
        r = pearson(x, y)
        r_mapped = pearson([scale * v + shift for v in x], y)
        assert r_mapped == pytest.approx(r, abs=1e-6)


class TestAverageRanks:
    def test_distinct_values(self):
        assert average_ranks([30, 10, 20]) == [3.0, 1.0, 2.0]

    def test_ties_share_mean_position(self):
        assert average_ranks([1, 2, 2, 3]) == [1.0, 2.5, 2.5, 4.0]

    def test_all_equal(self):
        assert average_ranks([5, 5, 5]) == [2.0, 2.0, 2.0]

    def test_triple_tie_at_top(self):
        assert average_ranks([1, 9, 9, 9]) == [1.0, 3.0, 3.0, 3.0]


class TestSpearman:
    def test_reference_value(self):
        assert spearman((1, 2, 3, 4), (3, 4, 2, 1)) == \
               pytest.approx(-0.8, abs=1e-12)

    def test_monotone_transform_invariance(self):
        x = [0.3, 1.7, 2.2, 5.0, 9.1]
        y = [4.0, 2.0, 6.0, 1.0, 3.0]
        assert spearman([math.exp(v) for v in x], y) == \
               pytest.approx(spearman(x, y), abs=1e-12)

    def test_constant_side_is_undefined(self):
        assert spearman([1, 1, 1], [1, 2, 3]) is None

    @given(st.data())
    @settings(max_examples=100, deadline=None)
    def test_matches_dsquared_oracle_on_distinct_values(self, data):
        n = data.draw(st.integers(min_value=3, max_value=10))
        x = data.draw(st.permutations(range(n)))
        y = data.draw(st.permutations(range(n)))
        assert spearman(x, y) == pytest.approx(
            spearman_oracle(list(x), list(y)), abs=1e-9)

    def test_matches_scipy_with_ties(self):
        from scipy.stats import spearmanr

        rng = random.Random(9)
        x = [rng.choice([0.1, 0.2, 0.3, 0.4]) for _ in range(25)]
        y = [rng.choice([0.0, 0.5, 1.0]) for _ in range(25)]
        assert spearman(x, y) == pytest.approx(spearmanr(x, y)[0], abs=1e-10)


class TestFromModelMeans:
    def test_rows_sorted_and_named(self):
        report = EvaluationReport.from_model_means(TABLE_MEANS)
        assert [r.pipeline for r in report.rows] == ["m1", "m2", "m3", "m4"]
        assert [r.model for r in report.rows] == [
            "MultiIndic Paraphrase", "Synonym Replacement", "BART", "OPUS"]
        assert report.rows[3].bleu_mean == 0.34

    def test_every_metric_anticorrelates_with_humans(self):
        report = EvaluationReport.from_model_means(TABLE_MEANS)
        for metric in ("bleu", "meteor", "cosine"):
            assert report.model_level[metric]["spearman"] == \
                   pytest.approx(-0.8, abs=1e-9), metric

    def test_pair_level_left_empty(self):
        report = EvaluationReport.from_model_means(TABLE_MEANS)
        assert report.pair_level == {}

    def test_unknown_pipeline_keeps_its_key_as_name(self):
        report = EvaluationReport.from_model_means(
            {"m1": (0.1, 0.2, 0.3, 0.4), "extra": (0.5, 0.6, 0.7, 0.8)})
        by_pipeline = {r.pipeline: r.model for r in report.rows}
        assert by_pipeline == {"m1": "MultiIndic Paraphrase", "extra": "extra"}


class TestRenderMarkdown:
    def table_lines(self):
        report = EvaluationReport.from_model_means(TABLE_MEANS)
        return render_markdown(report).splitlines()

    def test_header_and_separator(self):
        lines = self.table_lines()
        assert lines[0] == \
            "| Model | BLEU | METEOR | cosine similarity | human labels |"
        assert lines[1] == "| --- | --- | --- | --- | --- |"
        assert len(lines) == 6

    def test_best_value_per_column_is_bold(self):
        lines = self.table_lines()
        assert lines[2] == "| MultiIndic Paraphrase | 0.04 | 0.25 | 0.70 | 0.37 |"
        assert lines[3] == "| Synonym Replacement | 0.05 | 0.28 | 0.60 | **0.42** |"
        assert lines[4] == "| BART | 0.20 | 0.31 | **0.96** | 0.31 |"
        assert lines[5] == "| OPUS | **0.34** | **0.63** | 0.83 | 0.23 |"

    def test_column_ties_bold_every_winner(self):
        report = EvaluationReport.from_model_means({
            "m1": (0.5, 0.2, 0.3, 0.1),
            "m2": (0.5, 0.1, 0.2, 0.3),
        })
        lines = render_markdown(report).splitlines()
        assert lines[2].startswith("| MultiIndic Paraphrase | **0.50** |")
        assert lines[3].startswith("| Synonym Replacement | **0.50** |")

    def test_missing_values_render_na_and_never_bold(self):
        report = EvaluationReport(rows=[
            ReportRow(pipeline="m1", model=DISPLAY_NAMES["m1"], bleu_mean=None,
                      meteor_mean=0.2, cosine_mean=0.3, human_rate=None,
                      n_pairs=4),
            ReportRow(pipeline="m2", model=DISPLAY_NAMES["m2"], bleu_mean=0.1,
                      meteor_mean=0.1, cosine_mean=0.2, human_rate=0.5,
                      n_pairs=4),
        ])
        lines = render_markdown(report).splitlines()
        assert lines[2] == \
            "| MultiIndic Paraphrase | n/a | **0.20** | **0.30** | n/a |"
        assert "**n/a**" not in "\n".join(lines)


class TestRenderOther:
    def test_json_round_trip_keeps_full_precision(self):
        report = EvaluationReport.from_model_means(TABLE_MEANS)
        obj = json.loads(render_json(report))
        assert obj["rows"][3]["bleu_mean"] == 0.34
        assert obj["model_level"]["bleu"]["spearman"] == \
               pytest.approx(-0.8, abs=1e-9)
        assert obj["pair_level"] == {}

    def test_csv_layout(self):
        report = EvaluationReport.from_model_means({"m4": (0.34, 0.63, 0.83, 0.23)})
        lines = render_csv(report).splitlines()
        assert lines[0] == \
            "pipeline,model,bleu_mean,meteor_mean,cosine_mean,human_rate,n_pairs"
        assert lines[1] == "m4,OPUS,0.34,0.63,0.83,0.23,0"

    def test_csv_blank_for_missing(self):
        report = EvaluationReport(rows=[
            ReportRow(pipeline="m1", model="MultiIndic Paraphrase",
                      bleu_mean=None, meteor_mean=0.5, cosine_mean=0.25,
                      human_rate=None, n_pairs=2)])
        assert render_csv(report).splitlines()[1] == \
            "m1,MultiIndic Paraphrase,,0.5,0.25,,2"

    def test_unknown_format_names_the_valid_ones(self):
        report = EvaluationReport(rows=[])
        with pytest.raises(ValueError, match="markdown"):
            render(report, "html")

    def test_render_dispatch(self):
        report = EvaluationReport.from_model_means(TABLE_MEANS)
        assert render(report, "markdown") == render_markdown(report)
        assert render(report, "json") == render_json(report)
        assert render(report, "csv") == render_csv(report)


def scored_record(pair_id, pipeline, bleu, meteor=0.5, cosine=0.5):
    return CandidateRecord(
        id=pair_id, pipeline=pipeline, source_en="src",
        source_ml="ഉറവിടം", paraphrase_ml="സ്ഥാനാർത്ഥി",
        scores={"bleu": bleu, "meteor": meteor, "cosine": cosine},
    )


def label(pair_id, correct, votes_p=3, votes_n=0):
    return AggregatedLabel(pair_id=pair_id, votes_paraphrase=votes_p,
                           votes_not=votes_n, votes_total=votes_p + votes_n,
                           high_confidence_correct=correct)


class TestBuildReport:
    def test_joins_on_composite_id(self):
        records = [scored_record("p0001", "m1", 0.2),
                   scored_record("p0002", "m1", 0.4)]
        labels = [label("m1:p0001", True), label("m1:p0002", False)]
        report = build_report(records, labels)
        assert len(report.rows) == 1
        row = report.rows[0]
        assert row.pipeline == "m1"
        assert row.bleu_mean == pytest.approx(0.3, abs=1e-12)
        assert row.human_rate == pytest.approx(0.5, abs=1e-12)
        assert row.n_pairs == 2

    def test_unlabeled_records_do_not_enter_human_rate(self):
        records = [scored_record("p0001", "m1", 0.2),
                   scored_record("p0002", "m1", 0.4)]
        report = build_report(records, [label("m1:p0001", True)])
        assert report.rows[0].human_rate == pytest.approx(1.0)
        assert report.rows[0].n_pairs == 2

    def test_error_and_unscored_records_are_excluded(self, caplog):
        records = [
            scored_record("p0001", "m1", 0.2),
            CandidateRecord(id="p0002", pipeline="m1", source_en="x",
                            source_ml="", paraphrase_ml="", error="down"),
            CandidateRecord(id="p0001", pipeline="m2", source_en="x",
                            source_ml="a", paraphrase_ml="b"),  # never scored
        ]
        with caplog.at_level("WARNING"):
            report = build_report(records, [])
        assert [r.pipeline for r in report.rows] == ["m1"]
        assert report.rows[0].n_pairs == 1
        assert any("m2" in message for message in caplog.messages)

    def test_metric_means_skip_nulls(self):
        records = [
            scored_record("p0001", "m1", 0.2),
            CandidateRecord(id="p0002", pipeline="m1", source_en="x",
                            source_ml="a", paraphrase_ml="b",
                            scores={"bleu": None, "meteor": 0.7, "cosine": None}),
        ]
        report = build_report(records, [])
        row = report.rows[0]
        assert row.bleu_mean == pytest.approx(0.2)
        assert row.meteor_mean == pytest.approx(0.6)
        assert row.human_rate is None

    def test_pair_level_perfect_alignment(self):
        records = [scored_record(f"p{i:04d}", "m1", 0.9 if i % 2 else 0.1)
                   for i in range(8)]
        labels = [label(f"m1:p{i:04d}", bool(i % 2)) for i in range(8)]
        report = build_report(records, labels)
        assert report.pair_level["bleu"]["pearson"] == \
               pytest.approx(1.0, abs=1e-12)
        assert report.pair_level["bleu"]["spearman"] == \
               pytest.approx(1.0, abs=1e-12)

    def test_pair_level_pools_across_pipelines(self):
        records = [scored_record("p0001", "m1", 0.9),
                   scored_record("p0001", "m2", 0.1)]
        labels = [label("m1:p0001", True), label("m2:p0001", False)]
        report = build_report(records, labels)
        assert report.pair_level["bleu"]["pearson"] == \
               pytest.approx(1.0, abs=1e-12)

    def test_degenerate_verdicts_give_none(self):
        records = [scored_record("p0001", "m1", 0.9),
                   scored_record("p0002", "m1", 0.1)]
        labels = [label("m1:p0001", True), label("m1:p0002", True)]
        report = build_report(records, labels)
        assert report.pair_level["bleu"] == {"pearson": None, "spearman": None}
