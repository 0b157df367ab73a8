import pytest

from conftest import make_registry, make_specs
from parabench.backends import (
    BackendConfig,
    BackendError,
    BeamParams,
    EchoParaphrase,
    IdentityTranslate,
)
from parabench.corpus import SentencePair, SynonymLexicon
from parabench.pipelines import (
    PipelineError,
    PipelineSpec,
    run_batch,
    run_m1,
    run_m2,
    run_m3,
    run_m4,
    run_one,
)
from parabench.synonyms import ReplacementPolicy


def pair(text, pair_id="p0001"):
    return SentencePair(id=pair_id, source=text, candidate=text.upper(),
                        source_lang="en", candidate_lang="en")


EMPTY_LEXICON = SynonymLexicon(entries={})


class TestSpecValidation:
    def test_unknown_pipeline_id(self):
        with pytest.raises(ValueError, match="unknown pipeline"):
            PipelineSpec(id="m9", translate_backend="mt")

    @pytest.mark.parametrize("pipeline", ["m1", "m3", "m4"])
    def test_paraphrase_backend_required(self, pipeline):
        with pytest.raises(ValueError, match="paraphrase_backend"):
            PipelineSpec(id=pipeline, translate_backend="mt")

    def test_m2_needs_lexicon_and_policy(self):
        with pytest.raises(ValueError, match="lexicon and policy"):
            PipelineSpec(id="m2", translate_backend="mt")

    def test_m4_needs_two_return_sequences(self):
        with pytest.raises(ValueError, match="num_return_sequences"):
            PipelineSpec(id="m4", translate_backend="mt",
                         paraphrase_backend="mt",
                         params=BeamParams(num_beams=4, num_return_sequences=1))


class TestM1:
    def test_translate_then_paraphrase(self, tag_registry, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        record = run_m1(pair("hello world now"), spec, tag_registry)
        assert record.pipeline == "m1"
        assert record.source_ml == "⟦ml⟧hello world now"
        # rotation of the Malayalam-side tokens, not the English ones
        assert record.paraphrase_ml == "world now ⟦ml⟧hello"
        assert record.params == spec.params
        assert record.unchanged is False
        assert record.ok

    def test_identity_round_is_flagged_unchanged(self, identity_registry,
                                                 fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        record = run_m1(pair("hello world"), spec, identity_registry)
        assert record.source_ml == record.paraphrase_ml == "hello world"
        assert record.unchanged is True


class TestM2:
    def test_substitute_then_translate_both(self, tag_registry, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m2"]
        record = run_m2(pair("i am happy today"), spec, tag_registry)
        assert record.source_ml == "⟦ml⟧i am happy today"
        assert record.paraphrase_ml == "⟦ml⟧i am glad today"
        assert record.params is None
        assert record.unchanged is False

    def test_no_eligible_word_marks_unchanged(self, tag_registry):
        spec = PipelineSpec(id="m2", translate_backend="mt",
                            lexicon=EMPTY_LEXICON, policy=ReplacementPolicy())
        record = run_m2(pair("Hello there!"), spec, tag_registry)
        # the substitution step reported no replacements, so the record is
        # unchanged even though detokenization lowercased the text
        assert record.unchanged is True

    def test_stochastic_zero_probability(self, tag_registry, fixture_lexicon):
        policy = ReplacementPolicy(mode="stochastic", probability=0.0, seed=3)
        spec = make_specs(fixture_lexicon, policy)["m2"]
        record = run_m2(pair("i am happy today"), spec, tag_registry)
        assert record.unchanged is True


class TestM3:
    def test_rewrite_then_translate_both(self, tag_registry, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m3"]
        record = run_m3(pair("good morning friends"), spec, tag_registry)
        assert record.source_ml == "⟦ml⟧good morning friends"
        assert record.paraphrase_ml == "⟦ml⟧morning friends good"
        assert record.unchanged is False

    def test_single_sequence_enforced(self, tag_registry, fixture_lexicon):
        wide = PipelineSpec(id="m3", translate_backend="mt",
                            paraphrase_backend="pp",
                            params=BeamParams(num_beams=4, num_return_sequences=3))
        record = run_m3(pair("good morning friends"), wide, tag_registry)
        assert record.params.num_return_sequences == 1
        assert record.params.num_beams == 4

    def test_echo_rewrite_is_unchanged(self, identity_registry, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m3"]
        record = run_m3(pair("good morning"), spec, identity_registry)
        assert record.unchanged is True


class TestM4:
    def test_beam_pair(self, tag_registry, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m4"]
        record = run_m4(pair("see you soon"), spec, tag_registry)
        assert record.source_ml == "⟦ml⟧see you soon"
        assert record.paraphrase_ml == "⟦ml⟧see you soon ⟨2⟩"
        assert record.params == spec.params
        assert record.unchanged is False

    def test_collapsed_beams_duplicate_and_flag(self, identity_registry,
                                                fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m4"]
        record = run_m4(pair("see you soon"), spec, identity_registry)
        assert record.paraphrase_ml == record.source_ml == "see you soon"
        assert record.unchanged is True


class FailingTranslate(IdentityTranslate):
    """Identity translate that refuses sentences containing a marker word."""

    def _translate(self, text, src_lang, tgt_lang):
        if "BOOM" in text:
            raise BackendError("simulated outage")
        return super()._translate(text, src_lang, tgt_lang)

    def _translate_beams(self, text, src_lang, tgt_lang, params):
        if "BOOM" in text:
            raise BackendError("simulated outage")
        return super()._translate_beams(text, src_lang, tgt_lang, params)


def failing_registry():
    return {
        "mt": FailingTranslate(
            BackendConfig(id="mt", kind="translate", endpoint="mock:identity")),
        "mt-beams": FailingTranslate(
            BackendConfig(id="mt-beams", kind="translate", endpoint="mock:identity")),
        "pp": EchoParaphrase(
            BackendConfig(id="pp", kind="paraphrase", endpoint="mock:echo")),
    }


class TestRunOne:
    def test_backend_failure_gets_pipeline_context(self, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        with pytest.raises(PipelineError) as info:
            run_one(pair("BOOM", "p0007"), spec, failing_registry())
        assert str(info.value) == "pipeline m1, pair p0007: simulated outage"
        assert info.value.pipeline == "m1"
        assert info.value.pair_id == "p0007"
        assert isinstance(info.value.cause, BackendError)

    def test_missing_backend_id_is_wrapped(self, fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        with pytest.raises(PipelineError, match="not in registry"):
            run_one(pair("hello"), spec, {})


class TestRunBatch:
    def test_order_follows_input(self, fixture_pairs, tag_registry,
                                 fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        records = run_batch(fixture_pairs, spec, tag_registry)
        assert [r.id for r in records] == [p.id for p in fixture_pairs]
        assert all(r.ok for r in records)

    def test_sampling_is_seeded_and_ordered(self, fixture_pairs, tag_registry,
                                            fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        first = run_batch(fixture_pairs, spec, tag_registry, sample=5, seed=11)
        second = run_batch(fixture_pairs, spec, tag_registry, sample=5, seed=11)
        assert [r.id for r in first] == [r.id for r in second]
        assert len(first) == 5
        # subsample preserves corpus order
        ids = [r.id for r in first]
        assert ids == sorted(ids)

    def test_different_seed_changes_sample(self, fixture_pairs, tag_registry,
                                           fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        a = run_batch(fixture_pairs, spec, tag_registry, sample=5, seed=1)
        b = run_batch(fixture_pairs, spec, tag_registry, sample=5, seed=2)
        assert [r.id for r in a] != [r.id for r in b]

    def test_sample_without_seed_rejected(self, fixture_pairs, tag_registry,
                                          fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        with pytest.raises(ValueError, match="seed"):
            run_batch(fixture_pairs, spec, tag_registry, sample=5)

    def test_oversized_sample_rejected(self, fixture_pairs, tag_registry,
                                       fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m1"]
        with pytest.raises(ValueError, match="exceeds"):
            run_batch(fixture_pairs, spec, tag_registry, sample=99, seed=1)

    def test_failures_become_error_records_in_place(self, fixture_lexicon):
        pairs = [pair("fine one", "p0001"), pair("BOOM here", "p0002"),
                 pair("fine two", "p0003")]
        spec = make_specs(fixture_lexicon)["m1"]
        records = run_batch(pairs, spec, failing_registry())
        assert [r.id for r in records] == ["p0001", "p0002", "p0003"]
        assert records[0].ok and records[2].ok
        failed = records[1]
        assert not failed.ok
        assert failed.error == "pipeline m1, pair p0002: simulated outage"
        assert failed.source_ml == "" and failed.paraphrase_ml == ""
        assert failed.params is None

    def test_parallel_matches_serial(self, fixture_pairs, tag_registry,
                                     fixture_lexicon):
        spec = make_specs(fixture_lexicon)["m4"]
        serial = run_batch(fixture_pairs, spec, tag_registry)
        threaded = run_batch(fixture_pairs, spec, tag_registry, parallel=4)
        assert [r.to_json_obj() for r in serial] == \
               [r.to_json_obj() for r in threaded]

    @pytest.mark.parametrize("pipeline", ["m1", "m2", "m3", "m4"])
    def test_identity_backends_flag_everything_unchanged(self, pipeline,
                                                         fixture_pairs):
        registry = make_registry("mock:identity", "mock:echo")
        if pipeline == "m2":
            spec = PipelineSpec(id="m2", translate_backend="mt",
                                lexicon=EMPTY_LEXICON, policy=ReplacementPolicy())
        else:
            spec = make_specs(EMPTY_LEXICON,
                              ReplacementPolicy())[pipeline]
        records = run_batch(fixture_pairs, spec, registry)
        assert all(r.unchanged for r in records)
        assert all(r.ok for r in records)

    @pytest.mark.parametrize("pipeline", ["m1", "m2", "m3", "m4"])
    def test_tagged_backends_round_trip_jsonl(self, pipeline, tmp_path,
                                              fixture_pairs, fixture_lexicon):
        from parabench.corpus import read_candidates_jsonl, write_candidates_jsonl

        spec = make_specs(fixture_lexicon)[pipeline]
        records = run_batch(fixture_pairs, spec, make_registry())
        out = tmp_path / "candidates.jsonl"
        write_candidates_jsonl(records, out)
        assert [r.to_json_obj() for r in read_candidates_jsonl(out)] == \
               [r.to_json_obj() for r in records]
