"""The four paraphrase-generation pipelines, each mapping an English sentence
to a Malayalam (source, candidate) record.

m1  translate en→ml, then paraphrase on the Malayalam side
m2  synonym-substitute in English, translate both versions
m3  neural rewrite in English (single sequence), translate both versions
m4  one beam-diverse translation call; top two distinct beams form the pair

Backends are passed as a registry (id → instance) so the same specs run
against live servers or the in-tree mocks.
"""

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .backends import Backend, BeamParams
from .corpus import PIPELINES, CandidateRecord, SentencePair, SynonymLexicon
from .synonyms import ReplacementPolicy, replace_synonyms

BackendRegistry = dict[str, Backend]


class PipelineError(RuntimeError):
    """A backend failure, annotated with which pipeline and pair it hit."""

    def __init__(self, pipeline: str, pair_id: str, cause: Exception):
        super().__init__(f"pipeline {pipeline}, pair {pair_id}: {cause}")
        self.pipeline = pipeline
        self.pair_id = pair_id
        self.cause = cause


@dataclass(frozen=True)
class PipelineSpec:
    id: str
    translate_backend: str
    paraphrase_backend: str | None = None
    lexicon: SynonymLexicon | None = None
    policy: ReplacementPolicy | None = None
    params: BeamParams = BeamParams()

    def __post_init__(self):
        if self.id not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.id!r}")
        if not self.translate_backend:
            raise ValueError(f"pipeline {self.id}: translate_backend required")
        if self.id in ("m1", "m3", "m4") and not self.paraphrase_backend:
            raise ValueError(f"pipeline {self.id}: paraphrase_backend required")
        if self.id == "m2":
            if self.lexicon is None or self.policy is None:
                raise ValueError("pipeline m2: lexicon and policy required")
        if self.id == "m4" and self.params.num_return_sequences < 2:
            raise ValueError(
                "pipeline m4: params.num_return_sequences must be >= 2 "
                "(the paraphrase is the second beam)"
            )


def _backend(registry: BackendRegistry, backend_id: str) -> Backend:
    try:
        return registry[backend_id]
    except KeyError:
        raise ValueError(f"backend id {backend_id!r} not in registry") from None


def run_m1(src: SentencePair, spec: PipelineSpec,
           backends: BackendRegistry) -> CandidateRecord:
    """Pivot translate, then paraphrase in Malayalam."""
    translator = _backend(backends, spec.translate_backend)
    paraphraser = _backend(backends, spec.paraphrase_backend)
    source_ml = translator.translate(src.source, "en", "ml")
    candidate = paraphraser.paraphrase(source_ml, "ml", spec.params)[0]
    return CandidateRecord(
        id=src.id,
        pipeline="m1",
        source_en=src.source,
        source_ml=source_ml,
        paraphrase_ml=candidate,
        params=spec.params,
        unchanged=candidate == source_ml,
    )


def run_m2(src: SentencePair, spec: PipelineSpec,
           backends: BackendRegistry) -> CandidateRecord:
    """Synonym-substitute in English, then translate both versions."""
    translator = _backend(backends, spec.translate_backend)
    result = replace_synonyms(src.source, spec.lexicon, spec.policy)
    source_ml = translator.translate(src.source, "en", "ml")
    paraphrase_ml = translator.translate(result.paraphrase, "en", "ml")
    return CandidateRecord(
        id=src.id,
        pipeline="m2",
        source_en=src.source,
        source_ml=source_ml,
        paraphrase_ml=paraphrase_ml,
        params=None,
        unchanged=result.unchanged or paraphrase_ml == source_ml,
    )


def run_m3(src: SentencePair, spec: PipelineSpec,
           backends: BackendRegistry) -> CandidateRecord:
    """Neural rewrite in English (one sequence), then translate both versions."""
    translator = _backend(backends, spec.translate_backend)
    rewriter = _backend(backends, spec.paraphrase_backend)
    rewrite_params = replace(spec.params, num_return_sequences=1)
    rewritten = rewriter.paraphrase(src.source, "en", rewrite_params)[0]
    source_ml = translator.translate(src.source, "en", "ml")
    paraphrase_ml = translator.translate(rewritten, "en", "ml")
    return CandidateRecord(
        id=src.id,
        pipeline="m3",
        source_en=src.source,
        source_ml=source_ml,
        paraphrase_ml=paraphrase_ml,
        params=rewrite_params,
        unchanged=rewritten == src.source or paraphrase_ml == source_ml,
    )


def run_m4(src: SentencePair, spec: PipelineSpec,
           backends: BackendRegistry) -> CandidateRecord:
    """One beam-diverse translation call; beams 1 and 2 form the pair."""
    if spec.params.num_return_sequences < 2:
        raise ValueError("m4 requires params.num_return_sequences >= 2")
    translator = _backend(backends, spec.paraphrase_backend)
    beams = translator.translate_beams(src.source, "en", "ml", spec.params)
    source_ml = beams[0]
    if len(beams) >= 2:
        paraphrase_ml = beams[1]
        unchanged = paraphrase_ml == source_ml
    else:  # backend collapsed to a single distinct sequence
        paraphrase_ml = source_ml
        unchanged = True
    return CandidateRecord(
        id=src.id,
        pipeline="m4",
        source_en=src.source,
        source_ml=source_ml,
        paraphrase_ml=paraphrase_ml,
        params=spec.params,
        unchanged=unchanged,
    )


_RUNNERS = {"m1": run_m1, "m2": run_m2, "m3": run_m3, "m4": run_m4}


def run_one(src: SentencePair, spec: PipelineSpec,
            backends: BackendRegistry) -> CandidateRecord:
    try:
        return _RUNNERS[spec.id](src, spec, backends)
    except (RuntimeError, ValueError) as exc:
        if isinstance(exc, PipelineError):
            raise
        raise PipelineError(spec.id, src.id, exc) from exc


def _error_record(src: SentencePair, spec: PipelineSpec,
                  exc: Exception) -> CandidateRecord:
    return CandidateRecord(
        id=src.id,
        pipeline=spec.id,
        source_en=src.source,
        source_ml="",
        paraphrase_ml="",
        params=None,
        unchanged=False,
        error=str(exc),
    )


def run_batch(pairs: list[SentencePair], spec: PipelineSpec,
              backends: BackendRegistry, sample: int | None = None,
              seed: int | None = None, parallel: int = 1) -> list[CandidateRecord]:
    """Run the pipeline over (a seeded sample of) the pairs.

    Failures are captured per record, never aborting the batch; output order
    follows input order regardless of sampling or parallelism.
    """
    if sample is not None:
        if seed is None:
            raise ValueError("sampling requires an explicit seed")
        if sample > len(pairs):
            raise ValueError(f"sample {sample} exceeds corpus size {len(pairs)}")
        indices = sorted(random.Random(seed).sample(range(len(pairs)), sample))
        selected = [pairs[i] for i in indices]
    else:
        selected = list(pairs)

    def job(src: SentencePair) -> CandidateRecord:
        try:
            return run_one(src, spec, backends)
        except PipelineError as exc:
            return _error_record(src, spec, exc)

    if parallel <= 1:
        return [job(src) for src in selected]
    with ThreadPoolExecutor(max_workers=parallel) as pool:
        return list(pool.map(job, selected))
