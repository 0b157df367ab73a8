"""Sentence-level BLEU, METEOR, and TF cosine similarity, from scratch.

All three map a (candidate, reference) token pair to [0,1] and return the
intermediate quantities alongside the value so scores are auditable. Inputs
may be Token lists or plain strings; only the text matters here.

Fixed parameter choices (documented, not configurable):
  BLEU    orders 1..min(4, |candidate|), uniform weights, epsilon floor 1e-9
          for zero precisions, brevity penalty exp(1 - |r|/|c|) capped at 1.
  METEOR  alpha=0.9, beta=3, gamma=0.5; greedy two-stage unigram alignment
          (exact, then synonym), no stemming stage.
  cosine  raw term-frequency vectors, no idf (two-sentence comparison).
"""

import math
from collections import Counter, _count_elements
from dataclasses import dataclass, field, replace
from typing import Sequence

from .corpus import METRIC_NAMES, CandidateRecord, SynonymLexicon
from .tokenizer import Token, tokenize

BLEU_EPSILON = 1e-9
METEOR_ALPHA = 0.9
METEOR_BETA = 3.0
METEOR_GAMMA = 0.5


@dataclass(frozen=True, slots=True)
class MetricScore:
    metric: str
    value: float
    details: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not 0.0 <= self.value <= 1.0:
            raise ValueError(f"{self.metric} value {self.value} outside [0,1]")


def _texts(tokens: Sequence) -> Sequence[str]:
    for t in tokens:
        if type(t) is not str:
            return [t.text if isinstance(t, Token) else t for t in tokens]
    return tokens


def _require_nonempty(candidate: list[str], reference: list[str], metric: str) -> None:
    if not candidate or not reference:
        raise ValueError(f"{metric} is undefined for empty token lists")


_PRECISION_KEYS = ("p1", "p2", "p3", "p4")


def bleu(candidate: Sequence, reference: Sequence) -> MetricScore:
    """Smoothed sentence BLEU: clipped n-gram precisions, geometric mean, BP.

    The body is hand-tuned: whole-corpus scoring is bounded by this function,
    so it avoids Counter construction (_count_elements is Counter's C core
    without the per-call abstract-class check) and keeps one lookup table for
    all orders, which is safe because unigram keys are strings while n-gram
    keys are length-n tuples, and those key spaces cannot collide.
    """
    cand, ref = _texts(candidate), _texts(reference)
    if not cand or not ref:
        raise ValueError("bleu is undefined for empty token lists")

    cand_len, ref_len = len(cand), len(ref)
    orders = min(4, cand_len)

    ref_counts: dict = {}
    _count_elements(ref_counts, ref)
    if orders >= 2 and ref_len >= 2:
        ref_1 = ref[1:]
        _count_elements(ref_counts, zip(ref, ref_1))
        if orders >= 3 and ref_len >= 3:
            ref_2 = ref[2:]
            _count_elements(ref_counts, zip(ref, ref_1, ref_2))
            if orders >= 4 and ref_len >= 4:
                _count_elements(ref_counts, zip(ref, ref_1, ref_2, ref[3:]))
    get = ref_counts.get

    precisions: list[float] = []
    p_product = 1.0
    for n in range(1, orders + 1):
        if n == 1:
            cand_grams = cand
        elif ref_len < n:
            # no reference n-grams, so nothing can be clipped against;
            # this also guards the cand_1 reuse below, because once one
            # order bails out every higher order does too
            precisions.append(BLEU_EPSILON)
            p_product *= BLEU_EPSILON
            continue
        elif n == 2:
            cand_1 = cand[1:]
            cand_grams = zip(cand, cand_1)
        elif n == 3:
            cand_2 = cand[2:]
            cand_grams = zip(cand, cand_1, cand_2)
        else:
            cand_grams = zip(cand, cand_1, cand_2, cand[3:])
        # consume reference occurrences one by one, which matches
        # sum(min(cand_count, ref_count)) without counting the candidate
        clipped = 0
        for g in cand_grams:
            r = get(g, 0)
            if r:
                ref_counts[g] = r - 1
                clipped += 1
        p = clipped / (cand_len - n + 1) if clipped else BLEU_EPSILON
        precisions.append(p)
        p_product *= p

    bp = 1.0 if cand_len > ref_len else math.exp(1.0 - ref_len / cand_len)
    value = bp * math.exp(math.log(p_product) / orders)
    details = dict(zip(_PRECISION_KEYS, precisions))
    details["bp"] = bp
    details["orders"] = orders
    details["candidate_len"] = cand_len
    details["reference_len"] = ref_len
    return MetricScore("bleu", value if value < 1.0 else 1.0, details)


def _align(cand: list[str], ref: list[str],
           lexicon: SynonymLexicon | None) -> dict[int, int]:
    """Greedy two-stage unigram alignment: candidate index -> reference index.

    Walks the candidate left to right, exact matches first, synonym matches in
    a second pass. Each reference token is consumable once. When the token
    just before the current one is aligned to reference position j, position
    j+1 is preferred (it extends the current chunk); otherwise the lowest free
    reference index wins.
    """
    matches: dict[int, int] = {}
    consumed: set[int] = set()

    def stage(is_match) -> None:
        for i, ct in enumerate(cand):
            if i in matches:
                continue
            options = [j for j, rt in enumerate(ref)
                       if j not in consumed and is_match(ct, rt)]
            if not options:
                continue
            prev = matches.get(i - 1)
            if prev is not None and prev + 1 in options:
                j = prev + 1
            else:
                j = options[0]  # options ascend, so this is the lowest index
            matches[i] = j
            consumed.add(j)

    stage(lambda a, b: a == b)
    if lexicon is not None and len(lexicon) > 0:
        stage(lambda a, b: b in lexicon.lookup(a))
    return matches


def _count_chunks(matches: dict[int, int]) -> int:
    """Maximal runs adjacent in both sequences count as one chunk each."""
    chunks = 0
    prev_i = prev_j = None
    for i in sorted(matches):
        j = matches[i]
        if prev_i is None or i != prev_i + 1 or j != prev_j + 1:
            chunks += 1
        prev_i, prev_j = i, j
    return chunks


def meteor(candidate: Sequence, reference: Sequence,
           lexicon: SynonymLexicon | None = None) -> MetricScore:
    """Unigram-alignment METEOR: Fmean discounted by a fragmentation penalty."""
    cand, ref = _texts(candidate), _texts(reference)
    _require_nonempty(cand, ref, "meteor")

    matches = _align(cand, ref, lexicon)
    m = len(matches)
    if m == 0:
        return MetricScore("meteor", 0.0,
                           {"m": 0, "chunks": 0, "precision": 0.0, "recall": 0.0})
    chunks = _count_chunks(matches)
    precision = m / len(cand)
    recall = m / len(ref)
    fmean = (precision * recall
             / (METEOR_ALPHA * precision + (1.0 - METEOR_ALPHA) * recall))
    penalty = METEOR_GAMMA * (chunks / m) ** METEOR_BETA
    value = fmean * (1.0 - penalty)
    details = {"m": m, "chunks": chunks, "precision": precision,
               "recall": recall, "fmean": fmean, "penalty": penalty}
    return MetricScore("meteor", min(value, 1.0), details)


def cosine_similarity(candidate: Sequence, reference: Sequence) -> MetricScore:
    """Cosine of raw term-frequency vectors over the union vocabulary."""
    cand, ref = _texts(candidate), _texts(reference)
    _require_nonempty(cand, ref, "cosine")

    u, v = Counter(cand), Counter(ref)
    dot = sum(c * v[t] for t, c in u.items())
    norm_u = math.sqrt(sum(c * c for c in u.values()))
    norm_v = math.sqrt(sum(c * c for c in v.values()))
    value = dot / (norm_u * norm_v)
    details = {"dot": dot, "norm_candidate": norm_u, "norm_reference": norm_v,
               "vocab": len(set(cand) | set(ref))}
    return MetricScore("cosine", min(value, 1.0), details)


_METRIC_FNS = {
    "bleu": lambda c, r, lex: bleu(c, r),
    "meteor": lambda c, r, lex: meteor(c, r, lex),
    "cosine": lambda c, r, lex: cosine_similarity(c, r),
}


@dataclass
class ScoredCorpus:
    records: list[CandidateRecord]
    means: dict[str, dict[str, float]]  # pipeline -> metric -> mean
    skipped: int


def score_corpus(records: list[CandidateRecord], metrics: set[str],
                 lexicon: SynonymLexicon | None = None) -> ScoredCorpus:
    """Score each record's paraphrase against its Malayalam source.

    Records whose texts tokenize to nothing (error records included, their
    paraphrase is empty) are skipped and tallied, never scored. Means are
    plain arithmetic means per pipeline, accumulated in record order.
    """
    unknown = set(metrics) - set(METRIC_NAMES)
    if unknown:
        raise ValueError(
            f"unknown metric(s) {sorted(unknown)}; valid: {list(METRIC_NAMES)}"
        )

    out: list[CandidateRecord] = []
    sums: dict[str, dict[str, float]] = {}
    counts: dict[str, int] = {}
    skipped = 0
    for record in records:
        cand_tokens = tokenize(record.paraphrase_ml, "ml")
        src_tokens = tokenize(record.source_ml, "ml")
        if not cand_tokens or not src_tokens:
            skipped += 1
            out.append(record)
            continue
        scores: dict[str, float | None] = dict(record.scores or {})
        for name in METRIC_NAMES:
            if name in metrics:
                scores[name] = _METRIC_FNS[name](cand_tokens, src_tokens, lexicon).value
        out.append(replace(record, scores=scores))
        pipeline_sums = sums.setdefault(record.pipeline, dict.fromkeys(metrics, 0.0))
        for name in metrics:
            pipeline_sums[name] += scores[name]
        counts[record.pipeline] = counts.get(record.pipeline, 0) + 1

    means = {
        pipeline: {name: pipeline_sums[name] / counts[pipeline]
                   for name in sorted(pipeline_sums)}
        for pipeline, pipeline_sums in sums.items()
    }
    return ScoredCorpus(records=out, means=means, skipped=skipped)
