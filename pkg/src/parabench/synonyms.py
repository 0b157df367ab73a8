"""English paraphrasing by synonym substitution, ahead of pivot translation.

Substitution only: tokens are never inserted or dropped, so the output token
count always equals the input's. Output is lowercase because the consumers
(translation backends, metrics) are case-insensitive here.
"""

import random
from dataclasses import dataclass

from .corpus import SynonymLexicon
from .tokenizer import WORD, Token, detokenize, tokenize

MODES = ("deterministic", "stochastic")


@dataclass(frozen=True)
class ReplacementPolicy:
    """How aggressively to substitute.

    deterministic replaces every word token that has a lexicon entry with its
    lexicographically first synonym; probability and seed are ignored.
    stochastic replaces each eligible token independently with the given
    probability, choosing uniformly among synonyms from a seeded generator.
    """

    mode: str = "deterministic"
    probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0.0 <= self.probability <= 1.0:
            raise ValueError(f"probability must be in [0,1], got {self.probability}")


@dataclass(frozen=True)
class ReplacementResult:
    paraphrase: str
    replacements: int
    unchanged: bool
    log: tuple[tuple[str, str], ...]  # (original, substituted) per replacement


def replace_synonyms(
    sentence: str, lexicon: SynonymLexicon, policy: ReplacementPolicy
) -> ReplacementResult:
    """Tokenize as English, substitute synonyms per policy, re-join.

    Punctuation tokens are never replaced. Re-joining uses the standard
    detokenization rule (single spaces, no space before punctuation), so the
    result is bit-reproducible.
    """
    if not sentence.strip():
        raise ValueError("replace_synonyms requires a non-empty sentence")
    tokens = tokenize(sentence, "en")
    rng = random.Random(policy.seed) if policy.mode == "stochastic" else None

    out: list[Token] = []
    log: list[tuple[str, str]] = []
    for tok in tokens:
        replacement = None
        if tok.kind == WORD:
            synonyms = lexicon.lookup(tok.text)
            if synonyms:
                if policy.mode == "deterministic":
                    replacement = synonyms[0]
                elif rng.random() < policy.probability:
                    replacement = rng.choice(synonyms)
        if replacement is None:
            out.append(tok)
        else:
            out.append(Token(replacement, WORD))
            log.append((tok.text, replacement))

    return ReplacementResult(
        paraphrase=detokenize(out),
        replacements=len(log),
        unchanged=not log,
        log=tuple(log),
    )
