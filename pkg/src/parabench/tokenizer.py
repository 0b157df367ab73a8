"""Unicode-aware tokenization and n-gram extraction for English and Malayalam.

Every metric in this package runs on the token streams produced here, so the
rules are deliberately rigid and fully specified:

* NFC normalization first (backends emit mixed composed/decomposed Malayalam).
* Split on Unicode whitespace.
* Punctuation codepoints become standalone single-codepoint tokens, so shared
  punctuation never inflates n-gram overlap.
* English word tokens are lowercased. Malayalam is caseless and gets no case
  mapping; a maximal run of non-punctuation codepoints stays one word token
  (no morphological segmentation).
"""

import unicodedata
from collections import Counter
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

import regex as _regex

WORD = "word"
PUNCT = "punct"

_GRAPHEME = _regex.compile(r"\X")


@dataclass(frozen=True)
class Token:
    text: str
    kind: str  # WORD or PUNCT


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def tokenize(text: str, lang: str) -> list[Token]:
    """Split ``text`` into word and punctuation tokens.

    Total function: empty input yields an empty list. ``lang``="en" lowercases
    word tokens; any other tag leaves case untouched.
    """
    normalized = unicodedata.normalize("NFC", text)
    lower = lang == "en"
    tokens: list[Token] = []
    for chunk in normalized.split():
        run: list[str] = []
        for ch in chunk:
            if _is_punct(ch):
                if run:
                    word = "".join(run)
                    tokens.append(Token(word.lower() if lower else word, WORD))
                    run = []
                tokens.append(Token(ch, PUNCT))
            else:
                run.append(ch)
        if run:
            word = "".join(run)
            tokens.append(Token(word.lower() if lower else word, WORD))
    return tokens


def token_texts(tokens: Iterable[Token]) -> list[str]:
    return [t.text for t in tokens]


def detokenize(tokens: Sequence[Token]) -> str:
    """Join tokens with single spaces; no space before punctuation tokens."""
    parts: list[str] = []
    for tok in tokens:
        if parts and tok.kind != PUNCT:
            parts.append(" ")
        parts.append(tok.text)
    return "".join(parts)


def ngrams(tokens: Sequence[Hashable], n: int) -> Counter:
    """Contiguous n-gram multiset of ``tokens``; empty when ``len(tokens) < n``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    counts: Counter = Counter()
    for i in range(len(tokens) - n + 1):
        counts[tuple(tokens[i : i + n])] += 1
    return counts


def grapheme_count(text: str) -> int:
    """Number of extended grapheme clusters (UAX #29 segmentation).

    Codepoint counts mislead for Malayalam, where a consonant plus a combining
    vowel sign renders as one user-perceived character.
    """
    if not text:
        return 0
    return len(_GRAPHEME.findall(unicodedata.normalize("NFC", text)))
