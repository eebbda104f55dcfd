"""Sentence splitting, rule-based tokenization, and POS-tag grouping.

The tokenizer is deliberately rule-based and deterministic so that filter
behavior is fully reproducible; no statistical tagger or external toolkit is
involved anywhere in the pipeline.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum

# Sentence terminators. A '.' only terminates when followed by whitespace or
# end of text and not preceded by a known abbreviation.
_TERMINATORS = ".!?"

# Closed list; matching is case-insensitive and requires a word boundary
# before the abbreviation.
ABBREVIATIONS = (
    "mr.",
    "mrs.",
    "ms.",
    "dr.",
    "inc.",
    "corp.",
    "vs.",
    "e.g.",
    "i.e.",
    "etc.",
)

# Punctuation detached from token edges. Apostrophes stay put so
# contractions like "shouldn't" survive as one token.
_DETACHABLE = (set(string.punctuation) - {"'"}) | set("“”«»…–—")


@dataclass(frozen=True)
class Token:
    surface: str
    lower: str


@dataclass(frozen=True)
class Sentence:
    text: str
    tokens: tuple[Token, ...]
    origin: str = ""


class GroupTag(str, Enum):
    VERB = "verb"
    NOUN = "noun"
    ADJECTIVE = "adjective"
    ADVERB = "adverb"
    PRONOUN = "pronoun"
    OTHER = "other"


_POS_GROUPS = {
    "VB": GroupTag.VERB,
    "VBD": GroupTag.VERB,
    "VBG": GroupTag.VERB,
    "VBP": GroupTag.VERB,
    "VBZ": GroupTag.VERB,
    "NN": GroupTag.NOUN,
    "NNS": GroupTag.NOUN,
    "NNP": GroupTag.NOUN,
    "NNPS": GroupTag.NOUN,
    "JJ": GroupTag.ADJECTIVE,
    "JJR": GroupTag.ADJECTIVE,
    "JJS": GroupTag.ADJECTIVE,
    "RB": GroupTag.ADVERB,
    "RBR": GroupTag.ADVERB,
    "RBS": GroupTag.ADVERB,
    "PRP": GroupTag.PRONOUN,
    "PRP$": GroupTag.PRONOUN,
}


def pos_group(pos_tag: str) -> GroupTag:
    """Map a Penn-style POS tag to its coarse group; unknown tags are OTHER."""
    return _POS_GROUPS.get(pos_tag, GroupTag.OTHER)


def tokenize(sentence_text: str) -> list[Token]:
    """Split on whitespace and detach leading/trailing punctuation.

    Detached punctuation runs become their own tokens. Apostrophes are never
    detached, so contractions stay whole. Every token carries its lowercase
    form alongside the surface.
    """
    tokens: list[Token] = []
    for chunk in sentence_text.split():
        i, j = 0, len(chunk)
        while i < j and chunk[i] in _DETACHABLE:
            i += 1
        while j > i and chunk[j - 1] in _DETACHABLE:
            j -= 1
        for part in (chunk[:i], chunk[i:j], chunk[j:]):
            if part:
                tokens.append(Token(surface=part, lower=part.lower()))
    return tokens


def _abbreviation_before(text: str, dot_index: int) -> bool:
    """True when the '.' at dot_index closes a listed abbreviation."""
    end = dot_index + 1
    for abbrev in ABBREVIATIONS:
        start = end - len(abbrev)
        if start < 0:
            continue
        if text[start:end].lower() != abbrev:
            continue
        if start == 0 or text[start - 1].isspace():
            return True
    return False


def _iter_raw_sentences(body: str):
    buf: list[str] = []
    n = len(body)
    for i, ch in enumerate(body):
        if ch == "\n":
            yield "".join(buf)
            buf = []
            continue
        buf.append(ch)
        if ch in _TERMINATORS:
            nxt = body[i + 1] if i + 1 < n else ""
            if nxt and not nxt.isspace():
                continue
            if ch == "." and _abbreviation_before(body, i):
                continue
            yield "".join(buf)
            buf = []
    if buf:
        yield "".join(buf)


def split_sentences(body: str, message_id: str = "") -> list[Sentence]:
    """Split a cleaned body into sentences.

    Boundaries are '.', '!', '?' (when followed by whitespace or end of text)
    and newlines. A '.' closing a known abbreviation does not split.
    Whitespace is trimmed and empty results are dropped; each emitted
    sentence is tokenized and tagged with ``message_id#index``.
    """
    out: list[Sentence] = []
    for raw in _iter_raw_sentences(body):
        text = raw.strip()
        if not text:
            continue
        tokens = tokenize(text)
        if not tokens:
            continue
        out.append(
            Sentence(text=text, tokens=tuple(tokens), origin=f"{message_id}#{len(out)}")
        )
    return out
