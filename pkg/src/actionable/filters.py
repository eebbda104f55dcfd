"""The four-filter cascade that decides whether a sentence is a candidate task.

Filters run in a fixed order with short-circuit rejection:

  F1  an action verb from the lexicon must be present;
  F2  the token count must be within bounds and the action-verb ratio high
      enough (a lone action verb buried in a very long sentence loses its
      value);
  F3  a subject pronoun, an object pronoun, or an imperative-initial action
      verb must anchor the demand to someone;
  F4  sentences containing a negation term are disregarded.

All matching is lowercase surface-form lookup against the lexicon; verbs are
matched via their expanded regular inflections, which keeps the cascade
deterministic and dependency-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .segment import Sentence, Token

LEXICON_FILES = (
    "action_verbs.txt",
    "subject_pronouns.txt",
    "object_pronouns.txt",
    "negations.txt",
)


def default_lexicon_dir() -> Path:
    """Directory holding the bundled default word lists."""
    return Path(__file__).parent / "data" / "lexicon"


def expand_inflections(base_verb: str) -> set[str]:
    """Regular surface forms of a base verb: 3rd person, past, gerund.

    The 3rd-person form takes ``es`` after s/x/z/ch/sh, otherwise ``s``; the
    past and gerund are e-drop aware (``close`` -> ``closed``/``closing``).
    Irregular past forms are not generated; list them explicitly in the
    lexicon file.
    """
    if not base_verb.isalpha():
        raise ValueError(f"base verb must be alphabetic, got {base_verb!r}")
    base = base_verb.lower()
    if base.endswith(("s", "x", "z", "ch", "sh")):
        third = base + "es"
    else:
        third = base + "s"
    if base.endswith("e"):
        past = base + "d"
        gerund = base[:-1] + "ing"
    else:
        past = base + "ed"
        gerund = base + "ing"
    return {base, third, past, gerund}


@dataclass(frozen=True)
class Lexicon:
    """Word lists driving the cascade, all lowercase surface forms.

    ``action_verbs`` holds the inflection-expanded set; the pronoun sets are
    role-disjoint by construction.
    """

    action_verbs: frozenset[str]
    subject_pronouns: frozenset[str]
    object_pronouns: frozenset[str]
    negations: frozenset[str]

    def __post_init__(self) -> None:
        for name in ("action_verbs", "subject_pronouns", "object_pronouns", "negations"):
            for entry in getattr(self, name):
                if not entry or entry != entry.lower() or any(c.isspace() for c in entry):
                    raise ValueError(f"bad lexicon entry in {name}: {entry!r}")
        overlap = self.subject_pronouns & self.object_pronouns
        if overlap:
            raise ValueError(f"pronoun appears in both roles: {sorted(overlap)}")


def _read_word_file(path: Path) -> list[str]:
    words: list[str] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        entry = entry.lower()
        if any(c.isspace() for c in entry):
            raise ValueError(f"{path}:{lineno}: entry contains whitespace: {entry!r}")
        words.append(entry)
    return words


def load_lexicon(directory: Path | str) -> Lexicon:
    """Load the four word-list files from a directory and expand verb inflections.

    File format: UTF-8, one entry per line, ``#`` starts a comment. Entries
    that are not purely alphabetic (explicit irregular forms, contractions)
    are taken as-is without expansion.
    """
    directory = Path(directory)
    verbs: set[str] = set()
    for entry in _read_word_file(directory / "action_verbs.txt"):
        verbs.add(entry)
        if entry.isalpha():
            verbs |= expand_inflections(entry)
    return Lexicon(
        action_verbs=frozenset(verbs),
        subject_pronouns=frozenset(_read_word_file(directory / "subject_pronouns.txt")),
        object_pronouns=frozenset(_read_word_file(directory / "object_pronouns.txt")),
        negations=frozenset(_read_word_file(directory / "negations.txt")),
    )


@dataclass(frozen=True)
class FilterConfig:
    """Tunables for the cascade. Defaults keep short task phrases in bounds."""

    lexicon: Lexicon
    min_tokens: int = 3
    max_tokens: int = 25
    min_action_ratio: float = 0.04
    allow_imperative_as_pronoun_pass: bool = True

    def __post_init__(self) -> None:
        if not 1 <= self.min_tokens <= self.max_tokens:
            raise ValueError(
                f"need 1 <= min_tokens <= max_tokens, got {self.min_tokens}..{self.max_tokens}"
            )
        if not 0.0 <= self.min_action_ratio <= 1.0:
            raise ValueError(f"min_action_ratio out of [0,1]: {self.min_action_ratio}")


class RejectedBy(str, Enum):
    F1_ACTION_VERB = "F1_action_verb"
    F2_LENGTH = "F2_length"
    F3_PRONOUN = "F3_pronoun"
    F4_NEGATION = "F4_negation"


@dataclass(frozen=True)
class PronounSignal:
    has_subject: bool
    has_object: bool
    imperative_start: bool


@dataclass(frozen=True)
class FilterVerdict:
    """Outcome of the cascade for one sentence.

    ``rejected_by`` names the first failing filter (evaluation order
    F1 -> F2 -> F3 -> F4), and is absent exactly when ``passed``.
    """

    passed: bool
    rejected_by: RejectedBy | None
    matched_verbs: tuple[str, ...]
    pronoun_signal: PronounSignal


def contains_action_verb(
    tokens: "list[Token] | tuple[Token, ...]", lexicon: Lexicon
) -> tuple[bool, list[str]]:
    """Whether any token is a known action-verb form; matches listed in order."""
    matched = [t.lower for t in tokens if t.lower in lexicon.action_verbs]
    return bool(matched), matched


def length_ok(
    tokens: "list[Token] | tuple[Token, ...]", matched_count: int, cfg: FilterConfig
) -> bool:
    """Token count within [min_tokens, max_tokens] and verb ratio above floor."""
    n = len(tokens)
    if n == 0 or not cfg.min_tokens <= n <= cfg.max_tokens:
        return False
    return matched_count / n >= cfg.min_action_ratio


def pronoun_signal(
    tokens: "list[Token] | tuple[Token, ...]", lexicon: Lexicon
) -> PronounSignal:
    """Pronoun evidence plus whether the sentence opens with an action verb."""
    return PronounSignal(
        has_subject=any(t.lower in lexicon.subject_pronouns for t in tokens),
        has_object=any(t.lower in lexicon.object_pronouns for t in tokens),
        imperative_start=bool(tokens) and tokens[0].lower in lexicon.action_verbs,
    )


def filter3_passes(signal: PronounSignal, cfg: FilterConfig) -> bool:
    """F3 gate: subject or object pronoun, or (configurably) imperative start."""
    return (
        signal.has_subject
        or signal.has_object
        or (cfg.allow_imperative_as_pronoun_pass and signal.imperative_start)
    )


def contains_negation(
    tokens: "list[Token] | tuple[Token, ...]", lexicon: Lexicon
) -> bool:
    return any(t.lower in lexicon.negations for t in tokens)


def apply_filters(sentence: Sentence, cfg: FilterConfig) -> FilterVerdict:
    """Run the cascade on a tokenized sentence.

    Pure function of (sentence, cfg); rejection is attributed to the first
    failing filter in the fixed F1 -> F2 -> F3 -> F4 order.
    """
    tokens = sentence.tokens
    has_verb, matched = contains_action_verb(tokens, cfg.lexicon)
    signal = pronoun_signal(tokens, cfg.lexicon)
    matched_t = tuple(matched)

    if not has_verb:
        return FilterVerdict(False, RejectedBy.F1_ACTION_VERB, matched_t, signal)
    if not length_ok(tokens, len(matched), cfg):
        return FilterVerdict(False, RejectedBy.F2_LENGTH, matched_t, signal)
    if not filter3_passes(signal, cfg):
        return FilterVerdict(False, RejectedBy.F3_PRONOUN, matched_t, signal)
    if contains_negation(tokens, cfg.lexicon):
        return FilterVerdict(False, RejectedBy.F4_NEGATION, matched_t, signal)
    return FilterVerdict(True, None, matched_t, signal)
