"""Weak-labeled dataset assembly: filter verdicts become labels.

A sentence's label is 1 exactly when it passed the cascade. The raw filter
output is overwhelmingly negative, so negatives are downsampled (seeded,
uniform) to a configurable ratio against positives before a stratified
train/val/test split.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import EmailMessage
from .filters import FilterConfig, FilterVerdict, RejectedBy, apply_filters
from .segment import split_sentences

SPLIT_NAMES = ("train", "val", "test")


class EmptyDataset(ValueError):
    """Raised when filtering produced zero positive examples."""


class RatioError(ValueError):
    """Raised when split ratios are negative or do not sum to one."""


@dataclass(frozen=True)
class LabeledExample:
    """One sentence with its weak label and the verdict that produced it.

    ``trace`` is None only for examples deserialized from JSONL, where the
    full verdict is not recoverable.
    """

    text: str
    label: int
    origin: str
    trace: FilterVerdict | None = None

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")
        if self.trace is not None and self.label != weak_label(self.trace):
            raise ValueError("label inconsistent with filter trace")


@dataclass(frozen=True)
class LabeledDataset:
    examples: tuple[LabeledExample, ...]
    seed: int
    # One split name per example, parallel to `examples`; None until split().
    split_assignment: tuple[str, ...] | None = None
    # Set when fewer negatives were available than the balance ratio asked for.
    negative_shortfall: bool = False

    def __post_init__(self) -> None:
        if self.split_assignment is not None:
            if len(self.split_assignment) != len(self.examples):
                raise ValueError("split assignment length mismatch")
            bad = set(self.split_assignment) - set(SPLIT_NAMES)
            if bad:
                raise ValueError(f"unknown split names: {sorted(bad)}")

    def subset(self, split: str) -> tuple[LabeledExample, ...]:
        if self.split_assignment is None:
            raise ValueError("dataset has no split assignment")
        return tuple(
            ex
            for ex, s in zip(self.examples, self.split_assignment)
            if s == split
        )


@dataclass
class FunnelCounts:
    """Per-filter rejection tallies; passed + rejections = total."""

    total: int = 0
    passed: int = 0
    rejected: dict[str, int] = field(
        default_factory=lambda: {r.value: 0 for r in RejectedBy}
    )

    def record(self, verdict: FilterVerdict) -> None:
        self.total += 1
        if verdict.passed:
            self.passed += 1
        else:
            assert verdict.rejected_by is not None
            self.rejected[verdict.rejected_by.value] += 1

    def as_dict(self) -> dict:
        return {"total": self.total, "passed": self.passed, "rejected": dict(self.rejected)}


def weak_label(verdict: FilterVerdict) -> int:
    return 1 if verdict.passed else 0


def label_sentences(
    emails: Iterable[EmailMessage], cfg: FilterConfig
) -> tuple[list[LabeledExample], FunnelCounts]:
    """Segment every email, run the cascade, and label each sentence."""
    examples: list[LabeledExample] = []
    funnel = FunnelCounts()
    for email in emails:
        for sentence in split_sentences(email.body, email.id):
            verdict = apply_filters(sentence, cfg)
            funnel.record(verdict)
            examples.append(
                LabeledExample(
                    text=sentence.text,
                    label=weak_label(verdict),
                    origin=sentence.origin,
                    trace=verdict,
                )
            )
    return examples, funnel


def assemble_dataset(
    examples: Sequence[LabeledExample], balance: float, seed: int
) -> LabeledDataset:
    """Downsample negatives to balance × positives, then shuffle by seed.

    Positives are never dropped. When too few negatives exist, all are kept
    and the shortfall flag is set.
    """
    if balance <= 0:
        raise ValueError(f"balance must be positive, got {balance}")
    positives = [ex for ex in examples if ex.label == 1]
    negatives = [ex for ex in examples if ex.label == 0]
    if not positives:
        raise EmptyDataset("no sentence passed the filter cascade")

    target = round(balance * len(positives))
    shortfall = len(negatives) < target
    if not shortfall:
        negatives = random.Random(f"{seed}|sample").sample(negatives, target)

    kept = positives + negatives
    random.Random(f"{seed}|shuffle").shuffle(kept)
    return LabeledDataset(
        examples=tuple(kept), seed=seed, negative_shortfall=shortfall
    )


def build_dataset(
    emails: Iterable[EmailMessage],
    cfg: FilterConfig,
    balance: float = 1.0,
    seed: int = 0,
) -> LabeledDataset:
    examples, _ = label_sentences(emails, cfg)
    return assemble_dataset(examples, balance, seed)


@dataclass(frozen=True)
class SplitRatios:
    train: float = 0.72
    val: float = 0.08
    test: float = 0.20

    def __post_init__(self) -> None:
        parts = (self.train, self.val, self.test)
        if any(p < 0 for p in parts):
            raise RatioError(f"negative split ratio in {parts}")
        if abs(sum(parts) - 1.0) > 1e-9:
            raise RatioError(f"split ratios must sum to 1, got {parts}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.train, self.val, self.test)


def _apportion(n: int, ratios: tuple[float, float, float]) -> list[int]:
    # Largest-remainder: floors first, then leftovers to the biggest
    # fractional parts, ties to the earlier split. Keeps every count within
    # 1 of ratio*n and sums exactly to n.
    quotas = [r * n for r in ratios]
    counts = [int(q) for q in quotas]
    leftovers = sorted(
        range(3), key=lambda i: (-(quotas[i] - counts[i]), i)
    )
    for i in leftovers[: n - sum(counts)]:
        counts[i] += 1
    return counts


def split(dataset: LabeledDataset, ratios: SplitRatios, seed: int) -> tuple[str, ...]:
    """Stratified seeded split; returns one split name per example."""
    assignment: list[str | None] = [None] * len(dataset.examples)
    for label in (1, 0):
        stratum = [i for i, ex in enumerate(dataset.examples) if ex.label == label]
        random.Random(f"{seed}|split|{label}").shuffle(stratum)
        counts = _apportion(len(stratum), ratios.as_tuple())
        cursor = 0
        for name, count in zip(SPLIT_NAMES, counts):
            for i in stratum[cursor : cursor + count]:
                assignment[i] = name
            cursor += count
    assert all(a is not None for a in assignment)
    return tuple(assignment)  # type: ignore[arg-type]


def assign_split(
    dataset: LabeledDataset, ratios: SplitRatios, seed: int
) -> LabeledDataset:
    return replace(dataset, split_assignment=split(dataset, ratios, seed))


def write_dataset_jsonl(dataset: LabeledDataset, path: Path | str) -> None:
    """One JSON object per example: text, label, split, origin, trace summary."""
    if dataset.split_assignment is None:
        raise ValueError("assign a split before writing the dataset")
    with open(path, "w", encoding="utf-8") as fh:
        for ex, split_name in zip(dataset.examples, dataset.split_assignment):
            trace = ex.trace
            record = {
                "text": ex.text,
                "label": ex.label,
                "split": split_name,
                "origin": ex.origin,
                "rejected_by": (
                    trace.rejected_by.value
                    if trace is not None and trace.rejected_by is not None
                    else None
                ),
                "matched_verbs": list(trace.matched_verbs) if trace is not None else [],
            }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def load_dataset_jsonl(path: Path | str, seed: int = 0) -> LabeledDataset:
    examples: list[LabeledExample] = []
    assignment: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                examples.append(
                    LabeledExample(
                        text=record["text"],
                        label=int(record["label"]),
                        origin=record.get("origin", ""),
                    )
                )
                assignment.append(record["split"])
            except (KeyError, ValueError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad dataset record: {exc}") from exc
    return LabeledDataset(
        examples=tuple(examples), seed=seed, split_assignment=tuple(assignment)
    )
