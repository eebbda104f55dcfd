"""TF-IDF vectorization with smoothed idf.

idf(t) = ln((1+N)/(1+df(t))) + 1; document vectors are raw term counts
scaled by idf, then L2-normalized. Vocabulary comes from training documents
only; out-of-vocabulary terms are ignored at transform time so an all-OOV
document maps to the zero vector.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np


class EmptyCorpus(ValueError):
    """Raised when no nonempty training document was supplied."""


@dataclass(frozen=True)
class TfidfModel:
    vocabulary: dict[str, int]
    idf: np.ndarray
    doc_count: int

    def __post_init__(self) -> None:
        if sorted(self.vocabulary.values()) != list(range(len(self.vocabulary))):
            raise ValueError("vocabulary indices must be dense 0..|V|-1")
        if len(self.idf) != len(self.vocabulary):
            raise ValueError("idf length must match vocabulary size")

    @property
    def dim(self) -> int:
        return len(self.vocabulary)


def fit_vocabulary(train_docs: Sequence[Sequence[str]]) -> TfidfModel:
    """Build the vocabulary and idf weights from training documents.

    Terms are assigned columns in sorted order, which makes the mapping
    reproducible independent of document order.
    """
    if not any(len(doc) > 0 for doc in train_docs):
        raise EmptyCorpus("need at least one nonempty training document")
    n = len(train_docs)
    df: Counter[str] = Counter()
    for doc in train_docs:
        df.update(set(doc))
    vocabulary = {term: i for i, term in enumerate(sorted(df))}
    idf = np.empty(len(vocabulary))
    for term, i in vocabulary.items():
        idf[i] = np.log((1 + n) / (1 + df[term])) + 1.0
    return TfidfModel(vocabulary=vocabulary, idf=idf, doc_count=n)


def tfidf_transform(doc: Sequence[str], model: TfidfModel) -> np.ndarray:
    vec = np.zeros(model.dim)
    for term, count in Counter(doc).items():
        i = model.vocabulary.get(term)
        if i is not None:
            vec[i] = count * model.idf[i]
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def tfidf_transform_batch(docs: Sequence[Sequence[str]], model: TfidfModel) -> np.ndarray:
    return np.stack([tfidf_transform(doc, model) for doc in docs]) if docs else np.zeros((0, model.dim))


def tfidf_to_json(model: TfidfModel) -> dict:
    return {
        "vocabulary": model.vocabulary,
        "idf": [float(v) for v in model.idf],
        "doc_count": model.doc_count,
    }


def tfidf_from_json(data: dict) -> TfidfModel:
    return TfidfModel(
        vocabulary={str(k): int(v) for k, v in data["vocabulary"].items()},
        idf=np.asarray(data["idf"], dtype=float),
        doc_count=int(data["doc_count"]),
    )
