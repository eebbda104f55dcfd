"""Encoder construction, determinism, and identifier parsing."""

from __future__ import annotations

import sys
import types

import numpy as np
import pytest

from embedding_service.encoders import (
    HashedEncoder,
    WordVectorEncoder,
    load_encoder,
)


def test_hashed_deterministic():
    enc = HashedEncoder(dim=64, seed=0)
    a = enc.encode(["please send the report"])[0]
    b = enc.encode(["please send the report"])[0]
    np.testing.assert_array_equal(a, b)


def test_hashed_unit_norm_or_zero():
    enc = HashedEncoder(dim=64)
    vec = enc.encode(["a few words here"])[0]
    assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-9)
    assert not enc.encode([""])[0].any()


def test_hashed_seed_and_dim():
    base = HashedEncoder(dim=64, seed=0).encode(["same text"])[0]
    other_seed = HashedEncoder(dim=64, seed=1).encode(["same text"])[0]
    assert not np.array_equal(base, other_seed)
    assert HashedEncoder(dim=128).encode(["x"])[0].shape == (128,)


def test_hashed_bigrams_are_order_sensitive():
    enc = HashedEncoder(dim=256)
    ab = enc.encode(["alpha beta"])[0]
    ba = enc.encode(["beta alpha"])[0]
    assert not np.array_equal(ab, ba)


def test_hashed_min_dim():
    with pytest.raises(ValueError):
        HashedEncoder(dim=4)


def test_hashed_identifier_parsing():
    assert load_encoder("hashed").dim == 512
    assert load_encoder("hashed:64").dim == 64
    enc = load_encoder("hashed:64:9")
    assert enc.dim == 64 and enc.seed == 9
    with pytest.raises(ValueError):
        load_encoder("hashed:64:9:junk")


def test_wordvec_from_npz(tmp_path):
    rng = np.random.default_rng(0)
    vocab = np.array(["hello", "world", "send", "report"])
    vectors = rng.normal(size=(4, 16))
    path = tmp_path / "vecs.npz"
    np.savez(path, vocab=vocab, vectors=vectors)
    enc = WordVectorEncoder.from_npz(path)
    assert enc.dim == 16
    assert enc.name == "wordvec-vecs"

    got = enc.encode(["Hello WORLD"])[0]
    want = (vectors[0] + vectors[1]) / 2
    want = want / np.linalg.norm(want)
    np.testing.assert_allclose(got, want, atol=1e-12)

    # out-of-vocabulary words are skipped; no hits at all -> zero vector
    only_known = enc.encode(["send unknownword report"])[0]
    pooled = (vectors[2] + vectors[3]) / 2
    np.testing.assert_allclose(only_known, pooled / np.linalg.norm(pooled), atol=1e-12)
    assert not enc.encode(["entirely unknown words"])[0].any()


def test_wordvec_rejects_bad_file(tmp_path):
    path = tmp_path / "bad.npz"
    np.savez(path, foo=np.array([1]))
    with pytest.raises(ValueError):
        WordVectorEncoder.from_npz(path)
    shaped = tmp_path / "shaped.npz"
    np.savez(shaped, vocab=np.array(["a", "b"]), vectors=np.zeros((3, 4)))
    with pytest.raises(ValueError):
        WordVectorEncoder.from_npz(shaped)


def test_load_encoder_npz_path(tmp_path):
    path = tmp_path / "tiny.npz"
    np.savez(path, vocab=np.array(["a"]), vectors=np.ones((1, 8)))
    assert load_encoder(str(path)).dim == 8
    with pytest.raises(FileNotFoundError):
        load_encoder(str(tmp_path / "missing.npz"))


def test_load_encoder_unknown_identifier():
    with pytest.raises(ValueError):
        load_encoder("magic-model-9000")


def test_sentence_transformer_adapter(monkeypatch):
    class FakeModel:
        def __init__(self, name):
            self.name = name
            self.eval_called = False

        def eval(self):
            self.eval_called = True

        def encode(self, sentences, convert_to_numpy=True):
            return np.array(
                [[float(len(s)), 1.0, 2.0, 3.0] for s in sentences], dtype=np.float64
            )

    fake_module = types.ModuleType("sentence_transformers")
    fake_module.SentenceTransformer = FakeModel
    monkeypatch.setitem(sys.modules, "sentence_transformers", fake_module)

    enc = load_encoder("st:some/model")
    assert enc.dim == 4
    assert enc.name == "st-some/model"
    vecs = enc.encode(["ab", "xyz"])
    assert [v[0] for v in vecs] == [2.0, 3.0]
    assert enc.encode([]) == []
