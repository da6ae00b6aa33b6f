"""Shared fixtures: tiny random-init models and small wav corpora.

No pretrained checkpoints are downloaded; every model here is a few KB of
randomly initialized weights, which is all the dump format cares about.
"""

import wave

import numpy as np
import pytest
import torch
from transformers import Wav2Vec2Config, Wav2Vec2Model

# 3 transformer layers over a short conv stack; fast enough for every test
TINY = dict(
    hidden_size=32,
    num_hidden_layers=3,
    num_attention_heads=2,
    intermediate_size=64,
    conv_dim=(24, 24, 24),
    conv_kernel=(10, 3, 3),
    conv_stride=(5, 2, 2),
    num_feat_extract_layers=3,
    num_conv_pos_embeddings=16,
    num_conv_pos_embedding_groups=4,
    vocab_size=40,
)

# the published base model's conv stack (20 ms stride, 25 ms field) with 12
# transformer layers, tiny everywhere else
DEEP = dict(
    hidden_size=16,
    num_hidden_layers=12,
    num_attention_heads=2,
    intermediate_size=32,
    conv_dim=(8,) * 7,
    conv_kernel=(10, 3, 3, 3, 3, 2, 2),
    conv_stride=(5, 2, 2, 2, 2, 2, 2),
    num_feat_extract_layers=7,
    num_conv_pos_embeddings=16,
    num_conv_pos_embedding_groups=4,
    vocab_size=40,
)


def _build_model(params, seed=1234):
    torch.manual_seed(seed)
    model = Wav2Vec2Model(Wav2Vec2Config(**params))
    model.eval()
    return model


@pytest.fixture(scope="session")
def tiny_model():
    return _build_model(TINY)


@pytest.fixture(scope="session")
def deep_model():
    return _build_model(DEEP)


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("tiny_model")
    _build_model(TINY).save_pretrained(d)
    return d


@pytest.fixture()
def model_factory():
    return lambda **overrides: _build_model({**TINY, **overrides})


def write_wav(path, pcm, rate=16_000, channels=1, width=2):
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(width)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())


@pytest.fixture()
def corpus_factory(tmp_path):
    """Build a directory of random mono 16 kHz wavs plus an uttlist file.

    ``seconds`` is either a fixed duration or a (lo, hi) range.  Returns
    (uttlist_path, utt_ids).
    """

    def make(n_utts, seconds=1.0, seed=7, subdir="wavs"):
        root = tmp_path / subdir
        root.mkdir(parents=True, exist_ok=True)
        rng = np.random.default_rng(seed)
        ids, lines = [], []
        for i in range(n_utts):
            utt = f"utt_{i:03d}"
            dur = rng.uniform(*seconds) if isinstance(seconds, tuple) else seconds
            pcm = (rng.standard_normal(int(dur * 16_000)) * 3000.0).clip(-32000, 32000).astype("<i2")
            write_wav(root / f"{utt}.wav", pcm)
            ids.append(utt)
            lines.append(f"{utt}\t{utt}.wav")
        uttlist = root / "uttlist.txt"
        uttlist.write_text("\n".join(lines) + "\n")
        return uttlist, ids

    return make
