import numpy as np
import pytest

from storyfill.bpe import SPECIAL_TOKENS, train_vocab
from storyfill.checkpoint import load_checkpoint, save_checkpoint
from storyfill.model import ModelConfig, TransformerLM
from storyfill.training import Checkpoint


@pytest.fixture()
def small():
    vocab = train_vocab(["the sailor walked home", "a baker carried bread"] * 3,
                        256 + len(SPECIAL_TOKENS) + 20)
    cfg = ModelConfig(mode="causal", n_layers=2, n_heads=2, d_model=16, d_ff=32,
                      max_seq_len=128, vocab_size=len(vocab), seed=7)
    model = TransformerLM(cfg, vocab=vocab)  # float32: file dtype
    ckpt = Checkpoint(config=cfg, params=model.params,
                      tokenizer_hash=vocab.content_hash(),
                      best_valid_perplexity=12.5, step=321)
    return vocab, cfg, model, ckpt


def test_round_trip_bit_exact_logits(small, tmp_path):
    vocab, cfg, model, ckpt = small
    path = tmp_path / "model.ckpt"
    save_checkpoint(ckpt, path)
    loaded = load_checkpoint(path)
    assert loaded.config == cfg
    assert loaded.tokenizer_hash == vocab.content_hash()
    assert loaded.best_valid_perplexity == 12.5
    assert loaded.step == 321
    reloaded_model = loaded.to_model(vocab)
    ids = np.arange(10)
    a, _ = model.forward(ids)
    b, _ = reloaded_model.forward(ids)
    assert np.array_equal(a, b)  # float32 in, float32 out: bit-comparable


def test_tokenizer_hash_mismatch(small, tmp_path):
    _, _, _, ckpt = small
    path = tmp_path / "model.ckpt"
    save_checkpoint(ckpt, path)
    other_vocab = train_vocab(["completely different text here"] * 4,
                              256 + len(SPECIAL_TOKENS) + 10)
    with pytest.raises(ValueError):
        load_checkpoint(path).to_model(other_vocab)


def test_bad_magic(tmp_path):
    path = tmp_path / "bad.ckpt"
    path.write_bytes(b"NOTACKPT" + b"\x00" * 64)
    with pytest.raises(ValueError):
        load_checkpoint(path)


def test_shape_mismatch_detected(small, tmp_path):
    import json
    import struct

    _, _, _, ckpt = small
    path = tmp_path / "model.ckpt"
    save_checkpoint(ckpt, path)
    raw = bytearray(path.read_bytes())
    (hlen,) = struct.unpack("<I", raw[8:12])
    header = json.loads(raw[12 : 12 + hlen].decode())
    header["tensors"][0]["shape"] = [1, 1]
    new_header = json.dumps(header, sort_keys=True).encode()
    corrupted = raw[:8] + struct.pack("<I", len(new_header)) + new_header + raw[12 + hlen :]
    bad = tmp_path / "corrupt.ckpt"
    bad.write_bytes(corrupted)
    with pytest.raises(ValueError):
        load_checkpoint(bad)


def test_file_is_float32_little_endian(small, tmp_path):
    _, _, model, ckpt = small
    path = tmp_path / "model.ckpt"
    save_checkpoint(ckpt, path)
    loaded = load_checkpoint(path)
    for name, arr in loaded.params.items():
        assert arr.dtype == np.float32
        assert np.array_equal(arr, model.params[name])
