from pathlib import Path

import numpy as np
import pytest

from storyfill.bpe import SPECIAL_TOKENS, train_vocab
from storyfill.model import (
    InfillBatch,
    ModelConfig,
    TransformerLM,
    build_infill_sequence,
    make_infill_batch,
    make_mlm_batch,
)

DATA = Path(__file__).parent / "data"


def tiny_model(mode="causal", vocab_size=50, seed=1, dtype=np.float64, **kw):
    cfg = ModelConfig(mode=mode, n_layers=2, n_heads=2, d_model=16, d_ff=32,
                      max_seq_len=128, vocab_size=vocab_size, seed=seed, **kw)
    return TransformerLM(cfg, dtype=dtype)


def random_batch(model, batch=2, length=9, mask_from=3, seed=0):
    rng = np.random.default_rng(seed)
    ids = rng.integers(0, model.config.vocab_size, size=(batch, length))
    mask = np.zeros((batch, length), dtype=bool)
    mask[:, mask_from:] = True
    return InfillBatch(token_ids=ids, labels=ids.copy(), loss_mask=mask)


def test_config_validation():
    with pytest.raises(ValueError):
        ModelConfig(d_model=30, n_heads=4)
    with pytest.raises(ValueError):
        ModelConfig(max_seq_len=64)
    with pytest.raises(ValueError):
        ModelConfig(mode="bidirectional")


def test_softmax_rows_normalize():
    model = tiny_model()
    ids = np.arange(8)
    logits, _ = model.forward(ids)
    probs = np.exp(logits - logits.max(axis=-1, keepdims=True))
    probs /= probs.sum(axis=-1, keepdims=True)
    assert np.allclose(probs.sum(axis=-1), 1.0, atol=1e-6)


def test_causality_append_token():
    model = tiny_model()
    rng = np.random.default_rng(3)
    base = rng.integers(0, 50, size=12)
    extended = np.concatenate([base, [7]])
    l1, _ = model.forward(base)
    l2, _ = model.forward(extended)
    assert np.abs(l1[0] - l2[0, :12]).max() < 1e-6


def test_causality_future_perturbation_many_inputs():
    model = tiny_model()
    rng = np.random.default_rng(11)
    for _ in range(50):
        length = int(rng.integers(4, 20))
        t = int(rng.integers(1, length))
        ids = rng.integers(0, 50, size=length)
        mutated = ids.copy()
        mutated[t] = (mutated[t] + 1 + rng.integers(48)) % 50
        l1, _ = model.forward(ids)
        l2, _ = model.forward(mutated)
        assert np.abs(l1[0, :t] - l2[0, :t]).max() < 1e-6


def test_masked_mode_attends_bidirectionally():
    model = tiny_model(mode="masked")
    ids = np.arange(10)
    mutated = ids.copy()
    mutated[9] = 3
    l1, _ = model.forward(ids)
    l2, _ = model.forward(mutated)
    # perturbing the last token must change earlier logits
    assert np.abs(l1[0, :9] - l2[0, :9]).max() > 1e-8


def test_golden_forward():
    data = np.load(DATA / "golden_forward.npz")
    cfg = ModelConfig(mode="causal", n_layers=2, n_heads=2, d_model=16, d_ff=32,
                      max_seq_len=128, vocab_size=64, seed=42)
    model = TransformerLM(cfg, dtype=np.float64)
    logits, hidden = model.forward(data["token_ids"])
    assert np.allclose(logits[0], data["logits"], atol=1e-10)
    assert np.allclose(hidden[0], data["hidden"], atol=1e-10)


def test_overlength_input_errors():
    model = tiny_model()
    with pytest.raises(ValueError):
        model.forward(np.zeros(129, dtype=np.int64))


def test_infill_loss_near_log_vocab_at_init():
    model = tiny_model(vocab_size=200)
    batch = random_batch(model, batch=4, length=20, mask_from=5, seed=2)
    loss = model.infill_loss(batch)
    assert abs(loss - np.log(200)) / np.log(200) < 0.05


def test_infill_loss_masked_label_invariance():
    model = tiny_model()
    batch = random_batch(model, seed=4)
    loss_before = model.infill_loss(batch)
    relabeled = InfillBatch(
        token_ids=batch.token_ids,
        labels=batch.labels.copy(),
        loss_mask=batch.loss_mask,
    )
    relabeled.labels[:, :3] = (relabeled.labels[:, :3] + 13) % 50
    loss_after = model.infill_loss(relabeled)
    assert loss_before == loss_after  # bit-for-bit


def test_infill_loss_matches_manual_cross_entropy():
    # independent oracle: per-position softmax cross-entropy over the
    # masked positions, computed without reusing the model's loss code
    model = tiny_model()
    batch = random_batch(model, batch=2, length=9, mask_from=3, seed=5)
    logits, _ = model.forward(batch.token_ids)
    total, count = 0.0, 0
    for b in range(2):
        for j in range(9):
            if not batch.loss_mask[b, j]:
                continue
            row = logits[b, j - 1]
            probs = np.exp(row - row.max())
            probs /= probs.sum()
            total += -np.log(probs[batch.labels[b, j]])
            count += 1
    oracle = total / count
    assert abs(model.infill_loss(batch) - oracle) < 1e-6


def test_infill_loss_all_false_mask_errors():
    model = tiny_model()
    batch = random_batch(model)
    batch.loss_mask[:] = False
    with pytest.raises(ValueError):
        model.infill_loss(batch)


def check_gradients(model, batch, n_params: int, seed: int, eps: float = 1e-5) -> int:
    """Assert analytic vs central-difference agreement on sampled parameters.

    Coordinates with |gradient| below 1e-6 are skipped: there the central
    difference is dominated by floating-point cancellation noise rather
    than by the derivative, so a relative comparison is meaningless.
    """
    _, grads = model.loss_and_grads(batch)
    rng = np.random.default_rng(seed)
    names = list(model.params)
    checked = 0
    attempts = 0
    while checked < n_params:
        attempts += 1
        assert attempts < 50 * n_params, "too many near-zero gradients sampled"
        name = names[int(rng.integers(len(names)))]
        arr = model.params[name]
        idx = tuple(int(rng.integers(s)) for s in arr.shape)
        an = grads[name][idx]
        if abs(an) < 1e-6:
            continue
        orig = arr[idx]
        arr[idx] = orig + eps
        lp = model.infill_loss(batch)
        arr[idx] = orig - eps
        lm = model.infill_loss(batch)
        arr[idx] = orig
        fd = (lp - lm) / (2 * eps)
        rel = abs(fd - an) / max(abs(fd), abs(an))
        assert rel < 1e-4, f"{name}{idx}: analytic {an} vs fd {fd} (rel {rel:.2e})"
        checked += 1
    return checked


def test_gradient_check_central_differences():
    # double precision, 2 layers; 100 random parameters, rel err < 1e-4
    model = tiny_model(dtype=np.float64)
    batch = random_batch(model, batch=2, length=10, mask_from=3, seed=6)
    assert check_gradients(model, batch, n_params=100, seed=99) == 100


def test_gradient_check_masked_mode():
    model = tiny_model(mode="masked", dtype=np.float64)
    rng = np.random.default_rng(1)
    ids = rng.integers(0, 50, size=(2, 8))
    mask = np.zeros((2, 8), dtype=bool)
    mask[0, 2] = mask[1, 6] = True
    batch = InfillBatch(token_ids=ids, labels=ids.copy(), loss_mask=mask)
    assert check_gradients(model, batch, n_params=40, seed=2) == 40


@pytest.fixture(scope="module")
def small_vocab():
    corpus = ["the sailor walked to the harbor", "a baker carried bread home"] * 4
    return train_vocab(corpus, 256 + len(SPECIAL_TOKENS) + 30)


def test_build_infill_sequence_layout(small_vocab):
    v = small_vocab
    ids, mask = build_infill_sequence(v, ["sailor", "harbor"], "the sailor walked to the harbor")
    assert ids[0] == v.prompt_start_id
    end = ids.index(v.prompt_end_id)
    assert ids[-1] == v.eos_id
    # mask false through PROMPT_END, true on every target token and EOS
    assert mask[: end + 1] == [False] * (end + 1)
    assert mask[end + 1 :] == [True] * (len(ids) - end - 1)


def test_build_infill_sequence_truncation(small_vocab):
    long_prompt = ["sailor"] * 60
    long_target = "the sailor walked " * 40
    ids, mask = build_infill_sequence(small_vocab, long_prompt, long_target)
    end = ids.index(small_vocab.prompt_end_id)
    assert end - 1 <= 25  # prompt token budget
    assert len(ids) <= 1 + 25 + 1 + 75 + 1
    assert sum(mask) <= 76


def test_make_infill_batch_padding(small_vocab):
    from storyfill.corpus import SentenceRecord, InfillPair

    def pair(words, text):
        rec = SentenceRecord.from_tokens("x:0", text.split(), "x")
        return InfillPair(id="x:0#a0", prompt_words=tuple(words), target=rec, drop_fraction=0.7)

    batch = make_infill_batch(
        small_vocab,
        [pair(["sailor"], "the sailor walked"), pair(["baker"], "a baker carried bread home to the harbor")],
        max_seq_len=128,
    )
    assert batch.token_ids.shape == batch.loss_mask.shape
    # padded positions never contribute to the loss
    pad_positions = batch.token_ids == small_vocab.pad_id
    assert not batch.loss_mask[pad_positions].any()


def test_make_mlm_batch_masks_tokens(small_vocab):
    rng = np.random.default_rng(0)
    batch = make_mlm_batch(small_vocab, ["the sailor walked to the harbor"], rng, 128)
    masked_positions = batch.token_ids == small_vocab.mask_id
    assert masked_positions.any()
    assert (batch.loss_mask == masked_positions).all()
    # labels keep the original ids at masked slots
    assert (batch.labels[masked_positions] != small_vocab.mask_id).all()


def test_embed_unit_norm_and_pure(small_vocab):
    model = TransformerLM(
        ModelConfig(mode="masked", n_layers=2, n_heads=2, d_model=16, d_ff=32,
                    max_seq_len=128, vocab_size=len(small_vocab), seed=3),
        vocab=small_vocab,
        dtype=np.float64,
    )
    e1 = model.embed("the sailor walked home")
    e2 = model.embed("the sailor walked home")
    assert abs(np.linalg.norm(e1) - 1.0) < 1e-6
    assert np.array_equal(e1, e2)
    assert e1.shape == (16,)
    with pytest.raises(ValueError):
        model.embed("")


def test_masked_token_prob_properties(small_vocab):
    model = TransformerLM(
        ModelConfig(mode="masked", n_layers=2, n_heads=2, d_model=16, d_ff=32,
                    max_seq_len=128, vocab_size=len(small_vocab), seed=4),
        vocab=small_vocab,
        dtype=np.float64,
    )
    ids = small_vocab.encode("the sailor walked").ids
    p = model.masked_token_prob(ids, 1)
    assert 0 < p < 1
    # untrained model is near-uniform: within a factor of 3 of 1/V
    uniform = 1.0 / len(small_vocab)
    assert uniform / 3 < p < uniform * 3


def test_masked_token_prob_rejects_causal(small_vocab):
    model = TransformerLM(
        ModelConfig(mode="causal", n_layers=2, n_heads=2, d_model=16, d_ff=32,
                    max_seq_len=128, vocab_size=len(small_vocab), seed=4),
        vocab=small_vocab,
    )
    with pytest.raises(ValueError):
        model.masked_token_prob(small_vocab.encode("the sailor").ids, 0)


def test_decode_state_matches_full_forward():
    model = tiny_model()
    rng = np.random.default_rng(8)
    seq = [int(x) for x in rng.integers(0, 50, size=17)]
    state = model.start_decode(seq)
    full, _ = model.forward(np.asarray(seq))
    assert np.allclose(state.last_logits, full[0, -1], atol=1e-9)
