"""Small transformer language model in plain numpy.

Two attention modes share one parameterization: "causal" applies a
lower-triangular attention mask (each position sees itself and the past) for
infilling training and generation; "masked" attends bidirectionally for
fill-in-the-blank difficulty scoring. Pre-norm blocks with learned absolute
position embeddings, GELU feed-forward, untied output head.

Forward and backward passes are hand-written; gradients are verified against
central finite differences in the test suite, so keep forward() and
loss_and_grads() in exact correspondence when editing either.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
from scipy.special import erf

from .bpe import Vocabulary

CAUSAL, MASKED = "causal", "masked"

# paper-scale truncation limits for the infilling layout
MAX_PROMPT_TOKENS = 25
MAX_TARGET_TOKENS = 75


@dataclass(frozen=True)
class ModelConfig:
    mode: str = CAUSAL
    n_layers: int = 4
    n_heads: int = 4
    d_model: int = 128
    d_ff: int = 512
    max_seq_len: int = 128
    vocab_size: int = 4096
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (CAUSAL, MASKED):
            raise ValueError(f"mode must be '{CAUSAL}' or '{MASKED}', got {self.mode!r}")
        if self.d_model % self.n_heads != 0:
            raise ValueError(
                f"d_model {self.d_model} not divisible by n_heads {self.n_heads}"
            )
        if self.max_seq_len < MAX_PROMPT_TOKENS + MAX_TARGET_TOKENS:
            raise ValueError(
                f"max_seq_len must be at least "
                f"{MAX_PROMPT_TOKENS + MAX_TARGET_TOKENS}, got {self.max_seq_len}"
            )
        for name in ("n_layers", "n_heads", "d_model", "d_ff", "vocab_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n_layers": self.n_layers,
            "n_heads": self.n_heads,
            "d_model": self.d_model,
            "d_ff": self.d_ff,
            "max_seq_len": self.max_seq_len,
            "vocab_size": self.vocab_size,
            "seed": self.seed,
        }


@dataclass
class InfillBatch:
    """Token ids laid out as {{ prompt }} target <eos>, with labels/mask.

    `loss_mask` is true exactly on target-token and <eos> positions; `labels`
    duplicates `token_ids` so masked-out positions can be relabeled without
    touching the model input (the loss must be bit-invariant to that).
    """

    token_ids: np.ndarray  # (B, T) int
    labels: np.ndarray  # (B, T) int
    loss_mask: np.ndarray  # (B, T) bool

    def __post_init__(self):
        if not (self.token_ids.shape == self.labels.shape == self.loss_mask.shape):
            raise ValueError("token_ids, labels and loss_mask must share a shape")


def parameter_shapes(config: ModelConfig) -> dict[str, tuple[int, ...]]:
    d, f, v = config.d_model, config.d_ff, config.vocab_size
    shapes: dict[str, tuple[int, ...]] = {
        "tok_emb": (v, d),
        "pos_emb": (config.max_seq_len, d),
        "ln_f.g": (d,),
        "ln_f.b": (d,),
        "head.w": (d, v),
        "head.b": (v,),
    }
    for i in range(config.n_layers):
        p = f"layers.{i}."
        shapes[p + "ln1.g"] = (d,)
        shapes[p + "ln1.b"] = (d,)
        shapes[p + "attn.w_qkv"] = (d, 3 * d)
        shapes[p + "attn.b_qkv"] = (3 * d,)
        shapes[p + "attn.w_out"] = (d, d)
        shapes[p + "attn.b_out"] = (d,)
        shapes[p + "ln2.g"] = (d,)
        shapes[p + "ln2.b"] = (d,)
        shapes[p + "ff.w1"] = (d, f)
        shapes[p + "ff.b1"] = (f,)
        shapes[p + "ff.w2"] = (f, d)
        shapes[p + "ff.b2"] = (d,)
    return shapes


def init_parameters(config: ModelConfig, dtype=np.float32) -> dict[str, np.ndarray]:
    rng = np.random.default_rng(config.seed)
    params: dict[str, np.ndarray] = {}
    for name, shape in parameter_shapes(config).items():
        if name.endswith((".g",)):
            params[name] = np.ones(shape, dtype=dtype)
        elif name.endswith((".b", ".b_qkv", ".b_out", ".b1", ".b2")) or name == "head.b":
            params[name] = np.zeros(shape, dtype=dtype)
        else:
            params[name] = rng.normal(0.0, 0.02, size=shape).astype(dtype)
    return params


def _layernorm(x: np.ndarray, g: np.ndarray, b: np.ndarray, eps: float = 1e-5):
    mu = x.mean(axis=-1, keepdims=True)
    xc = x - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    return xhat * g + b, (xhat, inv, g)


def _layernorm_backward(dout: np.ndarray, cache) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    xhat, inv, g = cache
    d = xhat.shape[-1]
    dg = (dout * xhat).sum(axis=tuple(range(dout.ndim - 1)))
    db = dout.sum(axis=tuple(range(dout.ndim - 1)))
    dxhat = dout * g
    dx = inv * (
        dxhat
        - dxhat.mean(axis=-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
    )
    return dx, dg, db


_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


def _gelu(x: np.ndarray):
    phi = 0.5 * (1.0 + erf(x / _SQRT2))
    return x * phi, phi


def _gelu_backward(dout: np.ndarray, x: np.ndarray, phi: np.ndarray) -> np.ndarray:
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI
    return dout * (phi + x * pdf)


def _softmax(x: np.ndarray) -> np.ndarray:
    shifted = x - x.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _split_heads(x: np.ndarray, n_heads: int) -> np.ndarray:
    b, t, d = x.shape
    return x.reshape(b, t, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x: np.ndarray) -> np.ndarray:
    b, h, t, hd = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * hd)


class TransformerLM:
    """Parameter container plus forward/backward/decode entry points."""

    def __init__(
        self,
        config: ModelConfig,
        vocab: Vocabulary | None = None,
        dtype=np.float32,
        params: dict[str, np.ndarray] | None = None,
    ):
        self.config = config
        self.vocab = vocab
        self.dtype = dtype
        self.params = params if params is not None else init_parameters(config, dtype)

    # -- forward ---------------------------------------------------------

    def _attention_bias(self, batch: int, t: int, pad_mask: np.ndarray | None) -> np.ndarray | None:
        """Additive attention bias: -inf where a query may not see a key."""
        neg = np.array(-1e9, dtype=self.dtype)
        bias = None
        if self.config.mode == CAUSAL:
            upper = np.triu(np.ones((t, t), dtype=bool), k=1)
            bias = np.where(upper, neg, self.dtype(0.0))[None, None, :, :]
        if pad_mask is not None:
            key_bias = np.where(pad_mask[:, None, None, :], neg, self.dtype(0.0))
            bias = key_bias if bias is None else bias + key_bias
        return bias

    def forward(
        self,
        token_ids: np.ndarray,
        pad_mask: np.ndarray | None = None,
        want_cache: bool = False,
    ):
        """Run the model over (B, T) ids.

        Returns (logits (B, T, V), hidden (B, T, d)) and, when requested, the
        cache of intermediates the backward pass consumes. `pad_mask` marks
        padding key positions to hide in masked (bidirectional) mode.
        """
        token_ids = np.asarray(token_ids)
        if token_ids.ndim == 1:
            token_ids = token_ids[None, :]
        b, t = token_ids.shape
        if t > self.config.max_seq_len:
            raise ValueError(
                f"sequence length {t} exceeds max_seq_len {self.config.max_seq_len}"
            )
        if t == 0:
            raise ValueError("cannot run the model on an empty sequence")
        p = self.params
        h = p["tok_emb"][token_ids] + p["pos_emb"][:t][None, :, :]
        bias = self._attention_bias(b, t, pad_mask)
        n_heads = self.config.n_heads
        scale = self.dtype(1.0 / np.sqrt(self.config.d_model // n_heads))

        layer_caches = []
        for i in range(self.config.n_layers):
            pre = f"layers.{i}."
            a, ln1_cache = _layernorm(h, p[pre + "ln1.g"], p[pre + "ln1.b"])
            qkv = a @ p[pre + "attn.w_qkv"] + p[pre + "attn.b_qkv"]
            q, k, v = np.split(qkv, 3, axis=-1)
            qh, kh, vh = (_split_heads(x, n_heads) for x in (q, k, v))
            scores = (qh @ kh.transpose(0, 1, 3, 2)) * scale
            if bias is not None:
                scores = scores + bias
            att = _softmax(scores)
            ctx = att @ vh
            merged = _merge_heads(ctx)
            attn_out = merged @ p[pre + "attn.w_out"] + p[pre + "attn.b_out"]
            h1 = h + attn_out

            m, ln2_cache = _layernorm(h1, p[pre + "ln2.g"], p[pre + "ln2.b"])
            z1 = m @ p[pre + "ff.w1"] + p[pre + "ff.b1"]
            g1, phi = _gelu(z1)
            ff_out = g1 @ p[pre + "ff.w2"] + p[pre + "ff.b2"]
            h2 = h1 + ff_out

            if want_cache:
                layer_caches.append(
                    (ln1_cache, a, qh, kh, vh, att, merged, h, ln2_cache, m, z1, g1, phi)
                )
            h = h2

        hidden, lnf_cache = _layernorm(h, p["ln_f.g"], p["ln_f.b"])
        logits = hidden @ p["head.w"] + p["head.b"]
        if want_cache:
            cache = {
                "token_ids": token_ids,
                "layers": layer_caches,
                "h_pre_lnf": h,
                "lnf_cache": lnf_cache,
                "hidden": hidden,
            }
            return logits, hidden, cache
        return logits, hidden

    # -- loss and gradients ----------------------------------------------

    def infill_loss(self, batch: InfillBatch) -> float:
        loss, _ = self._masked_loss(batch, want_grads=False)
        return loss

    def loss_and_grads(self, batch: InfillBatch) -> tuple[float, dict[str, np.ndarray]]:
        return self._masked_loss(batch, want_grads=True)

    def _predicting_positions(self, loss_mask: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Map each masked position j to the position whose logits predict it.

        Causal mode predicts token j from position j-1; masked mode predicts
        the (mask-substituted) token at position j itself.
        """
        mask = np.asarray(loss_mask, dtype=bool)
        if self.config.mode == CAUSAL:
            if mask[:, 0].any():
                raise ValueError("loss_mask may not select position 0 in causal mode")
            rows, cols = np.nonzero(mask)
            return np.stack([rows, cols - 1], axis=1), np.stack([rows, cols], axis=1)
        rows, cols = np.nonzero(mask)
        idx = np.stack([rows, cols], axis=1)
        return idx, idx

    def _masked_loss(self, batch: InfillBatch, want_grads: bool):
        mask = np.asarray(batch.loss_mask, dtype=bool)
        if not mask.any():
            raise ValueError("loss_mask selects no positions")
        pad_mask = None
        if self.config.mode == MASKED and self.vocab is not None:
            pad_mask = np.asarray(batch.token_ids) == self.vocab.pad_id
        if want_grads:
            logits, _, cache = self.forward(batch.token_ids, pad_mask, want_cache=True)
        else:
            logits, _ = self.forward(batch.token_ids, pad_mask)
        pred_idx, label_idx = self._predicting_positions(mask)
        rows = logits[pred_idx[:, 0], pred_idx[:, 1]]  # (N, V)
        labels = np.asarray(batch.labels)[label_idx[:, 0], label_idx[:, 1]]
        shifted = rows - rows.max(axis=-1, keepdims=True)
        logsumexp = np.log(np.exp(shifted).sum(axis=-1))
        logprobs = shifted[np.arange(len(labels)), labels] - logsumexp
        loss = float(-logprobs.mean())
        if not want_grads:
            return loss, None

        n = len(labels)
        dlogit_rows = np.exp(shifted) / np.exp(shifted).sum(axis=-1, keepdims=True)
        dlogit_rows[np.arange(n), labels] -= 1.0
        dlogit_rows /= n
        dlogits = np.zeros_like(logits)
        dlogits[pred_idx[:, 0], pred_idx[:, 1]] = dlogit_rows.astype(self.dtype)
        grads = self._backward(dlogits, cache)
        if not np.isfinite(loss):
            raise FloatingPointError("non-finite loss")
        return loss, grads

    def _backward(self, dlogits: np.ndarray, cache) -> dict[str, np.ndarray]:
        p = self.params
        grads = {name: np.zeros_like(arr) for name, arr in p.items()}
        hidden = cache["hidden"]
        token_ids = cache["token_ids"]
        b, t = token_ids.shape
        n_heads = self.config.n_heads
        scale = 1.0 / np.sqrt(self.config.d_model // n_heads)

        grads["head.w"] = np.tensordot(hidden, dlogits, axes=((0, 1), (0, 1)))
        grads["head.b"] = dlogits.sum(axis=(0, 1))
        dhidden = dlogits @ p["head.w"].T
        dh, dg, db = _layernorm_backward(dhidden, cache["lnf_cache"])
        grads["ln_f.g"], grads["ln_f.b"] = dg, db

        for i in reversed(range(self.config.n_layers)):
            pre = f"layers.{i}."
            (ln1_cache, a, qh, kh, vh, att, merged, h_in, ln2_cache, m, z1, g1, phi) = cache[
                "layers"
            ][i]
            # feed-forward branch: h2 = h1 + gelu(ln2(h1) @ w1 + b1) @ w2 + b2
            dff_out = dh
            grads[pre + "ff.w2"] = np.tensordot(g1, dff_out, axes=((0, 1), (0, 1)))
            grads[pre + "ff.b2"] = dff_out.sum(axis=(0, 1))
            dg1 = dff_out @ p[pre + "ff.w2"].T
            dz1 = _gelu_backward(dg1, z1, phi)
            grads[pre + "ff.w1"] = np.tensordot(m, dz1, axes=((0, 1), (0, 1)))
            grads[pre + "ff.b1"] = dz1.sum(axis=(0, 1))
            dm = dz1 @ p[pre + "ff.w1"].T
            dh1_ln, dg, db = _layernorm_backward(dm, ln2_cache)
            grads[pre + "ln2.g"], grads[pre + "ln2.b"] = dg, db
            dh1 = dh + dh1_ln

            # attention branch: h1 = h + merge(att @ v) @ w_out + b_out
            dattn_out = dh1
            grads[pre + "attn.w_out"] = np.tensordot(merged, dattn_out, axes=((0, 1), (0, 1)))
            grads[pre + "attn.b_out"] = dattn_out.sum(axis=(0, 1))
            dmerged = dattn_out @ p[pre + "attn.w_out"].T
            dctx = _split_heads(dmerged, n_heads)
            datt = dctx @ vh.transpose(0, 1, 3, 2)
            dvh = att.transpose(0, 1, 3, 2) @ dctx
            dscores = att * (datt - (datt * att).sum(axis=-1, keepdims=True))
            dscores *= scale
            dqh = dscores @ kh
            dkh = dscores.transpose(0, 1, 3, 2) @ qh
            dq, dk, dv = (_merge_heads(x) for x in (dqh, dkh, dvh))
            dqkv = np.concatenate([dq, dk, dv], axis=-1)
            grads[pre + "attn.w_qkv"] = np.tensordot(a, dqkv, axes=((0, 1), (0, 1)))
            grads[pre + "attn.b_qkv"] = dqkv.sum(axis=(0, 1))
            da = dqkv @ p[pre + "attn.w_qkv"].T
            dh_ln, dg, db = _layernorm_backward(da, ln1_cache)
            grads[pre + "ln1.g"], grads[pre + "ln1.b"] = dg, db
            dh = dh1 + dh_ln

        # embeddings
        flat_ids = token_ids.reshape(-1)
        flat_dh = dh.reshape(-1, self.config.d_model)
        np.add.at(grads["tok_emb"], flat_ids, flat_dh)
        grads["pos_emb"][:t] = dh.sum(axis=0)
        return grads

    # -- inference helpers -------------------------------------------------

    def logits_for(self, token_ids: Iterable[int]) -> np.ndarray:
        logits, _ = self.forward(np.asarray(list(token_ids), dtype=np.int64))
        return logits[0]

    def embed(self, text: str) -> np.ndarray:
        """Unit-norm mean of final hidden states over non-special positions."""
        if self.vocab is None:
            raise ValueError("model has no tokenizer attached")
        if not text.strip():
            raise ValueError("cannot embed empty text")
        ids = self.vocab.encode(text).ids[: self.config.max_seq_len]
        special_ids = set(self.vocab.special_ids.values())
        keep = [j for j, tid in enumerate(ids) if tid not in special_ids]
        if not keep:
            raise ValueError("text contains no embeddable tokens")
        _, hidden = self.forward(np.asarray(ids, dtype=np.int64))
        mean = hidden[0][keep].mean(axis=0)
        norm = np.linalg.norm(mean)
        if norm == 0:
            raise ValueError("degenerate zero embedding")
        return (mean / norm).astype(np.float64)

    def masked_token_prob(self, token_ids: list[int], position: int) -> float:
        """Probability of the original token after masking its position."""
        if self.config.mode != MASKED:
            raise ValueError("masked_token_prob requires a masked-mode model")
        if self.vocab is None:
            raise ValueError("model has no tokenizer attached")
        ids = np.asarray(token_ids, dtype=np.int64)
        if not (0 <= position < len(ids)):
            raise IndexError(f"position {position} out of range")
        original = int(ids[position])
        if original in set(self.vocab.special_ids.values()):
            raise ValueError("cannot score a special-token position")
        masked = ids.copy()
        masked[position] = self.vocab.mask_id
        logits, _ = self.forward(masked)
        probs = _softmax(logits[0, position].astype(np.float64))
        return float(probs[original])

    # -- incremental decoding ---------------------------------------------

    def start_decode(self, prefix_ids: list[int]) -> "DecodeState":
        if self.config.mode != CAUSAL:
            raise ValueError("decoding requires a causal-mode model")
        state = DecodeState(self)
        for tid in prefix_ids:
            state.append(tid)
        return state


class DecodeState:
    """KV cache for token-at-a-time causal decoding."""

    def __init__(self, model: TransformerLM):
        self.model = model
        cfg = model.config
        hd = cfg.d_model // cfg.n_heads
        self.keys = [
            np.empty((cfg.n_heads, 0, hd), dtype=model.dtype) for _ in range(cfg.n_layers)
        ]
        self.values = [
            np.empty((cfg.n_heads, 0, hd), dtype=model.dtype) for _ in range(cfg.n_layers)
        ]
        self.length = 0
        self.last_logits: np.ndarray | None = None

    def append(self, token_id: int) -> np.ndarray:
        """Feed one token; returns next-token logits (V,)."""
        m = self.model
        cfg = m.config
        if self.length >= cfg.max_seq_len:
            raise ValueError("decode state exceeded max_seq_len")
        p = m.params
        n_heads = cfg.n_heads
        hd = cfg.d_model // n_heads
        scale = 1.0 / np.sqrt(hd)
        h = p["tok_emb"][token_id] + p["pos_emb"][self.length]
        h = h[None, :]  # (1, d)
        for i in range(cfg.n_layers):
            pre = f"layers.{i}."
            a, _ = _layernorm(h, p[pre + "ln1.g"], p[pre + "ln1.b"])
            qkv = a @ p[pre + "attn.w_qkv"] + p[pre + "attn.b_qkv"]
            q, k, v = np.split(qkv[0], 3)
            qh = q.reshape(n_heads, 1, hd)
            kh = k.reshape(n_heads, 1, hd)
            vh = v.reshape(n_heads, 1, hd)
            self.keys[i] = np.concatenate([self.keys[i], kh], axis=1)
            self.values[i] = np.concatenate([self.values[i], vh], axis=1)
            scores = (qh @ self.keys[i].transpose(0, 2, 1)) * scale
            att = _softmax(scores)
            ctx = (att @ self.values[i]).reshape(1, cfg.d_model)
            h = h + ctx @ p[pre + "attn.w_out"] + p[pre + "attn.b_out"]
            mnorm, _ = _layernorm(h, p[pre + "ln2.g"], p[pre + "ln2.b"])
            z1 = mnorm @ p[pre + "ff.w1"] + p[pre + "ff.b1"]
            g1, _ = _gelu(z1)
            h = h + g1 @ p[pre + "ff.w2"] + p[pre + "ff.b2"]
        hidden, _ = _layernorm(h, p["ln_f.g"], p["ln_f.b"])
        self.length += 1
        self.last_logits = (hidden @ p["head.w"] + p["head.b"])[0]
        return self.last_logits


def encode_prompt_words(vocab: Vocabulary, prompt_words: Iterable[str]) -> list[int]:
    """Prompt tokens, truncated to the 25-token budget.

    Each word is encoded with a leading space so its tokens match the
    mid-sentence form the model sees in targets; a bare first word would
    tokenize differently and weaken the copy signal.
    """
    text = "".join(" " + w for w in prompt_words)
    return vocab.encode(text).ids[:MAX_PROMPT_TOKENS]


def build_infill_sequence(
    vocab: Vocabulary, prompt_words: Iterable[str], target_text: str
) -> tuple[list[int], list[bool]]:
    """Token layout {{ prompt }} target <eos> plus its loss mask."""
    prompt_ids = encode_prompt_words(vocab, prompt_words)
    target_ids = vocab.encode(target_text).ids[:MAX_TARGET_TOKENS]
    ids = (
        [vocab.prompt_start_id]
        + prompt_ids
        + [vocab.prompt_end_id]
        + target_ids
        + [vocab.eos_id]
    )
    mask = [False] * (len(prompt_ids) + 2) + [True] * (len(target_ids) + 1)
    return ids, mask


def make_infill_batch(
    vocab: Vocabulary, pairs, max_seq_len: int
) -> InfillBatch:
    """Pad a list of InfillPairs into one batch."""
    seqs = [build_infill_sequence(vocab, p.prompt_words, p.target.text) for p in pairs]
    width = min(max(len(ids) for ids, _ in seqs), max_seq_len)
    n = len(seqs)
    token_ids = np.full((n, width), vocab.pad_id, dtype=np.int64)
    loss_mask = np.zeros((n, width), dtype=bool)
    for r, (ids, mask) in enumerate(seqs):
        ids = ids[:width]
        mask = mask[:width]
        token_ids[r, : len(ids)] = ids
        loss_mask[r, : len(mask)] = mask
    return InfillBatch(token_ids=token_ids, labels=token_ids.copy(), loss_mask=loss_mask)


def make_mlm_batch(
    vocab: Vocabulary,
    sentences: list[str],
    rng: np.random.Generator,
    max_seq_len: int,
    mask_rate: float = 0.15,
) -> InfillBatch:
    """Mask a fraction of token positions for fill-in-the-blank training."""
    encoded = [vocab.encode(s).ids[:max_seq_len] for s in sentences]
    width = max(len(ids) for ids in encoded)
    n = len(encoded)
    token_ids = np.full((n, width), vocab.pad_id, dtype=np.int64)
    labels = token_ids.copy()
    loss_mask = np.zeros((n, width), dtype=bool)
    for r, ids in enumerate(encoded):
        token_ids[r, : len(ids)] = ids
        labels[r, : len(ids)] = ids
        n_mask = max(1, int(round(mask_rate * len(ids))))
        positions = rng.choice(len(ids), size=min(n_mask, len(ids)), replace=False)
        token_ids[r, positions] = vocab.mask_id
        loss_mask[r, positions] = True
    return InfillBatch(token_ids=token_ids, labels=labels, loss_mask=loss_mask)


__all__ = [
    "CAUSAL",
    "MASKED",
    "MAX_PROMPT_TOKENS",
    "MAX_TARGET_TOKENS",
    "ModelConfig",
    "InfillBatch",
    "TransformerLM",
    "DecodeState",
    "init_parameters",
    "parameter_shapes",
    "build_infill_sequence",
    "make_infill_batch",
    "make_mlm_batch",
]
