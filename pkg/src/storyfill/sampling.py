"""Nucleus (top-p) decoding.

At each step the smallest set of highest-probability tokens whose cumulative
probability reaches p is kept, renormalized, and sampled from. The default
p = 0.7 suits narrative text.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import CAUSAL, TransformerLM

NUCLEUS_P = 0.7


def nucleus_filter(probs: np.ndarray, nucleus_p: float) -> tuple[np.ndarray, np.ndarray]:
    """Return (nucleus token ids, renormalized probabilities).

    Ties at the cutoff break by token id so the nucleus is deterministic.
    """
    if not 0 < nucleus_p <= 1:
        raise ValueError(f"nucleus_p must be in (0, 1], got {nucleus_p}")
    probs = np.asarray(probs, dtype=np.float64)
    order = np.argsort(-probs, kind="stable")
    sorted_probs = probs[order]
    cumulative = np.cumsum(sorted_probs)
    k = int(np.searchsorted(cumulative, nucleus_p * (1 - 1e-12)) + 1)
    k = min(k, len(probs))
    kept = order[:k]
    kept_probs = sorted_probs[:k]
    return kept, kept_probs / kept_probs.sum()


def sample_token(
    logits: np.ndarray, nucleus_p: float, rng: np.random.Generator
) -> tuple[int, np.ndarray]:
    """Sample one token id from the nucleus; also returns the nucleus set."""
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    probs = np.exp(z)
    probs /= probs.sum()
    kept, renorm = nucleus_filter(probs, nucleus_p)
    choice = rng.choice(kept, p=renorm)
    return int(choice), kept


@dataclass
class SampleTrace:
    """Per-step nucleus sets, for support checking in tests."""

    nuclei: list[np.ndarray] = field(default_factory=list)
    tokens: list[int] = field(default_factory=list)


def sample(
    model: TransformerLM,
    prefix_ids: list[int],
    nucleus_p: float = NUCLEUS_P,
    rng: np.random.Generator | None = None,
    max_new_tokens: int = 75,
    trace: SampleTrace | None = None,
) -> list[int]:
    """Autoregressively extend prefix_ids; stops at <eos> or the token cap.

    Returns only the newly sampled ids (without the prefix, without a final
    <eos>).
    """
    if model.config.mode != CAUSAL:
        raise ValueError("sampling requires a causal-mode model")
    if not prefix_ids:
        raise ValueError("prefix_ids must be non-empty")
    if rng is None:
        rng = np.random.default_rng()
    eos = model.vocab.eos_id if model.vocab is not None else None
    state = model.start_decode(list(prefix_ids))
    out: list[int] = []
    budget = min(max_new_tokens, model.config.max_seq_len - len(prefix_ids))
    for _ in range(budget):
        token, kept = sample_token(state.last_logits, nucleus_p, rng)
        if trace is not None:
            trace.nuclei.append(kept)
            trace.tokens.append(token)
        if eos is not None and token == eos:
            break
        out.append(token)
        if len(out) == budget:
            break
        state.append(token)
    return out


__all__ = ["NUCLEUS_P", "nucleus_filter", "sample_token", "sample", "SampleTrace"]
