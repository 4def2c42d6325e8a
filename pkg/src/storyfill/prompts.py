"""Prompt selection and difficulty labeling.

Three-word prompts from the test split pass a filter battery (no dialogue,
no punctuation/digits, no entity-like words, at most one function word,
every word frequent enough in the training corpus), are scored by the masked
model's mean token probability, and the top/bottom deciles become "easy" /
"hard". High mean probability means the words already sit comfortably in
context, so little infilling is needed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from pathlib import Path

from .corpus import CorpusStats, InfillPair
from .lexicon import is_content_word, is_punctuation
from .model import TransformerLM, encode_prompt_words

EASY, HARD, UNLABELED = "easy", "hard", "unlabeled"

_QUOTE_CHARS = set("\"'“”‘’`")


@dataclass(frozen=True)
class PromptCandidate:
    words: tuple[str, str, str]
    source_pair_id: str
    difficulty_score: float = float("nan")
    label: str = UNLABELED


@dataclass(frozen=True)
class SelectionConfig:
    min_word_frequency: int = 5
    decile_fraction: float = 0.10
    max_function_words: int = 1
    entity_capitalized_ratio: float = 0.80

    def __post_init__(self):
        if not 0 < self.decile_fraction < 0.5:
            raise ValueError("decile_fraction must be in (0, 0.5)")


def _has_quote(text: str) -> bool:
    return any(ch in _QUOTE_CHARS for ch in text)


def _word_clean(word: str) -> bool:
    """No punctuation characters, no digits (word-internal included)."""
    return not any(ch.isdigit() or is_punctuation(ch) for ch in word)


def _entity_like(word: str, stats: CorpusStats, threshold: float) -> bool:
    """Capitalization heuristic: mid-sentence occurrences mostly capitalized."""
    total = stats.noninitial_total.get(word.lower(), 0)
    if total == 0:
        return word[:1].isupper()
    return stats.capitalized_ratio(word) > threshold


def filter_prompts(
    test_pairs: list[InfillPair],
    stats: CorpusStats,
    config: SelectionConfig = SelectionConfig(),
) -> list[PromptCandidate]:
    """Apply the selection battery; an empty pool is a valid outcome.

    Duplicate word triples (the same sentence ablated twice the same way)
    keep only their first occurrence.
    """
    pool: list[PromptCandidate] = []
    seen: set[tuple[str, ...]] = set()
    for pair in test_pairs:
        words = pair.prompt_words
        if len(words) != 3:
            continue
        if tuple(w.lower() for w in words) in seen:
            continue
        if _has_quote(pair.target.text) or any(_has_quote(w) for w in words):
            continue
        if not all(_word_clean(w) for w in words):
            continue
        if any(_entity_like(w, stats, config.entity_capitalized_ratio) for w in words):
            continue
        if sum(1 for w in words if not is_content_word(w)) > config.max_function_words:
            continue
        if any(
            stats.frequency.get(w.lower(), 0) < config.min_word_frequency for w in words
        ):
            continue
        seen.add(tuple(w.lower() for w in words))
        pool.append(PromptCandidate(words=tuple(words), source_pair_id=pair.id))
    return pool


def difficulty_score(words: tuple[str, ...], masked_model: TransformerLM) -> float:
    """Mean masked-token probability over the prompt's subword positions."""
    vocab = masked_model.vocab
    if vocab is None:
        raise ValueError("masked model has no tokenizer attached")
    ids = encode_prompt_words(vocab, words)
    if not ids:
        raise ValueError(f"prompt {words!r} produced no tokens")
    probs = [masked_model.masked_token_prob(ids, j) for j in range(len(ids))]
    return float(sum(probs) / len(probs))


def score_pool(
    pool: list[PromptCandidate], masked_model: TransformerLM
) -> list[PromptCandidate]:
    return [
        replace(cand, difficulty_score=difficulty_score(cand.words, masked_model))
        for cand in pool
    ]


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def assign_labels(
    pool: list[PromptCandidate], fraction: float = 0.10
) -> list[PromptCandidate]:
    """Label the top/bottom `fraction` of the pool by score.

    Sorting is by descending score with ties broken by (source_pair_id,
    words), so labeling is deterministic. Level sizes use half-up rounding:
    a pool of 23,005 at 0.10 yields 2,301 per level.
    """
    if not pool:
        raise ValueError("cannot label an empty pool")
    if not 0 < fraction < 0.5:
        raise ValueError("fraction must be in (0, 0.5)")
    n_level = round_half_up(fraction * len(pool))
    ordered = sorted(
        pool, key=lambda c: (-c.difficulty_score, c.source_pair_id, c.words)
    )
    labeled: list[PromptCandidate] = []
    for rank, cand in enumerate(ordered):
        if rank < n_level:
            label = EASY
        elif rank >= len(ordered) - n_level:
            label = HARD
        else:
            label = UNLABELED
        labeled.append(replace(cand, label=label))
    return labeled


def write_prompts(pool: list[PromptCandidate], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for cand in pool:
            fh.write(
                json.dumps(
                    {
                        "words": list(cand.words),
                        "score": cand.difficulty_score,
                        "label": cand.label,
                        "source_pair_id": cand.source_pair_id,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_prompts(path: str | Path) -> list[PromptCandidate]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            out.append(
                PromptCandidate(
                    words=tuple(rec["words"]),
                    source_pair_id=rec["source_pair_id"],
                    difficulty_score=rec["score"],
                    label=rec["label"],
                )
            )
    return out


__all__ = [
    "EASY",
    "HARD",
    "UNLABELED",
    "PromptCandidate",
    "SelectionConfig",
    "filter_prompts",
    "difficulty_score",
    "score_pool",
    "assign_labels",
    "round_half_up",
    "write_prompts",
    "read_prompts",
]
