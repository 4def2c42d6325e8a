"""Synthetic-author replay harness.

Produces authoring blocks and rater responses with known, injectable ground
truth so the analytics pipeline can be validated end to end: a latent
preference shift for Post sentences, a probability that Post sentences copy
content words from a generated example, and an extra gap-word budget for
hard prompts. With every effect at zero the harness reduces to a null model
whose analytics must look like chance.

Raters are modeled as softmax choosers over per-sentence storiability
values; each judgment draws fresh perception noise, so null-model choices
are independent and uniform. This is a test harness, not a claim about how
people judge sentences.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .analytics import (
    GEN,
    POST,
    PRE,
    SOURCES,
    AuthoringBlock,
    JudgmentResponse,
    build_judgment_groups,
)
from .fixtures import ADJECTIVES, ADVERBS, OBJECTS, PEOPLE, PLACES, TRANS_VERBS

_FILLERS = (
    ADJECTIVES + ADVERBS + OBJECTS + PLACES + PEOPLE
    + ["softly", "beyond", "whenever", "besides", "eagerly", "meanwhile"]
)
_LEADINS = [
    ["The", "tired"],
    ["One", "evening", "the"],
    ["Later", "the"],
    ["Somewhere", "the"],
    ["That", "night", "the"],
]


@dataclass(frozen=True)
class SyntheticAuthorModel:
    """Ground-truth effect sizes for a simulation run.

    post_shift is in latent storiability units; use
    `latent_shift_for_rate_gap` to target a preference-rate difference.
    All-zero effects are the null model.
    """

    base_storiability: dict[str, float] = field(
        default_factory=lambda: {PRE: 0.0, POST: 0.0, GEN: 0.0}
    )
    post_shift: float = 0.0
    influence_strength: float = 0.0
    difficulty_gap_effect: float = 0.0  # extra mean gap words for hard prompts
    base_gap: float = 1.5
    noise_sd: float = 0.5
    temperature: float = 1.0


def latent_shift_for_rate_gap(gap: float, temperature: float = 1.0) -> float:
    """Latent shift giving a `gap` preference-rate difference over a flat base.

    Solves softmax(s, 0, 0): P(shifted) - P(unshifted) = gap, exact in the
    noiseless three-way case.
    """
    if not 0 <= gap < 1:
        raise ValueError("gap must be in [0, 1)")
    return float(temperature * np.log((1 + 2 * gap) / (1 - gap)))


def hashed_bag_embedder(dim: int = 64):
    """Deterministic bag-of-words sentence embedder for analytics-only runs.

    Each word type maps to a fixed pseudo-random unit vector; a sentence is
    the normalized sum. Lexical copying raises cosine similarity, which is
    all the influence analytics need.
    """
    cache: dict[str, np.ndarray] = {}

    def word_vec(word: str) -> np.ndarray:
        if word not in cache:
            digest = hashlib.sha256(word.encode()).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            v = rng.normal(size=dim)
            cache[word] = v / np.linalg.norm(v)
        return cache[word]

    def embed(sentence: str) -> np.ndarray:
        words = [w.lower().strip(".,!?\"'") for w in sentence.split()]
        words = [w for w in words if w]
        if not words:
            raise ValueError("cannot embed empty sentence")
        total = np.sum([word_vec(w) for w in words], axis=0)
        norm = np.linalg.norm(total)
        if norm == 0:
            raise ValueError("degenerate embedding")
        return total / norm

    return embed


def synth_prompts(n_per_label: int, rng: np.random.Generator) -> list[tuple[tuple[str, ...], str]]:
    """Three-content-word prompts, labeled half easy / half hard."""
    prompts = []
    for label in ("easy", "hard"):
        for _ in range(n_per_label):
            words = (
                ADJECTIVES[int(rng.integers(len(ADJECTIVES)))],
                PEOPLE[int(rng.integers(len(PEOPLE)))],
                TRANS_VERBS[int(rng.integers(len(TRANS_VERBS)))],
            )
            prompts.append((words, label))
    return prompts


def _synth_sentence(
    prompt_words,
    gap_lambda: float,
    rng: np.random.Generator,
    copy_words: list[str] | None = None,
) -> str:
    """Sentence containing the prompt words in order with random gap fillers."""
    lead = list(_LEADINS[int(rng.integers(len(_LEADINS)))])
    words = lead + [prompt_words[0]]
    pool = list(copy_words) if copy_words else _FILLERS
    for nxt in prompt_words[1:]:
        n_gap = int(rng.poisson(gap_lambda))
        for _ in range(n_gap):
            words.append(pool[int(rng.integers(len(pool)))])
        words.append(nxt)
    while len(words) < 7:  # keep the authoring length constraint satisfied
        words.append(_FILLERS[int(rng.integers(len(_FILLERS)))])
    return " ".join(words) + "."


def simulate_blocks(
    model: SyntheticAuthorModel, n_authors: int, seed: int
) -> list[AuthoringBlock]:
    """Blocks for n_authors x 5 prompts with the model's injected effects."""
    rng = np.random.default_rng(seed)
    prompts = synth_prompts(max(3 * n_authors, 8), rng)
    easy = [p for p in prompts if p[1] == "easy"]
    hard = [p for p in prompts if p[1] == "hard"]
    blocks: list[AuthoringBlock] = []
    e_idx = h_idx = 0
    for a in range(n_authors):
        n_easy = 3 if a % 2 == 0 else 2
        chosen = [easy[e_idx + i] for i in range(n_easy)]
        chosen += [hard[h_idx + i] for i in range(5 - n_easy)]
        e_idx += n_easy
        h_idx += 5 - n_easy
        for k, (words, label) in enumerate(chosen):
            gap = model.base_gap + (
                model.difficulty_gap_effect if label == "hard" else 0.0
            )
            gens = tuple(
                _synth_sentence(words, model.base_gap + 1.0, rng) for _ in range(5)
            )
            used = {g for g in gens}

            def human_sentence(stage: str) -> str:
                copy = None
                if stage == POST and rng.random() < model.influence_strength:
                    example = gens[int(rng.integers(len(gens)))]
                    content = [
                        w.strip(".,").lower()
                        for w in example.split()
                        if w.strip(".,").lower() not in {x.lower() for x in words}
                        and len(w) > 3
                    ]
                    if content:
                        copy = content
                while True:
                    s = _synth_sentence(words, gap, rng, copy_words=copy)
                    if s not in used:
                        used.add(s)
                        return s

            pre = (human_sentence(PRE), human_sentence(PRE))
            post = (human_sentence(POST), human_sentence(POST))
            block = AuthoringBlock(
                block_id=f"sim{a:03d}:p{k}",
                prompt_words=words,
                difficulty=label,
                author_id=f"author{a:03d}",
                pre_sentences=pre,
                post_sentences=post,
                gen_examples=gens,
            )
            block.validate()
            blocks.append(block)
    return blocks


def simulate_responses(
    blocks: list[AuthoringBlock],
    model: SyntheticAuthorModel,
    seed: int,
    raters_per_group: int = 2,
    group_seed: int = 0,
) -> list[JudgmentResponse]:
    """Softmax-choice responses over every judgment group."""
    rng = np.random.default_rng(seed)
    groups = build_judgment_groups(blocks, seed=group_seed)
    responses: list[JudgmentResponse] = []
    for group in groups:
        for r in range(raters_per_group):
            latents = np.array(
                [
                    model.base_storiability.get(src, 0.0)
                    + (model.post_shift if src == POST else 0.0)
                    + rng.normal(0.0, model.noise_sd)
                    for src in SOURCES
                ]
            )
            z = latents / model.temperature
            z -= z.max()
            probs = np.exp(z)
            probs /= probs.sum()
            choice = SOURCES[int(rng.choice(3, p=probs))]
            responses.append(
                JudgmentResponse(
                    group_id=group.group_id,
                    rater_id=f"rater{r}",
                    preferred=choice,
                )
            )
    return responses


def simulate(
    model: SyntheticAuthorModel,
    n_authors: int = 22,
    seed: int = 0,
    group_seed: int = 0,
) -> tuple[list[AuthoringBlock], list[JudgmentResponse]]:
    """Full synthetic replay: blocks plus two raters over all groups.

    22 authors x 5 prompts gives 110 blocks / 880 groups / 1,760 responses,
    matching the scale of a real run.
    """
    blocks = simulate_blocks(model, n_authors, seed)
    responses = simulate_responses(blocks, model, seed + 1, group_seed=group_seed)
    return blocks, responses


__all__ = [
    "SyntheticAuthorModel",
    "latent_shift_for_rate_gap",
    "hashed_bag_embedder",
    "simulate",
    "simulate_blocks",
    "simulate_responses",
    "synth_prompts",
]
