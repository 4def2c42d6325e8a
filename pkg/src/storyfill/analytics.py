"""Judgment groups, preference distributions, influence scores, and the
evaluation report.

An authoring block pairs one author and one prompt: two sentences written
before seeing generated examples (Pre), two written after (Post), and the
five generated examples (Gen). Every block expands into the 8 unique
(Pre, Post, Gen) triples over its two Pre, two Post, and first two Gen
sentences; raters pick the sentence whose story they would most want to
read.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from .generation import find_prompt_positions, sentence_words
from .stats import (
    PermutationTestResult,
    cluster_label_permutation_test,
    paired_swap_permutation_test,
    permutation_test,
    preference_permutation_test,
)

PRE, POST, GEN = "PRE", "POST", "GEN"
SOURCES = (PRE, POST, GEN)

Embedder = Callable[[str], np.ndarray]


def normalize_sentence(text: str) -> str:
    return " ".join(text.split())


class BlockValidationError(ValueError):
    pass


@dataclass(frozen=True)
class AuthoringBlock:
    block_id: str
    prompt_words: tuple[str, ...]
    difficulty: str
    author_id: str
    pre_sentences: tuple[str, str]
    post_sentences: tuple[str, str]
    gen_examples: tuple[str, str, str, str, str]

    def validate(self) -> None:
        if len(self.pre_sentences) != 2 or len(self.post_sentences) != 2:
            raise BlockValidationError(f"{self.block_id}: need exactly 2 Pre and 2 Post")
        if len(self.gen_examples) != 5:
            raise BlockValidationError(f"{self.block_id}: need exactly 5 Gen examples")
        if normalize_sentence(self.pre_sentences[0]) == normalize_sentence(self.pre_sentences[1]):
            raise BlockValidationError(f"{self.block_id}: Pre sentences must differ")
        if normalize_sentence(self.post_sentences[0]) == normalize_sentence(self.post_sentences[1]):
            raise BlockValidationError(f"{self.block_id}: Post sentences must differ")
        shown = {normalize_sentence(g) for g in self.gen_examples}
        for s in self.post_sentences:
            if normalize_sentence(s) in shown:
                raise BlockValidationError(
                    f"{self.block_id}: Post sentence equals a shown example"
                )

    def to_record(self) -> dict:
        return {
            "block_id": self.block_id,
            "prompt": list(self.prompt_words),
            "difficulty": self.difficulty,
            "author_id": self.author_id,
            "pre_sentences": list(self.pre_sentences),
            "post_sentences": list(self.post_sentences),
            "gen_examples": list(self.gen_examples),
        }

    @classmethod
    def from_record(cls, rec: Mapping) -> "AuthoringBlock":
        return cls(
            block_id=rec["block_id"],
            prompt_words=tuple(rec["prompt"]),
            difficulty=rec["difficulty"],
            author_id=rec["author_id"],
            pre_sentences=tuple(rec["pre_sentences"]),
            post_sentences=tuple(rec["post_sentences"]),
            gen_examples=tuple(rec["gen_examples"]),
        )


@dataclass(frozen=True)
class JudgmentGroup:
    group_id: str
    block_id: str
    difficulty: str
    sentences: Mapping[str, str]  # source -> sentence
    order_seed: int

    def presentation_order(self, rater_id: str) -> tuple[str, ...]:
        """Deterministic per-(rater, group) shuffle of the three sources."""
        digest = hashlib.sha256(f"{self.order_seed}:{rater_id}".encode()).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        return tuple(np.array(SOURCES)[rng.permutation(3)])


@dataclass(frozen=True)
class JudgmentResponse:
    group_id: str
    rater_id: str
    preferred: str
    timestamp: float = 0.0

    def __post_init__(self):
        if self.preferred not in SOURCES:
            raise ValueError(f"preferred must be one of {SOURCES}")


def build_judgment_groups(
    blocks: Iterable[AuthoringBlock], seed: int = 0
) -> list[JudgmentGroup]:
    """8 groups per block: 2 Pre x 2 Post x first-2 Gen combinations."""
    groups: list[JudgmentGroup] = []
    for block in blocks:
        block.validate()
        for i in range(2):
            for j in range(2):
                for k in range(2):
                    # no slash: group ids appear in URL paths
                    gid = f"{block.block_id}.g{i}{j}{k}"
                    digest = hashlib.sha256(f"{seed}:{gid}".encode()).digest()
                    groups.append(
                        JudgmentGroup(
                            group_id=gid,
                            block_id=block.block_id,
                            difficulty=block.difficulty,
                            sentences={
                                PRE: block.pre_sentences[i],
                                POST: block.post_sentences[j],
                                GEN: block.gen_examples[k],
                            },
                            order_seed=int.from_bytes(digest[:8], "little"),
                        )
                    )
    return groups


def preference_distribution(
    responses: Iterable[JudgmentResponse],
    group_key: Callable[[JudgmentResponse], str] | None = None,
) -> dict[str, dict]:
    """Per-source counts and fractions, optionally grouped (e.g. by difficulty)."""
    buckets: dict[str, list[JudgmentResponse]] = {}
    for resp in responses:
        key = group_key(resp) if group_key else "all"
        buckets.setdefault(key, []).append(resp)
    if not buckets:
        raise ValueError("no responses supplied")
    out: dict[str, dict] = {}
    for key, bucket in sorted(buckets.items()):
        total = len(bucket)
        counts = {src: sum(1 for r in bucket if r.preferred == src) for src in SOURCES}
        out[key] = {
            "total": total,
            "counts": counts,
            "fractions": {src: counts[src] / total for src in SOURCES},
        }
    return out


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine undefined for zero vectors")
    return float(np.dot(u, v) / (nu * nv))


@dataclass(frozen=True)
class InfluenceScore:
    human_sentence: str
    score: float
    best_example_index: int


def semantic_influence(
    human_sentence: str, gen_examples: Iterable[str], embedder: Embedder
) -> InfluenceScore:
    """Max cosine similarity between the human sentence and any example."""
    examples = list(gen_examples)
    if not examples:
        raise ValueError("gen example set is empty")
    h = embedder(human_sentence)
    scores = [cosine(h, embedder(g)) for g in examples]
    best = int(np.argmax(scores))
    return InfluenceScore(
        human_sentence=human_sentence, score=float(scores[best]), best_example_index=best
    )


def gap_word_counts(sentence: str, prompt_words) -> list[int]:
    """Word counts inside each interior gap of the greedy prompt match."""
    words = sentence_words(sentence)
    positions = find_prompt_positions(words, prompt_words)
    if positions is None:
        raise ValueError(f"prompt {tuple(prompt_words)} not contained in: {sentence!r}")
    return [positions[i + 1] - positions[i] - 1 for i in range(len(positions) - 1)]


def mean_gap_words(sentence: str, prompt_words) -> float:
    gaps = gap_word_counts(sentence, prompt_words)
    if not gaps:
        return 0.0
    return float(np.mean(gaps))


@dataclass
class EvaluationReport:
    tables: dict[str, dict] = field(default_factory=dict)
    n_blocks: int = 0
    n_responses: int = 0
    seed: int = 0

    @property
    def empty(self) -> bool:
        return self.n_responses == 0

    def to_json(self) -> str:
        payload = {
            "n_blocks": self.n_blocks,
            "n_responses": self.n_responses,
            "seed": self.seed,
            "tables": self.tables,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def render_text(self) -> str:
        lines = [
            f"blocks: {self.n_blocks}   responses: {self.n_responses}",
            "",
        ]
        for name, table in self.tables.items():
            lines.append(f"== {name} ==")
            if table.get("empty"):
                lines.append("  (no data)")
                lines.append("")
                continue
            for row in table.get("rows", []):
                cells = "  ".join(f"{k}={_fmt(v)}" for k, v in row.items())
                lines.append(f"  {cells}")
            for key, p in table.get("p_values", {}).items():
                lines.append(f"  p[{key}] = {p:.4f}")
            lines.append("")
        return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.3f}"
    return str(v)


class DanglingReferenceError(ValueError):
    pass


def report(
    blocks: list[AuthoringBlock],
    responses: list[JudgmentResponse],
    embedder: Embedder,
    n_resamples: int = 10_000,
    seed: int = 0,
    group_seed: int = 0,
) -> EvaluationReport:
    """Compute the five evaluation tables.

    1. overall storiability preference distribution,
    2. gap words between prompt words by difficulty,
    3. human-sentence preferences by difficulty,
    4. Pre/Post semantic influence from Gen examples,
    5. Post influence by preference outcome.

    Pure given (blocks, responses, seeds): identical inputs produce an
    identical report.
    """
    rep = EvaluationReport(n_blocks=len(blocks), n_responses=len(responses), seed=seed)
    groups = {g.group_id: g for g in build_judgment_groups(blocks, seed=group_seed)}
    dangling = sorted({r.group_id for r in responses if r.group_id not in groups})
    if dangling:
        raise DanglingReferenceError(f"responses reference unknown groups: {dangling}")
    if not responses:
        for name in (
            "preference_overall",
            "gap_words_by_difficulty",
            "preference_by_difficulty",
            "influence_pre_vs_post",
            "influence_by_preference",
        ):
            rep.tables[name] = {"empty": True}
        return rep

    # table 1: overall preference distribution
    dist = preference_distribution(responses)["all"]
    choices = [r.preferred for r in responses]
    rep.tables["preference_overall"] = {
        "rows": [
            {
                "source": src,
                "count": dist["counts"][src],
                "fraction": dist["fractions"][src],
            }
            for src in SOURCES
        ],
        "p_values": {
            "pre_vs_gen": preference_permutation_test(
                choices, PRE, GEN, n_resamples=n_resamples, seed=seed
            ).p_value,
            "post_vs_gen": preference_permutation_test(
                choices, POST, GEN, n_resamples=n_resamples, seed=seed + 1
            ).p_value,
            "pre_vs_post": preference_permutation_test(
                choices, PRE, POST, n_resamples=n_resamples, seed=seed + 2
            ).p_value,
        },
    }

    # table 2: gap words between prompt words, human sentences, by difficulty.
    # blocks are the exchangeable units, so the test permutes difficulty
    # labels across whole blocks.
    gaps_by_diff: dict[str, list[float]] = {}
    totals_by_diff: dict[str, list[float]] = {}
    gap_clusters: dict[str, list[list[float]]] = {}
    for block in blocks:
        cluster: list[float] = []
        for sentence in block.pre_sentences + block.post_sentences:
            gaps = gap_word_counts(sentence, block.prompt_words)
            gaps_by_diff.setdefault(block.difficulty, []).append(float(np.mean(gaps)))
            totals_by_diff.setdefault(block.difficulty, []).append(float(np.sum(gaps)))
            cluster.append(float(np.mean(gaps)))
        gap_clusters.setdefault(block.difficulty, []).append(cluster)
    rows = [
        {
            "difficulty": diff,
            "mean_gap_words": float(np.mean(vals)),
            "mean_total_insertions": float(np.mean(totals_by_diff[diff])),
            "n_sentences": len(vals),
        }
        for diff, vals in sorted(gaps_by_diff.items())
    ]
    gap_p: dict[str, float] = {}
    if set(gaps_by_diff) >= {"easy", "hard"}:
        gap_p["easy_vs_hard"] = cluster_label_permutation_test(
            gap_clusters["easy"], gap_clusters["hard"], n_resamples=n_resamples, seed=seed + 3
        ).p_value
    rep.tables["gap_words_by_difficulty"] = {"rows": rows, "p_values": gap_p}

    # table 3: preferences by difficulty
    by_diff = preference_distribution(responses, lambda r: groups[r.group_id].difficulty)
    rows = []
    p_values: dict[str, float] = {}
    for offset, (diff, dist) in enumerate(sorted(by_diff.items())):
        rows.append(
            {
                "difficulty": diff,
                "total": dist["total"],
                **{f"{src.lower()}_fraction": dist["fractions"][src] for src in SOURCES},
            }
        )
        subset = [r.preferred for r in responses if groups[r.group_id].difficulty == diff]
        p_values[f"pre_vs_post[{diff}]"] = preference_permutation_test(
            subset, PRE, POST, n_resamples=n_resamples, seed=seed + 4 + offset
        ).p_value
    rep.tables["preference_by_difficulty"] = {"rows": rows, "p_values": p_values}

    # table 4: influence of Gen examples on Pre vs Post sentences
    influence: dict[tuple[str, str], float] = {}

    def influence_of(block: AuthoringBlock, sentence: str) -> float:
        key = (block.block_id, sentence)
        if key not in influence:
            influence[key] = semantic_influence(
                sentence, block.gen_examples, embedder
            ).score
        return influence[key]

    pre_scores = [influence_of(b, s) for b in blocks for s in b.pre_sentences]
    post_scores = [influence_of(b, s) for b in blocks for s in b.post_sentences]
    # pre and post scores of one block share its gen-example set, so the
    # test swaps the stage labels within blocks rather than pooling globally
    pre_clusters = [[influence_of(b, s) for s in b.pre_sentences] for b in blocks]
    post_clusters = [[influence_of(b, s) for s in b.post_sentences] for b in blocks]
    rep.tables["influence_pre_vs_post"] = {
        "rows": [
            {"stage": "pre", "mean_influence": float(np.mean(pre_scores)), "n": len(pre_scores)},
            {"stage": "post", "mean_influence": float(np.mean(post_scores)), "n": len(post_scores)},
        ],
        "p_values": {
            "pre_vs_post": paired_swap_permutation_test(
                pre_clusters, post_clusters, n_resamples=n_resamples, seed=seed + 6
            ).p_value
        },
    }

    # table 5: Post influence by preference outcome
    block_by_id = {b.block_id: b for b in blocks}
    preferred_scores: list[float] = []
    not_preferred_scores: list[float] = []
    for r in responses:
        g = groups[r.group_id]
        score = influence_of(block_by_id[g.block_id], g.sentences[POST])
        if r.preferred == POST:
            preferred_scores.append(score)
        else:
            not_preferred_scores.append(score)
    table: dict = {
        "rows": [
            {
                "judgment": "not_preferred",
                "mean_influence": float(np.mean(not_preferred_scores))
                if not_preferred_scores
                else float("nan"),
                "n": len(not_preferred_scores),
            },
            {
                "judgment": "preferred",
                "mean_influence": float(np.mean(preferred_scores))
                if preferred_scores
                else float("nan"),
                "n": len(preferred_scores),
            },
        ],
        "p_values": {},
    }
    if preferred_scores and not_preferred_scores:
        table["p_values"]["preferred_vs_not"] = permutation_test(
            preferred_scores, not_preferred_scores, n_resamples=n_resamples, seed=seed + 7
        ).p_value
    rep.tables["influence_by_preference"] = table
    return rep


def write_blocks(blocks: Iterable[AuthoringBlock], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for b in blocks:
            fh.write(json.dumps(b.to_record(), sort_keys=True) + "\n")


def read_blocks(path: str | Path) -> list[AuthoringBlock]:
    with Path(path).open(encoding="utf-8") as fh:
        return [AuthoringBlock.from_record(json.loads(line)) for line in fh]


def write_responses(responses: Iterable[JudgmentResponse], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in responses:
            fh.write(
                json.dumps(
                    {
                        "group_id": r.group_id,
                        "rater_id": r.rater_id,
                        "preferred": r.preferred,
                        "timestamp": r.timestamp,
                    },
                    sort_keys=True,
                )
                + "\n"
            )


def read_responses(path: str | Path) -> list[JudgmentResponse]:
    out = []
    with Path(path).open(encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            out.append(
                JudgmentResponse(
                    group_id=rec["group_id"],
                    rater_id=rec["rater_id"],
                    preferred=rec["preferred"],
                    timestamp=rec.get("timestamp", 0.0),
                )
            )
    return out


__all__ = [
    "PRE",
    "POST",
    "GEN",
    "SOURCES",
    "AuthoringBlock",
    "JudgmentGroup",
    "JudgmentResponse",
    "InfluenceScore",
    "EvaluationReport",
    "BlockValidationError",
    "DanglingReferenceError",
    "normalize_sentence",
    "build_judgment_groups",
    "preference_distribution",
    "cosine",
    "semantic_influence",
    "gap_word_counts",
    "mean_gap_words",
    "report",
    "write_blocks",
    "read_blocks",
    "write_responses",
    "read_responses",
]
