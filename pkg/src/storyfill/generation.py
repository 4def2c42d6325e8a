"""Constraint-filtered sentence generation.

Candidates are sampled from the causal model conditioned on
"{{ prompt }}" and kept only if they contain the prompt words in order,
stay within 7-50 words, end in punctuation, avoid quotes and adjacent
repeats, stay lexically diverse against the already-accepted set, and pass
the profanity blocklist. Sampling continues until five candidates survive
or the attempt budget runs out.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corpus import tokenize_words
from .lexicon import is_punctuation
from .model import MAX_TARGET_TOKENS, TransformerLM, encode_prompt_words
from .sampling import NUCLEUS_P, sample

PROMPT_ORDER = "PROMPT_ORDER"
TOO_SHORT = "TOO_SHORT"
TOO_LONG = "TOO_LONG"
QUOTES = "QUOTES"
NO_TERMINAL_PUNCT = "NO_TERMINAL_PUNCT"
ADJACENT_REPEAT = "ADJACENT_REPEAT"
LOW_DIVERSITY = "LOW_DIVERSITY"
PROFANITY = "PROFANITY"

_QUOTE_TOKENS = set('"“”') | {"'", "‘", "’", "`"}

# minimal default blocklist; deployments supply their own
DEFAULT_BLOCKLIST = frozenset(
    {"fuck", "shit", "cunt", "bitch", "asshole", "bastard", "dick", "nigger", "faggot"}
)


@dataclass(frozen=True)
class GenerationConstraints:
    min_words: int = 7
    max_words: int = 50
    forbid_quotes: bool = True
    require_terminal_punct: bool = True
    forbid_adjacent_repeats: bool = True
    overlap_threshold: float = 0.60  # inclusive: exactly 60% overlap rejects
    nucleus_p: float = NUCLEUS_P
    n_outputs: int = 5
    max_attempts: int = 500

    def __post_init__(self):
        if not 0 < self.overlap_threshold <= 1:
            raise ValueError("overlap_threshold must be in (0, 1]")
        if self.min_words > self.max_words:
            raise ValueError("min_words must not exceed max_words")
        if self.n_outputs < 1:
            raise ValueError("n_outputs must be at least 1")


@dataclass
class CandidateVerdict:
    sentence: str
    reason_codes: frozenset[str]

    @property
    def accepted(self) -> bool:
        return not self.reason_codes


class GenerationBudgetExceeded(RuntimeError):
    """Attempt cap hit before n_outputs candidates were accepted."""

    def __init__(self, prompt_words, accepted, attempts, rejection_histogram):
        self.prompt_words = tuple(prompt_words)
        self.accepted = list(accepted)
        self.attempts = attempts
        self.rejection_histogram = dict(rejection_histogram)
        super().__init__(
            f"prompt {self.prompt_words}: {len(accepted)} accepted after "
            f"{attempts} attempts; rejections {self.rejection_histogram}"
        )


def sentence_words(text: str) -> list[str]:
    """Word tokens with punctuation tokens stripped out."""
    return [t for t in tokenize_words(text) if not is_punctuation(t)]


def find_prompt_positions(words: list[str], prompt_words) -> list[int] | None:
    """Greedy leftmost whole-word match of prompt words, case-insensitive."""
    positions: list[int] = []
    i = 0
    for pw in prompt_words:
        target = pw.lower()
        while i < len(words) and words[i].lower() != target:
            i += 1
        if i == len(words):
            return None
        positions.append(i)
        i += 1
    return positions


def contains_in_order(sentence: str, prompt_words) -> bool:
    return find_prompt_positions(sentence_words(sentence), prompt_words) is not None


def word_overlap(sentence: str, accepted_set: list[str]) -> float:
    """Fraction of the candidate's word tokens already seen in accepted text.

    Membership is checked per token against the union of lowercased word
    types of the accepted sentences; an empty accepted set gives 0.
    """
    words = [w.lower() for w in sentence_words(sentence)]
    if not words or not accepted_set:
        return 0.0
    union: set[str] = set()
    for prev in accepted_set:
        union.update(w.lower() for w in sentence_words(prev))
    return sum(1 for w in words if w in union) / len(words)


def passes_filters(
    sentence: str,
    prompt_words,
    accepted_set: list[str],
    constraints: GenerationConstraints = GenerationConstraints(),
    blocklist: frozenset[str] = DEFAULT_BLOCKLIST,
) -> CandidateVerdict:
    """Evaluate every filter and report all violated codes."""
    codes: set[str] = set()
    stripped = sentence.strip()
    words = sentence_words(stripped)
    lowered = [w.lower() for w in words]

    if find_prompt_positions(words, prompt_words) is None:
        codes.add(PROMPT_ORDER)
    if len(words) < constraints.min_words:
        codes.add(TOO_SHORT)
    if len(words) > constraints.max_words:
        codes.add(TOO_LONG)
    if constraints.forbid_quotes and any(
        t in _QUOTE_TOKENS for t in tokenize_words(stripped)
    ):
        codes.add(QUOTES)
    if constraints.require_terminal_punct and (not stripped or stripped[-1].isalnum()):
        codes.add(NO_TERMINAL_PUNCT)
    if constraints.forbid_adjacent_repeats and any(
        a == b for a, b in zip(lowered, lowered[1:])
    ):
        codes.add(ADJACENT_REPEAT)
    if word_overlap(stripped, accepted_set) >= constraints.overlap_threshold:
        codes.add(LOW_DIVERSITY)
    if any(w in blocklist for w in lowered):
        codes.add(PROFANITY)
    return CandidateVerdict(sentence=stripped, reason_codes=frozenset(codes))


@dataclass
class GenerationOutcome:
    prompt_words: tuple[str, ...]
    sentences: list[str]
    attempts: int
    rejection_histogram: dict[str, int] = field(default_factory=dict)


def prompt_prefix_ids(model: TransformerLM, prompt_words) -> list[int]:
    vocab = model.vocab
    prompt_ids = encode_prompt_words(vocab, prompt_words)
    return [vocab.prompt_start_id] + prompt_ids + [vocab.prompt_end_id]


def generate_candidate(
    model: TransformerLM, prompt_words, nucleus_p: float, rng: np.random.Generator
) -> str:
    ids = sample(
        model,
        prompt_prefix_ids(model, prompt_words),
        nucleus_p=nucleus_p,
        rng=rng,
        max_new_tokens=MAX_TARGET_TOKENS,
    )
    return model.vocab.decode_plain(ids).strip()


def generate_examples(
    prompt_words,
    model: TransformerLM,
    constraints: GenerationConstraints = GenerationConstraints(),
    rng: np.random.Generator | None = None,
    blocklist: frozenset[str] = DEFAULT_BLOCKLIST,
) -> GenerationOutcome:
    """Sample until n_outputs candidates pass all filters.

    Accepted sentences join the diversity union immediately, so later
    candidates are checked against everything accepted so far. Raises
    GenerationBudgetExceeded (carrying partial results and the per-code
    rejection counts) when max_attempts runs out.
    """
    if model.config.mode != "causal":
        raise ValueError("generation requires a causal model")
    if rng is None:
        rng = np.random.default_rng()
    accepted: list[str] = []
    histogram: dict[str, int] = {}
    attempts = 0
    while len(accepted) < constraints.n_outputs:
        if attempts >= constraints.max_attempts:
            raise GenerationBudgetExceeded(prompt_words, accepted, attempts, histogram)
        attempts += 1
        candidate = generate_candidate(model, prompt_words, constraints.nucleus_p, rng)
        verdict = passes_filters(candidate, prompt_words, accepted, constraints, blocklist)
        if verdict.accepted:
            accepted.append(verdict.sentence)
        else:
            for code in verdict.reason_codes:
                histogram[code] = histogram.get(code, 0) + 1
    return GenerationOutcome(
        prompt_words=tuple(prompt_words),
        sentences=accepted,
        attempts=attempts,
        rejection_histogram=histogram,
    )


__all__ = [
    "PROMPT_ORDER",
    "TOO_SHORT",
    "TOO_LONG",
    "QUOTES",
    "NO_TERMINAL_PUNCT",
    "ADJACENT_REPEAT",
    "LOW_DIVERSITY",
    "PROFANITY",
    "DEFAULT_BLOCKLIST",
    "GenerationConstraints",
    "CandidateVerdict",
    "GenerationOutcome",
    "GenerationBudgetExceeded",
    "sentence_words",
    "find_prompt_positions",
    "contains_in_order",
    "word_overlap",
    "passes_filters",
    "generate_examples",
    "generate_candidate",
    "prompt_prefix_ids",
]
