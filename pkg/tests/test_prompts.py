import numpy as np
import pytest

from storyfill.bpe import SPECIAL_TOKENS, train_vocab
from storyfill.corpus import CorpusStats, InfillPair, SentenceRecord
from storyfill.prompts import (
    EASY,
    HARD,
    UNLABELED,
    PromptCandidate,
    SelectionConfig,
    assign_labels,
    difficulty_score,
    filter_prompts,
    read_prompts,
    round_half_up,
    score_pool,
    write_prompts,
)


def make_pair(pair_id, words, target_text):
    rec = SentenceRecord.from_tokens(
        pair_id.split("#")[0], target_text.split(), "doc"
    )
    return InfillPair(id=pair_id, prompt_words=tuple(words),
                      target=rec, drop_fraction=0.7)


@pytest.fixture()
def stats():
    s = CorpusStats()
    for word in ("peculiar", "rob", "more", "he", "town", "rain", "saw", "dogs",
                 "walked", "harbor", "quiet", "lantern", "the", "and"):
        s.frequency[word] = 50
        s.noninitial_total[word] = 40
        s.noninitial_capitalized[word] = 0
    # an entity-like word: capitalized in 90% of mid-sentence occurrences
    s.frequency["mira"] = 30
    s.noninitial_total["mira"] = 20
    s.noninitial_capitalized["mira"] = 18
    # a rare word
    s.frequency["gossamer"] = 2
    s.noninitial_total["gossamer"] = 2
    return s


def test_filter_keeps_content_prompt(stats):
    pairs = [make_pair("a#0", ["peculiar", "rob", "more"],
                       "it was peculiar how rob wanted more excitement every day")]
    pool = filter_prompts(pairs, stats)
    assert len(pool) == 1
    assert pool[0].words == ("peculiar", "rob", "more")
    assert pool[0].label == UNLABELED


def test_filter_allows_single_function_word(stats):
    pairs = [make_pair("b#0", ["he", "town", "rain"],
                       "he rode his bike to town in the pouring rain today")]
    assert len(filter_prompts(pairs, stats)) == 1


def test_filter_rejects_two_function_words(stats):
    pairs = [make_pair("c#0", ["the", "and", "town"],
                       "the sailor and the baker walked to town before dark")]
    assert filter_prompts(pairs, stats) == []


def test_filter_rejects_digits(stats):
    pairs = [make_pair("d#0", ["saw", "3", "dogs"],
                       "she saw 3 dogs running along the beach every morning")]
    assert filter_prompts(pairs, stats) == []


def test_filter_rejects_punctuation_word(stats):
    pairs = [make_pair("e#0", ["saw", "dogs", "don't"],
                       "she saw dogs but don't ask why they ran off again")]
    assert filter_prompts(pairs, stats) == []


def test_filter_rejects_dialogue_target(stats):
    pairs = [make_pair("f#0", ["town", "rain", "walked"],
                       '"stay home," she said, but he walked to town in rain')]
    assert filter_prompts(pairs, stats) == []


def test_filter_rejects_entity_like_word(stats):
    pairs = [make_pair("g#0", ["Mira", "town", "rain"],
                       "Mira rode her bike to town in the pouring rain today")]
    assert filter_prompts(pairs, stats) == []


def test_filter_rejects_rare_word(stats):
    pairs = [make_pair("h#0", ["gossamer", "town", "rain"],
                       "a gossamer mist covered the town before the rain arrived")]
    assert filter_prompts(pairs, stats) == []


def test_filter_requires_exactly_three_words(stats):
    pairs = [
        make_pair("i#0", ["town", "rain"], "he went to town in the rain again today"),
        make_pair("i#1", ["he", "town", "rain", "walked"],
                  "he walked to town in the rain with his dog"),
    ]
    assert filter_prompts(pairs, stats) == []


def test_filter_dedupes_repeated_triples(stats):
    pairs = [
        make_pair("j#0", ["he", "town", "rain"], "he went to town in rain with his dog today"),
        make_pair("j#1", ["he", "town", "rain"], "he went to town in rain with his dog today"),
    ]
    assert len(filter_prompts(pairs, stats)) == 1


def test_filter_idempotent(stats):
    pairs = [
        make_pair("a#0", ["peculiar", "rob", "more"],
                  "it was peculiar how rob wanted more excitement every day"),
        make_pair("b#0", ["he", "town", "rain"],
                  "he rode his bike to town in the pouring rain today"),
        make_pair("c#0", ["the", "and", "town"],
                  "the sailor and the baker walked to town before dark"),
    ]
    pool1 = filter_prompts(pairs, stats)
    kept_ids = {c.source_pair_id for c in pool1}
    pool2 = filter_prompts([p for p in pairs if p.id in kept_ids], stats)
    assert pool1 == pool2


class ConstantScorer:
    """Fake masked model: every masked position scores the same."""

    def __init__(self, vocab, value=0.5):
        self.vocab = vocab
        self.value = value

    def masked_token_prob(self, ids, position):
        return self.value


@pytest.fixture(scope="module")
def vocab():
    return train_vocab(["the sailor walked to town in rain"] * 4,
                       256 + len(SPECIAL_TOKENS) + 20)


def test_difficulty_score_constant_case(vocab):
    model = ConstantScorer(vocab, 0.5)
    assert difficulty_score(("he", "town", "rain"), model) == pytest.approx(0.5)


def test_assign_labels_half_up_rounding():
    assert round_half_up(2300.5) == 2301
    pool = [PromptCandidate(words=("w", "x", f"y{i}"), source_pair_id=f"p{i:05d}",
                            difficulty_score=i / 23005.0)
            for i in range(23005)]
    labeled = assign_labels(pool, 0.10)
    assert sum(1 for c in labeled if c.label == EASY) == 2301
    assert sum(1 for c in labeled if c.label == HARD) == 2301


def test_assign_labels_small_pool():
    pool = [PromptCandidate(words=("a", "b", f"c{i}"), source_pair_id=f"p{i}",
                            difficulty_score=i / 10)
            for i in range(10)]
    labeled = assign_labels(pool, 0.10)
    assert sum(1 for c in labeled if c.label == EASY) == 1
    assert sum(1 for c in labeled if c.label == HARD) == 1


def test_assign_labels_ordering_consistency():
    rng = np.random.default_rng(0)
    pool = [PromptCandidate(words=("a", "b", f"c{i}"), source_pair_id=f"p{i:03d}",
                            difficulty_score=float(rng.random()))
            for i in range(50)]
    labeled = assign_labels(pool, 0.2)
    easy_scores = [c.difficulty_score for c in labeled if c.label == EASY]
    mid = [c.difficulty_score for c in labeled if c.label == UNLABELED]
    hard_scores = [c.difficulty_score for c in labeled if c.label == HARD]
    assert min(easy_scores) >= max(mid)
    assert min(mid) >= max(hard_scores)


def test_assign_labels_tie_break_deterministic():
    pool = [PromptCandidate(words=("a", "b", f"c{i}"), source_pair_id=f"p{i:02d}",
                            difficulty_score=0.5)
            for i in range(10)]
    l1 = assign_labels(pool, 0.10)
    l2 = assign_labels(list(reversed(pool)), 0.10)
    by_id_1 = {c.source_pair_id: c.label for c in l1}
    by_id_2 = {c.source_pair_id: c.label for c in l2}
    assert by_id_1 == by_id_2
    assert by_id_1["p00"] == EASY


def test_prompt_io_round_trip(tmp_path):
    pool = [
        PromptCandidate(words=("he", "town", "rain"), source_pair_id="x#0",
                        difficulty_score=0.25, label=HARD),
        PromptCandidate(words=("quiet", "walked", "harbor"), source_pair_id="y#0",
                        difficulty_score=0.75, label=EASY),
    ]
    path = tmp_path / "prompts.jsonl"
    write_prompts(pool, path)
    loaded = read_prompts(path)
    assert loaded == pool
