"""Corpus pipeline: story text -> sentence records -> infilling dataset.

The pipeline segments documents into sentences, keeps sentences of at least
ten word tokens, and turns each kept sentence into a (prompt, target) pair by
dropping a uniformly sampled 60-100% of its words. Prompts keep word order
and surface form, must be non-empty, and must be at least half content words.
Split assignment happens per sentence before ablation so a target sentence
can never appear in more than one split.
"""

from __future__ import annotations

import hashlib
import json
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .lexicon import FUNCTION_WORDS, is_content_word, is_punctuation, lexicon_hash

MIN_SENTENCE_WORDS = 10
DROP_RANGE = (0.6, 1.0)
MIN_CONTENT_RATIO = 0.5

# Tokens that end with one of these and precede an uppercase start do not
# close a sentence.
_ABBREVIATIONS = {
    "mr.", "mrs.", "ms.", "dr.", "st.", "prof.", "sr.", "jr.", "vs.",
    "etc.", "e.g.", "i.e.", "capt.", "lt.", "gen.", "no.",
}

_OPENER_CHARS = set("([{“‘")
_CLOSER_CHARS = set(".,!?;:)]}”’%…")
_AMBIGUOUS_QUOTES = set("\"'`")

_SENTENCE_BREAK = re.compile(
    r"([.!?]+[\"'”’)\]]*)(\s+)(?=[\"'“‘(\[]*[A-Z0-9])"
)


class EmptyCorpusError(ValueError):
    """Raised when a corpus source yields no documents or no text."""


def tokenize_words(text: str) -> list[str]:
    """Split on whitespace, then detach leading/trailing punctuation.

    Word-internal punctuation (apostrophes, hyphens) stays attached, so
    "don't" and "well-known" are single tokens while quotes and terminal
    punctuation become their own tokens.
    """
    tokens: list[str] = []
    for chunk in text.split():
        leading: list[str] = []
        trailing: list[str] = []
        while chunk and _is_punct_char(chunk[0]):
            leading.append(chunk[0])
            chunk = chunk[1:]
        while chunk and _is_punct_char(chunk[-1]):
            trailing.append(chunk[-1])
            chunk = chunk[:-1]
        tokens.extend(leading)
        if chunk:
            tokens.append(chunk)
        tokens.extend(reversed(trailing))
    return tokens


def _is_punct_char(ch: str) -> bool:
    return unicodedata.category(ch).startswith(("P", "S"))


def detokenize(tokens: Iterable[str]) -> str:
    """Join word tokens back into a sentence string.

    Closing punctuation attaches to the preceding word, opening punctuation
    to the following one. Straight quotes alternate opener/closer.
    """
    out: list[str] = []
    glue_next = False  # previous token was an opener
    quote_open: dict[str, bool] = {}
    for tok in tokens:
        if not out:
            out.append(tok)
            glue_next = tok in _OPENER_CHARS or (
                tok in _AMBIGUOUS_QUOTES and _toggle(quote_open, tok)
            )
            continue
        if tok in _AMBIGUOUS_QUOTES:
            opening = _toggle(quote_open, tok)
            if opening:
                if glue_next:
                    out.append(tok)
                else:
                    out.append(" " + tok)
                glue_next = True
            else:
                out.append(tok)
                glue_next = False
            continue
        if tok in _CLOSER_CHARS or all(c in _CLOSER_CHARS for c in tok):
            out.append(tok)
            glue_next = False
        elif glue_next:
            out.append(tok)
            glue_next = tok in _OPENER_CHARS
        elif tok in _OPENER_CHARS:
            out.append(" " + tok)
            glue_next = True
        else:
            out.append(" " + tok)
            glue_next = False
    return "".join(out)


def _toggle(state: dict[str, bool], ch: str) -> bool:
    """Flip quote parity; returns True when this occurrence opens a quote."""
    opening = not state.get(ch, False)
    state[ch] = opening
    return opening


@dataclass(frozen=True)
class SentenceRecord:
    """One corpus sentence with provenance.

    `text` is the detokenized form of `word_tokens`, so the two are always
    mutually consistent: detokenize(word_tokens) == text.
    """

    id: str
    text: str
    word_tokens: tuple[str, ...]
    source_doc: str

    @classmethod
    def from_tokens(cls, id: str, word_tokens: list[str], source_doc: str) -> "SentenceRecord":
        return cls(
            id=id,
            text=detokenize(word_tokens),
            word_tokens=tuple(word_tokens),
            source_doc=source_doc,
        )


@dataclass(frozen=True)
class InfillPair:
    id: str
    prompt_words: tuple[str, ...]
    target: SentenceRecord
    drop_fraction: float


@dataclass
class DatasetSplits:
    train: list[InfillPair]
    valid: list[InfillPair]
    test: list[InfillPair]
    split_seed: int
    ratios: tuple[float, float, float]
    n_rejected: int = 0

    def as_dict(self) -> dict[str, list[InfillPair]]:
        return {"train": self.train, "valid": self.valid, "test": self.test}


def split_sentences(text: str) -> list[str]:
    """Break a text into sentence strings without any length filtering.

    A sentence ends at terminal punctuation (plus any closing quotes)
    followed by whitespace and an uppercase/digit start, or at end of text.
    Paragraph breaks always split. Known abbreviations do not close a
    sentence.
    """
    sentences: list[str] = []
    for paragraph in re.split(r"\n\s*\n", text):
        flat = " ".join(paragraph.split())
        if not flat:
            continue
        start = 0
        for m in _SENTENCE_BREAK.finditer(flat):
            end = m.end(1)
            last_word = flat[start:end].rsplit(None, 1)[-1].lower()
            if last_word in _ABBREVIATIONS:
                continue
            sentences.append(flat[start:end])
            start = m.end(2)
        tail = flat[start:].strip()
        if tail:
            sentences.append(tail)
    return sentences


def segment_corpus(documents: Iterable[tuple[str, str]]) -> Iterator[SentenceRecord]:
    """Yield sentence records with >= MIN_SENTENCE_WORDS word tokens.

    `documents` is an iterable of (doc_id, text). Raises EmptyCorpusError if
    no documents are supplied. An empty document yields no records.
    """
    n_docs = 0
    for doc_id, text in documents:
        n_docs += 1
        idx = 0
        for sentence in split_sentences(text):
            tokens = tokenize_words(sentence)
            n_words = sum(1 for t in tokens if not is_punctuation(t))
            if n_words < MIN_SENTENCE_WORDS:
                continue
            yield SentenceRecord.from_tokens(
                id=f"{doc_id}:{idx:05d}", word_tokens=tokens, source_doc=doc_id
            )
            idx += 1
    if n_docs == 0:
        raise EmptyCorpusError("corpus contains no documents")


def read_corpus_dir(path: str | Path) -> list[tuple[str, str]]:
    """Load a directory of UTF-8 plain-text files, one document per file."""
    path = Path(path)
    files = sorted(p for p in path.glob("*.txt") if p.is_file())
    if not files:
        raise EmptyCorpusError(f"no .txt documents under {path}")
    return [(p.stem, p.read_text(encoding="utf-8")) for p in files]


def content_ratio(words: Iterable[str]) -> float:
    words = list(words)
    if not words:
        return 0.0
    return sum(1 for w in words if is_content_word(w)) / len(words)


def ablate(sentence: SentenceRecord, rng: np.random.Generator) -> InfillPair | None:
    """Drop a uniform 60-100% of word positions; None signals rejection.

    floor(drop_fraction * n) positions are removed uniformly at random, so
    at most ceil(0.4 * n) words survive. Rejected (caller resamples) when
    nothing survives or fewer than half the surviving words are content
    words.
    """
    n = len(sentence.word_tokens)
    drop_fraction = float(rng.uniform(*DROP_RANGE))
    n_drop = int(np.floor(drop_fraction * n))
    keep = np.sort(rng.choice(n, size=n - n_drop, replace=False))
    prompt = [sentence.word_tokens[i] for i in keep]
    if not prompt:
        return None
    if content_ratio(prompt) < MIN_CONTENT_RATIO:
        return None
    return InfillPair(
        id=f"{sentence.id}#a0",
        prompt_words=tuple(prompt),
        target=sentence,
        drop_fraction=drop_fraction,
    )


def ablate_with_retries(
    sentence: SentenceRecord, rng: np.random.Generator, max_tries: int = 25
) -> InfillPair | None:
    for _ in range(max_tries):
        pair = ablate(sentence, rng)
        if pair is not None:
            return pair
    return None


def _stable_int(key: str) -> int:
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "little")


def sentence_rng(seed: int, sentence_id: str) -> np.random.Generator:
    """Per-sentence generator derived from (seed, id).

    Independent of iteration order, so parallel and serial dataset builds
    produce identical pairs.
    """
    return np.random.default_rng((seed, _stable_int(sentence_id)))


def assign_splits(
    sentences: list[SentenceRecord], ratios: tuple[float, float, float], seed: int
) -> dict[str, list[SentenceRecord]]:
    """Deterministic sentence-level split assignment with exact-ratio sizes."""
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise ValueError(f"split ratios must sum to 1, got {ratios}")
    if len(sentences) < 3:
        raise ValueError(f"need at least 3 sentences to build 3 splits, got {len(sentences)}")
    order = np.random.default_rng(seed).permutation(len(sentences))
    n = len(sentences)
    # largest-remainder apportionment: sizes sum to n and each is within
    # one item of ratio * n
    raw = [r * n for r in ratios]
    sizes = [int(np.floor(x)) for x in raw]
    remainders = sorted(range(3), key=lambda i: raw[i] - sizes[i], reverse=True)
    for i in range(n - sum(sizes)):
        sizes[remainders[i % 3]] += 1
    out: dict[str, list[SentenceRecord]] = {}
    offset = 0
    for name, size in zip(("train", "valid", "test"), sizes):
        out[name] = [sentences[i] for i in order[offset : offset + size]]
        offset += size
    return out


def build_dataset(
    sentences: list[SentenceRecord],
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    seed: int = 0,
    pairs_per_sentence: int | dict[str, int] = 1,
) -> DatasetSplits:
    """Assign sentences to splits, then ablate each into infill pairs.

    Assignment precedes ablation, so no target sentence can leak across
    splits even with several pairs per sentence (`pairs_per_sentence` may be
    a per-split mapping; prompt selection likes a deep test split).
    Sentences whose ablation is rejected repeatedly (pathologically
    function-heavy) are dropped and counted in `n_rejected`.
    """
    assigned = assign_splits(sentences, ratios, seed)
    splits: dict[str, list[InfillPair]] = {"train": [], "valid": [], "test": []}
    n_rejected = 0
    for name, members in assigned.items():
        multiplicity = (
            pairs_per_sentence.get(name, 1)
            if isinstance(pairs_per_sentence, dict)
            else pairs_per_sentence
        )
        for sent in members:
            rng = sentence_rng(seed, sent.id)
            for k in range(multiplicity):
                pair = ablate_with_retries(sent, rng)
                if pair is None:
                    n_rejected += 1
                    continue
                if multiplicity > 1:
                    pair = InfillPair(
                        id=f"{sent.id}#a{k}",
                        prompt_words=pair.prompt_words,
                        target=pair.target,
                        drop_fraction=pair.drop_fraction,
                    )
                splits[name].append(pair)
    return DatasetSplits(
        train=splits["train"],
        valid=splits["valid"],
        test=splits["test"],
        split_seed=seed,
        ratios=ratios,
        n_rejected=n_rejected,
    )


def pair_to_record(pair: InfillPair) -> dict:
    return {
        "id": pair.id,
        "prompt": list(pair.prompt_words),
        "target": pair.target.text,
        "drop_fraction": pair.drop_fraction,
        "source_doc": pair.target.source_doc,
    }


def record_to_pair(record: dict) -> InfillPair:
    sent_id = record["id"].split("#")[0]
    target = SentenceRecord.from_tokens(
        id=sent_id,
        word_tokens=tokenize_words(record["target"]),
        source_doc=record["source_doc"],
    )
    return InfillPair(
        id=record["id"],
        prompt_words=tuple(record["prompt"]),
        target=target,
        drop_fraction=record["drop_fraction"],
    )


def write_dataset(splits: DatasetSplits, out_dir: str | Path) -> Path:
    """Write one JSON Lines file per split plus a manifest sidecar."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    counts = {}
    for name, pairs in splits.as_dict().items():
        path = out_dir / f"{name}.jsonl"
        with path.open("w", encoding="utf-8") as fh:
            for pair in pairs:
                fh.write(json.dumps(pair_to_record(pair), sort_keys=True) + "\n")
        counts[name] = len(pairs)
    manifest = {
        "seed": splits.split_seed,
        "ratios": list(splits.ratios),
        "counts": counts,
        "n_rejected": splits.n_rejected,
        "lexicon_hash": lexicon_hash(),
        "format": "storyfill-dataset-v1",
    }
    manifest_path = out_dir / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest_path


def read_dataset(out_dir: str | Path) -> DatasetSplits:
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / "manifest.json").read_text())
    loaded = {}
    for name in ("train", "valid", "test"):
        with (out_dir / f"{name}.jsonl").open(encoding="utf-8") as fh:
            loaded[name] = [record_to_pair(json.loads(line)) for line in fh]
    return DatasetSplits(
        train=loaded["train"],
        valid=loaded["valid"],
        test=loaded["test"],
        split_seed=manifest["seed"],
        ratios=tuple(manifest["ratios"]),
        n_rejected=manifest.get("n_rejected", 0),
    )


@dataclass
class CorpusStats:
    """Word-level statistics used by prompt selection.

    `frequency` counts lowercased word tokens over the whole corpus.
    `noninitial_total` / `noninitial_capitalized` count occurrences away from
    sentence-initial position, supporting the capitalization heuristic for
    named entities.
    """

    frequency: dict[str, int] = field(default_factory=dict)
    noninitial_total: dict[str, int] = field(default_factory=dict)
    noninitial_capitalized: dict[str, int] = field(default_factory=dict)

    @classmethod
    def from_sentences(cls, sentences: Iterable[SentenceRecord]) -> "CorpusStats":
        stats = cls()
        for sent in sentences:
            first_word = True
            for tok in sent.word_tokens:
                if is_punctuation(tok):
                    continue
                low = tok.lower()
                stats.frequency[low] = stats.frequency.get(low, 0) + 1
                if not first_word:
                    stats.noninitial_total[low] = stats.noninitial_total.get(low, 0) + 1
                    if tok[:1].isupper():
                        stats.noninitial_capitalized[low] = (
                            stats.noninitial_capitalized.get(low, 0) + 1
                        )
                first_word = False
        return stats

    def capitalized_ratio(self, word: str) -> float:
        low = word.lower()
        total = self.noninitial_total.get(low, 0)
        if total == 0:
            return 0.0
        return self.noninitial_capitalized.get(low, 0) / total

    def save(self, path: str | Path) -> None:
        payload = {
            "frequency": self.frequency,
            "noninitial_total": self.noninitial_total,
            "noninitial_capitalized": self.noninitial_capitalized,
        }
        Path(path).write_text(json.dumps(payload, sort_keys=True))

    @classmethod
    def load(cls, path: str | Path) -> "CorpusStats":
        payload = json.loads(Path(path).read_text())
        return cls(
            frequency=payload["frequency"],
            noninitial_total=payload["noninitial_total"],
            noninitial_capitalized=payload["noninitial_capitalized"],
        )


__all__ = [
    "MIN_SENTENCE_WORDS",
    "SentenceRecord",
    "InfillPair",
    "DatasetSplits",
    "CorpusStats",
    "EmptyCorpusError",
    "tokenize_words",
    "detokenize",
    "split_sentences",
    "segment_corpus",
    "read_corpus_dir",
    "content_ratio",
    "ablate",
    "ablate_with_retries",
    "assign_splits",
    "build_dataset",
    "write_dataset",
    "read_dataset",
    "sentence_rng",
    "is_content_word",
    "FUNCTION_WORDS",
]
