"""Byte-level BPE tokenizer with prompt-delimiter special tokens.

Every byte sequence is encodable (the base alphabet is all 256 bytes), so
decode(encode(t)) == t holds for arbitrary UTF-8 text. Special tokens --
"{{" and "}}" around prompts, plus pad / end-of-sequence / mask -- are
matched greedily before byte-pair merges run, so they never fragment and no
merge can produce their ids.

Merges are learned greedily by pair frequency inside whitespace-delimited
chunks (a leading space sticks to the following word), which keeps encoding
prefix-stable across whitespace boundaries.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from pathlib import Path

PAD, PROMPT_START, PROMPT_END, EOS, MASK = "<pad>", "{{", "}}", "<eos>", "<mask>"
SPECIAL_TOKENS = (PAD, PROMPT_START, PROMPT_END, EOS, MASK)

_CHUNK = re.compile(r" ?\S+|\s+(?!\S)|\s+")
_FORMAT = "storyfill-bpe-v1"


def _bytes_to_printable() -> dict[int, str]:
    """Bijection from bytes to printable unicode for the merges file."""
    keep = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(0xA1, 0xAD))
        + list(range(0xAE, 0x100))
    )
    mapping = {b: chr(b) for b in keep}
    shift = 0
    for b in range(256):
        if b not in mapping:
            mapping[b] = chr(256 + shift)
            shift += 1
    return mapping


_B2P = _bytes_to_printable()
_P2B = {v: k for k, v in _B2P.items()}


def _printable(bs: bytes) -> str:
    return "".join(_B2P[b] for b in bs)


def _unprintable(s: str) -> bytes:
    return bytes(_P2B[c] for c in s)


class UnknownTokenIdError(ValueError):
    pass


@dataclass
class TokenSequence:
    ids: list[int]
    offsets: list[tuple[int, int]]

    def __len__(self) -> int:
        return len(self.ids)


class Vocabulary:
    """Immutable after construction; encode/decode are pure."""

    def __init__(self, merges: list[tuple[bytes, bytes]]):
        self.special_ids = {tok: i for i, tok in enumerate(SPECIAL_TOKENS)}
        base = len(SPECIAL_TOKENS)
        self.id_to_bytes: dict[int, bytes] = {
            base + b: bytes([b]) for b in range(256)
        }
        self.bytes_to_id: dict[bytes, int] = {
            v: k for k, v in self.id_to_bytes.items()
        }
        self.merges: list[tuple[bytes, bytes]] = []
        self.merge_ranks: dict[tuple[bytes, bytes], int] = {}
        for left, right in merges:
            self._add_merge(left, right)
        self._special_pattern = re.compile(
            "(" + "|".join(re.escape(t) for t in sorted(SPECIAL_TOKENS, key=len, reverse=True)) + ")"
        )
        self._chunk_cache: dict[bytes, tuple[int, ...]] = {}

    def _add_merge(self, left: bytes, right: bytes) -> None:
        if left not in self.bytes_to_id or right not in self.bytes_to_id:
            raise ValueError(f"merge references unknown token: {left!r} + {right!r}")
        merged = left + right
        if merged.decode("utf-8", errors="ignore") in SPECIAL_TOKENS:
            raise ValueError(f"merge would collide with special token {merged!r}")
        new_id = len(SPECIAL_TOKENS) + 256 + len(self.merges)
        self.merge_ranks[(left, right)] = len(self.merges)
        self.merges.append((left, right))
        self.id_to_bytes[new_id] = merged
        # first merge producing a byte string wins the id lookup
        self.bytes_to_id.setdefault(merged, new_id)

    def __len__(self) -> int:
        return len(SPECIAL_TOKENS) + 256 + len(self.merges)

    @property
    def pad_id(self) -> int:
        return self.special_ids[PAD]

    @property
    def prompt_start_id(self) -> int:
        return self.special_ids[PROMPT_START]

    @property
    def prompt_end_id(self) -> int:
        return self.special_ids[PROMPT_END]

    @property
    def eos_id(self) -> int:
        return self.special_ids[EOS]

    @property
    def mask_id(self) -> int:
        return self.special_ids[MASK]

    def _encode_chunk(self, chunk: bytes) -> tuple[int, ...]:
        cached = self._chunk_cache.get(chunk)
        if cached is not None:
            return cached
        parts = [bytes([b]) for b in chunk]
        while len(parts) > 1:
            best_rank = None
            best_i = -1
            for i in range(len(parts) - 1):
                rank = self.merge_ranks.get((parts[i], parts[i + 1]))
                if rank is not None and (best_rank is None or rank < best_rank):
                    best_rank = rank
                    best_i = i
            if best_rank is None:
                break
            parts[best_i : best_i + 2] = [parts[best_i] + parts[best_i + 1]]
        ids = tuple(self.bytes_to_id[p] for p in parts)
        if len(self._chunk_cache) < 200_000:
            self._chunk_cache[chunk] = ids
        return ids

    def encode(self, text: str) -> TokenSequence:
        """Tokenize text; specials match greedily before byte-pair merges."""
        ids: list[int] = []
        offsets: list[tuple[int, int]] = []
        pos = 0
        for segment in self._special_pattern.split(text):
            if not segment:
                continue
            if segment in self.special_ids:
                ids.append(self.special_ids[segment])
                offsets.append((pos, pos + len(segment)))
                pos += len(segment)
                continue
            for m in _CHUNK.finditer(segment):
                chunk_chars = m.group(0)
                chunk_start = pos + m.start()
                # map byte boundaries back to character spans
                char_ends = []
                b = 0
                for ci, ch in enumerate(chunk_chars):
                    b += len(ch.encode("utf-8"))
                    char_ends.append(b)
                token_ids = self._encode_chunk(chunk_chars.encode("utf-8"))
                byte_pos = 0
                char_pos = 0
                for tid in token_ids:
                    byte_pos += len(self.id_to_bytes[tid])
                    char_end = char_pos
                    while char_end < len(char_ends) and char_ends[char_end] <= byte_pos:
                        char_end += 1
                    ids.append(tid)
                    offsets.append((chunk_start + char_pos, chunk_start + char_end))
                    char_pos = char_end
            pos += len(segment)
        return TokenSequence(ids=ids, offsets=offsets)

    def decode(self, ids: list[int]) -> str:
        out: list[bytes] = []
        specials = {v: k for k, v in self.special_ids.items()}
        for tid in ids:
            if tid in specials:
                out.append(specials[tid].encode("utf-8"))
            elif tid in self.id_to_bytes:
                out.append(self.id_to_bytes[tid])
            else:
                raise UnknownTokenIdError(f"id {tid} not in vocabulary")
        # sampled ids may splice multi-byte characters; never crash on them
        return b"".join(out).decode("utf-8", errors="replace")

    def decode_plain(self, ids: list[int]) -> str:
        """Decode skipping special tokens (for generated text)."""
        keep = [i for i in ids if i not in set(self.special_ids.values())]
        return self.decode(keep)

    def save(self, path: str | Path) -> None:
        lines = [_FORMAT, "specials\t" + "\t".join(SPECIAL_TOKENS)]
        lines += [f"{_printable(a)}\t{_printable(b)}" for a, b in self.merges]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        if not lines or lines[0] != _FORMAT:
            raise ValueError(f"not a {_FORMAT} vocabulary file")
        if lines[1] != "specials\t" + "\t".join(SPECIAL_TOKENS):
            raise ValueError("special-token header mismatch")
        merges = []
        for line in lines[2:]:
            if not line:
                continue
            left, right = line.split("\t")
            merges.append((_unprintable(left), _unprintable(right)))
        return cls(merges)

    def content_hash(self) -> str:
        """Hash of the canonical serialization; stored in checkpoints."""
        payload = "\n".join(
            [_FORMAT, "|".join(SPECIAL_TOKENS)]
            + [f"{_printable(a)} {_printable(b)}" for a, b in self.merges]
        )
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def train_vocab(corpus: list[str], target_size: int) -> Vocabulary:
    """Learn byte-pair merges greedily by frequency.

    Ties break toward the lexicographically smallest pair so training is
    deterministic given the corpus. Stops early once no pair occurs twice.
    """
    floor_size = 256 + len(SPECIAL_TOKENS)
    if target_size < floor_size:
        raise ValueError(
            f"target_size {target_size} below byte alphabet + specials ({floor_size})"
        )
    if not corpus or all(not doc for doc in corpus):
        raise ValueError("cannot train a vocabulary on an empty corpus")

    chunk_counts: dict[bytes, int] = {}
    for doc in corpus:
        for m in _CHUNK.finditer(doc):
            raw = m.group(0).encode("utf-8")
            chunk_counts[raw] = chunk_counts.get(raw, 0) + 1

    chunks: list[list[bytes]] = []
    counts: list[int] = []
    for raw, count in chunk_counts.items():
        chunks.append([bytes([b]) for b in raw])
        counts.append(count)

    pair_counts: dict[tuple[bytes, bytes], int] = {}
    pair_sites: dict[tuple[bytes, bytes], set[int]] = {}
    for idx, symbols in enumerate(chunks):
        for pair in zip(symbols, symbols[1:]):
            pair_counts[pair] = pair_counts.get(pair, 0) + counts[idx]
            pair_sites.setdefault(pair, set()).add(idx)

    special_bytes = {t.encode("utf-8") for t in SPECIAL_TOKENS}
    merges: list[tuple[bytes, bytes]] = []
    n_merges = target_size - floor_size
    while len(merges) < n_merges and pair_counts:
        best_pair = min(pair_counts, key=lambda p: (-pair_counts[p], p))
        if pair_counts[best_pair] < 2:
            break
        if best_pair[0] + best_pair[1] in special_bytes:
            # never learn a token whose bytes spell a special marker
            del pair_counts[best_pair]
            pair_sites.pop(best_pair, None)
            continue
        merges.append(best_pair)
        merged = best_pair[0] + best_pair[1]
        for idx in sorted(pair_sites.pop(best_pair, ())):
            symbols = chunks[idx]
            count = counts[idx]
            for pair in zip(symbols, symbols[1:]):
                pair_counts[pair] -= count
                if pair_counts[pair] <= 0:
                    del pair_counts[pair]
                sites = pair_sites.get(pair)
                if sites is not None:
                    sites.discard(idx)
            rebuilt: list[bytes] = []
            i = 0
            while i < len(symbols):
                if (
                    i + 1 < len(symbols)
                    and symbols[i] == best_pair[0]
                    and symbols[i + 1] == best_pair[1]
                ):
                    rebuilt.append(merged)
                    i += 2
                else:
                    rebuilt.append(symbols[i])
                    i += 1
            chunks[idx] = rebuilt
            for pair in zip(rebuilt, rebuilt[1:]):
                pair_counts[pair] = pair_counts.get(pair, 0) + count
                pair_sites.setdefault(pair, set()).add(idx)
    return Vocabulary(merges)


__all__ = [
    "PAD",
    "PROMPT_START",
    "PROMPT_END",
    "EOS",
    "MASK",
    "SPECIAL_TOKENS",
    "TokenSequence",
    "Vocabulary",
    "UnknownTokenIdError",
    "train_vocab",
]
