"""Deterministic desk-scale story corpus.

Generates template-based narrative sentences with a compact vocabulary, so a
small model trains in minutes on a CPU while every pipeline stage still has
work to do: most sentences clear the ten-word bar, a few are deliberately
short, a slice carries quoted dialogue, and proper names appear capitalized
mid-sentence to exercise the entity heuristic. Determiners, prepositions,
and connectives vary per slot, which keeps sampled sentences lexically
diverse enough to pass the 60% overlap filter during generation.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

NAMES = ["Mira", "Tomas", "Elena", "Jasper", "Nadia", "Felix", "Rosa", "Henrik", "Lena", "Oskar"]
PEOPLE = [
    "sailor", "fisherman", "baker", "teacher", "doctor", "farmer", "merchant",
    "soldier", "stranger", "child", "shepherd", "carpenter", "innkeeper",
    "gardener", "painter",
]
ANIMALS = ["dog", "horse", "bird", "cat", "fox", "owl"]
OBJECTS = [
    "lantern", "letter", "basket", "rope", "blanket", "ladder", "bucket",
    "candle", "map", "bell", "boat", "wagon", "barrel", "loaf", "coat",
]
PLACES = [
    "harbor", "market", "village", "river", "forest", "bridge", "meadow",
    "kitchen", "garden", "mountain", "valley", "station", "orchard", "mill",
    "courtyard",
]
MOTION_VERBS = [
    "walked", "hurried", "wandered", "marched", "drifted", "climbed", "rode",
    "sailed", "strolled", "limped",
]
TRANS_VERBS = [
    "carried", "watched", "repaired", "painted", "gathered", "borrowed",
    "found", "dropped", "followed", "greeted", "studied", "remembered",
    "counted", "mended", "traded",
]
ADJECTIVES = [
    "old", "quiet", "bright", "heavy", "narrow", "golden", "distant",
    "broken", "gentle", "crowded", "empty", "warm", "pale", "steep",
    "wooden", "silver", "foggy", "tired", "curious", "patient",
]
ADVERBS = [
    "slowly", "quietly", "finally", "carefully", "suddenly", "often",
    "nearly", "early", "bravely", "calmly",
]
WEATHER = ["rain", "snow", "wind", "fog", "storm", "sunlight", "thunder", "frost"]
WEATHER_VERBS = ["fell", "rose", "faded", "lingered", "thickened"]
TIMES = ["morning", "evening", "afternoon", "night", "winter", "summer", "autumn", "spring"]
DETS = ["the", "a", "their", "his", "her", "one", "some", "every", "that"]
PREPS = ["toward", "near", "beside", "around", "past", "under", "behind", "along"]
CONNS = ["when", "after", "while", "before", "as"]

_POOLS = {
    "name": NAMES,
    "person": PEOPLE,
    "animal": ANIMALS,
    "object": OBJECTS,
    "place": PLACES,
    "motion": MOTION_VERBS,
    "trans": TRANS_VERBS,
    "adj": ADJECTIVES,
    "adv": ADVERBS,
    "weather": WEATHER,
    "wverb": WEATHER_VERBS,
    "time": TIMES,
    "det": DETS,
    "prep": PREPS,
    "conn": CONNS,
}

# (template, weight); slots ending in digits reuse a pool with a fresh draw.
# Glue words (det/prep/conn) are drawn from pools too, so sentences built
# from the same frame still differ lexically.
_TEMPLATES = [
    ("{det} {adj} {person} {motion} {adv} {prep} {det2} {adj2} {place} {conn} {det3} {time} {weather} {wverb}.", 12),
    ("{det} {person} {trans} {det2} {adj} {object} and {trans2} {det3} {adj2} {object2} {prep} {det4} {place}.", 12),
    ("{name} {trans} {det} {adj} {object} {conn} {det2} {adj2} {person} {motion} {adv} {prep} {det3} {place}.", 11),
    ("{conn} {det} {weather} {wverb} {prep} {det2} {place}, {det3} {adj} {animal} {trans} {det4} {adj2} {object} {adv}.", 12),
    ("{det} {adj} {person} and {det2} {person2} {trans} {det3} {object} {prep} {det4} {adj2} {place} {conn} {det5} {weather} {wverb}.", 10),
    ("{name} told {det} {person} about {det2} {adj} {object} hidden {prep} {det3} {adj2} {place} {adv}.", 9),
    ("{det} {adj} {animal} {motion} {prep} {det2} {place} {conn} {det3} {adj2} {person} {trans} {det4} {object} {adv}.", 11),
    ("{conn} {det} {time}, {det2} {adj} {person} {trans} {det3} {object} {adv} and {motion} {prep} {det4} {adj2} {place}.", 12),
    ('"Bring {det} {object} back before {det2} {time}," said {det3} {adj} {person} {prep} {det4} {place}.', 2),
    ("{det} {person} {motion} away.", 2),
    ("It was {det} {adj} {time}.", 2),
]


def _fill(template: str, rng: np.random.Generator) -> str:
    out = template
    while "{" in out:
        start = out.index("{")
        end = out.index("}", start)
        slot = out[start + 1 : end]
        pool = _POOLS[slot.rstrip("0123456789")]
        word = pool[int(rng.integers(len(pool)))]
        out = out[:start] + word + out[end + 1 :]
    # sentence case without touching proper names
    return out[0].upper() + out[1:] if out[0].islower() else out


def generate_sentence(rng: np.random.Generator) -> str:
    weights = np.array([w for _, w in _TEMPLATES], dtype=np.float64)
    weights /= weights.sum()
    idx = int(rng.choice(len(_TEMPLATES), p=weights))
    return _fill(_TEMPLATES[idx][0], rng)


def generate_corpus(
    n_sentences: int = 2000, seed: int = 2024, sentences_per_doc: int = 100
) -> list[tuple[str, str]]:
    """Return (doc_id, text) pairs totalling n_sentences sentences."""
    rng = np.random.default_rng(seed)
    docs: list[tuple[str, str]] = []
    remaining = n_sentences
    doc_idx = 0
    while remaining > 0:
        count = min(sentences_per_doc, remaining)
        sentences = [generate_sentence(rng) for _ in range(count)]
        docs.append((f"story{doc_idx:03d}", " ".join(sentences)))
        remaining -= count
        doc_idx += 1
    return docs


def write_corpus_dir(
    path: str | Path, n_sentences: int = 2000, seed: int = 2024
) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    for doc_id, text in generate_corpus(n_sentences, seed):
        (path / f"{doc_id}.txt").write_text(text + "\n", encoding="utf-8")
    return path


__all__ = ["generate_corpus", "generate_sentence", "write_corpus_dir"]
