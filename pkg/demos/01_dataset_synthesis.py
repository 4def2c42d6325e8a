"""Walk through dataset synthesis: story text -> sentences -> infill pairs.

Run:  python3 demos/01_dataset_synthesis.py
"""

import numpy as np

from storyfill import corpus as C
from storyfill.fixtures import generate_corpus

# A tiny story corpus. Each document is plain text; the segmenter finds
# sentence boundaries and keeps sentences of at least ten words.
docs = generate_corpus(n_sentences=60, seed=7)
print(f"{len(docs)} document(s); first 200 chars of the first one:\n")
print(" ", docs[0][1][:200], "...\n")

sentences = list(C.segment_corpus(docs))
print(f"{len(sentences)} sentences survive the ten-word floor. One record:")
record = sentences[0]
print("  id:         ", record.id)
print("  text:       ", record.text)
print("  word_tokens:", record.word_tokens[:8], "...\n")

# Ablation drops 60-100% of word positions; what survives becomes the
# prompt. Prompts keep order and surface form and must be at least half
# content words, so pure function-word skeletons get rejected and resampled.
rng = np.random.default_rng(0)
print("five ablations of that sentence:")
for _ in range(5):
    pair = C.ablate_with_retries(record, rng)
    print(f"  drop={pair.drop_fraction:.2f}  prompt={list(pair.prompt_words)}")

# Split assignment happens per sentence *before* ablation, so a target
# sentence can never appear in two splits.
splits = C.build_dataset(sentences, ratios=(0.8, 0.1, 0.1), seed=42)
print("\nsplit sizes:", {k: len(v) for k, v in splits.as_dict().items()})
print("rejected sentences (function-word heavy):", splits.n_rejected)

import tempfile
from pathlib import Path

with tempfile.TemporaryDirectory() as tmp:
    manifest = C.write_dataset(splits, tmp)
    print("\nwrote JSONL splits + manifest:")
    print(" ", manifest.read_text().strip().replace("\n", "\n  "))
    print("\none train record:")
    print(" ", (Path(tmp) / "train.jsonl").read_text().splitlines()[0])
