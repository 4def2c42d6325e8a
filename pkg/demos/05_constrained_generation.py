"""Constraint-filtered generation against pipeline artifacts.

Expects a completed pipeline run (storyfill run-all --workdir <dir>); give
the directory as the first argument. Shows the filter battery verdicts and
a live rejection-sampling run.

Run:  python3 demos/05_constrained_generation.py [workdir]
"""

import sys

import numpy as np

from storyfill.bpe import Vocabulary
from storyfill.checkpoint import load_checkpoint
from storyfill.generation import (
    GenerationConstraints,
    generate_examples,
    passes_filters,
)
from storyfill.prompts import read_prompts

workdir = sys.argv[1] if len(sys.argv) > 1 else "artifacts"

# the battery first, on hand-written candidates
prompt = ["he", "town", "rain"]
candidates = [
    "He rode his bike to town in the pouring rain.",
    "He went home",
    'He said "hello" to the people in the town square rain.',
    "The the dog ran to town chasing rain puddles today.",
]
print(f"filter verdicts for prompt {prompt}:")
for c in candidates:
    verdict = passes_filters(c, prompt, [])
    status = "ACCEPT" if verdict.accepted else "reject " + ",".join(sorted(verdict.reason_codes))
    print(f"  [{status}] {c}")

print("\nloading pipeline artifacts from", workdir)
vocab = Vocabulary.load(f"{workdir}/vocab.txt")
model = load_checkpoint(f"{workdir}/causal.ckpt").to_model(vocab)
prompts = [c for c in read_prompts(f"{workdir}/prompts.jsonl") if c.label == "easy"]

constraints = GenerationConstraints()  # nucleus 0.7, 5 outputs, 500 attempts
for cand in prompts[:2]:
    outcome = generate_examples(cand.words, model, constraints, np.random.default_rng(0))
    print(f"\nprompt {list(cand.words)} -> 5 accepted in {outcome.attempts} attempts "
          f"(rejections: {outcome.rejection_histogram})")
    for s in outcome.sentences:
        print("  -", s)
