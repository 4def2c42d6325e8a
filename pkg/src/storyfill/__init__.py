"""Sentence-infilling authoring platform.

Submodules:
    corpus      story text -> sentence records -> infilling dataset
    bpe         byte-level subword tokenizer with prompt delimiters
    model       numpy transformer (causal + masked modes)
    training    loop with accumulation, clipping, early stopping
    sampling    nucleus (top-p) decoding
    checkpoint  versioned binary parameter container
    prompts     3-word prompt filtering and difficulty labeling
    generation  constraint-filtered example generation
    stats       Monte Carlo permutation tests
    analytics   judgment groups, preferences, influence, report
    service     authoring/judgment experiment service (event-sourced)
    simulate    synthetic-author replay harness
    fixtures    deterministic desk-scale story corpus
    pipeline    manifest-driven end-to-end orchestration
"""

__version__ = "0.1.0"
