"""Score prompt difficulty with a masked model and label deciles.

A fill-in-the-blank model estimates how probable each prompt word is in
context; the mean probability is "easiness". The top decile becomes easy,
the bottom decile hard. High-probability prompts already resemble natural
sequences, so they need less infilling.

Run:  python3 demos/04_prompt_difficulty.py
"""

from storyfill import corpus as C
from storyfill.bpe import train_vocab
from storyfill.fixtures import generate_corpus
from storyfill.model import ModelConfig
from storyfill.prompts import SelectionConfig, assign_labels, filter_prompts, score_pool
from storyfill.training import TrainConfig, train_masked_model

docs = generate_corpus(n_sentences=700, seed=23)
sentences = list(C.segment_corpus(docs))
splits = C.build_dataset(sentences, (0.8, 0.1, 0.1), seed=3,
                         pairs_per_sentence={"train": 1, "valid": 1, "test": 15})
vocab = train_vocab([t for _, t in docs], 4096)

stats = C.CorpusStats.from_sentences(
    [s for s in sentences if s.id in {p.target.id for p in splits.train}]
)
pool = filter_prompts(splits.test, stats, SelectionConfig(min_word_frequency=3))
print(f"{len(splits.test)} test pairs -> {len(pool)} three-word prompts after the battery")
print("the battery drops dialogue, digits, punctuation, entity-like words,")
print("rare words, and prompts with more than one function word\n")

print("training the masked scorer (a minute or two)...")
result = train_masked_model(
    vocab,
    sorted({p.target.text for p in splits.train}),
    sorted({p.target.text for p in splits.valid}),
    ModelConfig(mode="masked", n_layers=2, n_heads=4, d_model=96, d_ff=384,
                max_seq_len=128, vocab_size=len(vocab), seed=4),
    TrainConfig(optimizer="adam", max_epochs=4, batch_size=32, grad_accum_steps=1,
                validate_every_n_steps=50, early_stop_patience=5, seed=5),
)
scorer = result.checkpoint.to_model(vocab)

labeled = assign_labels(score_pool(pool, scorer), fraction=0.10)
easy = [c for c in labeled if c.label == "easy"]
hard = [c for c in labeled if c.label == "hard"]
print(f"\n{len(easy)} easy / {len(hard)} hard prompts. extremes:")
for c in easy[:3]:
    print(f"  easy  {c.difficulty_score:.4f}  {list(c.words)}")
for c in hard[-3:]:
    print(f"  hard  {c.difficulty_score:.4f}  {list(c.words)}")
