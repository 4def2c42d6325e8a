"""Byte-level BPE in action: training, round trips, prompt delimiters.

Run:  python3 demos/02_tokenizer.py
"""

from storyfill.bpe import SPECIAL_TOKENS, train_vocab
from storyfill.corpus import segment_corpus
from storyfill.fixtures import generate_corpus

docs = generate_corpus(n_sentences=400, seed=3)
vocab = train_vocab([text for _, text in docs], target_size=4096)
print(f"trained vocabulary: {len(vocab)} tokens "
      f"({len(vocab.merges)} merges + 256 bytes + {len(SPECIAL_TOKENS)} specials)")
print("first merges:", vocab.merges[:6], "\n")

sentence = next(iter(segment_corpus(docs))).text
seq = vocab.encode(sentence)
print("sentence:", sentence)
print("tokens:  ", [vocab.id_to_bytes.get(i, b"?").decode("utf-8", "replace") for i in seq.ids])
print("round trip exact:", vocab.decode(seq.ids) == sentence, "\n")

# "{{" and "}}" frame the prompt; they match greedily before BPE so they
# never fragment, and no learned merge can produce their ids.
framed = "{{ sailor lantern harbor }} The sailor lit a lantern."
ids = vocab.encode(framed).ids
print("framed prompt ids start with PROMPT_START:", ids[0] == vocab.prompt_start_id)
print("decode_plain strips specials:", vocab.decode_plain(ids))

# any UTF-8 round-trips thanks to byte-level fallback
weird = "Ægir væri þögull — зимний вечер 🌧"
assert vocab.decode(vocab.encode(weird).ids) == weird
print("\nutf-8 fallback round trip holds for:", weird)
