"""Closed-class function-word lexicon.

A word counts as "content" (noun/verb/adjective/open-class adverb) unless its
lowercased form appears here. The list is deliberately curated rather than
derived from a POS tagger: the split only needs to separate closed-class
words (pronouns, prepositions, determiners, conjunctions, auxiliaries,
particles) from everything else, and a fixed list keeps the decision
deterministic. Degree words like "more" / "most" are intentionally absent:
they behave as gradable adverbs and are treated as content.

Punctuation tokens also count as function words (see ``is_content_word``).
"""

import hashlib
import unicodedata

PRONOUNS = {
    "i", "me", "my", "mine", "myself",
    "we", "us", "our", "ours", "ourselves",
    "you", "your", "yours", "yourself", "yourselves",
    "he", "him", "his", "himself",
    "she", "her", "hers", "herself",
    "it", "its", "itself",
    "they", "them", "their", "theirs", "themselves",
    "who", "whom", "whose", "which", "what",
    "this", "that", "these", "those",
    "anybody", "anyone", "anything",
    "everybody", "everyone", "everything",
    "nobody", "nothing", "somebody", "someone", "something",
}

PREPOSITIONS = {
    "aboard", "about", "above", "across", "after", "against", "along",
    "amid", "among", "around", "at", "before", "behind", "below",
    "beneath", "beside", "besides", "between", "beyond", "by", "despite",
    "down", "during", "except", "for", "from", "in", "inside", "into",
    "like", "near", "of", "off", "on", "onto", "out", "outside", "over",
    "past", "since", "through", "throughout", "till", "to", "toward",
    "towards", "under", "underneath", "until", "unto", "up", "upon",
    "via", "with", "within", "without",
}

DETERMINERS = {
    "a", "an", "the",
    "all", "another", "any", "both", "each", "either", "every",
    "neither", "no", "some", "such",
}

CONJUNCTIONS = {
    "and", "but", "or", "nor", "so", "yet",
    "although", "as", "because", "how", "if", "once", "than", "though",
    "unless", "when", "whenever", "where", "wherever", "whereas",
    "whether", "while", "why",
}

AUXILIARIES = {
    "am", "is", "are", "was", "were", "be", "been", "being",
    "do", "does", "did",
    "have", "has", "had", "having",
    "can", "could", "may", "might", "must", "ought",
    "shall", "should", "will", "would",
}

PARTICLES = {"not", "n't", "there", "here"}

FUNCTION_WORDS = frozenset(
    PRONOUNS | PREPOSITIONS | DETERMINERS | CONJUNCTIONS | AUXILIARIES | PARTICLES
)


def is_punctuation(token: str) -> bool:
    """True if every character of the token is punctuation or a symbol."""
    return len(token) > 0 and all(
        unicodedata.category(ch).startswith(("P", "S")) for ch in token
    )


def is_content_word(word: str) -> bool:
    """Whether a word token is open-class (noun/verb/adjective/adverb).

    False for closed-class function words and for punctuation tokens;
    true for everything else, including numerals and unknown words.
    """
    if is_punctuation(word):
        return False
    return word.lower() not in FUNCTION_WORDS


def lexicon_hash() -> str:
    """Stable hash of the lexicon contents, recorded in dataset manifests."""
    joined = "\n".join(sorted(FUNCTION_WORDS)).encode("utf-8")
    return hashlib.sha256(joined).hexdigest()[:16]
