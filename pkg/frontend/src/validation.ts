/**
 * Client-side sentence validation.
 *
 * Mirrors the server's deterministic checks code-for-code so authors see
 * failures before submitting; the server re-validates every submission, so
 * this layer is advisory only. Agreement with the server is pinned by the
 * shared fixture in fixtures/client_validation_fixture.json.
 */

export const PROMPT_ORDER = "PROMPT_ORDER";
export const TOO_SHORT = "TOO_SHORT";
export const TOO_LONG = "TOO_LONG";
export const NO_TERMINAL_PUNCT = "NO_TERMINAL_PUNCT";
export const DUPLICATE = "DUPLICATE";
export const MATCHES_EXAMPLE = "MATCHES_EXAMPLE";

export const MIN_WORDS = 7;
export const MAX_WORDS = 50;

const PUNCT = /[\p{P}\p{S}]/u;
const ALNUM_END = /[\p{L}\p{N}]$/u;

/** Word tokens: whitespace chunks with outer punctuation peeled off. */
export function sentenceWords(text: string): string[] {
  const words: string[] = [];
  for (const chunk of text.split(/\s+/)) {
    let word = chunk;
    while (word.length > 0 && PUNCT.test(word[0])) {
      word = word.slice(1);
    }
    while (word.length > 0 && PUNCT.test(word[word.length - 1])) {
      word = word.slice(0, -1);
    }
    if (word.length > 0) {
      words.push(word);
    }
  }
  return words;
}

/** Greedy leftmost whole-word match of the prompt words, case-insensitive. */
export function containsInOrder(sentence: string, promptWords: string[]): boolean {
  const words = sentenceWords(sentence).map((w) => w.toLowerCase());
  let i = 0;
  for (const pw of promptWords) {
    const target = pw.toLowerCase();
    while (i < words.length && words[i] !== target) {
      i += 1;
    }
    if (i === words.length) {
      return false;
    }
    i += 1;
  }
  return true;
}

export function normalizeSentence(text: string): string {
  return text.trim().split(/\s+/).join(" ");
}

/** Validate one sentence in isolation (no duplicate/example context). */
export function clientValidate(sentence: string, promptWords: string[]): string[] {
  const codes: string[] = [];
  const stripped = sentence.trim();
  const words = sentenceWords(stripped);
  if (!containsInOrder(stripped, promptWords)) {
    codes.push(PROMPT_ORDER);
  }
  if (words.length < MIN_WORDS) {
    codes.push(TOO_SHORT);
  }
  if (words.length > MAX_WORDS) {
    codes.push(TOO_LONG);
  }
  if (stripped.length === 0 || ALNUM_END.test(stripped)) {
    codes.push(NO_TERMINAL_PUNCT);
  }
  return codes;
}

/**
 * Validate a two-sentence submission exactly as the server does: per-sentence
 * checks plus pairwise distinctness and, in the Post stage, difference from
 * every shown example (whitespace-normalized exact matching).
 */
export function validatePair(
  promptWords: string[],
  sentences: string[],
  stage: "PRE" | "POST",
  shownExamples: string[] = [],
): string[][] {
  const verdicts: string[][] = [];
  const priorNormalized: string[] = [];
  const shown = new Set(shownExamples.map(normalizeSentence));
  for (const sentence of sentences) {
    const codes = clientValidate(sentence, promptWords);
    const norm = normalizeSentence(sentence.trim());
    if (priorNormalized.includes(norm)) {
      codes.push(DUPLICATE);
    }
    if (stage === "POST" && shown.has(norm)) {
      codes.push(MATCHES_EXAMPLE);
    }
    priorNormalized.push(norm);
    verdicts.push(codes);
  }
  return verdicts;
}
