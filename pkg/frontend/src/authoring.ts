/**
 * Authoring view: prompt chips, two sentence inputs with live validation
 * badges, the example panel (Post stage only), and story feedback.
 *
 * The example panel element does not exist in the DOM during the Pre stage;
 * hiding it with CSS would still leak the text into the page.
 */

import { validatePair } from "./validation.js";

export interface AuthoringState {
  promptWords: string[];
  stage: "PRE" | "POST";
  examples: string[]; // empty in PRE
  promptNumber: number;
  promptTotal: number;
}

export interface AuthoringHandles {
  root: HTMLElement;
  inputs: [HTMLTextAreaElement, HTMLTextAreaElement];
  submit: HTMLButtonElement;
  feedbackPanel: HTMLElement;
  currentSentences(): [string, string];
  refresh(): void;
}

const CODE_LABELS: Record<string, string> = {
  PROMPT_ORDER: "prompt words in order",
  TOO_SHORT: "at least 7 words",
  TOO_LONG: "at most 50 words",
  NO_TERMINAL_PUNCT: "ends with punctuation",
  DUPLICATE: "different from your other sentence",
  MATCHES_EXAMPLE: "different from the examples",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderAuthoringView(
  container: HTMLElement,
  state: AuthoringState,
  onSubmit: (sentences: [string, string]) => void,
): AuthoringHandles {
  container.textContent = "";
  const root = el("section", "authoring");
  container.appendChild(root);

  root.appendChild(
    el("p", "progress", `Prompt ${state.promptNumber} of ${state.promptTotal} — ${state.stage} stage`),
  );

  const chips = el("div", "prompt-chips");
  for (const word of state.promptWords) {
    chips.appendChild(el("span", "chip", word));
  }
  root.appendChild(chips);

  root.appendChild(
    el(
      "p",
      "instructions",
      "Write two different sentences that use all three words in this order. " +
        "Try to write sentences that evoke a story someone would be curious to hear.",
    ),
  );

  if (state.stage === "POST") {
    const panel = el("div", "example-panel");
    panel.appendChild(el("h3", undefined, "Example sentences"));
    const list = el("ul", "examples");
    for (const example of state.examples) {
      list.appendChild(el("li", "example", example));
    }
    panel.appendChild(list);
    root.appendChild(panel);
  }

  const inputs: HTMLTextAreaElement[] = [];
  const badgeRows: HTMLElement[] = [];
  for (let i = 0; i < 2; i += 1) {
    const wrap = el("div", "sentence-input");
    const input = el("textarea") as HTMLTextAreaElement;
    input.rows = 2;
    input.placeholder = `Sentence ${i + 1}`;
    const badges = el("div", "badges");
    wrap.appendChild(input);
    wrap.appendChild(badges);
    root.appendChild(wrap);
    inputs.push(input);
    badgeRows.push(badges);
  }

  const submit = el("button", "submit", "Submit sentences") as HTMLButtonElement;
  submit.disabled = true;
  root.appendChild(submit);

  const feedbackPanel = el("div", "story-feedback");
  root.appendChild(feedbackPanel);

  function refresh(): void {
    const sentences = inputs.map((i) => i.value) as [string, string];
    const verdicts = validatePair(
      state.promptWords,
      sentences,
      state.stage,
      state.examples,
    );
    verdicts.forEach((codes, i) => {
      const row = badgeRows[i];
      row.textContent = "";
      for (const code of codes) {
        row.appendChild(el("span", "badge fail", CODE_LABELS[code] ?? code));
      }
      if (codes.length === 0 && sentences[i].trim().length > 0) {
        row.appendChild(el("span", "badge ok", "looks good"));
      }
    });
    submit.disabled = verdicts.some((codes) => codes.length > 0);
  }

  inputs.forEach((input) => input.addEventListener("input", refresh));
  submit.addEventListener("click", () => {
    onSubmit(inputs.map((i) => i.value.trim()) as [string, string]);
  });
  refresh();

  return {
    root,
    inputs: inputs as [HTMLTextAreaElement, HTMLTextAreaElement],
    submit,
    feedbackPanel,
    currentSentences: () => inputs.map((i) => i.value.trim()) as [string, string],
    refresh,
  };
}

export function showStoryFeedback(panel: HTMLElement, stories: string[]): void {
  panel.textContent = "";
  if (stories.length === 0) return;
  panel.appendChild(el("h3", undefined, "Your sentences started these stories"));
  for (const story of stories) {
    panel.appendChild(el("p", "story", story));
  }
}
