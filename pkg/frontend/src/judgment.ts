/**
 * Judgment view: three sentence cards in the server-provided order.
 *
 * The cards carry no provenance of any kind; the server knows which
 * sentence came from where, the page never does. Order comes from the
 * server payload and is rendered as-is.
 */

export interface JudgmentGroupState {
  groupId: string;
  sentences: string[]; // already in presentation order
  position: number;
  total: number;
}

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

export function renderJudgmentGroup(
  container: HTMLElement,
  state: JudgmentGroupState,
  onChoose: (sentence: string) => void,
): HTMLElement {
  container.textContent = "";
  const root = el("section", "judgment");
  container.appendChild(root);

  root.appendChild(
    el("p", "progress", `Group ${state.position} of ${state.total}`),
  );
  root.appendChild(
    el(
      "p",
      "instructions",
      "Imagine that each sentence is an excerpt from a story and pick the " +
        "one that makes you most want to read that story.",
    ),
  );

  const cards = el("div", "cards");
  state.sentences.forEach((sentence, idx) => {
    const card = el("button", "card", sentence) as HTMLButtonElement;
    card.dataset.idx = String(idx);
    card.addEventListener("click", () => {
      for (const other of Array.from(cards.children)) {
        other.classList.remove("selected");
      }
      card.classList.add("selected");
      confirm.disabled = false;
    });
    cards.appendChild(card);
  });
  root.appendChild(cards);

  const confirm = el("button", "confirm", "This one") as HTMLButtonElement;
  confirm.disabled = true;
  confirm.addEventListener("click", () => {
    const selected = cards.querySelector(".selected");
    if (selected?.textContent) {
      onChoose(selected.textContent);
    }
  });
  root.appendChild(confirm);
  return root;
}
