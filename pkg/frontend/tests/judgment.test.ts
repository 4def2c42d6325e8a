// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import { renderJudgmentGroup } from "../src/judgment.js";

const SENTENCES = [
  "The sailor kept a lantern burning for the harbor watch.",
  "A lantern rolled off the pier while the sailor slept.",
  "Harbor children borrowed the sailor's lantern for their game.",
];

function render(container: HTMLElement, sentences: string[], onChoose = () => {}) {
  return renderJudgmentGroup(
    container,
    { groupId: "b0.g000", sentences, position: 1, total: 16 },
    onChoose,
  );
}

describe("judgment view (A12)", () => {
  it("renders sentences in the server-provided order", () => {
    const container = document.createElement("div");
    render(container, SENTENCES);
    const cards = Array.from(container.querySelectorAll(".card"));
    expect(cards.map((c) => c.textContent)).toEqual(SENTENCES);
  });

  it("never exposes provenance in markup or attributes", () => {
    const container = document.createElement("div");
    render(container, SENTENCES);
    const html = container.innerHTML;
    for (const marker of ["PRE", "POST", "GEN", "pre-", "post-", "gen-", "source"]) {
      // no data attributes, class names, or text reveal the source
      expect(html.includes(`data-${marker}`)).toBe(false);
      expect(html.includes(`class="${marker}`)).toBe(false);
    }
    expect(html).not.toMatch(/data-(source|origin|kind)=/);
    const cards = container.querySelectorAll(".card");
    cards.forEach((card) => {
      expect(Object.keys((card as HTMLElement).dataset)).toEqual(["idx"]);
    });
  });

  it("twenty renders with different server orders differ", () => {
    const seen = new Set<string>();
    for (let i = 0; i < 20; i += 1) {
      const order = [
        SENTENCES[i % 3],
        SENTENCES[(i + 1) % 3],
        SENTENCES[(i + 2) % 3],
      ];
      const container = document.createElement("div");
      render(container, order);
      seen.add(
        Array.from(container.querySelectorAll(".card"))
          .map((c) => c.textContent)
          .join("|"),
      );
    }
    expect(seen.size).toBeGreaterThanOrEqual(2);
  });

  it("single-select with confirmation", () => {
    const container = document.createElement("div");
    const onChoose = vi.fn();
    render(container, SENTENCES, onChoose);
    const cards = container.querySelectorAll<HTMLButtonElement>(".card");
    const confirm = container.querySelector<HTMLButtonElement>(".confirm")!;
    expect(confirm.disabled).toBe(true);
    cards[1].click();
    cards[2].click();
    expect(container.querySelectorAll(".card.selected").length).toBe(1);
    expect(confirm.disabled).toBe(false);
    confirm.click();
    expect(onChoose).toHaveBeenCalledWith(SENTENCES[2]);
  });
});
