// @vitest-environment jsdom
import { describe, expect, it, vi } from "vitest";

import { renderAuthoringView, showStoryFeedback } from "../src/authoring.js";

const PROMPT = ["sailor", "lantern", "harbor"];
const EXAMPLES = [
  "A sailor raised the lantern over the sleeping harbor at dusk.",
  "Every sailor trusts one lantern to find the harbor again.",
  "The sailor sold his lantern before the harbor froze over.",
  "One sailor painted a lantern mural along the harbor wall.",
  "No sailor forgets the lantern that saved the harbor fleet.",
];

function setInput(input: HTMLTextAreaElement, value: string): void {
  input.value = value;
  input.dispatchEvent(new Event("input"));
}

const VALID = [
  "The sailor carried a lantern across the foggy harbor tonight.",
  "Our sailor lifted that lantern high above the crowded harbor.",
];

describe("authoring view (A12)", () => {
  it("PRE stage DOM contains no example text", () => {
    const container = document.createElement("div");
    renderAuthoringView(
      container,
      { promptWords: PROMPT, stage: "PRE", examples: [], promptNumber: 1, promptTotal: 5 },
      () => {},
    );
    const html = container.innerHTML;
    for (const example of EXAMPLES) {
      expect(html).not.toContain(example);
    }
    expect(container.querySelector(".example-panel")).toBeNull();
  });

  it("POST stage lists exactly the five examples", () => {
    const container = document.createElement("div");
    renderAuthoringView(
      container,
      { promptWords: PROMPT, stage: "POST", examples: EXAMPLES, promptNumber: 2, promptTotal: 5 },
      () => {},
    );
    const items = container.querySelectorAll(".example-panel li");
    expect(items.length).toBe(5);
    expect(Array.from(items).map((li) => li.textContent)).toEqual(EXAMPLES);
  });

  it("enables submit only when both sentences pass client validation", () => {
    const container = document.createElement("div");
    const view = renderAuthoringView(
      container,
      { promptWords: PROMPT, stage: "PRE", examples: [], promptNumber: 1, promptTotal: 5 },
      () => {},
    );
    expect(view.submit.disabled).toBe(true);
    setInput(view.inputs[0], VALID[0]);
    expect(view.submit.disabled).toBe(true); // second sentence still empty
    setInput(view.inputs[1], "too short.");
    expect(view.submit.disabled).toBe(true);
    setInput(view.inputs[1], VALID[1]);
    expect(view.submit.disabled).toBe(false);
    // duplicating the first sentence re-disables
    setInput(view.inputs[1], VALID[0]);
    expect(view.submit.disabled).toBe(true);
  });

  it("submit passes trimmed sentences to the handler", () => {
    const container = document.createElement("div");
    const onSubmit = vi.fn();
    const view = renderAuthoringView(
      container,
      { promptWords: PROMPT, stage: "PRE", examples: [], promptNumber: 1, promptTotal: 5 },
      onSubmit,
    );
    setInput(view.inputs[0], `  ${VALID[0]}  `);
    setInput(view.inputs[1], VALID[1]);
    view.submit.click();
    expect(onSubmit).toHaveBeenCalledWith([VALID[0], VALID[1]]);
  });

  it("shows story feedback paragraphs", () => {
    const container = document.createElement("div");
    const view = renderAuthoringView(
      container,
      { promptWords: PROMPT, stage: "PRE", examples: [], promptNumber: 1, promptTotal: 5 },
      () => {},
    );
    showStoryFeedback(view.feedbackPanel, ["Story one grew longer.", "Story two ended."]);
    expect(view.feedbackPanel.querySelectorAll(".story").length).toBe(2);
  });

  it("POST stage flags sentences equal to an example", () => {
    const container = document.createElement("div");
    const view = renderAuthoringView(
      container,
      { promptWords: PROMPT, stage: "POST", examples: EXAMPLES, promptNumber: 1, promptTotal: 5 },
      () => {},
    );
    setInput(view.inputs[0], EXAMPLES[0]);
    setInput(view.inputs[1], VALID[1]);
    expect(view.submit.disabled).toBe(true);
    const badgeText = container.querySelectorAll(".badges")[0].textContent;
    expect(badgeText).toContain("different from the examples");
  });
});
