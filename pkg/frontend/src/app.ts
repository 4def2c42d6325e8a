/**
 * Stage flow: walk the five prompts in the Pre stage, then the same five in
 * the Post stage with the example panel populated, then the judgment task.
 * The server is the source of truth for stage; refreshing re-fetches it.
 */

import * as api from "./api.js";
import { renderAuthoringView, showStoryFeedback } from "./authoring.js";
import { renderJudgmentGroup } from "./judgment.js";

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

function banner(container: HTMLElement, message: string, retry: () => void): void {
  container.textContent = "";
  const box = el("div", "banner error");
  box.appendChild(el("p", undefined, message));
  const button = el("button", undefined, "Retry");
  button.addEventListener("click", retry);
  box.appendChild(button);
  container.appendChild(box);
}

export class AuthoringFlow {
  constructor(
    private container: HTMLElement,
    private session: api.SessionDescriptor,
  ) {}

  async run(): Promise<void> {
    let session = this.session;
    while (session.stage !== "DONE") {
      const stage = session.stage as "PRE" | "POST";
      const pending = session.prompts.filter(
        (p) => !p.submitted_stages.includes(stage),
      );
      for (const slot of pending) {
        await this.runPrompt(session, slot, stage);
      }
      session = await api.getSession(session.session_id);
    }
    this.container.textContent = "";
    this.container.appendChild(
      el("h2", "done", "All prompts complete — thank you for writing!"),
    );
  }

  private async runPrompt(
    session: api.SessionDescriptor,
    slot: api.PromptSlot,
    stage: "PRE" | "POST",
  ): Promise<void> {
    let examples: string[] = [];
    if (stage === "POST") {
      examples = (await api.getExamples(session.session_id, slot.index)).examples;
    }
    await new Promise<void>((resolve) => {
      const view = renderAuthoringView(
        this.container,
        {
          promptWords: slot.words,
          stage,
          examples,
          promptNumber: slot.index + 1,
          promptTotal: session.prompts.length,
        },
        async (sentences) => {
          try {
            const result = await api.submitSentences(
              session.session_id,
              slot.index,
              stage,
              sentences,
            );
            showStoryFeedback(
              view.feedbackPanel,
              result.feedback.map((f) => f.text),
            );
            view.submit.textContent = "Continue";
            view.submit.onclick = () => resolve();
          } catch (err) {
            if (err instanceof api.ApiError) {
              banner(this.container, `Submission failed: ${err.message}`, () =>
                this.runPrompt(session, slot, stage).then(resolve),
              );
            } else {
              throw err;
            }
          }
        },
      );
    });
  }
}

export class JudgmentFlow {
  constructor(
    private container: HTMLElement,
    private task: api.JudgmentTask,
  ) {}

  async run(): Promise<void> {
    const pending = this.task.groups.filter((g) => !g.answered);
    for (let i = 0; i < pending.length; i += 1) {
      const group = pending[i];
      await new Promise<void>((resolve) => {
        renderJudgmentGroup(
          this.container,
          {
            groupId: group.group_id,
            sentences: group.sentences,
            position: i + 1,
            total: pending.length,
          },
          async (sentence) => {
            await api.submitJudgment(this.task.rater_id, group.group_id, sentence);
            resolve();
          },
        );
      });
    }
    this.container.textContent = "";
    this.container.appendChild(el("h2", "done", "All groups judged — thank you!"));
  }
}

export async function startApp(container: HTMLElement): Promise<void> {
  container.textContent = "";
  const chooser = el("div", "chooser");
  chooser.appendChild(el("h1", undefined, "Sentence studio"));
  const authorInput = el("input") as HTMLInputElement;
  authorInput.placeholder = "author id";
  const writeButton = el("button", undefined, "Start writing");
  const raterInput = el("input") as HTMLInputElement;
  raterInput.placeholder = "rater id";
  const judgeButton = el("button", undefined, "Start judging");
  chooser.append(authorInput, writeButton, raterInput, judgeButton);
  container.appendChild(chooser);

  writeButton.addEventListener("click", async () => {
    const session = await api.createSession(authorInput.value.trim());
    await new AuthoringFlow(container, session).run();
  });
  judgeButton.addEventListener("click", async () => {
    const raterId = raterInput.value.trim();
    let task: api.JudgmentTask;
    try {
      task = await api.createJudgmentTask(raterId);
    } catch {
      task = await api.getJudgmentTask(raterId);
    }
    await new JudgmentFlow(container, task).run();
  });
}
