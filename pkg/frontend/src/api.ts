/** Thin JSON client for the experiment service endpoints. */

export interface PromptSlot {
  index: number;
  words: string[];
  label: string;
  submitted_stages: string[];
}

export interface SessionDescriptor {
  session_id: string;
  author_id: string;
  stage: "PRE" | "POST" | "DONE";
  prompts: PromptSlot[];
}

export interface StoryFeedback {
  text: string;
  k: number;
  word_count: number;
}

export interface SubmitResult {
  verdicts: string[][];
  feedback: StoryFeedback[];
  stage: string;
}

export interface JudgmentGroupView {
  group_id: string;
  sentences: string[];
  answered: boolean;
}

export interface JudgmentTask {
  rater_id: string;
  groups: JudgmentGroupView[];
}

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
    public verdicts?: string[][],
  ) {
    super(message);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(path, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    throw new ApiError(response.status, body.error ?? response.statusText, body.verdicts);
  }
  return body as T;
}

export function createSession(authorId: string): Promise<SessionDescriptor> {
  return request("/sessions", {
    method: "POST",
    body: JSON.stringify({ author_id: authorId }),
  });
}

export function getSession(sessionId: string): Promise<SessionDescriptor> {
  return request(`/sessions/${sessionId}/prompts`);
}

export function getExamples(sessionId: string, promptIndex: number): Promise<{ examples: string[] }> {
  return request(`/sessions/${sessionId}/prompts/${promptIndex}/examples`);
}

export function submitSentences(
  sessionId: string,
  promptIndex: number,
  stage: string,
  sentences: string[],
): Promise<SubmitResult> {
  return request(`/sessions/${sessionId}/prompts/${promptIndex}/sentences`, {
    method: "POST",
    body: JSON.stringify({ stage, sentences }),
  });
}

export function createJudgmentTask(raterId: string): Promise<JudgmentTask> {
  return request("/judgments/tasks", {
    method: "POST",
    body: JSON.stringify({ rater_id: raterId }),
  });
}

export function getJudgmentTask(raterId: string): Promise<JudgmentTask> {
  return request(`/judgments/tasks/${raterId}`);
}

export function submitJudgment(
  raterId: string,
  groupId: string,
  choice: string,
): Promise<{ recorded: boolean }> {
  return request(`/judgments/${groupId}`, {
    method: "POST",
    body: JSON.stringify({ rater_id: raterId, choice }),
  });
}
