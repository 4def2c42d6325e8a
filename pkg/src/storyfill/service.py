"""Experiment service: authoring sessions, judgments, export.

Every author gets five prompts (near-balanced easy/hard, alternating 3/2 and
2/3 across sessions) and writes two sentences per prompt in the Pre stage,
then two more in the Post stage with the five generated examples visible.
Judgment raters see (Pre, Post, Gen) triples in a per-rater random order and
pick the most storiable sentence.

All mutations append to the event log and are applied by `_apply`, so
replaying the log from empty state reconstructs the service exactly. Model
inference (story feedback text) happens before the event is written and its
result is stored in the event payload, keeping replay free of model calls.
"""

from __future__ import annotations

import hashlib
import threading
import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .analytics import (
    GEN,
    POST,
    PRE,
    SOURCES,
    AuthoringBlock,
    JudgmentGroup,
    JudgmentResponse,
    build_judgment_groups,
    normalize_sentence,
)
from .corpus import split_sentences
from .eventlog import EventLog
from .generation import (
    NO_TERMINAL_PUNCT,
    PROMPT_ORDER,
    TOO_LONG,
    TOO_SHORT,
    contains_in_order,
    sentence_words,
)

DUPLICATE = "DUPLICATE"
MATCHES_EXAMPLE = "MATCHES_EXAMPLE"

STAGE_PRE, STAGE_POST, STAGE_DONE = "PRE", "POST", "DONE"

ContinuationFn = Callable[[str, np.random.Generator], str]


class ServiceError(Exception):
    status_code = 400


class NotFoundError(ServiceError):
    status_code = 404


class WrongStageError(ServiceError):
    status_code = 409


class ConflictError(ServiceError):
    status_code = 409


class ExamplesHiddenError(ServiceError):
    """Examples are not visible before the Post stage."""

    status_code = 403


class PromptPoolExhaustedError(ServiceError):
    status_code = 409


class ValidationFailedError(ServiceError):
    status_code = 422

    def __init__(self, message: str, verdicts: list[list[str]]):
        super().__init__(message)
        self.verdicts = verdicts


@dataclass(frozen=True)
class PromptAsset:
    """A labeled prompt with its precomputed generated examples."""

    words: tuple[str, ...]
    label: str
    gen_examples: tuple[str, ...]

    def key(self) -> str:
        return " ".join(self.words)


@dataclass
class ServiceConfig:
    prompts_per_session: int = 5
    min_words: int = 7
    max_words: int = 50
    feedback_max_words: int = 75
    judgment_subset_size: int = 55
    raters_per_group: int = 2
    seed: int = 0


@dataclass
class PromptSlot:
    asset: PromptAsset
    submissions: dict[str, list[str]] = field(default_factory=dict)  # stage -> sentences
    feedback: dict[str, list[dict]] = field(default_factory=dict)


@dataclass
class Session:
    session_id: str
    author_id: str
    stage: str
    slots: list[PromptSlot]


def validate_sentences(
    prompt_words,
    sentences: list[str],
    stage: str,
    shown_examples: list[str] | None = None,
    min_words: int = 7,
    max_words: int = 50,
) -> list[list[str]]:
    """Per-sentence reason codes; empty lists mean both sentences pass.

    Checks prompt-word order, the 7-50 word bounds, terminal punctuation,
    pairwise distinctness, and (Post stage) difference from every shown
    example. Comparison uses whitespace-normalized exact matching.
    """
    verdicts: list[list[str]] = []
    normalized_prior: list[str] = []
    shown = {normalize_sentence(e) for e in (shown_examples or [])}
    for sentence in sentences:
        codes: list[str] = []
        stripped = sentence.strip()
        words = sentence_words(stripped)
        if not contains_in_order(stripped, prompt_words):
            codes.append(PROMPT_ORDER)
        if len(words) < min_words:
            codes.append(TOO_SHORT)
        if len(words) > max_words:
            codes.append(TOO_LONG)
        if not stripped or stripped[-1].isalnum():
            codes.append(NO_TERMINAL_PUNCT)
        norm = normalize_sentence(stripped)
        if norm in normalized_prior:
            codes.append(DUPLICATE)
        if stage == STAGE_POST and norm in shown:
            codes.append(MATCHES_EXAMPLE)
        normalized_prior.append(norm)
        verdicts.append(codes)
    return verdicts


def assemble_feedback(
    seed_sentence: str, continuation: str, max_words: int = 75
) -> dict:
    """Seed sentence plus the complete generated sentences that fit.

    Only whole sentences are shown and the total stays within `max_words`
    words; `k` records how many generated sentences made the cut.
    """
    seed = seed_sentence.strip()
    used = len(sentence_words(seed))
    shown: list[str] = []
    for sent in split_sentences(continuation):
        if not sent or sent[-1].isalnum():
            continue  # incomplete trailing fragment
        cost = len(sentence_words(sent))
        if used + cost > max_words:
            break
        shown.append(sent)
        used += cost
    text = seed if not shown else seed + " " + " ".join(shown)
    return {"text": text, "k": len(shown), "word_count": used}


class ExperimentService:
    """In-process core; the HTTP layer in `api` is a thin adapter."""

    def __init__(
        self,
        prompt_pool: list[PromptAsset],
        config: ServiceConfig | None = None,
        continuation_fn: ContinuationFn | None = None,
        log: EventLog | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self.config = config or ServiceConfig()
        self.pool = list(prompt_pool)
        self.continuation_fn = continuation_fn or (lambda seed, rng: "")
        self.log = log if log is not None else EventLog(None, clock=clock)
        self.clock = clock
        self._lock = threading.Lock()
        self._rng = np.random.default_rng(self.config.seed)

        # ---- state (rebuilt verbatim by replay) ----
        self.sessions: dict[str, Session] = {}
        self.author_session: dict[str, str] = {}
        self.used_prompt_keys: set[str] = set()
        self.session_counter = 0
        self.groups: dict[str, JudgmentGroup] | None = None
        self.group_order: list[str] = []
        self.rater_tasks: dict[str, list[str]] = {}
        self.rater_orders: dict[str, dict[str, tuple[str, ...]]] = {}
        self.subset_raters: dict[int, list[str]] = {}
        self.responses: list[JudgmentResponse] = []
        self._responded: set[tuple[str, str]] = set()

        for event in self.log:
            self._apply(event)

    # ------------------------------------------------------------------
    # event application (pure state transition, no validation, no models)
    # ------------------------------------------------------------------

    def _apply(self, event: dict) -> None:
        payload = event["payload"]
        etype = event["type"]
        if etype == "session_created":
            slots = [
                PromptSlot(
                    asset=PromptAsset(
                        words=tuple(p["words"]),
                        label=p["label"],
                        gen_examples=tuple(p["gen_examples"]),
                    )
                )
                for p in payload["prompts"]
            ]
            session = Session(
                session_id=payload["session_id"],
                author_id=payload["author_id"],
                stage=STAGE_PRE,
                slots=slots,
            )
            self.sessions[session.session_id] = session
            self.author_session[session.author_id] = session.session_id
            for slot in slots:
                self.used_prompt_keys.add(slot.asset.key())
            self.session_counter += 1
        elif etype == "sentences_submitted":
            session = self.sessions[payload["session_id"]]
            slot = session.slots[payload["prompt_index"]]
            slot.submissions[payload["stage"]] = list(payload["sentences"])
            slot.feedback[payload["stage"]] = list(payload["feedback"])
            self._advance_stage(session)
        elif etype == "judgment_phase_opened":
            blocks = self.export_blocks()["blocks"]
            groups = build_judgment_groups(blocks, seed=payload["group_seed"])
            self.groups = {g.group_id: g for g in groups}
            self.group_order = [g.group_id for g in groups]
            if payload.get("group_ids") and payload["group_ids"] != self.group_order:
                raise RuntimeError("replayed judgment groups diverge from the log")
        elif etype == "judgment_task_created":
            rater = payload["rater_id"]
            self.rater_tasks[rater] = list(payload["group_ids"])
            self.rater_orders[rater] = {
                gid: tuple(order) for gid, order in payload["orders"].items()
            }
            self.subset_raters.setdefault(payload["subset_index"], []).append(rater)
        elif etype == "judgment_submitted":
            response = JudgmentResponse(
                group_id=payload["group_id"],
                rater_id=payload["rater_id"],
                preferred=payload["preferred"],
                timestamp=event["ts"],
            )
            self.responses.append(response)
            self._responded.add((payload["rater_id"], payload["group_id"]))
        else:
            raise RuntimeError(f"unknown event type {etype!r}")

    def _advance_stage(self, session: Session) -> None:
        def complete(stage: str) -> bool:
            return all(stage in slot.submissions for slot in session.slots)

        if session.stage == STAGE_PRE and complete(STAGE_PRE):
            session.stage = STAGE_POST
        if session.stage == STAGE_POST and complete(STAGE_POST):
            session.stage = STAGE_DONE

    # ------------------------------------------------------------------
    # authoring operations
    # ------------------------------------------------------------------

    def create_session(self, author_id: str) -> dict:
        with self._lock:
            if not author_id or not author_id.strip():
                raise ServiceError("author_id must be non-empty")
            if author_id in self.author_session:
                raise ConflictError(f"author {author_id!r} already has a session")
            per_session = self.config.prompts_per_session
            # alternate the easy/hard split 3/2, 2/3 across sessions
            n_easy = (per_session + 1) // 2 if self.session_counter % 2 == 0 else per_session // 2
            available = [p for p in self.pool if p.key() not in self.used_prompt_keys]
            easy = [p for p in available if p.label == "easy"]
            hard = [p for p in available if p.label == "hard"]
            if len(easy) < n_easy or len(hard) < per_session - n_easy:
                raise PromptPoolExhaustedError(
                    f"prompt pool exhausted: {len(easy)} easy / {len(hard)} hard left, "
                    f"need {n_easy}/{per_session - n_easy}"
                )
            chosen = [easy[i] for i in self._rng.choice(len(easy), n_easy, replace=False)]
            chosen += [
                hard[i]
                for i in self._rng.choice(len(hard), per_session - n_easy, replace=False)
            ]
            order = self._rng.permutation(len(chosen))
            chosen = [chosen[i] for i in order]
            session_id = f"s{self.session_counter:04d}"
            event = self.log.append(
                "session_created",
                {
                    "session_id": session_id,
                    "author_id": author_id,
                    "prompts": [
                        {
                            "words": list(p.words),
                            "label": p.label,
                            "gen_examples": list(p.gen_examples),
                        }
                        for p in chosen
                    ],
                },
            )
            self._apply(event)
            return self.session_descriptor(session_id)

    def session_descriptor(self, session_id: str) -> dict:
        """Public view of a session; never includes gen examples."""
        session = self._session(session_id)
        return {
            "session_id": session.session_id,
            "author_id": session.author_id,
            "stage": session.stage,
            "prompts": [
                {
                    "index": i,
                    "words": list(slot.asset.words),
                    "label": slot.asset.label,
                    "submitted_stages": sorted(slot.submissions),
                }
                for i, slot in enumerate(session.slots)
            ],
        }

    def _session(self, session_id: str) -> Session:
        if session_id not in self.sessions:
            raise NotFoundError(f"no session {session_id!r}")
        return self.sessions[session_id]

    def get_examples(self, session_id: str, prompt_index: int) -> list[str]:
        session = self._session(session_id)
        slot = self._slot(session, prompt_index)
        if session.stage == STAGE_PRE:
            raise ExamplesHiddenError("examples are hidden until the Post stage")
        return list(slot.asset.gen_examples)

    def _slot(self, session: Session, prompt_index: int) -> PromptSlot:
        if not 0 <= prompt_index < len(session.slots):
            raise NotFoundError(f"no prompt index {prompt_index}")
        return session.slots[prompt_index]

    def submit_sentences(
        self, session_id: str, prompt_index: int, stage: str, sentences: list[str]
    ) -> dict:
        with self._lock:
            session = self._session(session_id)
            slot = self._slot(session, prompt_index)
            if stage not in (STAGE_PRE, STAGE_POST):
                raise ServiceError(f"stage must be PRE or POST, got {stage!r}")
            if session.stage == STAGE_DONE:
                raise WrongStageError("session is complete")
            if stage != session.stage:
                raise WrongStageError(
                    f"session is in stage {session.stage}, cannot submit {stage}"
                )
            if stage in slot.submissions:
                raise ConflictError(f"prompt {prompt_index} already has a {stage} submission")
            if len(sentences) != 2:
                raise ServiceError("exactly two sentences are required")
            shown = (
                list(slot.asset.gen_examples) if stage == STAGE_POST else None
            )
            verdicts = validate_sentences(
                slot.asset.words,
                sentences,
                stage,
                shown,
                self.config.min_words,
                self.config.max_words,
            )
            if any(verdicts):
                raise ValidationFailedError("sentence validation failed", verdicts)

            # model call happens outside event application; the resulting
            # text is frozen into the event payload
            feedback = []
            for k, sentence in enumerate(sentences):
                rng = self._feedback_rng(session_id, prompt_index, stage, k)
                continuation = self.continuation_fn(sentence.strip(), rng)
                feedback.append(
                    assemble_feedback(sentence, continuation, self.config.feedback_max_words)
                )
            event = self.log.append(
                "sentences_submitted",
                {
                    "session_id": session_id,
                    "prompt_index": prompt_index,
                    "stage": stage,
                    "sentences": [s.strip() for s in sentences],
                    "feedback": feedback,
                },
            )
            self._apply(event)
            return {
                "verdicts": verdicts,
                "feedback": feedback,
                "stage": session.stage,
            }

    def _feedback_rng(
        self, session_id: str, prompt_index: int, stage: str, k: int
    ) -> np.random.Generator:
        key = f"{self.config.seed}:{session_id}:{prompt_index}:{stage}:{k}"
        digest = hashlib.sha256(key.encode()).digest()
        return np.random.default_rng(int.from_bytes(digest[:8], "little"))

    # ------------------------------------------------------------------
    # export
    # ------------------------------------------------------------------

    def export_blocks(self) -> dict:
        """Blocks from DONE sessions, minus multi-sentence violations.

        Idempotent and pure: derived entirely from current state.
        """
        blocks: list[AuthoringBlock] = []
        dropped: list[dict] = []
        for session_id in sorted(self.sessions):
            session = self.sessions[session_id]
            if session.stage != STAGE_DONE:
                continue
            for i, slot in enumerate(session.slots):
                block = AuthoringBlock(
                    block_id=f"{session_id}:p{i}",
                    prompt_words=slot.asset.words,
                    difficulty=slot.asset.label,
                    author_id=session.author_id,
                    pre_sentences=tuple(slot.submissions[STAGE_PRE]),
                    post_sentences=tuple(slot.submissions[STAGE_POST]),
                    gen_examples=tuple(slot.asset.gen_examples),
                )
                violating = [
                    s
                    for s in block.pre_sentences + block.post_sentences
                    if len(split_sentences(s)) > 1
                ]
                if violating:
                    dropped.append(
                        {"block_id": block.block_id, "multi_sentence": violating}
                    )
                else:
                    blocks.append(block)
        return {"blocks": blocks, "dropped": dropped}

    def export_responses(self) -> list[JudgmentResponse]:
        return list(self.responses)

    # ------------------------------------------------------------------
    # judgment operations
    # ------------------------------------------------------------------

    def _ensure_groups(self) -> None:
        if self.groups is not None:
            return
        exported = self.export_blocks()
        if not exported["blocks"]:
            raise ServiceError("no completed blocks; judgment phase cannot open")
        group_seed = self.config.seed
        groups = build_judgment_groups(exported["blocks"], seed=group_seed)
        event = self.log.append(
            "judgment_phase_opened",
            {"group_seed": group_seed, "group_ids": [g.group_id for g in groups]},
        )
        self._apply(event)

    def create_judgment_task(self, rater_id: str) -> dict:
        """Assign the rater a subset of groups with per-group random order."""
        with self._lock:
            if not rater_id or not rater_id.strip():
                raise ServiceError("rater_id must be non-empty")
            if rater_id in self.rater_tasks:
                raise ConflictError(f"rater {rater_id!r} already has a task")
            self._ensure_groups()
            size = self.config.judgment_subset_size
            n_subsets = max(1, (len(self.group_order) + size - 1) // size)
            subset_index = None
            for idx in range(n_subsets):
                if len(self.subset_raters.get(idx, [])) < self.config.raters_per_group:
                    subset_index = idx
                    break
            if subset_index is None:
                raise ConflictError("all judgment subsets already have enough raters")
            group_ids = self.group_order[subset_index * size : (subset_index + 1) * size]
            orders = {
                gid: list(self.groups[gid].presentation_order(rater_id))
                for gid in group_ids
            }
            event = self.log.append(
                "judgment_task_created",
                {
                    "rater_id": rater_id,
                    "subset_index": subset_index,
                    "group_ids": group_ids,
                    "orders": orders,
                },
            )
            self._apply(event)
            return self.judgment_task_view(rater_id)

    def judgment_task_view(self, rater_id: str) -> dict:
        """Sentences in presentation order; provenance never leaves the server."""
        if rater_id not in self.rater_tasks:
            raise NotFoundError(f"no task for rater {rater_id!r}")
        items = []
        for gid in self.rater_tasks[rater_id]:
            group = self.groups[gid]
            order = self.rater_orders[rater_id][gid]
            items.append(
                {
                    "group_id": gid,
                    "sentences": [group.sentences[src] for src in order],
                    "answered": (rater_id, gid) in self._responded,
                }
            )
        return {"rater_id": rater_id, "groups": items}

    def submit_judgment(self, rater_id: str, group_id: str, choice: str | int) -> dict:
        """`choice` is the chosen sentence text or its displayed index."""
        with self._lock:
            if rater_id not in self.rater_tasks:
                raise NotFoundError(f"no task for rater {rater_id!r}")
            if group_id not in self.rater_tasks[rater_id]:
                raise NotFoundError(f"group {group_id} not in rater's task")
            if (rater_id, group_id) in self._responded:
                raise ConflictError(f"rater already judged group {group_id}")
            group = self.groups[group_id]
            order = self.rater_orders[rater_id][group_id]
            source = None
            if isinstance(choice, int):
                if not 0 <= choice < len(order):
                    raise ServiceError(f"choice index {choice} out of range")
                source = order[choice]
            else:
                norm = normalize_sentence(str(choice))
                for src in SOURCES:
                    if normalize_sentence(group.sentences[src]) == norm:
                        source = src
                        break
                if source is None:
                    raise ServiceError("choice does not match any sentence in the group")
            event = self.log.append(
                "judgment_submitted",
                {"rater_id": rater_id, "group_id": group_id, "preferred": source},
            )
            self._apply(event)
            return {"group_id": group_id, "recorded": True}

    # ------------------------------------------------------------------

    def state_fingerprint(self) -> str:
        """Hash of the externally observable state, for replay-equivalence tests."""
        import json as _json

        view = {
            "sessions": {
                sid: self.session_descriptor(sid) for sid in sorted(self.sessions)
            },
            "submissions": {
                sid: [
                    {st: slot.submissions.get(st) for st in (STAGE_PRE, STAGE_POST)}
                    for slot in self.sessions[sid].slots
                ]
                for sid in sorted(self.sessions)
            },
            "groups": self.group_order,
            "tasks": {r: ids for r, ids in sorted(self.rater_tasks.items())},
            "orders": {
                r: {g: list(o) for g, o in sorted(m.items())}
                for r, m in sorted(self.rater_orders.items())
            },
            "responses": [
                [r.rater_id, r.group_id, r.preferred] for r in self.responses
            ],
            "blocks": [b.to_record() for b in self.export_blocks()["blocks"]],
        }
        raw = _json.dumps(view, sort_keys=True).encode()
        return hashlib.sha256(raw).hexdigest()


__all__ = [
    "DUPLICATE",
    "MATCHES_EXAMPLE",
    "STAGE_PRE",
    "STAGE_POST",
    "STAGE_DONE",
    "PromptAsset",
    "ServiceConfig",
    "ExperimentService",
    "ServiceError",
    "NotFoundError",
    "WrongStageError",
    "ConflictError",
    "ExamplesHiddenError",
    "PromptPoolExhaustedError",
    "ValidationFailedError",
    "validate_sentences",
    "assemble_feedback",
]
