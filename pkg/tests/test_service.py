import json

import numpy as np
import pytest

from storyfill.analytics import GEN, POST, PRE
from storyfill.eventlog import EventLog
from storyfill.service import (
    DUPLICATE,
    MATCHES_EXAMPLE,
    STAGE_DONE,
    STAGE_POST,
    STAGE_PRE,
    ConflictError,
    ExamplesHiddenError,
    ExperimentService,
    NotFoundError,
    PromptAsset,
    PromptPoolExhaustedError,
    ServiceConfig,
    ValidationFailedError,
    WrongStageError,
    assemble_feedback,
    validate_sentences,
)

PROMPTS = [
    ("walking", "and", "seeing"),
    ("nose", "pushed", "see"),
    ("he", "town", "rain"),
    ("quiet", "sailor", "harbor"),
    ("lantern", "bridge", "carried"),
    ("baker", "market", "basket"),
    ("meadow", "gentle", "wind"),
    ("letter", "candle", "night"),
    ("forest", "owl", "watched"),
    ("river", "boat", "drifted"),
]


def gen_examples_for(words):
    a, b, c = words
    return (
        f"Soon {a} heard that {b} another story would {c} begin quietly.",
        f"One {a} traveler kept {b} ideas while {c} plans changed again.",
        f"Maybe {a} songs about {b} evenings could {c} linger here longer.",
        f"Their {a} journey toward {b} mountains would {c} finally conclude.",
        f"Every {a} morning brought {b} messages that {c} nobody expected.",
    )


def make_pool(n=10, easy_first=True):
    assets = []
    for i, words in enumerate(PROMPTS[:n]):
        label = "easy" if (i % 2 == 0) == easy_first else "hard"
        assets.append(PromptAsset(words=words, label=label,
                                  gen_examples=gen_examples_for(words)))
    return assets


def stub_continuation(seed_sentence, rng):
    return "The story kept going for a while. Then it ended quietly."


def make_service(tmp_path=None, n=10, **config_kw):
    log = EventLog(tmp_path / "events.jsonl") if tmp_path else EventLog(None)
    cfg = ServiceConfig(seed=7, judgment_subset_size=16, **config_kw)
    return ExperimentService(make_pool(n), cfg, stub_continuation, log)


def sentences_for(words, variant):
    a, b, c = words
    options = [
        (f"The {a} path crossed {b} fields while {c} clouds gathered slowly.",
         f"Nobody expected {a} news since {b} rumors about {c} travel faded."),
        (f"Another {a} dream about {b} rivers made {c} evenings feel longer.",
         f"Whenever {a} bells rang, {b} children imagined {c} adventures ahead."),
    ]
    return list(options[variant])


def finish_session(service, session_id):
    descriptor = service.session_descriptor(session_id)
    for stage in (STAGE_PRE, STAGE_POST):
        for slot in descriptor["prompts"]:
            words = tuple(slot["words"])
            service.submit_sentences(session_id, slot["index"], stage,
                                     sentences_for(words, 0 if stage == STAGE_PRE else 1))
    return service.session_descriptor(session_id)


# ---------------------------------------------------------------- sessions


def test_create_session_descriptor_hides_examples(tmp_path):
    service = make_service(tmp_path)
    desc = service.create_session("author-1")
    assert desc["stage"] == STAGE_PRE
    assert len(desc["prompts"]) == 5
    body = json.dumps(desc)
    for asset in service.pool:
        for example in asset.gen_examples:
            assert example not in body


def test_one_session_per_author(tmp_path):
    service = make_service(tmp_path)
    service.create_session("author-1")
    with pytest.raises(ConflictError):
        service.create_session("author-1")


def test_difficulty_split_alternates(tmp_path):
    service = make_service(tmp_path, n=10)
    d1 = service.create_session("a1")
    counts1 = [p["label"] for p in d1["prompts"]].count("easy")
    assert counts1 == 3
    d2 = service.create_session("a2")
    counts2 = [p["label"] for p in d2["prompts"]].count("easy")
    assert counts2 == 2


def test_pool_exhaustion(tmp_path):
    service = make_service(tmp_path, n=10)
    service.create_session("a1")
    service.create_session("a2")
    with pytest.raises(PromptPoolExhaustedError):
        service.create_session("a3")


def test_unknown_session_404(tmp_path):
    service = make_service(tmp_path)
    with pytest.raises(NotFoundError):
        service.session_descriptor("nope")


def test_twenty_three_sessions_give_115_blocks_in_progress():
    # experiment-scale smoke: 23 authors x 5 prompts
    assets = []
    for i in range(120):
        words = (f"alpha{i}", f"beta{i}", f"gamma{i}")
        assets.append(PromptAsset(words=words, label="easy" if i < 60 else "hard",
                                  gen_examples=gen_examples_for(words)))
    service = ExperimentService(assets, ServiceConfig(seed=1), stub_continuation,
                                EventLog(None))
    for a in range(23):
        service.create_session(f"author-{a}")
    slots = sum(len(s.slots) for s in service.sessions.values())
    assert slots == 115
    # prompts never repeat across sessions
    seen = [slot.asset.key() for s in service.sessions.values() for slot in s.slots]
    assert len(seen) == len(set(seen))


# ---------------------------------------------------------------- validation


def test_validate_accepts_published_pre_sentence():
    verdicts = validate_sentences(
        ("walking", "and", "seeing"),
        [
            "The little children enjoyed walking through the zoo and seeing all the different animals.",
            "The boy's favorite activity was walking to the marina and seeing all of the boats in the water.",
        ],
        STAGE_PRE,
    )
    assert verdicts == [[], []]


def test_validate_flags_duplicate():
    s = "The little children enjoyed walking through the zoo and seeing all the animals."
    verdicts = validate_sentences(("walking", "and", "seeing"), [s, "  " + s + "  "], STAGE_PRE)
    assert verdicts[0] == []
    assert DUPLICATE in verdicts[1]


def test_validate_flags_example_match():
    examples = list(gen_examples_for(("walking", "and", "seeing")))
    verdicts = validate_sentences(
        ("walking", "and", "seeing"),
        [examples[0], "The children kept walking home and seeing bright kites overhead."],
        STAGE_POST,
        shown_examples=examples,
    )
    assert MATCHES_EXAMPLE in verdicts[0]
    assert verdicts[1] == []
    # Pre stage does not compare against examples
    pre_verdicts = validate_sentences(
        ("walking", "and", "seeing"), [examples[0], examples[1]], STAGE_PRE,
        shown_examples=examples,
    )
    assert MATCHES_EXAMPLE not in pre_verdicts[0]


def test_submit_rejects_invalid_sentences(tmp_path):
    service = make_service(tmp_path)
    desc = service.create_session("author-1")
    words = tuple(desc["prompts"][0]["words"])
    log_len = len(service.log)
    with pytest.raises(ValidationFailedError) as err:
        service.submit_sentences(desc["session_id"], 0, STAGE_PRE,
                                 ["too short.", "also way too short."])
    assert any("TOO_SHORT" in codes for codes in err.value.verdicts)
    # invalid data never reaches the event log
    assert len(service.log) == log_len


# ---------------------------------------------------------------- stages


def test_stage_machine_and_examples_gating(tmp_path):
    service = make_service(tmp_path)
    desc = service.create_session("author-1")
    sid = desc["session_id"]
    with pytest.raises(ExamplesHiddenError):
        service.get_examples(sid, 0)
    with pytest.raises(WrongStageError):
        service.submit_sentences(sid, 0, STAGE_POST, sentences_for(tuple(desc["prompts"][0]["words"]), 1))
    for slot in desc["prompts"]:
        words = tuple(slot["words"])
        out = service.submit_sentences(sid, slot["index"], STAGE_PRE, sentences_for(words, 0))
        assert out["verdicts"] == [[], []]
    assert service.session_descriptor(sid)["stage"] == STAGE_POST
    # examples now visible and stable
    ex1 = service.get_examples(sid, 0)
    ex2 = service.get_examples(sid, 0)
    assert ex1 == ex2 and len(ex1) == 5
    # a stale PRE submission after the stage advanced is a stage error
    with pytest.raises(WrongStageError):
        service.submit_sentences(sid, 0, STAGE_PRE, sentences_for(tuple(desc["prompts"][0]["words"]), 0))
    for k, slot in enumerate(desc["prompts"]):
        words = tuple(slot["words"])
        service.submit_sentences(sid, slot["index"], STAGE_POST, sentences_for(words, 1))
        if k == 0:
            # double submission of the same stage for one prompt conflicts
            with pytest.raises(ConflictError):
                service.submit_sentences(sid, 0, STAGE_POST, sentences_for(words, 1))
    assert service.session_descriptor(sid)["stage"] == STAGE_DONE
    with pytest.raises(WrongStageError):
        service.submit_sentences(sid, 0, STAGE_POST, sentences_for(tuple(desc["prompts"][0]["words"]), 1))


def test_feedback_contract(tmp_path):
    service = make_service(tmp_path)
    desc = service.create_session("author-1")
    words = tuple(desc["prompts"][0]["words"])
    sentences = sentences_for(words, 0)
    out = service.submit_sentences(desc["session_id"], 0, STAGE_PRE, sentences)
    assert len(out["feedback"]) == 2
    for sentence, fb in zip(sentences, out["feedback"]):
        assert fb["text"].startswith(sentence.strip())
        assert fb["word_count"] <= 75
        assert fb["k"] >= 0


def test_assemble_feedback_truncates_to_complete_sentences():
    seed = "He walked to town."
    continuation = ("The road was long and wet that evening. "
                    "A dog followed him for a mile. And then came an unfinished")
    fb = assemble_feedback(seed, continuation, max_words=75)
    assert fb["text"].startswith(seed)
    assert fb["k"] == 2
    assert "unfinished" not in fb["text"]
    tight = assemble_feedback(seed, continuation, max_words=12)
    assert tight["k"] == 1  # only the first full sentence fits
    assert tight["word_count"] <= 12


# ---------------------------------------------------------------- export


def test_export_blocks_and_multi_sentence_filter(tmp_path):
    service = make_service(tmp_path)
    desc = service.create_session("author-1")
    sid = desc["session_id"]
    # one Pre submission hides a two-sentence response
    sneaky = "He left. She stayed here alone forever after the long war."
    for stage in (STAGE_PRE, STAGE_POST):
        for slot in desc["prompts"]:
            words = tuple(slot["words"])
            pair = sentences_for(words, 0 if stage == STAGE_PRE else 1)
            if stage == STAGE_PRE and slot["index"] == 2:
                a, b, c = words
                pair[0] = f"He left {a} alone. She kept {b} plans and {c} maps forever."
            service.submit_sentences(sid, slot["index"], stage, pair)
    exported = service.export_blocks()
    assert len(exported["blocks"]) == 4
    assert len(exported["dropped"]) == 1
    assert exported["dropped"][0]["block_id"].endswith(":p2")
    # idempotent
    again = service.export_blocks()
    assert [b.block_id for b in again["blocks"]] == [b.block_id for b in exported["blocks"]]
    assert exported["blocks"][0].difficulty in ("easy", "hard")


# ---------------------------------------------------------------- judgments


def judgment_ready_service(tmp_path, n_authors=2):
    service = make_service(tmp_path)
    for i in range(n_authors):
        desc = service.create_session(f"author-{i}")
        finish_session(service, desc["session_id"])
    return service


def test_judgment_flow(tmp_path):
    service = judgment_ready_service(tmp_path)
    task = service.create_judgment_task("rater-1")
    assert task["groups"]
    first = task["groups"][0]
    assert len(first["sentences"]) == 3
    ack = service.submit_judgment("rater-1", first["group_id"], first["sentences"][1])
    assert ack["recorded"]
    with pytest.raises(ConflictError):
        service.submit_judgment("rater-1", first["group_id"], first["sentences"][0])
    from storyfill.service import ServiceError

    with pytest.raises(ServiceError):
        service.submit_judgment("rater-1", task["groups"][1]["group_id"],
                                "sentence that is not in the group at all")
    responses = service.export_responses()
    assert len(responses) == 1
    assert responses[0].preferred in (PRE, POST, GEN)


def test_judgment_choice_by_index(tmp_path):
    service = judgment_ready_service(tmp_path)
    task = service.create_judgment_task("rater-1")
    g = task["groups"][0]
    service.submit_judgment("rater-1", g["group_id"], 2)
    resp = service.export_responses()[0]
    group = service.groups[g["group_id"]]
    order = service.rater_orders["rater-1"][g["group_id"]]
    assert group.sentences[order[2]] == g["sentences"][2]
    assert resp.preferred == order[2]


def test_judgment_requires_completed_blocks(tmp_path):
    service = make_service(tmp_path)
    service.create_session("author-1")  # not finished
    with pytest.raises(Exception):
        service.create_judgment_task("rater-1")


def test_two_raters_per_subset_then_next_subset(tmp_path):
    service = judgment_ready_service(tmp_path)
    t1 = service.create_judgment_task("r1")
    t2 = service.create_judgment_task("r2")
    t3 = service.create_judgment_task("r3")
    assert [g["group_id"] for g in t1["groups"]] == [g["group_id"] for g in t2["groups"]]
    assert [g["group_id"] for g in t3["groups"]] != [g["group_id"] for g in t1["groups"]]


def test_judgment_orders_vary_across_raters(tmp_path):
    # 20 renders of one group produce at least 2 distinct orderings
    service = judgment_ready_service(tmp_path)
    task = service.create_judgment_task("r1")
    gid = task["groups"][0]["group_id"]
    group = service.groups[gid]
    orders = {group.presentation_order(f"rater-{i}") for i in range(20)}
    assert len(orders) >= 2


# ---------------------------------------------------------------- replay


def test_event_log_replay_equivalence(tmp_path):
    service = judgment_ready_service(tmp_path)
    task = service.create_judgment_task("r1")
    g = task["groups"][0]
    service.submit_judgment("r1", g["group_id"], g["sentences"][0])
    service.log.close()

    replayed = ExperimentService(
        make_pool(), ServiceConfig(seed=7, judgment_subset_size=16),
        stub_continuation, EventLog(tmp_path / "events.jsonl"),
    )
    assert replayed.state_fingerprint() == service.state_fingerprint()
    assert replayed.session_descriptor("s0000") == service.session_descriptor("s0000")
    assert len(replayed.export_responses()) == 1


def test_fuzzed_sequences_quick():
    # 50 randomized operation sequences; the full 1,000-sequence run is in
    # the acceptance suite
    from fuzz_service import run_fuzz_sequence

    for seed in range(50):
        result = run_fuzz_sequence(seed)
        assert result["leaks"] == [], f"seed {seed} leaked examples"
        assert result["replay_equal"], f"seed {seed} replay mismatch"


def test_stage_never_moves_backward(tmp_path):
    service = make_service(tmp_path)
    desc = service.create_session("a1")
    sid = desc["session_id"]
    stages_seen = [service.sessions[sid].stage]
    for slot in desc["prompts"]:
        service.submit_sentences(sid, slot["index"], STAGE_PRE,
                                 sentences_for(tuple(slot["words"]), 0))
        stages_seen.append(service.sessions[sid].stage)
    order = {STAGE_PRE: 0, STAGE_POST: 1, STAGE_DONE: 2}
    assert all(order[a] <= order[b] for a, b in zip(stages_seen, stages_seen[1:]))


# ---------------------------------------------------------------- HTTP API


def test_http_api_round_trip(tmp_path):
    from fastapi.testclient import TestClient

    from storyfill.api import create_app

    service = make_service(tmp_path)
    client = TestClient(create_app(service))

    r = client.post("/sessions", json={"author_id": "web-author"})
    assert r.status_code == 200
    desc = r.json()
    sid = desc["session_id"]

    r = client.get(f"/sessions/{sid}/prompts")
    assert r.status_code == 200
    assert r.json()["stage"] == STAGE_PRE

    # examples are hidden with an authorization-style error in PRE
    r = client.get(f"/sessions/{sid}/prompts/0/examples")
    assert r.status_code == 403

    words = tuple(desc["prompts"][0]["words"])
    r = client.post(f"/sessions/{sid}/prompts/0/sentences",
                    json={"stage": "PRE", "sentences": ["bad.", "also bad."]})
    assert r.status_code == 422
    assert "verdicts" in r.json()

    for slot in desc["prompts"]:
        words = tuple(slot["words"])
        r = client.post(f"/sessions/{sid}/prompts/{slot['index']}/sentences",
                        json={"stage": "PRE", "sentences": sentences_for(words, 0)})
        assert r.status_code == 200
        assert r.json()["feedback"][0]["text"]

    r = client.get(f"/sessions/{sid}/prompts/0/examples")
    assert r.status_code == 200
    assert len(r.json()["examples"]) == 5

    for slot in desc["prompts"]:
        words = tuple(slot["words"])
        client.post(f"/sessions/{sid}/prompts/{slot['index']}/sentences",
                    json={"stage": "POST", "sentences": sentences_for(words, 1)})

    r = client.get("/export/blocks")
    assert r.status_code == 200
    assert len(r.json()["blocks"]) == 5

    r = client.post("/judgments/tasks", json={"rater_id": "web-rater"})
    assert r.status_code == 200
    task = r.json()
    gid = task["groups"][0]["group_id"]
    r = client.post(f"/judgments/{gid}",
                    json={"rater_id": "web-rater", "choice": task["groups"][0]["sentences"][0]})
    assert r.status_code == 200
    r = client.get("/export/responses")
    assert len(r.json()["responses"]) == 1
    # unknown session -> 404
    assert client.get("/sessions/zzz/prompts").status_code == 404
