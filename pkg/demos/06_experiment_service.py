"""Drive the authoring + judgment service end to end, in process.

Two synthetic authors write Pre and Post sentences, raters judge the
resulting groups, and the analytics report runs over the export. All state
flows through the append-only event log; the demo finishes by rebuilding
the service from the log and checking the state fingerprint matches.

Run:  python3 demos/06_experiment_service.py
"""

import numpy as np

from storyfill.analytics import report
from storyfill.eventlog import EventLog
from storyfill.service import (
    STAGE_POST,
    STAGE_PRE,
    ExperimentService,
    PromptAsset,
    ServiceConfig,
)
from storyfill.simulate import hashed_bag_embedder

WORDS = [
    ("sailor", "lantern", "harbor"), ("baker", "basket", "market"),
    ("owl", "watched", "forest"), ("river", "boat", "drifted"),
    ("letter", "candle", "night"), ("meadow", "gentle", "wind"),
    ("bridge", "carried", "wagon"), ("teacher", "quiet", "garden"),
    ("farmer", "counted", "barrel"), ("merchant", "traded", "coat"),
]


def examples_for(words):
    a, b, c = words
    return tuple(
        f"Example {j} keeps {a} busy while {b} changes and {c} waits nearby."
        for j in range(5)
    )


pool = [
    PromptAsset(words=w, label="easy" if i % 2 == 0 else "hard",
                gen_examples=examples_for(w))
    for i, w in enumerate(WORDS)
]
service = ExperimentService(
    pool,
    ServiceConfig(seed=42, judgment_subset_size=40),
    lambda sentence, rng: "The evening settled in around them. Nothing stirred.",
    EventLog(None),
)


def author_sentence(words, flavor):
    a, b, c = words
    return f"{flavor} tale put {a} beside one {b} while {c} changed everything."


for author in ("ada", "brin"):
    descriptor = service.create_session(author)
    sid = descriptor["session_id"]
    print(f"author {author}: session {sid}, "
          f"labels {[p['label'] for p in descriptor['prompts']]}")
    for stage, flavors in ((STAGE_PRE, ("First", "Second")), (STAGE_POST, ("Third", "Fourth"))):
        for slot in descriptor["prompts"]:
            words = tuple(slot["words"])
            if stage == STAGE_POST:
                shown = service.get_examples(sid, slot["index"])
                assert len(shown) == 5  # visible only now
            out = service.submit_sentences(
                sid, slot["index"], stage,
                [author_sentence(words, f"{flavors[0]} {author}"),
                 author_sentence(words, f"{flavors[1]} {author}")],
            )
        print(f"  {stage} done; story feedback sample: {out['feedback'][0]['text'][:60]}...")

exported = service.export_blocks()
print(f"\n{len(exported['blocks'])} blocks exported, {len(exported['dropped'])} dropped")

for rater in ("r1", "r2"):
    task = service.create_judgment_task(rater)
    rng = np.random.default_rng(hash(rater) % 2**32)
    for group in task["groups"]:
        pick = group["sentences"][int(rng.integers(3))]
        service.submit_judgment(rater, group["group_id"], pick)
responses = service.export_responses()
print(f"{len(responses)} judgment responses collected")

rep = report(exported["blocks"], responses, hashed_bag_embedder(), n_resamples=2000, seed=0)
print("\n" + rep.render_text())

rebuilt = ExperimentService([], ServiceConfig(), lambda s, r: "",
                            EventLog.from_events(service.log.events()))
assert rebuilt.state_fingerprint() == service.state_fingerprint()
print(f"event-log replay: {len(service.log)} events reproduce the state exactly")
