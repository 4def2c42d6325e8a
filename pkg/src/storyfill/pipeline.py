"""Manifest-driven end-to-end orchestration.

Each step reads its inputs, writes its artifacts, and records a manifest
(input hashes, step config, output hashes, seed). `run_all` skips a step
when its manifest still matches, so deleting one artifact reruns only that
step and whatever downstream steps see changed inputs.
"""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path

import numpy as np

from . import corpus as corpus_mod
from .bpe import Vocabulary, train_vocab
from .checkpoint import load_checkpoint, save_checkpoint
from .generation import (
    DEFAULT_BLOCKLIST,
    GenerationBudgetExceeded,
    GenerationConstraints,
    generate_examples,
)
from .model import CAUSAL, MASKED, ModelConfig, TransformerLM
from .prompts import SelectionConfig, assign_labels, filter_prompts, score_pool, write_prompts, read_prompts
from .sampling import sample
from .service import PromptAsset
from .training import TrainConfig, train_infill_model, train_masked_model

STEP_ORDER = ["synth-data", "train-lm", "train-scorer", "select-prompts", "gen-examples"]


def default_config() -> dict:
    """Desk-scale defaults: every stage runs in minutes on a laptop CPU."""
    return {
        "corpus_dir": "corpus",
        "dataset": {
            "ratios": [0.8, 0.1, 0.1],
            "seed": 7,
            "pairs_per_sentence": {"train": 4, "valid": 1, "test": 30},
        },
        "vocab_size": 4096,
        "causal_model": {
            "mode": CAUSAL,
            "n_layers": 4,
            "n_heads": 4,
            "d_model": 128,
            "d_ff": 512,
            "max_seq_len": 128,
            "seed": 1,
        },
        "masked_model": {
            "mode": MASKED,
            "n_layers": 4,
            "n_heads": 4,
            "d_model": 128,
            "d_ff": 512,
            "max_seq_len": 128,
            "seed": 2,
        },
        # TrainConfig defaults follow the full-scale recipe; the desk corpus
        # wants a quicker optimizer and tighter validation cadence
        "causal_train": {
            "optimizer": "adam",
            "max_epochs": 12,
            "batch_size": 32,
            "grad_accum_steps": 1,
            "validate_every_n_steps": 100,
            "early_stop_patience": 6,
            "seed": 11,
        },
        "masked_train": {
            "optimizer": "adam",
            "max_epochs": 16,
            "batch_size": 32,
            "grad_accum_steps": 1,
            "validate_every_n_steps": 100,
            "early_stop_patience": 5,
            "seed": 12,
        },
        "selection": {"min_word_frequency": 5, "decile_fraction": 0.10},
        "generation": {
            "nucleus_p": 0.7,
            "n_outputs": 5,
            "max_attempts": 500,
            "prompts_per_label": 60,
            "seed": 13,
        },
        "service": {
            "port": 8000,
            "judgment_subset_size": 55,
            "raters_per_group": 2,
            "seed": 14,
            "feedback_max_new_tokens": 90,
        },
        "analysis": {"n_resamples": 10000, "seed": 15, "embedder": "stub"},
    }


def load_config(path: str | Path | None, overrides: list[str] | None = None) -> dict:
    """Defaults, overlaid by the config file, overlaid by --set key=value."""
    config = default_config()
    if path is not None:
        loaded = json.loads(Path(path).read_text())
        _deep_update(config, loaded)
    for item in overrides or []:
        if "=" not in item:
            raise ValueError(f"override {item!r} is not of the form dotted.key=value")
        key, raw = item.split("=", 1)
        node = config
        parts = key.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        node[parts[-1]] = value
    return config


def _deep_update(base: dict, extra: dict) -> None:
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(base.get(key), dict):
            _deep_update(base[key], value)
        else:
            base[key] = value


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _config_hash(step_config: dict) -> str:
    return hashlib.sha256(json.dumps(step_config, sort_keys=True).encode()).hexdigest()


class StepFailure(RuntimeError):
    def __init__(self, step: str, message: str):
        self.step = step
        super().__init__(f"step {step}: {message}")


class Pipeline:
    def __init__(self, config: dict, workdir: str | Path):
        self.config = config
        self.workdir = Path(workdir)
        self.workdir.mkdir(parents=True, exist_ok=True)
        (self.workdir / "manifests").mkdir(exist_ok=True)

    # -- paths -------------------------------------------------------------

    def path(self, name: str) -> Path:
        return self.workdir / name

    def _manifest_path(self, step: str) -> Path:
        return self.workdir / "manifests" / f"{step}.json"

    # -- manifest bookkeeping ----------------------------------------------

    def _write_manifest(self, step: str, inputs: list[Path], outputs: list[Path], step_config: dict) -> None:
        manifest = {
            "step": step,
            "completed_at": time.time(),
            "config_hash": _config_hash(step_config),
            "config": step_config,
            "inputs": {str(p.relative_to(self.workdir) if p.is_relative_to(self.workdir) else p): _sha256(p) for p in inputs},
            "outputs": {str(p.relative_to(self.workdir)): _sha256(p) for p in outputs},
        }
        self._manifest_path(step).write_text(json.dumps(manifest, indent=2, sort_keys=True))

    def _is_fresh(self, step: str, inputs: list[Path], step_config: dict) -> bool:
        mpath = self._manifest_path(step)
        if not mpath.exists():
            return False
        manifest = json.loads(mpath.read_text())
        if manifest.get("config_hash") != _config_hash(step_config):
            return False
        recorded_inputs = manifest.get("inputs", {})
        current = {
            str(p.relative_to(self.workdir) if p.is_relative_to(self.workdir) else p): _sha256(p)
            for p in inputs
            if p.exists()
        }
        if len(current) != len(inputs) or recorded_inputs != current:
            return False
        for rel, digest in manifest.get("outputs", {}).items():
            out = self.workdir / rel
            if not out.exists() or _sha256(out) != digest:
                return False
        return True

    # -- steps ---------------------------------------------------------------

    def synth_data(self, force: bool = False) -> bool:
        """Corpus -> dataset splits, corpus stats, subword vocabulary."""
        step = "synth-data"
        corpus_dir = Path(self.config["corpus_dir"])
        if not corpus_dir.is_absolute():
            corpus_dir = self.workdir / corpus_dir
        if not corpus_dir.exists():
            raise StepFailure(step, f"corpus directory {corpus_dir} does not exist")
        docs = corpus_mod.read_corpus_dir(corpus_dir)
        inputs = sorted(corpus_dir.glob("*.txt"))
        step_config = {
            "dataset": self.config["dataset"],
            "vocab_size": self.config["vocab_size"],
        }
        if not force and self._is_fresh(step, inputs, step_config):
            return False
        sentences = list(corpus_mod.segment_corpus(docs))
        if not sentences:
            raise StepFailure(step, "no usable sentences in corpus")
        ds_cfg = self.config["dataset"]
        ppspec = ds_cfg["pairs_per_sentence"]
        splits = corpus_mod.build_dataset(
            sentences,
            ratios=tuple(ds_cfg["ratios"]),
            seed=ds_cfg["seed"],
            pairs_per_sentence=ppspec,
        )
        dataset_dir = self.path("dataset")
        corpus_mod.write_dataset(splits, dataset_dir)
        # statistics and vocabulary come from training material only
        train_sentence_ids = {p.target.id for p in splits.train}
        train_sentences = [s for s in sentences if s.id in train_sentence_ids]
        stats = corpus_mod.CorpusStats.from_sentences(train_sentences)
        stats.save(self.path("corpus_stats.json"))
        vocab = train_vocab([s.text for s in train_sentences], self.config["vocab_size"])
        vocab.save(self.path("vocab.txt"))
        outputs = [
            dataset_dir / "train.jsonl",
            dataset_dir / "valid.jsonl",
            dataset_dir / "test.jsonl",
            dataset_dir / "manifest.json",
            self.path("corpus_stats.json"),
            self.path("vocab.txt"),
        ]
        self._write_manifest(step, inputs, outputs, step_config)
        return True

    def _load_vocab(self) -> Vocabulary:
        return Vocabulary.load(self.path("vocab.txt"))

    def train_lm(self, force: bool = False) -> bool:
        """Causal infilling model on the train/valid splits."""
        step = "train-lm"
        inputs = [
            self.path("dataset/train.jsonl"),
            self.path("dataset/valid.jsonl"),
            self.path("vocab.txt"),
        ]
        self._require(step, inputs)
        step_config = {
            "model": self.config["causal_model"],
            "train": self.config["causal_train"],
        }
        if not force and self._is_fresh(step, inputs, step_config):
            return False
        vocab = self._load_vocab()
        splits = corpus_mod.read_dataset(self.path("dataset"))
        model_config = ModelConfig(vocab_size=len(vocab), **self.config["causal_model"])
        train_config = TrainConfig(**self.config["causal_train"])
        started = time.monotonic()
        result = train_infill_model(vocab, splits.train, splits.valid, model_config, train_config)
        save_checkpoint(result.checkpoint, self.path("causal.ckpt"))
        summary = {
            "initial_perplexity": result.initial_perplexity,
            "best_valid_perplexity": result.checkpoint.best_valid_perplexity,
            "steps": result.checkpoint.step,
            "duration_seconds": time.monotonic() - started,
            "history": result.history,
        }
        self.path("causal_training.json").write_text(json.dumps(summary, indent=2))
        self._write_manifest(
            step, inputs, [self.path("causal.ckpt"), self.path("causal_training.json")], step_config
        )
        return True

    def train_scorer(self, force: bool = False) -> bool:
        """Masked difficulty model on the training sentences."""
        step = "train-scorer"
        inputs = [
            self.path("dataset/train.jsonl"),
            self.path("dataset/valid.jsonl"),
            self.path("vocab.txt"),
        ]
        self._require(step, inputs)
        step_config = {
            "model": self.config["masked_model"],
            "train": self.config["masked_train"],
        }
        if not force and self._is_fresh(step, inputs, step_config):
            return False
        vocab = self._load_vocab()
        splits = corpus_mod.read_dataset(self.path("dataset"))
        train_sentences = sorted({p.target.text for p in splits.train})
        valid_sentences = sorted({p.target.text for p in splits.valid})
        model_config = ModelConfig(vocab_size=len(vocab), **self.config["masked_model"])
        train_config = TrainConfig(**self.config["masked_train"])
        result = train_masked_model(
            vocab, train_sentences, valid_sentences, model_config, train_config
        )
        save_checkpoint(result.checkpoint, self.path("masked.ckpt"))
        self._write_manifest(step, inputs, [self.path("masked.ckpt")], step_config)
        return True

    def select_prompts(self, force: bool = False) -> bool:
        """Filter 3-word test prompts, score them, label deciles."""
        step = "select-prompts"
        inputs = [
            self.path("dataset/test.jsonl"),
            self.path("corpus_stats.json"),
            self.path("masked.ckpt"),
            self.path("vocab.txt"),
        ]
        self._require(step, inputs)
        step_config = {"selection": self.config["selection"]}
        if not force and self._is_fresh(step, inputs, step_config):
            return False
        vocab = self._load_vocab()
        splits = corpus_mod.read_dataset(self.path("dataset"))
        stats = corpus_mod.CorpusStats.load(self.path("corpus_stats.json"))
        sel = self.config["selection"]
        sel_config = SelectionConfig(
            min_word_frequency=sel["min_word_frequency"],
            decile_fraction=sel["decile_fraction"],
        )
        pool = filter_prompts(splits.test, stats, sel_config)
        if not pool:
            raise StepFailure(step, "prompt filter battery produced an empty pool")
        masked_model = load_checkpoint(self.path("masked.ckpt")).to_model(vocab)
        scored = score_pool(pool, masked_model)
        labeled = assign_labels(scored, sel_config.decile_fraction)
        write_prompts(labeled, self.path("prompts.jsonl"))
        self._write_manifest(step, inputs, [self.path("prompts.jsonl")], step_config)
        return True

    def gen_examples(self, force: bool = False) -> bool:
        """Five filtered example sentences per labeled prompt."""
        step = "gen-examples"
        inputs = [self.path("prompts.jsonl"), self.path("causal.ckpt"), self.path("vocab.txt")]
        self._require(step, inputs)
        step_config = {"generation": self.config["generation"]}
        if not force and self._is_fresh(step, inputs, step_config):
            return False
        vocab = self._load_vocab()
        model = load_checkpoint(self.path("causal.ckpt")).to_model(vocab)
        gen_cfg = self.config["generation"]
        constraints = GenerationConstraints(
            nucleus_p=gen_cfg["nucleus_p"],
            n_outputs=gen_cfg["n_outputs"],
            max_attempts=gen_cfg["max_attempts"],
        )
        labeled = read_prompts(self.path("prompts.jsonl"))
        per_label = gen_cfg["prompts_per_label"]
        chosen = [c for c in labeled if c.label == "easy"][:per_label]
        chosen += [c for c in labeled if c.label == "hard"][:per_label]
        n_ok = 0
        with self.path("examples.jsonl").open("w", encoding="utf-8") as fh:
            for i, cand in enumerate(chosen):
                rng = np.random.default_rng((gen_cfg["seed"], i))
                record: dict = {"prompt": list(cand.words), "label": cand.label}
                try:
                    outcome = generate_examples(cand.words, model, constraints, rng)
                    record.update(
                        sentences=outcome.sentences,
                        attempts=outcome.attempts,
                        rejection_histogram=outcome.rejection_histogram,
                    )
                    n_ok += 1
                except GenerationBudgetExceeded as exc:
                    record.update(
                        error="budget_exceeded",
                        partial=exc.accepted,
                        attempts=exc.attempts,
                        rejection_histogram=exc.rejection_histogram,
                    )
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        if n_ok == 0:
            raise StepFailure(step, "no prompt yielded the required example count")
        self._write_manifest(step, inputs, [self.path("examples.jsonl")], step_config)
        return True

    def _require(self, step: str, inputs: list[Path]) -> None:
        missing = [str(p) for p in inputs if not p.exists()]
        if missing:
            raise StepFailure(step, f"missing inputs: {missing} (run earlier steps first)")

    def run_all(self, force: bool = False) -> dict[str, bool]:
        """Execute every pipeline step in order; True means the step ran."""
        ran: dict[str, bool] = {}
        ran["synth-data"] = self.synth_data(force)
        ran["train-lm"] = self.train_lm(force)
        ran["train-scorer"] = self.train_scorer(force)
        ran["select-prompts"] = self.select_prompts(force)
        ran["gen-examples"] = self.gen_examples(force)
        return ran

    # -- assets for the service ---------------------------------------------

    def load_prompt_assets(self) -> list[PromptAsset]:
        assets: list[PromptAsset] = []
        with self.path("examples.jsonl").open(encoding="utf-8") as fh:
            for line in fh:
                rec = json.loads(line)
                if "sentences" in rec and len(rec["sentences"]) >= 5:
                    assets.append(
                        PromptAsset(
                            words=tuple(rec["prompt"]),
                            label=rec["label"],
                            gen_examples=tuple(rec["sentences"][:5]),
                        )
                    )
        return assets

    def make_continuation_fn(self):
        """Story-feedback continuation from the causal checkpoint.

        The infilling model writes one sentence per call, so the story grows
        by chaining: each new sentence is conditioned on content words drawn
        from the previous one.
        """
        from .generation import prompt_prefix_ids, sentence_words
        from .lexicon import is_content_word

        vocab = self._load_vocab()
        model = load_checkpoint(self.path("causal.ckpt")).to_model(vocab)
        nucleus_p = self.config["generation"]["nucleus_p"]

        def next_sentence(previous: str, rng: np.random.Generator) -> str:
            content = [w for w in sentence_words(previous) if is_content_word(w)]
            if not content:
                return ""
            k = min(3, len(content))
            picks = sorted(rng.choice(len(content), size=k, replace=False))
            words = [content[i] for i in picks]
            ids = sample(
                model,
                prompt_prefix_ids(model, words),
                nucleus_p=nucleus_p,
                rng=rng,
                max_new_tokens=75,
            )
            return vocab.decode_plain(ids).strip()

        def continue_story(seed_sentence: str, rng: np.random.Generator) -> str:
            parts: list[str] = []
            previous = seed_sentence
            for _ in range(3):
                nxt = next_sentence(previous, rng)
                if not nxt:
                    break
                parts.append(nxt)
                previous = nxt
            return " ".join(parts)

        return continue_story


__all__ = ["Pipeline", "StepFailure", "default_config", "load_config", "STEP_ORDER"]
