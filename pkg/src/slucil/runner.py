"""Continual-learning experiment loop, resumable at task boundaries."""

from __future__ import annotations

import copy
import csv
import hashlib
import json
import logging
import math
import os
import statistics
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import grad as G
from .cil import RehearsalBuffer, TaskSchedule, build_schedule, update_buffer
from .data import Corpus, CorpusSpec, Vocabulary, build_vocabulary, generate_corpus, load_corpus
from .distill import (KdConfig, SoftTranscriptStore, TeacherSnapshot, batch_loss,
                      generate_soft_transcripts)
from .errors import ConfigError, NumericError, UsageError
from .metrics import METRICS, TaskMatrix, aggregate, fill_row, make_record
from .model import ModelConfig, Seq2SeqModel, load_checkpoint

log = logging.getLogger(__name__)

METHODS = ("offline", "fine-tuning", "rehearsal", "rehearsal+kd")
OUTPUT_ROOT_ENV = "SLUCIL_OUTPUT_ROOT"
DESK_EPOCHS = {1: [8], 3: [8, 5, 3], 6: [8, 5, 3, 3, 3, 3]}
PAPER_EPOCHS = {1: [40], 3: [40, 25, 15], 6: [40, 25, 15, 15, 15, 15]}


@dataclass
class ExperimentConfig:
    name: str = "run"
    method: str = "rehearsal"
    tasks: int = 3
    epochs: list[int] | None = None
    batch_size: int = 32
    budget: float = 0.01
    strategy: str = "random"
    kd: list[str] = field(default_factory=list)
    kd_weights: dict[str, float] = field(default_factory=dict)
    kd_reduction: str = "mean"
    lambda_rule: str = "sqrt"
    soft_beam: int = 4
    eval_beam: int = 4
    lr: float = 2e-3
    weight_decay: float = 0.1
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    grad_clip: float = 1.0
    composition: str = "uniform"
    rehearsal_per_batch: int = 4
    teacher_checkpoint: str = "best"
    full_sequence_wer: bool = False
    model: dict = field(default_factory=dict)
    corpus: dict | str = "default"
    seed: int = 0
    output_dir: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; choose from {METHODS}")
        if self.method == "offline":
            self.tasks = 1
        if self.epochs is None:
            table = DESK_EPOCHS
            if self.tasks not in table:
                raise ConfigError(f"no default epoch schedule for {self.tasks} tasks")
            self.epochs = list(table[self.tasks])
        self.epochs = [int(e) for e in self.epochs]
        if len(self.epochs) != self.tasks:
            raise ConfigError(f"{len(self.epochs)} epoch entries for {self.tasks} tasks")
        if any(e < 1 for e in self.epochs):
            raise ConfigError("every task needs at least one epoch")
        self.kd = sorted(set(self.kd))
        if self.kd and self.method != "rehearsal+kd":
            raise ConfigError("KD losses need method 'rehearsal+kd'")
        if self.method == "rehearsal+kd" and not self.kd:
            raise ConfigError("method 'rehearsal+kd' needs a non-empty kd list")
        if self.batch_size < 1:
            raise ConfigError("batch size must be positive")
        if self.composition not in ("uniform", "fixed"):
            raise ConfigError(f"unknown batch composition {self.composition!r}")
        if self.composition == "fixed" and not 0 < self.rehearsal_per_batch < self.batch_size:
            raise ConfigError("rehearsal_per_batch must lie strictly between 0 and batch_size")
        if self.teacher_checkpoint not in ("best", "last"):
            raise ConfigError("teacher_checkpoint must be 'best' or 'last'")
        KdConfig(frozenset(self.kd), self.soft_beam, self.lambda_rule, self.kd_weights,
                 self.kd_reduction)
        if self.uses_buffer:
            RehearsalBuffer.create(self.budget, self.strategy, 1)

    @property
    def uses_buffer(self) -> bool:
        return self.method in ("rehearsal", "rehearsal+kd")

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known - {"seeds"}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**{k: v for k, v in raw.items() if k in known})

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        cfg = cls.from_dict(raw)
        if isinstance(cfg.corpus, dict) and "path" in cfg.corpus:
            p = Path(cfg.corpus["path"])
            if not p.is_absolute():
                cfg.corpus = {**cfg.corpus, "path": str((Path(path).parent / p).resolve())}
        return cfg

    @classmethod
    def paper_preset(cls, tasks: int = 3, **overrides) -> "ExperimentConfig":
        base = dict(tasks=tasks, epochs=PAPER_EPOCHS[tasks], lr=5e-5, weight_decay=0.1,
                    soft_beam=20, eval_beam=20, batch_size=32)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)

    def hash(self) -> str:
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def with_seed(self, seed: int) -> "ExperimentConfig":
        c = copy.deepcopy(self)
        c.seed = seed
        return c


def output_root() -> Path:
    return Path(os.environ.get(OUTPUT_ROOT_ENV, "runs"))


def run_dir_for(cfg: ExperimentConfig) -> Path:
    rel = Path(cfg.output_dir) if cfg.output_dir else Path(f"{cfg.name}-s{cfg.seed}")
    return rel if rel.is_absolute() else output_root() / rel


# -- corpus / vocabulary -------------------------------------------------------------------

_CORPUS_CACHE: dict[str, Corpus] = {}


def load_or_generate_corpus(ref: dict | str) -> Corpus:
    if isinstance(ref, dict) and "path" in ref:
        key = "path:" + str(Path(ref["path"]).resolve())
        if key not in _CORPUS_CACHE:
            _CORPUS_CACHE[key] = load_corpus(ref["path"])
        return _CORPUS_CACHE[key]
    if ref in (None, "default"):
        spec = CorpusSpec.default()
    elif isinstance(ref, dict):
        ref = dict(ref)
        src = ref.pop("spec", "default")
        if isinstance(src, str) and src != "default":
            base = CorpusSpec.from_file(src).to_dict()
        elif isinstance(src, dict):
            base = src
        else:
            base = CorpusSpec.default().to_dict()
        spec = CorpusSpec.from_dict({**base, **ref})
    else:
        spec = CorpusSpec.from_file(ref)
    key = "spec:" + hashlib.sha256(json.dumps(spec.to_dict(), sort_keys=True).encode()).hexdigest()
    if key not in _CORPUS_CACHE:
        _CORPUS_CACHE[key] = generate_corpus(spec)
    return _CORPUS_CACHE[key]


def corpus_fingerprint(corpus: Corpus) -> str:
    return hashlib.sha256(json.dumps(corpus.spec.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def params_hash(model: Seq2SeqModel) -> str:
    h = hashlib.sha256()
    for k in sorted(model.params):
        h.update(k.encode())
        h.update(model.params[k].data.tobytes())
    return h.hexdigest()[:16]


# -- run state -----------------------------------------------------------------------------------

@dataclass
class RunState:
    next_task: int
    model: Seq2SeqModel
    teacher: TeacherSnapshot | None
    buffer: RehearsalBuffer | None
    store: SoftTranscriptStore | None
    rng: np.random.Generator
    matrices: dict[str, TaskMatrix]
    counters: dict[str, int] = field(default_factory=dict)
    history: list[dict] = field(default_factory=list)

    def save(self, path: Path, cfg_hash: str, vocab_hash: str) -> None:
        path.mkdir(parents=True, exist_ok=True)
        self.model.save(path / "model.npz", vocab_hash)
        if self.teacher is not None:
            self.teacher.model.save(path / "teacher.npz", vocab_hash,
                                    extra={"task_index": self.teacher.task_index})
        if self.store is not None:
            self.store.save(path / "soft_transcripts.jsonl")
        meta = {
            "config_hash": cfg_hash, "next_task": self.next_task,
            "rng": self.rng.bit_generator.state,
            "buffer": self.buffer.to_dict() if self.buffer else None,
            "matrices": {k: m.to_list() for k, m in self.matrices.items()},
            "counters": self.counters, "history": self.history,
            "has_teacher": self.teacher is not None, "has_store": self.store is not None,
        }
        tmp = path / "state.json.tmp"
        tmp.write_text(json.dumps(meta, sort_keys=True))
        tmp.replace(path / "state.json")

    @classmethod
    def load(cls, path: Path, vocab_hash: str) -> tuple["RunState", str]:
        meta = json.loads((path / "state.json").read_text())
        model = Seq2SeqModel.load(path / "model.npz", vocab_hash)
        teacher = None
        if meta["has_teacher"]:
            tmodel, tmeta = load_checkpoint(path / "teacher.npz", vocab_hash, trainable=False)
            teacher = TeacherSnapshot(tmodel, tmeta["extra"]["task_index"])
        store = SoftTranscriptStore.load(path / "soft_transcripts.jsonl") if meta["has_store"] else None
        rng = np.random.default_rng()
        rng.bit_generator.state = meta["rng"]
        buffer = RehearsalBuffer.from_dict(meta["buffer"]) if meta["buffer"] else None
        matrices = {k: TaskMatrix.from_list(v) for k, v in meta["matrices"].items()}
        state = cls(meta["next_task"], model, teacher, buffer, store, rng, matrices,
                    meta["counters"], meta["history"])
        return state, meta["config_hash"]


@dataclass
class RunResult:
    run_dir: Path
    summary: dict
    matrices: dict[str, TaskMatrix]
    counters: dict[str, int]
    history: list[dict]
    resumed_noop: bool = False


class Experiment:
    """Holds the static pieces of a run (corpus, vocabulary, schedule)."""

    def __init__(self, cfg: ExperimentConfig, corpus: Corpus | None = None):
        self.cfg = cfg
        self.corpus = corpus if corpus is not None else load_or_generate_corpus(cfg.corpus)
        self.vocab: Vocabulary = build_vocabulary(self.corpus)
        mcfg = dict(cfg.model)
        mcfg.setdefault("feat_dim", self.corpus.spec.feat_dim)
        mcfg.setdefault("max_frames", self.corpus.spec.max_frames)
        self.model_config = ModelConfig(vocab_size=len(self.vocab), **mcfg)
        self.schedule: TaskSchedule = build_schedule(self.corpus, cfg.tasks)
        self.scenario_task = {s: t.index for t in self.schedule.tasks for s in t.scenarios}
        self.targets = {u.id: self.vocab.encode_target(u) for u in self.corpus.utterances}
        self.features = {u.id: u.features for u in self.corpus.utterances}
        self.kd_cfg = KdConfig(frozenset(cfg.kd), cfg.soft_beam, cfg.lambda_rule,
                               cfg.kd_weights, cfg.kd_reduction)
        self.run_dir = run_dir_for(cfg)

    # -- state --------------------------------------------------------------------
    def fresh_state(self) -> RunState:
        cfg = self.cfg
        model = Seq2SeqModel(self.model_config, seed=cfg.seed)
        buffer = None
        if cfg.uses_buffer:
            buffer = RehearsalBuffer.create(cfg.budget, cfg.strategy,
                                            len(self.corpus.splits["train"]))
        matrices = {m: TaskMatrix(cfg.tasks) for m in METRICS}
        counters = {k: 0 for k in ("steps", "batches_without_rehearsal",
                                   "pure_ce_bit_equal", "kd_batches", "nonzero_teacher_delta")}
        return RunState(0, model, None, buffer, None, np.random.default_rng(cfg.seed),
                        matrices, counters, [])

    # -- training ---------------------------------------------------------------------
    def _batches(self, new_ids: list[int], rehe_ids: list[int], rng: np.random.Generator):
        cfg = self.cfg
        if cfg.composition == "uniform" or not rehe_ids:
            pool = np.array(sorted(new_ids) + sorted(rehe_ids))
            flags = np.array([False] * len(new_ids) + [True] * len(rehe_ids))
            order = rng.permutation(len(pool))
            for k in range(0, len(pool), cfg.batch_size):
                sel = order[k:k + cfg.batch_size]
                yield [int(i) for i in pool[sel]], flags[sel]
        else:
            k_r = cfg.rehearsal_per_batch
            k_n = cfg.batch_size - k_r
            new = np.array(sorted(new_ids))[rng.permutation(len(new_ids))]
            rehe = np.array(sorted(rehe_ids))
            cursor, perm = 0, rng.permutation(len(rehe))
            for k in range(0, len(new), k_n):
                take = []
                for _ in range(k_r):
                    if cursor == len(perm):
                        cursor, perm = 0, rng.permutation(len(rehe))
                    take.append(int(rehe[perm[cursor]]))
                    cursor += 1
                ids = [int(i) for i in new[k:k + k_n]] + take
                yield ids, np.array([False] * (len(ids) - len(take)) + [True] * len(take))

    def steps_per_epoch(self, t: int, state: RunState) -> int:
        n_new = len(self.schedule.tasks[t].train)
        n_rehe = len(state.buffer) if state.buffer is not None else 0
        if self.cfg.composition == "fixed" and n_rehe:
            return math.ceil(n_new / (self.cfg.batch_size - self.cfg.rehearsal_per_batch))
        return math.ceil((n_new + n_rehe) / self.cfg.batch_size)

    def train_task(self, t: int, state: RunState) -> dict:
        cfg = self.cfg
        task = self.schedule.tasks[t]
        model = state.model
        rehe_ids = state.buffer.ids() if state.buffer is not None and t > 0 else []
        teacher = state.teacher if cfg.kd else None
        teacher_before = teacher.model.state_dict() if teacher is not None else None
        params = model.parameters()
        opt = G.OptimizerState(cfg.lr, cfg.weight_decay, cfg.beta1, cfg.beta2, cfg.adam_eps).init(params)
        valid_ids = self.schedule.cumulative("valid", t)
        best_acc, best_state, best_epoch = -1.0, None, -1
        epoch_log = []
        for epoch in range(cfg.epochs[t]):
            losses = []
            for ids, flags in self._batches(task.train, rehe_ids, state.rng):
                with G.Tape():
                    step = batch_loss(model, [self.features[i] for i in ids],
                                      [self.targets[i] for i in ids], ids, flags, self.kd_cfg,
                                      teacher, state.store, state.rng)
                G.backward(step.total)
                G.clip_grad_norm(params, cfg.grad_clip)
                G.adamw_step(params, [p.grad for p in params], opt)
                model.zero_grad()
                state.counters["steps"] += 1
                if step.b_rehe == 0:
                    state.counters["batches_without_rehearsal"] += 1
                    if step.pure_ce and step.total.data.tobytes() == np.float64(step.ce).tobytes():
                        state.counters["pure_ce_bit_equal"] += 1
                elif step.kd:
                    state.counters["kd_batches"] += 1
                losses.append(float(step.total.data))
            acc = self.validation_accuracy(model, valid_ids)
            epoch_log.append({"epoch": epoch, "loss": float(np.mean(losses)), "valid_acc": acc})
            log.info("task %d epoch %d loss %.4f valid acc %.4f", t, epoch, np.mean(losses), acc)
            if acc >= best_acc:
                best_acc, best_state, best_epoch = acc, model.state_dict(), epoch
        if cfg.teacher_checkpoint == "best" and best_state is not None:
            model.load_state_dict(best_state)
        delta = 0.0
        if teacher is not None:
            after = teacher.model.state_dict()
            delta = float(sum(np.abs(after[k] - teacher_before[k]).sum() for k in after))
            if delta != 0.0:
                state.counters["nonzero_teacher_delta"] += 1
        return {"task": t, "epochs": epoch_log, "best_epoch": best_epoch, "best_valid_acc": best_acc,
                "teacher_delta": delta,
                "teacher_hash": params_hash(teacher.model) if teacher is not None else None,
                "selected_hash": params_hash(model)}

    # -- evaluation -----------------------------------------------------------------
    def validation_accuracy(self, model: Seq2SeqModel, ids: Sequence[int], chunk: int = 128) -> float:
        """Intent accuracy of the first greedy decoding step."""
        if not ids:
            return 0.0
        cfg = model.config
        correct = 0
        for k in range(0, len(ids), chunk):
            part = ids[k:k + chunk]
            enc, valid = model.encode_batch([self.features[i] for i in part])
            prefix = np.full((len(part), 1), cfg.bos_id, dtype=np.int64)
            logp = model.next_token_logprobs(enc.data, valid, prefix)
            logp[:, [cfg.pad_id, cfg.bos_id]] = -np.inf
            pred = logp.argmax(axis=1)
            gold = np.array([self.targets[i][1] for i in part])
            correct += int((pred == gold).sum())
        return correct / len(ids)

    def decode(self, model: Seq2SeqModel, ids: Sequence[int], beam: int,
               chunk: int = 64) -> dict[int, list[str]]:
        out = {}
        for k in range(0, len(ids), chunk):
            part = list(ids[k:k + chunk])
            hyps = model.beam_search_batch([self.features[i] for i in part], beam)
            for uid, h in zip(part, hyps):
                out[uid] = self.vocab.detokenize(h.tokens, join=False)
        return out

    def evaluate(self, model: Seq2SeqModel, ids: Sequence[int], beam: int | None = None):
        beam = beam or self.cfg.eval_beam
        preds = self.decode(model, ids, beam)
        return [make_record(self.corpus[i], preds[i], self.cfg.full_sequence_wer) for i in ids]

    # -- task boundary ---------------------------------------------------------------
    def finish_task(self, t: int, state: RunState, info: dict) -> None:
        cfg = self.cfg
        model = state.model
        if cfg.uses_buffer and t + 1 < cfg.tasks:
            state.teacher = TeacherSnapshot.capture(model, t) if cfg.kd else None
            embed = None
            if cfg.strategy == "herding":
                embed = lambda ids: self._pooled(model, ids)
            state.buffer = update_buffer(state.buffer, self.schedule, t, self.corpus, embed, cfg.seed)
            if "seq" in cfg.kd:
                state.store = generate_soft_transcripts(state.teacher, self.features,
                                                        state.buffer.ids(), cfg.soft_beam)
                state.buffer.stale.clear()
                info["soft_truncated"] = len(state.store.truncated)
            info["buffer_size"] = len(state.buffer)
        records = self.evaluate(model, self.schedule.cumulative("test", t))
        fill_row(state.matrices, t, records, self.scenario_task)
        info["eval"] = {m: float(state.matrices[m].grid[t, t]) for m in METRICS}
        log.info("task %d eval %s", t, info["eval"])

    def _pooled(self, model: Seq2SeqModel, ids: list[int], chunk: int = 128) -> np.ndarray:
        rows = [model.pooled_batch([self.features[i] for i in ids[k:k + chunk]]).data
                for k in range(0, len(ids), chunk)]
        return np.concatenate(rows, axis=0)

    # -- orchestration --------------------------------------------------------------
    def run(self, state: RunState | None = None, stop_after: int | None = None) -> RunResult:
        cfg = self.cfg
        state = state or self.fresh_state()
        run_dir = self.run_dir
        run_dir.mkdir(parents=True, exist_ok=True)
        (run_dir / "config.yaml").write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
        started = time.perf_counter()
        for t in range(state.next_task, cfg.tasks):
            try:
                info = self.train_task(t, state)
                self.finish_task(t, state, info)
            except NumericError:
                log.error("numeric failure in task %d; last task-boundary state kept in %s",
                          t, run_dir / "state")
                raise
            state.history.append(info)
            state.next_task = t + 1
            state.save(run_dir / "state", cfg.hash(), self.vocab.hash)
            if stop_after is not None and t >= stop_after and t + 1 < cfg.tasks:
                return RunResult(run_dir, {}, state.matrices, state.counters, state.history)
        (run_dir / "timing.json").write_text(json.dumps({"seconds": time.perf_counter() - started}))
        return self.emit(state)

    def emit(self, state: RunState) -> RunResult:
        cfg = self.cfg
        run_dir = self.run_dir
        for name, m in state.matrices.items():
            m.write_csv(run_dir / f"matrix_{name}.csv")
        chain_ok = all(h["teacher_hash"] is None or h["teacher_hash"] == state.history[i - 1]["selected_hash"]
                       for i, h in enumerate(state.history) if i > 0)
        summary = {"name": cfg.name, "method": cfg.method, "seed": cfg.seed,
                   "config_hash": cfg.hash(), "corpus_hash": corpus_fingerprint(self.corpus),
                   "tasks": cfg.tasks, "kd": cfg.kd,
                   "strategy": cfg.strategy if cfg.uses_buffer else None,
                   "budget": cfg.budget if cfg.uses_buffer else None,
                   **aggregate(state.matrices), "teacher_chain_ok": chain_ok,
                   "counters": state.counters}
        (run_dir / "summary.json").write_text(json.dumps(summary, sort_keys=True) + "\n")
        (run_dir / "history.json").write_text(json.dumps(state.history, indent=1, sort_keys=True))
        return RunResult(run_dir, summary, state.matrices, state.counters, state.history)


def run_experiment(cfg: ExperimentConfig, corpus: Corpus | None = None,
                   stop_after: int | None = None) -> RunResult:
    return Experiment(cfg, corpus).run(stop_after=stop_after)


def resume(run_dir: str | Path, cfg: ExperimentConfig | None = None,
           corpus: Corpus | None = None) -> RunResult:
    """Continue a run from its last saved task boundary."""
    run_dir = Path(run_dir)
    if cfg is None:
        cfg = ExperimentConfig.from_dict(yaml.safe_load((run_dir / "config.yaml").read_text()))
    if cfg.output_dir is None or run_dir_for(cfg).resolve() != run_dir.resolve():
        cfg = copy.deepcopy(cfg)
        cfg.output_dir = str(run_dir.resolve())
    exp = Experiment(cfg, corpus)
    state, saved_hash = RunState.load(run_dir / "state", exp.vocab.hash)
    if saved_hash != cfg.hash():
        raise UsageError(f"config hash {cfg.hash()} differs from the saved run ({saved_hash}); "
                         "refusing to resume")
    if state.next_task >= cfg.tasks:
        log.warning("run in %s is already complete; nothing to resume", run_dir)
        if not (run_dir / "summary.json").exists():
            return exp.emit(state)
        summary = json.loads((run_dir / "summary.json").read_text())
        return RunResult(run_dir, summary, state.matrices, state.counters, state.history, True)
    return exp.run(state)


# -- sweeps and reports ------------------------------------------------------------------

SUMMARY_KEYS = ("avg_acc", "last_acc", "avg_wer", "avg_slu_f1")


def comparison_table(summaries: Sequence[dict]) -> list[dict]:
    groups: dict[str, list[dict]] = {}
    for s in summaries:
        groups.setdefault(s["name"], []).append(s)
    rows = []
    for name, items in groups.items():
        row = {"name": name, "method": items[0]["method"], "seeds": len(items)}
        for k in SUMMARY_KEYS:
            vals = [float(i[k]) for i in items]
            row[f"{k}_mean"] = statistics.fmean(vals)
            row[f"{k}_std"] = statistics.stdev(vals) if len(vals) > 1 else 0.0
        rows.append(row)
    return rows


def write_table(rows: Sequence[dict], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0]))
        w.writeheader()
        w.writerows(rows)
    return path


def sweep(configs: Sequence[ExperimentConfig], seeds: Sequence[int] | None = None,
          out: str | Path | None = None) -> list[dict]:
    """Run every config (for every seed) and tabulate mean and stddev per method name."""
    if not configs:
        raise UsageError("sweep needs at least one config")
    signatures = set()
    for c in configs:
        exp = Experiment(c)
        signatures.add((corpus_fingerprint(exp.corpus),
                        json.dumps(exp.schedule.signature()) if c.method != "offline" else None))
    corpora = {s[0] for s in signatures}
    schedules = {s[1] for s in signatures if s[1] is not None}
    if len(corpora) > 1 or len(schedules) > 1:
        raise UsageError("sweep configs must share one corpus and one task schedule")
    summaries = []
    for c in configs:
        for seed in (seeds if seeds is not None else [c.seed]):
            run_cfg = c.with_seed(seed)
            run_cfg.output_dir = None
            summaries.append(run_experiment(run_cfg).summary)
    rows = comparison_table(summaries)
    if out is not None:
        write_table(rows, out)
    return rows


def report(run_dirs: Sequence[str | Path], out: str | Path | None = None) -> list[dict]:
    summaries = [json.loads((Path(d) / "summary.json").read_text()) for d in run_dirs]
    rows = comparison_table(summaries)
    if out is not None:
        write_table(rows, out)
    return rows
