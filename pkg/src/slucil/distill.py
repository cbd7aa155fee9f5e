"""Training objectives: rehearsal cross-entropy, audio/token/sequence KD and their mix.

Every loss takes ``reduction``: ``"sum"`` gives the plain summed objective,
``"mean"`` (default) divides by the number of scored units (target tokens for
sequence losses, utterances for audio-KD) so the terms share one scale.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import grad as G
from .errors import ConfigError, IntegrityError, NumericError, UsageError
from .grad import Tensor
from .model import Seq2SeqModel, pad_tokens

KD_KINDS = ("audio", "token", "seq")
REDUCTIONS = ("mean", "sum")


@dataclass
class TeacherSnapshot:
    model: Seq2SeqModel
    task_index: int

    @classmethod
    def capture(cls, model: Seq2SeqModel, task_index: int) -> "TeacherSnapshot":
        return cls(model.frozen_copy(), task_index)

    def fingerprint(self) -> float:
        return float(sum(np.abs(p.data).sum() for p in self.model.parameters()))


@dataclass
class KdConfig:
    enabled: frozenset[str] = frozenset()
    beam_width: int = 4
    lambda_rule: str = "sqrt"
    weights: dict[str, float] = field(default_factory=dict)
    reduction: str = "mean"

    def __post_init__(self):
        self.enabled = frozenset(self.enabled)
        bad = self.enabled - set(KD_KINDS)
        if bad:
            raise ConfigError(f"unknown KD kinds {sorted(bad)}")
        if self.lambda_rule not in ("sqrt", "fraction"):
            raise ConfigError(f"unknown lambda rule {self.lambda_rule!r}")
        if self.reduction not in REDUCTIONS:
            raise ConfigError(f"unknown reduction {self.reduction!r}")
        if self.beam_width < 1:
            raise ConfigError("beam width must be >= 1")


@dataclass(frozen=True)
class BatchComposition:
    b_all: int
    b_rehe: int

    def __post_init__(self):
        if self.b_all < 1 or not 0 <= self.b_rehe <= self.b_all:
            raise ConfigError(f"invalid batch composition {self.b_rehe}/{self.b_all}")


def lambda_kd(comp: BatchComposition, rule: str = "sqrt") -> float:
    frac = comp.b_rehe / comp.b_all
    return math.sqrt(frac) if rule == "sqrt" else frac


# -- soft transcripts -------------------------------------------------------------

@dataclass
class SoftTranscriptStore:
    transcripts: dict[int, tuple[int, ...]]
    task_index: int
    beam_width: int
    truncated: set[int] = field(default_factory=set)

    def __contains__(self, uid: int) -> bool:
        return uid in self.transcripts

    def __len__(self) -> int:
        return len(self.transcripts)

    def get(self, uid: int) -> tuple[int, ...]:
        try:
            return self.transcripts[uid]
        except KeyError:
            raise IntegrityError(f"no soft transcript for exemplar {uid}") from None

    def save(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            for uid in sorted(self.transcripts):
                fh.write(json.dumps({"id": uid, "tokens": list(self.transcripts[uid]),
                                     "teacher_task": self.task_index,
                                     "beam_width": self.beam_width,
                                     "truncated": uid in self.truncated}) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "SoftTranscriptStore":
        trans, trunc, task, beam = {}, set(), -1, 0
        with open(path) as fh:
            for line in fh:
                r = json.loads(line)
                trans[r["id"]] = tuple(r["tokens"])
                task, beam = r["teacher_task"], r["beam_width"]
                if r["truncated"]:
                    trunc.add(r["id"])
        return cls(trans, task, beam, trunc)


def generate_soft_transcripts(teacher: TeacherSnapshot, features: Mapping[int, np.ndarray],
                              ids: Sequence[int], beam_width: int,
                              batch_size: int = 32) -> SoftTranscriptStore:
    """Beam-decode every exemplar with the frozen teacher.

    Hypotheses that hit the length limit without EOS get EOS appended and are
    listed in ``truncated``.
    """
    model = teacher.model
    cfg = model.config
    ids = sorted(ids)
    out, trunc = {}, set()
    limit = max(1, cfg.max_target - 1)
    for k in range(0, len(ids), batch_size):
        chunk = ids[k:k + batch_size]
        hyps = model.beam_search_batch([features[i] for i in chunk], beam_width, limit)
        for uid, h in zip(chunk, hyps):
            toks = tuple(h.tokens)
            if toks[-1] != cfg.eos_id:
                toks = toks + (cfg.eos_id,)
                trunc.add(uid)
            out[uid] = toks
    return SoftTranscriptStore(out, teacher.task_index, beam_width, trunc)


# -- losses on precomputed outputs -------------------------------------------------

def _reduce(total: Tensor, count: int, reduction: str) -> Tensor:
    if reduction == "sum":
        return total
    return total * (1.0 / max(count, 1))


def nll_from_logits(logits: Tensor, tokens: np.ndarray, pad_id: int = 0,
                    reduction: str = "mean") -> Tensor:
    """Negative log-likelihood of ``tokens[:, 1:]`` under ``logits[:, :-1]``; PAD ignored."""
    labels = tokens[:, 1:]
    mask = labels != pad_id
    logp = G.log_softmax(logits[:, :-1])
    picked = G.take_along_last(logp, labels)
    return _reduce(-(picked * mask).sum(), int(mask.sum()), reduction)


def token_kd_from_logits(student_logits: Tensor, teacher_logits: np.ndarray, tokens: np.ndarray,
                         pad_id: int = 0, reduction: str = "mean") -> Tensor:
    """``-sum_j sum_v p_teacher(v) log p_student(v)`` on ground-truth prefixes."""
    mask = (tokens[:, 1:] != pad_id)
    t = teacher_logits[:, :-1]
    z = t - t.max(axis=-1, keepdims=True)
    p_t = np.exp(z)
    p_t /= p_t.sum(axis=-1, keepdims=True)
    weights = p_t * mask[..., None]
    logp = G.log_softmax(student_logits[:, :-1])
    return _reduce(-(logp * weights).sum(), int(mask.sum()), reduction)


def audio_kd_from_pooled(student_pooled: Tensor, teacher_pooled: np.ndarray,
                         reduction: str = "mean") -> Tensor:
    """Summed squared Euclidean distance between pooled encoder embeddings."""
    diff = student_pooled - teacher_pooled
    return _reduce((diff * diff).sum(), student_pooled.shape[0], reduction)


# -- public losses ------------------------------------------------------------------

def ce_loss(model: Seq2SeqModel, features: Sequence[np.ndarray], targets: Sequence[Sequence[int]],
            reduction: str = "mean", rng: np.random.Generator | None = None) -> Tensor:
    if not len(features):
        return Tensor(0.0)
    logits, tokens = model.logits_batch(features, targets, rng)
    return nll_from_logits(logits, tokens, model.config.pad_id, reduction)


def _need_teacher(teacher) -> Seq2SeqModel:
    if teacher is None:
        raise UsageError("this KD loss needs a teacher snapshot (task >= 1)")
    return teacher.model if isinstance(teacher, TeacherSnapshot) else teacher


def audio_kd_loss(student: Seq2SeqModel, teacher: TeacherSnapshot | None,
                  features: Sequence[np.ndarray], reduction: str = "mean",
                  rng: np.random.Generator | None = None) -> Tensor:
    tmodel = _need_teacher(teacher)
    if not len(features):
        return Tensor(0.0)
    t_pooled = tmodel.pooled_batch(features).data
    return audio_kd_from_pooled(student.pooled_batch(features, rng), t_pooled, reduction)


def token_kd_loss(student: Seq2SeqModel, teacher: TeacherSnapshot | None,
                  features: Sequence[np.ndarray], targets: Sequence[Sequence[int]],
                  reduction: str = "mean", rng: np.random.Generator | None = None) -> Tensor:
    tmodel = _need_teacher(teacher)
    if not len(features):
        return Tensor(0.0)
    t_logits, _ = tmodel.logits_batch(features, targets)
    s_logits, tokens = student.logits_batch(features, targets, rng)
    return token_kd_from_logits(s_logits, t_logits.data, tokens, student.config.pad_id, reduction)


def seq_kd_loss(student: Seq2SeqModel, store: SoftTranscriptStore, ids: Sequence[int],
                features: Sequence[np.ndarray], reduction: str = "mean",
                rng: np.random.Generator | None = None) -> Tensor:
    """Cross-entropy against the teacher's beam outputs used as hard targets."""
    soft = [list(store.get(i)) for i in ids]
    return ce_loss(student, features, soft, reduction, rng)


def total_loss(ce: Tensor, kd: Mapping[str, Tensor], lam: float,
               enabled: frozenset[str] | set[str] | None = None,
               weights: Mapping[str, float] | None = None, has_teacher: bool = True) -> Tensor:
    """``(1 - lam) * ce + lam * sum_k w_k * kd[k]``; exactly ``ce`` when ``lam == 0``."""
    enabled = frozenset(kd) if enabled is None else frozenset(enabled)
    if enabled and not has_teacher:
        raise UsageError("KD losses enabled without a teacher")
    if set(kd) != enabled:
        raise UsageError(f"KD values {sorted(kd)} do not match enabled set {sorted(enabled)}")
    if lam == 0.0 or not enabled:
        out = ce
    else:
        weights = weights or {}
        kd_sum = None
        for k in sorted(enabled):
            term = kd[k] * float(weights.get(k, 1.0))
            kd_sum = term if kd_sum is None else kd_sum + term
        out = ce * (1.0 - lam) + kd_sum * lam
    if not np.isfinite(out.data).all():
        raise NumericError("non-finite training loss")
    return out


# -- one training batch ---------------------------------------------------------------

@dataclass
class StepLoss:
    total: Tensor
    ce: float
    kd: dict[str, float]
    lam: float
    b_rehe: int
    b_all: int
    pure_ce: bool


def batch_loss(student: Seq2SeqModel, features: Sequence[np.ndarray],
               targets: Sequence[Sequence[int]], ids: Sequence[int], rehearsal: Sequence[bool],
               kd_cfg: KdConfig, teacher: TeacherSnapshot | None = None,
               store: SoftTranscriptStore | None = None,
               rng: np.random.Generator | None = None) -> StepLoss:
    """Full objective for one mini-batch, sharing one student encoder pass.

    CE covers the whole batch; KD terms only the rehearsal rows.
    """
    cfg = student.config
    red = kd_cfg.reduction
    rehearsal = np.asarray(rehearsal, dtype=bool)
    comp = BatchComposition(len(ids), int(rehearsal.sum()))
    memory, valid = student.encode_batch(features, rng)
    tokens = pad_tokens(targets, cfg.pad_id)
    logits = student.decode_batch(tokens, memory, valid, rng)
    ce = nll_from_logits(logits, tokens, cfg.pad_id, red)
    active = kd_cfg.enabled if teacher is not None else frozenset()
    lam = lambda_kd(comp, kd_cfg.lambda_rule) if active else 0.0
    kd: dict[str, Tensor] = {}
    if active and comp.b_rehe > 0:
        rows = np.nonzero(rehearsal)[0]
        r_feats = [features[i] for i in rows]
        r_tokens = tokens[rows]
        if "audio" in active:
            t_pooled = teacher.model.pooled_batch(r_feats).data
            w = valid[rows] / valid[rows].sum(axis=1, keepdims=True)
            s_pooled = (G.gather_rows(memory, rows) * w[:, :, None]).sum(axis=1)
            kd["audio"] = audio_kd_from_pooled(s_pooled, t_pooled, red)
        if "token" in active:
            t_logits, _ = teacher.model.logits_batch(r_feats, [targets[i] for i in rows])
            width = t_logits.shape[1]
            kd["token"] = token_kd_from_logits(logits[rows, :width], t_logits.data,
                                               r_tokens[:, :width], cfg.pad_id, red)
        if "seq" in active:
            if store is None:
                raise IntegrityError("seq-KD enabled but no soft transcripts were generated")
            soft = pad_tokens([list(store.get(ids[i])) for i in rows], cfg.pad_id)
            s_logits = student.decode_batch(soft, G.gather_rows(memory, rows), valid[rows], rng)
            kd["seq"] = nll_from_logits(s_logits, soft, cfg.pad_id, red)
    elif active:
        kd = {k: Tensor(0.0) for k in active}
    total = total_loss(ce, kd, lam, active, kd_cfg.weights)
    return StepLoss(total, float(ce.data), {k: float(v.data) for k, v in kd.items()}, lam,
                    comp.b_rehe, comp.b_all, total is ce)

