"""Intent accuracy, WER and SLU F1, plus the per-task matrices they aggregate into."""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import ParsedOutput, Utterance, decode_augmented, encode_augmented
from .errors import UsageError

METRICS = ("acc", "wer", "f1")


def edit_distance(hyp: Sequence[str], ref: Sequence[str]) -> int:
    """Levenshtein distance with unit substitution, insertion and deletion costs."""
    prev = list(range(len(ref) + 1))
    for i, h in enumerate(hyp, 1):
        cur = [i] + [0] * len(ref)
        for j, r in enumerate(ref, 1):
            cur[j] = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (h != r))
        prev = cur
    return prev[-1]


def wer(hyp: Sequence[str], ref: Sequence[str]) -> float:
    if not ref:
        raise UsageError("WER is undefined for an empty reference")
    return edit_distance(list(hyp), list(ref)) / len(ref)


@dataclass
class EvalRecord:
    uid: int
    scenario: str
    gold: ParsedOutput
    pred: ParsedOutput
    errors: int
    ref_len: int

    @property
    def intent_correct(self) -> bool:
        # any structural defect in the decode voids the intent
        return self.pred.well_formed and self.pred.intent == self.gold.intent


def make_record(utt: Utterance, predicted_tokens: Sequence[str] | str,
                full_sequence_wer: bool = False) -> EvalRecord:
    gold = decode_augmented(encode_augmented(utt).tokens)
    pred = decode_augmented(predicted_tokens)
    if full_sequence_wer:
        toks = predicted_tokens.split() if isinstance(predicted_tokens, str) else list(predicted_tokens)
        hyp = [t for t in toks if not t.startswith("<")]
        ref = encode_augmented(utt).tokens
    else:
        hyp, ref = pred.transcript, gold.transcript
    return EvalRecord(utt.id, utt.scenario, gold, pred, edit_distance(hyp, ref), len(ref))


def _nonempty(records) -> list[EvalRecord]:
    records = list(records)
    if not records:
        raise UsageError("metric undefined on an empty record set")
    return records


def intent_accuracy(records: Iterable[EvalRecord]) -> float:
    records = _nonempty(records)
    return sum(r.intent_correct for r in records) / len(records)


def corpus_wer(records: Iterable[EvalRecord]) -> float:
    """Total edit errors over total reference words."""
    records = _nonempty(records)
    words = sum(r.ref_len for r in records)
    if not words:
        raise UsageError("WER is undefined for empty references")
    return sum(r.errors for r in records) / words


def f1_counts(gold: Iterable[tuple], pred: Iterable[tuple]) -> tuple[int, int, int]:
    """(true positives, predicted count, gold count) under multiset matching."""
    g, p = Counter(gold), Counter(pred)
    tp = sum(min(n, g[k]) for k, n in p.items())
    return tp, sum(p.values()), sum(g.values())


def slu_f1(records: Iterable[EvalRecord]) -> float:
    """Micro F1 over exact (entity type, value) pairs."""
    records = _nonempty(records)
    tp = n_pred = n_gold = 0
    for r in records:
        a, b, c = f1_counts(r.gold.entities, r.pred.entities)
        tp, n_pred, n_gold = tp + a, n_pred + b, n_gold + c
    if n_pred == 0 and n_gold == 0:
        return 1.0
    precision = tp / n_pred if n_pred else 0.0
    recall = tp / n_gold if n_gold else 0.0
    return 0.0 if tp == 0 else 2 * precision * recall / (precision + recall)


METRIC_FNS = {"acc": intent_accuracy, "wer": corpus_wer, "f1": slu_f1}


# -- task matrices -----------------------------------------------------------------------

@dataclass
class TaskMatrix:
    """``grid[t, s]``: metric on the cumulative test set of tasks ``0..s`` after training task ``t``."""

    T: int
    grid: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.grid is None:
            self.grid = np.full((self.T, self.T), np.nan)

    def set(self, t: int, s: int, value: float) -> None:
        if s > t:
            raise UsageError("entries exist only for s <= t")
        self.grid[t, s] = value

    def diagonal(self) -> list[float]:
        return [float(self.grid[t, t]) for t in range(self.T)]

    def complete(self) -> bool:
        return not np.isnan(np.diag(self.grid)).any()

    def to_rows(self) -> list[list[str]]:
        return [["" if s > t or np.isnan(self.grid[t, s]) else repr(float(self.grid[t, s]))
                 for s in range(self.T)] for t in range(self.T)]

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trained_task"] + [f"eval_upto_{s}" for s in range(self.T)])
            for t, row in enumerate(self.to_rows()):
                w.writerow([t] + row)

    @classmethod
    def read_csv(cls, path: str | Path) -> "TaskMatrix":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))[1:]
        m = cls(len(rows))
        for t, row in enumerate(rows):
            for s, cell in enumerate(row[1:]):
                if cell:
                    m.grid[t, s] = float(cell)
        return m

    def to_list(self) -> list[list[float | None]]:
        return [[None if np.isnan(v) else float(v) for v in row] for row in self.grid]

    @classmethod
    def from_list(cls, rows) -> "TaskMatrix":
        grid = np.array([[np.nan if v is None else v for v in row] for row in rows], dtype=float)
        return cls(len(rows), grid)


def fill_row(matrices: dict[str, TaskMatrix], t: int, records: Sequence[EvalRecord],
             scenario_tasks: dict[str, int]) -> None:
    """Fill row ``t`` of every matrix from records covering the cumulative test set."""
    for s in range(t + 1):
        subset = [r for r in records if scenario_tasks[r.scenario] <= s]
        for name, fn in METRIC_FNS.items():
            matrices[name].set(t, s, fn(subset))


def aggregate(matrices: dict[str, TaskMatrix]) -> dict[str, float]:
    """Avg/Last accuracy, average WER and SLU F1 from the per-task cumulative evaluations."""
    for name in METRICS:
        if name not in matrices or not matrices[name].complete():
            raise UsageError(f"task matrix for {name!r} is incomplete")
    acc, w, f1 = (matrices[n].diagonal() for n in METRICS)
    return {
        "avg_acc": float(np.mean(acc)),
        "last_acc": acc[-1],
        "avg_wer": float(np.mean(w)),
        "final_wer": w[-1],
        "avg_slu_f1": float(np.mean(f1)),
    }
