"""Scenario-based task schedule and the rehearsal buffer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .data import Corpus
from .errors import ConfigError, UsageError

STRATEGIES = ("random", "herding")
TIE_TOL = 1e-12


@dataclass
class Task:
    index: int
    scenarios: list[str]
    train: list[int]
    valid: list[int]
    test: list[int]


@dataclass
class TaskSchedule:
    tasks: list[Task]

    @property
    def T(self) -> int:
        return len(self.tasks)

    def scenario_order(self) -> list[str]:
        return [s for t in self.tasks for s in t.scenarios]

    def seen_scenarios(self, upto: int) -> list[str]:
        return [s for t in self.tasks[:upto + 1] for s in t.scenarios]

    def cumulative(self, split: str, upto: int) -> list[int]:
        """Ids of ``split`` for every scenario of tasks ``0..upto``."""
        return sorted(i for t in self.tasks[:upto + 1] for i in getattr(t, split))

    def signature(self) -> list[list[str]]:
        return [list(t.scenarios) for t in self.tasks]


def build_schedule(corpus: Corpus, T: int) -> TaskSchedule:
    """Order scenarios by descending training cardinality and deal them into T groups."""
    scenarios = corpus.scenarios()
    if T < 1 or len(scenarios) % T:
        raise ConfigError(f"{len(scenarios)} scenarios cannot be split evenly into {T} tasks")
    ids = {s: corpus.ids_by_scenario(split) for s, split in
           (("train", "train"), ("valid", "valid"), ("test", "test"))}
    order = sorted(scenarios, key=lambda s: (-len(ids["train"][s]), s))
    per = len(scenarios) // T
    tasks = []
    for t in range(T):
        group = order[t * per:(t + 1) * per]
        tasks.append(Task(t, group,
                          *(sorted(i for s in group for i in ids[split][s])
                            for split in ("train", "valid", "test"))))
    return TaskSchedule(tasks)


# -- exemplar selection --------------------------------------------------------------

def allocate(capacity: int, available: Mapping[str, int]) -> dict[str, int]:
    """Equal per-scenario quotas summing to ``capacity``, at least one each.

    Water-filling: every scenario gets ``min(available, L)`` for the largest
    level ``L`` that fits, and the leftover goes one apiece to the unsaturated
    scenarios in alphabetical order.
    """
    names = sorted(available)
    if capacity >= sum(available.values()):
        quota = {n: available[n] for n in names}
    else:
        level = 0
        while sum(min(available[n], level + 1) for n in names) <= capacity:
            level += 1
        quota = {n: min(available[n], level) for n in names}
        left = capacity - sum(quota.values())
        for n in names:
            if left and available[n] > level:
                quota[n] += 1
                left -= 1
    for n in names:
        if available[n] > 0 and quota[n] == 0:
            quota[n] = 1
    return quota


def _count(budget: float, n: int) -> int:
    if not 0.0 < budget <= 1.0:
        raise ConfigError(f"budget must lie in (0, 1], got {budget}")
    return math.ceil(round(budget * n, 9))


def random_select(ids_by_scenario: Mapping[str, Sequence[int]], budget: float, seed: int,
                  capacity: int | None = None) -> dict[str, list[int]]:
    """Uniform sampling without replacement, equal allocation across scenarios.

    ``capacity`` defaults to ``ceil(budget * pool size)``. Lists are returned in
    draw order, so any prefix is itself a uniform sample.
    """
    pool = sum(len(v) for v in ids_by_scenario.values())
    if capacity is None:
        capacity = _count(budget, pool)
    quotas = allocate(capacity, {s: len(v) for s, v in ids_by_scenario.items()})
    return {s: _draw(ids_by_scenario[s], quotas[s], [seed, k])
            for k, s in enumerate(sorted(ids_by_scenario))}


def _draw(ids: Sequence[int], n: int, seed) -> list[int]:
    cand = sorted(ids)
    pick = np.random.default_rng(seed).permutation(len(cand))[:n]
    return [cand[i] for i in pick]


def herding_select(candidates: Sequence[int], m: int,
                   embed: np.ndarray | Mapping[int, np.ndarray] | Callable) -> list[int]:
    """iCaRL herding: greedily keep the running exemplar mean close to the class mean.

    ``embed`` is either an array aligned with ``candidates``, a mapping from id
    to vector, or a callable taking the id list and returning an array.
    Candidates are visited in id order; ties (within ``TIE_TOL``) go to the smaller id.
    """
    if m <= 0 or not candidates:
        return []
    order = sorted(range(len(candidates)), key=lambda i: candidates[i])
    ids = [candidates[i] for i in order]
    if callable(embed) and not isinstance(embed, np.ndarray):
        E = np.asarray(embed(ids), dtype=np.float64)
    elif isinstance(embed, Mapping):
        E = np.array([np.asarray(embed[i], dtype=np.float64) for i in ids])
    else:
        E = np.asarray(embed, dtype=np.float64)[order]
    if m > len(ids):
        raise UsageError(f"cannot select {m} exemplars from {len(ids)} candidates")
    mu = E.mean(axis=0)
    acc = np.zeros_like(mu)
    taken = np.zeros(len(ids), dtype=bool)
    chosen = []
    for k in range(1, m + 1):
        dist = np.sqrt((((acc + E) / k - mu) ** 2).sum(axis=1))
        dist[taken] = np.inf
        best = dist.min()
        # distances equal up to rounding count as ties and go to the smaller id
        i = int(np.argmax(dist <= best + TIE_TOL * max(1.0, best)))
        chosen.append(ids[i])
        taken[i] = True
        acc += E[i]
    return chosen


# -- buffer ----------------------------------------------------------------------------

@dataclass
class RehearsalBuffer:
    budget: float
    strategy: str
    capacity: int
    exemplars: dict[str, list[int]] = field(default_factory=dict)
    # exemplar ids whose soft transcripts must be regenerated
    stale: set[int] = field(default_factory=set)
    completed_tasks: int = 0

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown rehearsal strategy {self.strategy!r}")

    @classmethod
    def create(cls, budget: float, strategy: str, train_size: int) -> "RehearsalBuffer":
        return cls(budget, strategy, _count(budget, train_size))

    def ids(self) -> list[int]:
        return sorted(i for v in self.exemplars.values() for i in v)

    def __len__(self) -> int:
        return sum(len(v) for v in self.exemplars.values())

    def to_dict(self) -> dict:
        return {"budget": self.budget, "strategy": self.strategy, "capacity": self.capacity,
                "exemplars": self.exemplars, "stale": sorted(self.stale),
                "completed_tasks": self.completed_tasks}

    @classmethod
    def from_dict(cls, d: dict) -> "RehearsalBuffer":
        return cls(d["budget"], d["strategy"], d["capacity"],
                   {k: list(v) for k, v in d["exemplars"].items()}, set(d["stale"]),
                   d["completed_tasks"])


def update_buffer(buffer: RehearsalBuffer, schedule: TaskSchedule, task_index: int,
                  corpus: Corpus, embed: Callable[[list[int]], np.ndarray] | None = None,
                  seed: int = 0) -> RehearsalBuffer:
    """Re-balance the buffer after finishing ``task_index``.

    Scenarios of the finished task draw from their full training data; older
    scenarios can only shrink, drawing from their stored exemplars. Herding
    recomputes embeddings with ``embed`` (the just-trained model).
    """
    if task_index != buffer.completed_tasks:
        raise UsageError(f"buffer expects task {buffer.completed_tasks}, got {task_index}")
    if buffer.strategy == "herding" and embed is None:
        raise UsageError("herding needs an embedding function")
    new_task = schedule.tasks[task_index]
    train_by_s = corpus.ids_by_scenario("train")
    pools = {s: list(v) for s, v in buffer.exemplars.items()}
    for s in new_task.scenarios:
        pools[s] = list(train_by_s[s])
    quotas = allocate(buffer.capacity, {s: len(v) for s, v in pools.items()})
    selected: dict[str, list[int]] = {}
    if buffer.strategy == "random":
        for k, s in enumerate(sorted(pools)):
            if s in new_task.scenarios:
                selected[s] = _draw(pools[s], quotas[s], [seed, task_index, k])
            else:
                # stored lists are in draw order, so a prefix stays a uniform sample
                selected[s] = pools[s][:quotas[s]]
    else:
        for s in sorted(pools):
            selected[s] = herding_select(pools[s], quotas[s], embed)
    out = RehearsalBuffer(buffer.budget, buffer.strategy, buffer.capacity,
                          {s: selected[s] for s in sorted(selected)},
                          completed_tasks=task_index + 1)
    out.stale = set(out.ids())
    return out
