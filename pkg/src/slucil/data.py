"""Synthetic SLURP-like corpus, augmented-transcription codec and vocabulary."""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
import yaml

from .catalog import DEFAULT_CATALOG
from .errors import ConfigError, IntegrityError

PAD, BOS, EOS, UNK, SEP, FILL = "<pad>", "<bos>", "<eos>", "<unk>", "_SEP", "_FILL"
SPECIALS = (PAD, BOS, EOS, UNK, SEP, FILL)
PAD_ID, BOS_ID, EOS_ID, UNK_ID, SEP_ID, FILL_ID = range(6)
SPLITS = ("train", "valid", "test")
SPLIT_RATIOS = (0.7, 0.1, 0.2)

_SLOT = re.compile(r"\{(\w+)\}")


@dataclass(frozen=True)
class Entity:
    entity_type: str
    value: tuple[str, ...]

    def __post_init__(self):
        if not self.value:
            raise IntegrityError(f"entity {self.entity_type!r} has an empty value")


@dataclass
class Utterance:
    id: int
    scenario: str
    action: str
    entities: list[Entity]
    transcript: list[str]
    features: np.ndarray | None = None

    @property
    def intent(self) -> str:
        return intent_token(self.scenario, self.action)


def intent_token(scenario: str, action: str) -> str:
    return f"{scenario}_{action}"


# -- corpus specification ---------------------------------------------------

@dataclass
class ScenarioSpec:
    actions: dict[str, list[str]]
    entities: dict[str, list[str]]
    frequency: float = 1.0


@dataclass
class CorpusSpec:
    scenarios: dict[str, ScenarioSpec]
    total_samples: int = 6000
    noise: float = 0.3
    seed: int = 0
    feat_dim: int = 16
    max_frames: int = 48

    @classmethod
    def default(cls, **overrides) -> "CorpusSpec":
        return cls.from_dict({"scenarios": copy.deepcopy(DEFAULT_CATALOG), **overrides})

    @classmethod
    def from_dict(cls, raw: dict) -> "CorpusSpec":
        raw = dict(raw)
        scen = raw.pop("scenarios", None)
        if scen is None or scen == "default":
            scen = copy.deepcopy(DEFAULT_CATALOG)
        scenarios = {
            name: ScenarioSpec(actions={a: list(t) for a, t in s["actions"].items()},
                               entities={e: list(v) for e, v in s.get("entities", {}).items()},
                               frequency=float(s.get("frequency", 1.0)))
            for name, s in scen.items()
        }
        unknown = set(raw) - {"total_samples", "noise", "seed", "feat_dim", "max_frames"}
        if unknown:
            raise ConfigError(f"unknown corpus spec keys: {sorted(unknown)}")
        spec = cls(scenarios=scenarios, **raw)
        spec.validate()
        return spec

    @classmethod
    def from_file(cls, path: str | Path) -> "CorpusSpec":
        with open(path) as fh:
            raw = yaml.safe_load(fh) or {}
        return cls.from_dict(raw)

    def to_dict(self) -> dict:
        return {
            "total_samples": self.total_samples, "noise": self.noise, "seed": self.seed,
            "feat_dim": self.feat_dim, "max_frames": self.max_frames,
            "scenarios": {n: {"frequency": s.frequency, "actions": s.actions, "entities": s.entities}
                          for n, s in self.scenarios.items()},
        }

    def sample_counts(self) -> dict[str, int]:
        total_f = sum(s.frequency for s in self.scenarios.values())
        return {n: int(round(self.total_samples * s.frequency / total_f))
                for n, s in self.scenarios.items()}

    def validate(self) -> None:
        if len(self.scenarios) < 2:
            raise ConfigError("a corpus needs at least two scenarios")
        if self.noise < 0:
            raise ConfigError("noise level must be non-negative")
        for name, s in self.scenarios.items():
            if s.frequency <= 0:
                raise ConfigError(f"scenario {name!r}: frequency must be positive")
            if not s.actions:
                raise ConfigError(f"scenario {name!r} has no actions")
            for action, templates in s.actions.items():
                if not templates:
                    raise ConfigError(f"action {name}/{action} has no templates")
                for tpl in templates:
                    for slot in _SLOT.findall(tpl):
                        if slot not in s.entities:
                            raise ConfigError(
                                f"template {tpl!r} in scenario {name!r} references unknown "
                                f"entity type {slot!r}")
                    if 3 * _max_words(tpl, s.entities) > self.max_frames:
                        raise ConfigError(f"template {tpl!r} can exceed {self.max_frames} frames")
            for etype, values in s.entities.items():
                if not values or any(not v.split() for v in values):
                    raise ConfigError(f"entity type {etype!r} needs non-empty values")
        for name, n in self.sample_counts().items():
            if n < 10:
                raise ConfigError(f"scenario {name!r} would get {n} < 10 samples")


def _max_words(template: str, entities: dict[str, list[str]]) -> int:
    n = 0
    for tok in template.split():
        m = _SLOT.fullmatch(tok)
        n += max(len(v.split()) for v in entities[m.group(1)]) if m else 1
    return n


# -- feature synthesis --------------------------------------------------------

def _stable_int(*parts) -> int:
    return zlib.crc32(":".join(map(str, parts)).encode())


def word_frames(words: Sequence[str], seed: int, dim: int) -> np.ndarray:
    """Noise-free frames: a per-word codebook vector repeated 1-3 times.

    Repetition counts depend only on (seed, position, word), so a prefix of a
    word sequence yields a prefix of the frames.
    """
    rows = []
    for pos, w in enumerate(words):
        vec = np.random.default_rng([seed, _stable_int("word", w)]).normal(0.0, 1.0, dim)
        rows.extend([vec] * (1 + _stable_int("dur", seed, pos, w) % 3))
    return np.array(rows).reshape(len(rows), dim)


# -- generation -------------------------------------------------------------------

@dataclass
class Corpus:
    spec: CorpusSpec
    utterances: list[Utterance]
    splits: dict[str, list[int]]
    _by_id: dict[int, Utterance] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self._by_id = {u.id: u for u in self.utterances}

    def __len__(self) -> int:
        return len(self.utterances)

    def __getitem__(self, uid: int) -> Utterance:
        return self._by_id[uid]

    def split(self, name: str) -> list[Utterance]:
        return [self._by_id[i] for i in self.splits[name]]

    def scenarios(self) -> list[str]:
        return sorted(self.spec.scenarios)

    def ids_by_scenario(self, split: str) -> dict[str, list[int]]:
        out: dict[str, list[int]] = {s: [] for s in self.scenarios()}
        for i in self.splits[split]:
            out[self._by_id[i].scenario].append(i)
        return out


def _fill_template(tpl: str, entities: dict[str, list[str]], rng: np.random.Generator):
    words: list[str] = []
    found: list[Entity] = []
    for tok in tpl.split():
        m = _SLOT.fullmatch(tok)
        if m:
            etype = m.group(1)
            choices = entities[etype]
            value = choices[int(rng.integers(len(choices)))].split()
            words.extend(value)
            found.append(Entity(etype, tuple(value)))
        else:
            words.append(tok)
    return words, found


def generate_corpus(spec: CorpusSpec) -> Corpus:
    """Generate utterances and a scenario-stratified 70:10:20 split."""
    spec.validate()
    counts = spec.sample_counts()
    utterances: list[Utterance] = []
    per_scenario: dict[str, list[int]] = {}
    uid = 0
    for s_idx, name in enumerate(sorted(spec.scenarios)):
        sc = spec.scenarios[name]
        rng = np.random.default_rng([spec.seed, s_idx])
        actions = sorted(sc.actions)
        ids = []
        for _ in range(counts[name]):
            action = actions[int(rng.integers(len(actions)))]
            templates = sc.actions[action]
            tpl = templates[int(rng.integers(len(templates)))]
            words, ents = _fill_template(tpl, sc.entities, rng)
            frames = word_frames(words, spec.seed, spec.feat_dim)
            if spec.noise > 0:
                frames = frames + rng.normal(0.0, spec.noise, frames.shape)
            utterances.append(Utterance(uid, name, action, ents, words, frames))
            ids.append(uid)
            uid += 1
        per_scenario[name] = ids
    splits = _stratified_split(per_scenario, spec.seed)
    return Corpus(spec, utterances, splits)


def _stratified_split(per_scenario: dict[str, list[int]], seed: int) -> dict[str, list[int]]:
    n_total = sum(len(v) for v in per_scenario.values())
    targets = [int(round(r * n_total)) for r in SPLIT_RATIOS[:2]]
    names = sorted(per_scenario)
    alloc = {}
    for k, ratio in enumerate(SPLIT_RATIOS[:2]):
        exact = {n: ratio * len(per_scenario[n]) for n in names}
        base = {n: max(1, int(math.floor(exact[n]))) for n in names}
        short = targets[k] - sum(base.values())
        order = sorted(names, key=lambda n: (-(exact[n] - math.floor(exact[n])), n))
        for n in order[:max(0, short)]:
            base[n] += 1
        alloc[k] = base
    splits: dict[str, list[int]] = {s: [] for s in SPLITS}
    for s_idx, n in enumerate(names):
        ids = list(per_scenario[n])
        np.random.default_rng([seed, 7919, s_idx]).shuffle(ids)
        a, b = alloc[0][n], alloc[1][n]
        splits["train"].extend(sorted(ids[:a]))
        splits["valid"].extend(sorted(ids[a:a + b]))
        splits["test"].extend(sorted(ids[a + b:]))
    for s in SPLITS:
        splits[s].sort()
    return splits


# -- augmented transcription codec -------------------------------------------------

@dataclass
class AugmentedTranscript:
    tokens: list[str]

    def __str__(self) -> str:
        return " ".join(self.tokens)

    def framed(self) -> list[str]:
        return [BOS, *self.tokens, EOS]


def _contains(seq: Sequence[str], sub: Sequence[str]) -> bool:
    n = len(sub)
    return any(list(seq[i:i + n]) == list(sub) for i in range(len(seq) - n + 1))


def encode_augmented(u: Utterance) -> AugmentedTranscript:
    """``intent _SEP (type _FILL value)* _SEP transcript``."""
    tokens = [u.intent, SEP]
    for ent in u.entities:
        if not _contains(u.transcript, ent.value):
            raise IntegrityError(
                f"utterance {u.id}: entity value {' '.join(ent.value)!r} not in transcript")
        tokens += [ent.entity_type, FILL, *ent.value]
    tokens += [SEP, *u.transcript]
    return AugmentedTranscript(tokens)


@dataclass
class ParsedOutput:
    intent: str
    entities: list[tuple[str, tuple[str, ...]]]
    transcript: list[str]
    flags: set[str] = field(default_factory=set)

    @property
    def well_formed(self) -> bool:
        return not self.flags


def decode_augmented(tokens: str | Iterable[str]) -> ParsedOutput:
    """Best-effort inverse of :func:`encode_augmented`; never raises on bad input.

    Problems are reported through ``flags``: ``missing-separator``,
    ``extra-separator``, ``malformed-entity``, ``empty-intent``,
    ``multi-token-intent``.
    """
    toks = tokens.split() if isinstance(tokens, str) else [str(t) for t in tokens]
    toks = [t for t in toks if t not in (BOS, PAD)]
    if EOS in toks:
        toks = toks[:toks.index(EOS)]
    flags: set[str] = set()
    seps = [i for i, t in enumerate(toks) if t == SEP]
    if not seps:
        flags.update({"missing-separator", "empty-intent"})
        return ParsedOutput("", [], _lower(toks), flags)
    head = toks[:seps[0]]
    if not head:
        flags.add("empty-intent")
    elif len(head) > 1:
        flags.add("multi-token-intent")
    intent = " ".join(head)
    if len(seps) == 1:
        flags.add("missing-separator")
        return ParsedOutput(intent, [], _lower(toks[seps[0] + 1:]), flags)
    if len(seps) > 2:
        flags.add("extra-separator")
    middle = toks[seps[0] + 1:seps[1]]
    transcript = [t for t in toks[seps[1] + 1:] if t != SEP]
    return ParsedOutput(intent, _parse_entities(middle, flags), _lower(transcript), flags)


def _lower(words: Sequence[str]) -> list[str]:
    return [w.lower() for w in words]


def _parse_entities(middle: list[str], flags: set[str]) -> list[tuple[str, tuple[str, ...]]]:
    fills = [i for i, t in enumerate(middle) if t == FILL]
    if not fills:
        if middle:
            flags.add("malformed-entity")
        return []
    out = []
    if fills[0] != 1:
        flags.add("malformed-entity")
    for k, f in enumerate(fills):
        end = fills[k + 1] - 1 if k + 1 < len(fills) else len(middle)
        if f == 0 or middle[f - 1] == FILL or end <= f + 1:
            flags.add("malformed-entity")
            continue
        out.append((middle[f - 1], tuple(_lower(middle[f + 1:end]))))
    return out


# -- vocabulary -------------------------------------------------------------------

class Vocabulary:
    """Closed word-level vocabulary; specials occupy ids 0..5."""

    def __init__(self, tokens: Sequence[str]):
        if tuple(tokens[:len(SPECIALS)]) != SPECIALS:
            raise IntegrityError("vocabulary must start with the special tokens")
        self.tokens = list(tokens)
        self.index = {t: i for i, t in enumerate(self.tokens)}
        if len(self.index) != len(self.tokens):
            raise IntegrityError("duplicate vocabulary entries")
        self.unk_count = 0

    def __len__(self) -> int:
        return len(self.tokens)

    def __contains__(self, tok: str) -> bool:
        return tok in self.index

    @property
    def hash(self) -> str:
        return hashlib.sha256("\n".join(self.tokens).encode()).hexdigest()[:16]

    def tokenize(self, text: str | Sequence[str]) -> list[int]:
        words = text.split() if isinstance(text, str) else list(text)
        ids = []
        for w in words:
            i = self.index.get(w)
            if i is None:
                self.unk_count += 1
                i = UNK_ID
            ids.append(i)
        return ids

    def detokenize(self, ids: Iterable[int], join: bool = True) -> str | list[str]:
        words = [self.tokens[int(i)] for i in ids]
        return " ".join(words) if join else words

    def encode_target(self, u: Utterance) -> list[int]:
        return self.tokenize(encode_augmented(u).framed())

    def to_list(self) -> list[str]:
        return list(self.tokens)


def build_vocabulary(corpus: Corpus | Iterable[Utterance]) -> Vocabulary:
    utts = corpus.utterances if isinstance(corpus, Corpus) else list(corpus)
    intents, etypes, words = set(), set(), set()
    for u in utts:
        intents.add(u.intent)
        etypes.update(e.entity_type for e in u.entities)
        words.update(u.transcript)
    ordered = list(SPECIALS)
    for group in (sorted(intents), sorted(etypes - intents), sorted(words - intents - etypes)):
        ordered.extend(t for t in group if t not in SPECIALS)
    return Vocabulary(ordered)


# -- persistence -------------------------------------------------------------------

def save_corpus(corpus: Corpus, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    split_of = {i: s for s, ids in corpus.splits.items() for i in ids}
    with open(out / "corpus.jsonl", "w") as fh:
        for u in corpus.utterances:
            rec = {"id": u.id, "split": split_of[u.id], "scenario": u.scenario, "action": u.action,
                   "entities": [[e.entity_type, " ".join(e.value)] for e in u.entities],
                   "transcript": " ".join(u.transcript)}
            fh.write(json.dumps(rec) + "\n")
    np.savez_compressed(out / "features.npz", **{str(u.id): u.features for u in corpus.utterances})
    with open(out / "spec.yaml", "w") as fh:
        yaml.safe_dump(corpus.spec.to_dict(), fh, sort_keys=False)
    return out


def load_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    spec = CorpusSpec.from_file(path / "spec.yaml")
    utts, splits = [], {s: [] for s in SPLITS}
    with np.load(path / "features.npz") as feats, open(path / "corpus.jsonl") as fh:
        for line in fh:
            r = json.loads(line)
            ents = [Entity(t, tuple(v.split())) for t, v in r["entities"]]
            utts.append(Utterance(r["id"], r["scenario"], r["action"], ents,
                                  r["transcript"].split(), feats[str(r["id"])]))
            splits[r["split"]].append(r["id"])
    return Corpus(spec, utts, {k: sorted(v) for k, v in splits.items()})
