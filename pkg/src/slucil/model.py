"""Small pre-LN encoder-decoder transformer with beam-search decoding.

The encoder consumes feature frames (a stand-in for acoustic features), the
decoder predicts augmented transcriptions token by token. All arithmetic runs
through :mod:`slucil.grad`, so every forward pass executed under a tape is
differentiable.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import grad as G
from .errors import ConfigError, InputError, IntegrityError
from .grad import Tensor

CHECKPOINT_VERSION = 1
NEG_INF = -1e9


@dataclass(frozen=True)
class ModelConfig:
    vocab_size: int = 120
    encoder_layers: int = 2
    decoder_layers: int = 2
    hidden: int = 64
    heads: int = 4
    ffn: int = 128
    feat_dim: int = 16
    max_frames: int = 48
    # generated tokens, BOS excluded
    max_target: int = 32
    dropout: float = 0.1
    ln_eps: float = 1e-5
    length_norm: bool = False
    pad_id: int = 0
    bos_id: int = 1
    eos_id: int = 2

    def __post_init__(self):
        if self.hidden % self.heads:
            raise ConfigError(f"hidden size {self.hidden} not divisible by {self.heads} heads")
        if self.vocab_size < 3:
            raise ConfigError("vocabulary must hold at least PAD, BOS and EOS")
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError("dropout must lie in [0, 1)")
        for name in ("encoder_layers", "decoder_layers", "hidden", "heads", "ffn",
                     "feat_dim", "max_frames", "max_target"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be positive")

    @classmethod
    def paper_scale(cls, vocab_size: int, **overrides) -> "ModelConfig":
        base = dict(vocab_size=vocab_size, encoder_layers=12, decoder_layers=6, hidden=768,
                    heads=8, ffn=2048, feat_dim=512, max_frames=350, max_target=64)
        base.update(overrides)
        return cls(**base)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Hypothesis:
    tokens: tuple[int, ...]
    score: float
    finished: bool = False
    truncated: bool = False

    @property
    def generated(self) -> tuple[int, ...]:
        return self.tokens[1:]


def sinusoid_table(length: int, dim: int) -> np.ndarray:
    pos = np.arange(length)[:, None]
    i = np.arange(dim)[None, :]
    angle = pos / np.power(10000.0, (2 * (i // 2)) / dim)
    return np.where(i % 2 == 0, np.sin(angle), np.cos(angle))


def parameter_shapes(cfg: ModelConfig) -> dict[str, tuple[int, ...]]:
    h, f, V = cfg.hidden, cfg.ffn, cfg.vocab_size
    shapes: dict[str, tuple[int, ...]] = {
        "enc.in_norm.g": (cfg.feat_dim,), "enc.in_norm.b": (cfg.feat_dim,),
        "enc.in_proj.w": (cfg.feat_dim, h), "enc.in_proj.b": (h,),
    }

    def attn(prefix):
        for n in ("q", "k", "v", "o"):
            shapes[f"{prefix}.w{n}"] = (h, h)
            shapes[f"{prefix}.b{n}"] = (h,)

    def norm(prefix):
        shapes[f"{prefix}.g"] = (h,)
        shapes[f"{prefix}.b"] = (h,)

    def ffn(prefix):
        shapes.update({f"{prefix}.w1": (h, f), f"{prefix}.b1": (f,),
                       f"{prefix}.w2": (f, h), f"{prefix}.b2": (h,)})

    for i in range(cfg.encoder_layers):
        p = f"enc.{i}"
        norm(f"{p}.ln1"), attn(f"{p}.self"), norm(f"{p}.ln2"), ffn(f"{p}.ffn")
    norm("enc.ln_f")
    shapes["dec.embed"] = (V, h)
    for i in range(cfg.decoder_layers):
        p = f"dec.{i}"
        norm(f"{p}.ln1"), attn(f"{p}.self"), norm(f"{p}.ln2"), attn(f"{p}.cross")
        norm(f"{p}.ln3"), ffn(f"{p}.ffn")
    norm("dec.ln_f")
    shapes["dec.out.w"] = (h, V)
    shapes["dec.out.b"] = (V,)
    return shapes


def _init_param(name: str, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    leaf = name.rsplit(".", 1)[-1]
    if name == "dec.out.w":
        return rng.normal(0.0, 0.02, shape)
    if name == "dec.embed":
        return rng.normal(0.0, 1.0, shape)
    if leaf == "g":
        return np.ones(shape)
    if len(shape) == 1:
        return np.zeros(shape)
    return rng.normal(0.0, 1.0 / math.sqrt(shape[0]), shape)


def pad_features(features: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.array([len(f) for f in features], dtype=np.int64)
    dim = features[0].shape[1]
    out = np.zeros((len(features), int(lengths.max()), dim))
    for i, f in enumerate(features):
        out[i, : len(f)] = f
    return out, lengths


def pad_tokens(seqs: Sequence[Sequence[int]], pad_id: int) -> np.ndarray:
    width = max(len(s) for s in seqs)
    out = np.full((len(seqs), width), pad_id, dtype=np.int64)
    for i, s in enumerate(seqs):
        out[i, : len(s)] = s
    return out


class Seq2SeqModel:
    def __init__(self, config: ModelConfig, seed: int = 0,
                 params: dict[str, np.ndarray] | None = None, trainable: bool = True):
        self.config = config
        shapes = parameter_shapes(config)
        if params is None:
            rng = np.random.default_rng(seed)
            params = {k: _init_param(k, s, rng) for k, s in shapes.items()}
        elif set(params) != set(shapes):
            raise IntegrityError("parameter names do not match the model configuration")
        self.params: dict[str, Tensor] = {}
        for k, s in shapes.items():
            arr = np.array(params[k], dtype=np.float64)
            if arr.shape != s:
                raise IntegrityError(f"parameter {k} has shape {arr.shape}, expected {s}")
            self.params[k] = Tensor(arr, requires_grad=trainable)
        self._pe = sinusoid_table(max(config.max_frames, config.max_target + 1), config.hidden)

    # -- bookkeeping --------------------------------------------------------
    def parameters(self) -> list[Tensor]:
        return list(self.params.values())

    def num_parameters(self) -> int:
        return sum(p.data.size for p in self.params.values())

    def clone(self, trainable: bool | None = None) -> "Seq2SeqModel":
        if trainable is None:
            trainable = any(p.requires_grad for p in self.params.values())
        return Seq2SeqModel(self.config, params=self.state_dict(), trainable=trainable)

    def frozen_copy(self) -> "Seq2SeqModel":
        return self.clone(trainable=False)

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: p.data.copy() for k, p in self.params.items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        for k, p in self.params.items():
            p.data = np.array(state[k], dtype=np.float64)

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.grad = None

    # -- building blocks ----------------------------------------------------
    def _p(self, name: str) -> Tensor:
        return self.params[name]

    def _norm(self, x: Tensor, prefix: str) -> Tensor:
        return G.layer_norm(x, self._p(f"{prefix}.g"), self._p(f"{prefix}.b"), self.config.ln_eps)

    def _linear(self, x: Tensor, w: str, b: str) -> Tensor:
        return x @ self._p(w) + self._p(b)

    def _split_heads(self, x: Tensor) -> Tensor:
        B, L, _ = x.shape
        H = self.config.heads
        return x.reshape(B, L, H, -1).transpose(0, 2, 1, 3)

    def _attention(self, x: Tensor, mem: Tensor, blocked: np.ndarray, prefix: str,
                   rng: np.random.Generator | None) -> Tensor:
        cfg = self.config
        q = self._split_heads(self._linear(x, f"{prefix}.wq", f"{prefix}.bq"))
        k = self._split_heads(self._linear(mem, f"{prefix}.wk", f"{prefix}.bk"))
        v = self._split_heads(self._linear(mem, f"{prefix}.wv", f"{prefix}.bv"))
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / math.sqrt(cfg.hidden // cfg.heads))
        scores = G.masked_fill(scores, blocked, NEG_INF)
        attn = G.dropout(G.softmax(scores, axis=-1), cfg.dropout, rng)
        B, _, L, _ = q.shape
        ctx = (attn @ v).transpose(0, 2, 1, 3).reshape(B, L, cfg.hidden)
        return self._linear(ctx, f"{prefix}.wo", f"{prefix}.bo")

    def _ffn(self, x: Tensor, prefix: str, rng) -> Tensor:
        hid = G.gelu(self._linear(x, f"{prefix}.w1", f"{prefix}.b1"))
        return self._linear(G.dropout(hid, self.config.dropout, rng), f"{prefix}.w2", f"{prefix}.b2")

    # -- encoder ------------------------------------------------------------
    def _check_frames(self, features: Sequence[np.ndarray]) -> None:
        for f in features:
            f = np.asarray(f)
            if f.ndim != 2 or f.shape[1] != self.config.feat_dim:
                raise InputError(f"features must be [I x {self.config.feat_dim}], got {f.shape}")
            if not 1 <= len(f) <= self.config.max_frames:
                raise InputError(f"frame count {len(f)} outside [1, {self.config.max_frames}]")

    def encode_batch(self, features: Sequence[np.ndarray],
                     rng: np.random.Generator | None = None) -> tuple[Tensor, np.ndarray]:
        """Encode padded frame sequences. Returns ``(states [B,I,h], valid mask [B,I])``."""
        self._check_frames(features)
        x_np, lengths = pad_features([np.asarray(f, dtype=np.float64) for f in features])
        B, I, _ = x_np.shape
        valid = np.arange(I)[None, :] < lengths[:, None]
        x = G.layer_norm(Tensor(x_np), self._p("enc.in_norm.g"), self._p("enc.in_norm.b"),
                         self.config.ln_eps)
        x = self._linear(x, "enc.in_proj.w", "enc.in_proj.b") + self._pe[:I]
        x = G.dropout(x, self.config.dropout, rng)
        blocked = ~valid[:, None, None, :]
        for i in range(self.config.encoder_layers):
            p = f"enc.{i}"
            h = self._norm(x, f"{p}.ln1")
            x = x + G.dropout(self._attention(h, h, blocked, f"{p}.self", rng), self.config.dropout, rng)
            x = x + G.dropout(self._ffn(self._norm(x, f"{p}.ln2"), f"{p}.ffn", rng),
                              self.config.dropout, rng)
        return self._norm(x, "enc.ln_f"), valid

    def pooled_batch(self, features: Sequence[np.ndarray],
                     rng: np.random.Generator | None = None) -> Tensor:
        """Mean of the valid encoder frames for each input: ``[B, h]``."""
        enc, valid = self.encode_batch(features, rng)
        weights = valid / valid.sum(axis=1, keepdims=True)
        return (enc * weights[:, :, None]).sum(axis=1)

    def encode(self, features: np.ndarray) -> Tensor:
        enc, _ = self.encode_batch([features])
        return enc.reshape(enc.shape[1:])

    def encode_pooled(self, features: np.ndarray) -> Tensor:
        pooled = self.pooled_batch([features])
        return pooled.reshape(pooled.shape[1:])

    # -- decoder ------------------------------------------------------------
    def decode_batch(self, tokens: np.ndarray, memory: Tensor, mem_valid: np.ndarray,
                     rng: np.random.Generator | None = None) -> Tensor:
        """Causal decoder over token ids ``[B, J]``; returns logits ``[B, J, V]``.

        Row ``j`` is the next-token distribution after reading tokens ``0..j``.
        """
        cfg = self.config
        B, J = tokens.shape
        if J > cfg.max_target + 1:
            raise InputError(f"target length {J} exceeds {cfg.max_target + 1}")
        x = G.embedding(self._p("dec.embed"), tokens) + self._pe[:J]
        x = G.dropout(x, cfg.dropout, rng)
        causal = np.triu(np.ones((J, J), dtype=bool), k=1)[None, None]
        cross_blocked = ~mem_valid[:, None, None, :]
        for i in range(cfg.decoder_layers):
            p = f"dec.{i}"
            h = self._norm(x, f"{p}.ln1")
            x = x + G.dropout(self._attention(h, h, causal, f"{p}.self", rng), cfg.dropout, rng)
            h = self._norm(x, f"{p}.ln2")
            x = x + G.dropout(self._attention(h, memory, cross_blocked, f"{p}.cross", rng),
                              cfg.dropout, rng)
            x = x + G.dropout(self._ffn(self._norm(x, f"{p}.ln3"), f"{p}.ffn", rng), cfg.dropout, rng)
        return self._linear(self._norm(x, "dec.ln_f"), "dec.out.w", "dec.out.b")

    def logits_batch(self, features: Sequence[np.ndarray], targets: Sequence[Sequence[int]],
                     rng: np.random.Generator | None = None) -> tuple[Tensor, np.ndarray]:
        """Teacher-forced logits for a batch; returns ``(logits [B,J,V], padded targets [B,J])``."""
        for t in targets:
            if not len(t) or t[0] != self.config.bos_id:
                raise InputError("target sequence must begin with BOS")
        memory, valid = self.encode_batch(features, rng)
        tokens = pad_tokens(targets, self.config.pad_id)
        return self.decode_batch(tokens, memory, valid, rng), tokens

    def forward_teacher_forced(self, features: np.ndarray, target: Sequence[int]) -> Tensor:
        logits, _ = self.logits_batch([features], [list(target)])
        return logits.reshape(logits.shape[1:])

    # -- inference ------------------------------------------------------------
    def next_token_logprobs(self, memory: np.ndarray, mem_valid: np.ndarray,
                            prefixes: np.ndarray) -> np.ndarray:
        logits = self.decode_batch(prefixes, Tensor(memory), mem_valid).data[:, -1]
        z = logits - logits.max(axis=-1, keepdims=True)
        return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))

    def beam_search(self, features: np.ndarray, beam_width: int = 20,
                    max_len: int | None = None, suppress: Sequence[int] | None = None) -> Hypothesis:
        return self.beam_search_batch([features], beam_width, max_len, suppress)[0]

    def greedy_decode(self, features: np.ndarray, max_len: int | None = None) -> Hypothesis:
        return self.beam_search(features, 1, max_len)

    def beam_search_batch(self, features: Sequence[np.ndarray], beam_width: int = 20,
                          max_len: int | None = None,
                          suppress: Sequence[int] | None = None) -> list[Hypothesis]:
        """Beam search over a batch of inputs, one best hypothesis per input.

        Candidates are ranked by cumulative log-probability; equal scores go to
        the lexicographically smaller token sequence. PAD and BOS are never
        generated unless ``suppress`` says otherwise.
        """
        if beam_width < 1:
            raise ConfigError(f"beam width must be >= 1, got {beam_width}")
        cfg = self.config
        max_len = cfg.max_target if max_len is None else max_len
        if not 1 <= max_len <= cfg.max_target:
            raise ConfigError(f"max_len must lie in [1, {cfg.max_target}]")
        if suppress is None:
            suppress = (cfg.pad_id, cfg.bos_id)
        suppress = list(suppress)
        enc, valid = self.encode_batch(features)
        memory = enc.data
        N = len(features)
        alive: list[list[tuple[tuple[int, ...], float]]] = [[((cfg.bos_id,), 0.0)] for _ in range(N)]
        finished: list[list[Hypothesis]] = [[] for _ in range(N)]
        for step in range(max_len):
            rows = [(n, seq, sc) for n in range(N) for seq, sc in alive[n]]
            if not rows:
                break
            owner = np.array([r[0] for r in rows])
            prefixes = np.array([r[1] for r in rows], dtype=np.int64)
            logp = self.next_token_logprobs(memory[owner], valid[owner], prefixes)
            if suppress:
                logp[:, suppress] = -np.inf
            last_step = step + 1 == max_len
            start = 0
            for n in range(N):
                k = len(alive[n])
                if k == 0:
                    continue
                block = logp[start:start + k]
                parents = alive[n]
                start += k
                scores = np.array([sc for _, sc in parents])[:, None] + block
                order = sorted(range(k), key=lambda i: parents[i][0])
                prank = np.empty(k, dtype=np.int64)
                prank[order] = np.arange(k)
                flat = scores.ravel()
                pidx = np.repeat(np.arange(k), block.shape[1])
                tok = np.tile(np.arange(block.shape[1]), k)
                ok = np.isfinite(flat)
                cand = np.nonzero(ok)[0]
                ranked = cand[np.lexsort((tok[cand], prank[pidx[cand]], -flat[cand]))][:beam_width]
                nxt = []
                for c in ranked:
                    seq = parents[pidx[c]][0] + (int(tok[c]),)
                    sc = float(flat[c])
                    if tok[c] == cfg.eos_id:
                        finished[n].append(Hypothesis(seq, sc, True, False))
                    elif last_step:
                        finished[n].append(Hypothesis(seq, sc, True, True))
                    else:
                        nxt.append((seq, sc))
                alive[n] = nxt
                if nxt and finished[n] and not cfg.length_norm:
                    best_done = max(h.score for h in finished[n])
                    if best_done >= max(sc for _, sc in nxt):
                        alive[n] = []
        return [self._pick(f) for f in finished]

    def _pick(self, hyps: list[Hypothesis]) -> Hypothesis:
        if not hyps:
            return Hypothesis((self.config.bos_id, self.config.eos_id), -math.inf, True, True)
        if self.config.length_norm:
            key = lambda h: (-h.score / max(1, len(h.tokens) - 1), h.tokens)
        else:
            key = lambda h: (-h.score, h.tokens)
        return min(hyps, key=key)

    # -- persistence ----------------------------------------------------------
    def save(self, path: str | Path, vocab_hash: str = "", extra: dict | None = None) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        meta = {"version": CHECKPOINT_VERSION, "config": self.config.to_dict(),
                "vocab_hash": vocab_hash, "extra": extra or {}}
        arrays = {f"param/{k}": v for k, v in self.state_dict().items()}
        with open(path, "wb") as fh:
            np.savez(fh, __meta__=np.array(json.dumps(meta, sort_keys=True)), **arrays)
        return path

    @classmethod
    def load(cls, path: str | Path, vocab_hash: str | None = None,
             trainable: bool = True) -> "Seq2SeqModel":
        model, _ = load_checkpoint(path, vocab_hash, trainable)
        return model


def load_checkpoint(path: str | Path, vocab_hash: str | None = None,
                    trainable: bool = True) -> tuple[Seq2SeqModel, dict]:
    with np.load(Path(path), allow_pickle=False) as z:
        meta = json.loads(str(z["__meta__"]))
        params = {k[len("param/"):]: z[k] for k in z.files if k.startswith("param/")}
    if meta.get("version") != CHECKPOINT_VERSION:
        raise IntegrityError(f"unsupported checkpoint version {meta.get('version')}")
    if vocab_hash is not None and meta.get("vocab_hash") != vocab_hash:
        raise IntegrityError("checkpoint vocabulary hash does not match the corpus vocabulary")
    model = Seq2SeqModel(ModelConfig(**meta["config"]), params=params, trainable=trainable)
    return model, meta
