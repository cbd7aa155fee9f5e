"""Command-line entry point: ``slucil {gen-data,run,sweep,eval,report}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import yaml

from .data import CorpusSpec, generate_corpus, load_corpus, save_corpus
from .errors import SluCilError, UsageError
from .metrics import corpus_wer, intent_accuracy, slu_f1
from .runner import (Experiment, ExperimentConfig, output_root, report, resume, run_dir_for,
                     run_experiment, sweep)
from .model import load_checkpoint


def _out_path(p: str) -> Path:
    path = Path(p)
    return path if path.is_absolute() else output_root() / path


def cmd_gen_data(args) -> int:
    spec = CorpusSpec.default() if args.spec == "default" else CorpusSpec.from_file(args.spec)
    if args.samples is not None:
        spec = CorpusSpec.from_dict({**spec.to_dict(), "total_samples": args.samples})
    corpus = generate_corpus(spec)
    out = save_corpus(corpus, _out_path(args.out))
    sizes = {k: len(v) for k, v in corpus.splits.items()}
    print(f"wrote {len(corpus)} utterances to {out} {sizes}")
    return 0


def cmd_run(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    run_dir = run_dir_for(cfg)
    if args.resume:
        result = resume(run_dir, cfg)
    else:
        if (run_dir / "state" / "state.json").exists() and not args.overwrite:
            raise UsageError(f"{run_dir} already holds a run; pass --resume or --overwrite")
        result = run_experiment(cfg, stop_after=args.stop_after)
    if result.summary:
        print(json.dumps(result.summary, sort_keys=True))
    else:
        print(f"stopped at a task boundary; state saved under {result.run_dir / 'state'}")
    return 0


def cmd_sweep(args) -> int:
    paths = sorted(Path(args.config_dir).glob("*.yaml")) + sorted(Path(args.config_dir).glob("*.yml"))
    if not paths:
        raise UsageError(f"no config files in {args.config_dir}")
    configs = [ExperimentConfig.from_file(p) for p in paths]
    seeds = args.seeds
    if seeds is None:
        listed = {tuple((yaml.safe_load(p.read_text()) or {}).get("seeds", ())) for p in paths}
        listed.discard(())
        seeds = list(listed.pop()) if len(listed) == 1 else None
    rows = sweep(configs, seeds, out=_out_path(args.out))
    _print_rows(rows)
    return 0


def _find_config(checkpoint: Path) -> Path:
    for d in (checkpoint.parent, checkpoint.parent.parent):
        if (d / "config.yaml").exists():
            return d / "config.yaml"
    raise UsageError("cannot locate the run config next to the checkpoint; pass --config")


def cmd_eval(args) -> int:
    ckpt = Path(args.checkpoint)
    cfg = ExperimentConfig.from_file(args.config or _find_config(ckpt))
    corpus = load_corpus(args.corpus) if args.corpus else None
    exp = Experiment(cfg, corpus)
    model, _ = load_checkpoint(ckpt, exp.vocab.hash, trainable=False)
    if args.split not in exp.corpus.splits:
        raise UsageError(f"unknown split {args.split!r}")
    ids = sorted(exp.corpus.splits[args.split])
    records = exp.evaluate(model, ids, args.beam)
    print(json.dumps({"split": args.split, "n": len(records), "acc": intent_accuracy(records),
                      "wer": corpus_wer(records), "slu_f1": slu_f1(records)}, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    rows = report(args.run_dirs, out=_out_path(args.out))
    _print_rows(rows)
    return 0


def _print_rows(rows) -> None:
    for r in rows:
        cells = [f"{k[:-5]}={r[k]:.4f}±{r[k[:-5] + '_std']:.4f}" for k in r if k.endswith("_mean")]
        print(f"{r['name']:<24} seeds={r['seeds']} " + " ".join(cells))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="slucil", description=__doc__)
    p.add_argument("--log-level", default="INFO")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-data", help="generate a synthetic corpus")
    g.add_argument("spec", help="corpus spec YAML, or 'default'")
    g.add_argument("out", help="output directory (relative to the output root)")
    g.add_argument("--samples", type=int, default=None)
    g.set_defaults(fn=cmd_gen_data)

    r = sub.add_parser("run", help="run one experiment config")
    r.add_argument("config")
    r.add_argument("--seed", type=int, default=None)
    r.add_argument("--resume", action="store_true", help="continue from the last task boundary")
    r.add_argument("--overwrite", action="store_true")
    r.add_argument("--stop-after", type=int, default=None, help="stop after this task index")
    r.set_defaults(fn=cmd_run)

    s = sub.add_parser("sweep", help="run every config in a directory and compare")
    s.add_argument("config_dir")
    s.add_argument("--seeds", type=int, nargs="+", default=None)
    s.add_argument("--out", default="comparison.csv")
    s.set_defaults(fn=cmd_sweep)

    e = sub.add_parser("eval", help="evaluate a checkpoint on a corpus split")
    e.add_argument("checkpoint")
    e.add_argument("split", choices=["train", "valid", "test"])
    e.add_argument("--config", default=None)
    e.add_argument("--corpus", default=None, help="saved corpus directory")
    e.add_argument("--beam", type=int, default=None)
    e.set_defaults(fn=cmd_eval)

    rp = sub.add_parser("report", help="merge run summaries into a comparison CSV")
    rp.add_argument("run_dirs", nargs="+")
    rp.add_argument("--out", default="comparison.csv")
    rp.set_defaults(fn=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.fn(args)
    except SluCilError as exc:
        print(f"error [{exc.category}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
