import json
import math
from pathlib import Path

import pytest
import yaml

from slucil.cli import main
from slucil.errors import ConfigError, UsageError
from slucil.runner import (Experiment, ExperimentConfig, load_or_generate_corpus, report, resume,
                           run_experiment, sweep)

TINY = dict(corpus={"total_samples": 400, "feat_dim": 8, "max_frames": 30}, epochs=[1, 1, 1],
            model={"encoder_layers": 1, "decoder_layers": 1, "hidden": 16, "heads": 2, "ffn": 32},
            eval_beam=2, soft_beam=2, budget=0.05, batch_size=16)


def tiny(name="t", **over) -> ExperimentConfig:
    kw = {**TINY, "name": name, **over}
    if kw.get("method") == "offline":
        kw["epochs"] = [1]
    return ExperimentConfig(**kw)


def kd_cfg(**over):
    return tiny(method="rehearsal+kd", kd=["audio", "seq", "token"], **over)


@pytest.fixture(scope="module")
def kd_run(tmp_path_factory):
    cfg = kd_cfg(output_dir=str(tmp_path_factory.mktemp("kd") / "run"))
    return cfg, run_experiment(cfg)


# -- configuration ---------------------------------------------------------------------

@pytest.mark.parametrize("over", [
    {"method": "bogus"},
    {"epochs": [1, 1]},
    {"method": "rehearsal", "kd": ["seq"]},
    {"method": "rehearsal+kd", "kd": []},
    {"method": "rehearsal", "strategy": "clever"},
    {"method": "rehearsal", "budget": 0.0},
    {"composition": "fixed", "rehearsal_per_batch": 16},
    {"teacher_checkpoint": "middle"},
])
def test_invalid_configs(over):
    with pytest.raises(ConfigError):
        tiny(**{"method": "rehearsal", **over})


def test_unknown_config_key():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"method": "offline", "learning_rate": 1.0})


def test_defaults_and_presets():
    assert ExperimentConfig().epochs == [8, 5, 3]
    assert ExperimentConfig(tasks=6).epochs == [8, 5, 3, 3, 3, 3]
    assert ExperimentConfig(method="offline").tasks == 1
    paper = ExperimentConfig.paper_preset(6)
    assert paper.epochs == [40, 25, 15, 15, 15, 15]
    assert (paper.lr, paper.batch_size, paper.eval_beam) == (5e-5, 32, 20)


def test_yaml_roundtrip_and_hash(tmp_path):
    cfg = kd_cfg()
    path = tmp_path / "c.yaml"
    path.write_text(yaml.safe_dump(cfg.to_dict()))
    back = ExperimentConfig.from_file(path)
    assert back == cfg and back.hash() == cfg.hash()
    moved = kd_cfg(output_dir="elsewhere")
    assert moved.hash() == cfg.hash()
    assert kd_cfg(lr=0.5).hash() != cfg.hash()


# -- runs -----------------------------------------------------------------------------------

def test_offline_is_single_task():
    res = run_experiment(tiny(method="offline"))
    assert all(m.grid.shape == (1, 1) for m in res.matrices.values())
    assert res.summary["tasks"] == 1
    assert res.counters["kd_batches"] == 0


def test_fine_tuning_has_no_buffer_or_kd():
    cfg = tiny(method="fine-tuning")
    exp = Experiment(cfg)
    res = exp.run()
    assert res.counters["batches_without_rehearsal"] == res.counters["steps"]
    assert res.counters["kd_batches"] == 0
    assert all("buffer_size" not in h for h in res.history)
    expected = sum(e * math.ceil(len(t.train) / cfg.batch_size)
                   for e, t in zip(cfg.epochs, exp.schedule.tasks))
    assert res.counters["steps"] == expected


def test_step_count_follows_epoch_schedule(kd_run):
    cfg, res = kd_run
    exp = Experiment(cfg)
    expected = 0
    for t, task in enumerate(exp.schedule.tasks):
        rehe = res.history[t - 1]["buffer_size"] if t else 0
        expected += cfg.epochs[t] * math.ceil((len(task.train) + rehe) / cfg.batch_size)
    assert res.counters["steps"] == expected


def test_kd_only_on_rehearsal_batches(kd_run):
    _, res = kd_run
    c = res.counters
    assert c["batches_without_rehearsal"] > 0 and c["kd_batches"] > 0
    assert c["pure_ce_bit_equal"] == c["batches_without_rehearsal"]
    assert c["kd_batches"] + c["batches_without_rehearsal"] == c["steps"]


def test_teacher_is_frozen_and_causal(kd_run):
    _, res = kd_run
    assert res.counters["nonzero_teacher_delta"] == 0
    assert all(h["teacher_delta"] == 0.0 for h in res.history)
    assert res.summary["teacher_chain_ok"]
    for prev, cur in zip(res.history, res.history[1:]):
        assert cur["teacher_hash"] == prev["selected_hash"]


def test_artifacts_written(kd_run):
    cfg, res = kd_run
    d = res.run_dir
    for name in ("summary.json", "history.json", "config.yaml", "matrix_acc.csv",
                 "matrix_wer.csv", "matrix_f1.csv", "state/state.json", "state/model.npz",
                 "state/teacher.npz", "state/soft_transcripts.jsonl"):
        assert (d / name).exists(), name
    summary = json.loads((d / "summary.json").read_text())
    assert set(summary) >= {"avg_acc", "last_acc", "avg_wer", "avg_slu_f1", "config_hash"}


def test_same_seed_same_summary_bytes(tmp_path, kd_run):
    cfg, res = kd_run
    again = run_experiment(kd_cfg(output_dir=str(tmp_path / "again")))
    assert (again.run_dir / "summary.json").read_bytes() == (res.run_dir / "summary.json").read_bytes()


def test_different_seed_differs():
    a = run_experiment(tiny(method="fine-tuning", seed=0, output_dir="a")).summary
    b = run_experiment(tiny(method="fine-tuning", seed=1, output_dir="b")).summary
    assert a["config_hash"] != b["config_hash"]
    assert (a["avg_wer"], a["avg_acc"]) != (b["avg_wer"], b["avg_acc"])


def test_fixed_composition_runs():
    cfg = tiny(method="rehearsal", composition="fixed", rehearsal_per_batch=4)
    exp = Experiment(cfg)
    res = exp.run()
    # first task has no buffer yet; later tasks draw exactly 4 exemplars per batch
    expected = cfg.epochs[0] * math.ceil(len(exp.schedule.tasks[0].train) / 16)
    expected += sum(cfg.epochs[t] * math.ceil(len(exp.schedule.tasks[t].train) / 12) for t in (1, 2))
    assert res.counters["steps"] == expected


# -- resume ------------------------------------------------------------------------------

def test_resume_matches_uninterrupted(tmp_path, kd_run):
    _, full = kd_run
    cfg = kd_cfg(output_dir=str(tmp_path / "part"))
    partial = run_experiment(cfg, stop_after=0)
    assert partial.summary == {} and len(partial.history) == 1
    done = resume(tmp_path / "part", cfg)
    assert done.summary == full.summary
    assert (tmp_path / "part" / "summary.json").read_bytes() == (full.run_dir / "summary.json").read_bytes()
    again = resume(tmp_path / "part", cfg)
    assert again.resumed_noop and again.summary == full.summary


def test_resume_refuses_edited_config(tmp_path):
    cfg = tiny(method="rehearsal", output_dir=str(tmp_path / "r"))
    run_experiment(cfg, stop_after=0)
    with pytest.raises(UsageError):
        resume(tmp_path / "r", tiny(method="rehearsal", lr=0.01, output_dir=str(tmp_path / "r")))
    saved = yaml.safe_load((tmp_path / "r" / "config.yaml").read_text())
    saved["lr"] = 0.5
    (tmp_path / "r" / "config.yaml").write_text(yaml.safe_dump(saved))
    with pytest.raises(UsageError):
        resume(tmp_path / "r")


# -- sweep / report -----------------------------------------------------------------------

def test_sweep_table(tmp_path):
    configs = [tiny("ft", method="fine-tuning"), tiny("rehe", method="rehearsal"),
               tiny("seq", method="rehearsal+kd", kd=["seq"])]
    rows = sweep(configs, seeds=[0, 1], out=tmp_path / "cmp.csv")
    assert [r["name"] for r in rows] == ["ft", "rehe", "seq"]
    assert all(r["seeds"] == 2 for r in rows)
    for key in ("avg_acc", "last_acc", "avg_wer", "avg_slu_f1"):
        assert f"{key}_mean" in rows[0] and f"{key}_std" in rows[0]
    assert any(r["avg_wer_std"] > 0 for r in rows)
    assert (tmp_path / "cmp.csv").read_text().count("\n") == 4


def test_sweep_rejects_mismatched_corpus():
    other = {**TINY["corpus"], "seed": 9}
    with pytest.raises(UsageError):
        sweep([tiny("a", method="fine-tuning"), tiny("b", method="fine-tuning", corpus=other)])


def test_sweep_rejects_mismatched_schedule():
    with pytest.raises(UsageError):
        sweep([tiny("a", method="fine-tuning"),
               tiny("b", method="fine-tuning", tasks=6, epochs=[1] * 6)])


def test_report_merges(tmp_path, kd_run):
    _, res = kd_run
    other = run_experiment(kd_cfg(seed=1, output_dir=str(tmp_path / "s1")))
    rows = report([res.run_dir, other.run_dir], out=tmp_path / "r.csv")
    assert len(rows) == 1 and rows[0]["seeds"] == 2


# -- CLI -----------------------------------------------------------------------------------

def _write_cfg(path: Path, **over) -> Path:
    path.write_text(yaml.safe_dump(tiny(**over).to_dict()))
    return path


def test_cli_end_to_end(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("SLUCIL_OUTPUT_ROOT", str(tmp_path / "root"))
    spec = tmp_path / "spec.yaml"
    spec.write_text(yaml.safe_dump({"total_samples": 400, "feat_dim": 8, "max_frames": 30}))
    assert main(["gen-data", str(spec), "corpus"]) == 0
    assert (tmp_path / "root" / "corpus" / "corpus.jsonl").exists()

    cfg = _write_cfg(tmp_path / "ft.yaml", name="ft", method="fine-tuning",
                     corpus={"path": str(tmp_path / "root" / "corpus")})
    assert main(["run", str(cfg)]) == 0
    run_dir = tmp_path / "root" / "ft-s0"
    assert json.loads(capsys.readouterr().out.strip().splitlines()[-1])["method"] == "fine-tuning"
    assert main(["run", str(cfg)]) == 2  # refuses to clobber
    assert "usage" in capsys.readouterr().err

    assert main(["eval", str(run_dir / "state" / "model.npz"), "test"]) == 0
    out = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert out["split"] == "test" and 0.0 <= out["acc"] <= 1.0

    assert main(["report", str(run_dir), "--out", "cmp.csv"]) == 0
    assert (tmp_path / "root" / "cmp.csv").exists()


def test_cli_sweep_and_errors(tmp_path, capsys):
    d = tmp_path / "cfgs"
    d.mkdir()
    _write_cfg(d / "a.yaml", name="a", method="fine-tuning")
    _write_cfg(d / "b.yaml", name="b", method="rehearsal")
    assert main(["sweep", str(d), "--seeds", "0"]) == 0
    assert "a " in capsys.readouterr().out
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"method": "rehearsal", "kd": ["seq"]}))
    assert main(["run", str(bad)]) == 2
    assert "config" in capsys.readouterr().err


def test_corpus_cache_shares_instances():
    a = load_or_generate_corpus(TINY["corpus"])
    assert load_or_generate_corpus(dict(TINY["corpus"])) is a
