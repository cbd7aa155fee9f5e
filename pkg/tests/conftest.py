import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from slucil.data import CorpusSpec, build_vocabulary, generate_corpus  # noqa: E402
from slucil.model import ModelConfig, Seq2SeqModel  # noqa: E402

TINY = ModelConfig(vocab_size=4, encoder_layers=1, decoder_layers=1, hidden=8, heads=2, ffn=16,
                   feat_dim=3, max_frames=6, max_target=3, dropout=0.0)


@pytest.fixture
def tiny_config():
    return TINY


def tiny_model(seed: int, **overrides) -> Seq2SeqModel:
    cfg = ModelConfig(**{**TINY.to_dict(), **overrides})
    return Seq2SeqModel(cfg, seed=seed)


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(CorpusSpec.default(total_samples=600, seed=3))


@pytest.fixture(scope="session")
def small_vocab(small_corpus):
    return build_vocabulary(small_corpus)


@pytest.fixture(autouse=True)
def _isolated_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv("SLUCIL_OUTPUT_ROOT", str(tmp_path / "runs"))


def random_features(rng: np.random.Generator, n_frames: int, dim: int) -> np.ndarray:
    return rng.normal(size=(n_frames, dim))


# one line per acceptance criterion, printed at the end of the session
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[number] = (passed, detail)
    print(f"criterion {number}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:>2}: {'PASS' if passed else 'FAIL'}  {detail}")
