"""Shared test fixtures and marker registration."""

from __future__ import annotations

from typing import TYPE_CHECKING

import numpy as np
import pytest

from tests.helpers import speech_like, write_test_wav

if TYPE_CHECKING:
    from pathlib import Path


def pytest_configure(config: object) -> None:
    """Register custom markers."""
    if isinstance(config, pytest.Config):
        config.addinivalue_line("markers", "slow: desk-scale simulations and training runs")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def wav_corpus(tmp_path: Path) -> Path:
    """Three short speech-like sentences at 16 kHz."""
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for i, seconds in enumerate((0.6, 0.8, 0.7)):
        write_test_wav(corpus / f"s{i:02d}.wav", speech_like(seconds, 16_000, seed=i), 16_000)
    return corpus
