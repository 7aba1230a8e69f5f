from __future__ import annotations

from pathlib import Path

import pytest

from subtherm import compute_phase_congruency, detect_features, load_pgm

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def frame_path() -> Path:
    return DATA_DIR / "frame_80x60.pgm"


@pytest.fixture(scope="session")
def frame(frame_path):
    return load_pgm(frame_path)


@pytest.fixture(scope="session")
def frame_pc(frame):
    return compute_phase_congruency(frame)


@pytest.fixture(scope="session")
def frame_features(frame_pc):
    return detect_features(frame_pc, 0.1)
