from pathlib import Path

import pytest

DATA_DIR = Path(__file__).parent / "data"
GOLDEN_DIR = Path(__file__).parent / "golden"


@pytest.fixture
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture
def golden_dir() -> Path:
    return GOLDEN_DIR


@pytest.fixture
def queue5_bytes() -> bytes:
    return (DATA_DIR / "queue5.json").read_bytes()


@pytest.fixture
def table3_bytes() -> bytes:
    return (DATA_DIR / "table3_scene.json").read_bytes()
