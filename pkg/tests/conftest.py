"""Shared fixtures: repo paths and the sentence corpus."""

from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[1]
FIXTURES = REPO_ROOT / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def sentences() -> list[str]:
    lines = (FIXTURES / "sentences.txt").read_text().splitlines()
    return [line.strip() for line in lines if line.strip()]
