import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cflab.bench import synthesize_sequence  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def translate_seq_dir(tmp_path_factory):
    return synthesize_sequence(tmp_path_factory.mktemp("translate") / "seq", motion="translate", step_px=2, frames=50)


@pytest.fixture(scope="session")
def static_seq_dir(tmp_path_factory):
    return synthesize_sequence(tmp_path_factory.mktemp("static") / "seq", motion="static", frames=6)


@pytest.fixture(scope="session")
def short_seq_dir(tmp_path_factory):
    return synthesize_sequence(tmp_path_factory.mktemp("short") / "seq", motion="translate", step_px=2, frames=8)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "VERDICTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
