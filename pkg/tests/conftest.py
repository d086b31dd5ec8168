import shutil
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from hypersynth.cli import load_spec  # noqa: E402


@pytest.fixture
def bench():
    return load_spec


@pytest.fixture
def z3_cmd():
    path = shutil.which("z3")
    if path is None:
        pytest.skip("z3 not installed")
    return f"{path} -smt2"
