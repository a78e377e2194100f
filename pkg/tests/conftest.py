import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from examsched.timegrid import ExamPeriodConfig, build_grid, pattern_sets


@pytest.fixture(scope="session")
def fixture_dir() -> Path:
    return Path(__file__).parent.parent / "src" / "examsched" / "fixtures"


@pytest.fixture(scope="session")
def default_grid():
    return build_grid(ExamPeriodConfig.standard(6))


@pytest.fixture(scope="session")
def default_patterns(default_grid):
    return pattern_sets(default_grid)
