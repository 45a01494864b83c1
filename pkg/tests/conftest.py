import os
import sys
from pathlib import Path

import hypothesis
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from artifact.fixtures import all_fixtures, chain3, diamond_fixture, fun_const, pure_set  # noqa: E402

hypothesis.settings.register_profile("default", deadline=None, max_examples=40)
hypothesis.settings.register_profile("fast", deadline=None, max_examples=5)
hypothesis.settings.register_profile("thorough", deadline=None, max_examples=400)
hypothesis.settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def s2():
    return pure_set(2)


@pytest.fixture
def s3():
    return pure_set(3)


@pytest.fixture
def c3():
    return chain3()


@pytest.fixture
def d4():
    return diamond_fixture()


@pytest.fixture
def f3():
    return fun_const()


@pytest.fixture(params=[m.name for m in all_fixtures()])
def fixture_structure(request):
    return {m.name: m for m in all_fixtures()}[request.param]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
