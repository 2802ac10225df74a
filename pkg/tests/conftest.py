import numpy as np
import pytest
from hypothesis import settings, strategies as st

from garidec.gf2model import derive_uv, save_dem
from garidec.synthetic import gross_like_dem, random_toy_dem, surface3_dem

settings.register_profile("default", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def toy(seed: int, **kw):
    return random_toy_dem(np.random.default_rng(seed), **kw)


@pytest.fixture(scope="session")
def gross_dem():
    return gross_like_dem(seed=0)


@pytest.fixture(scope="session")
def gross_model(gross_dem):
    return derive_uv(gross_dem)


@pytest.fixture(scope="session")
def gross_path(tmp_path_factory, gross_dem):
    path = tmp_path_factory.mktemp("dem") / "gross.json"
    save_dem(gross_dem, path)
    return path


@pytest.fixture(scope="session")
def surface_dem():
    return surface3_dem()


@pytest.fixture(scope="session")
def surface_path(tmp_path_factory, surface_dem):
    path = tmp_path_factory.mktemp("dem") / "surface3.json"
    save_dem(surface_dem, path)
    return path


# acceptance lines, echoed in the terminal summary so they survive output capture
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
