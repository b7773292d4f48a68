import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from bbm_lab.spectral import GridMode, make_grid  # noqa: E402


@pytest.fixture
def line_grid():
    # xi_max = 20: room for N = 8 data and its square
    return make_grid(80, 0.25)


@pytest.fixture
def smooth_grid():
    return make_grid(192, 0.125)


@pytest.fixture
def periodic_grid():
    return make_grid(48, 1.0, GridMode.PERIODIC)


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Run inside a scratch directory with outputs redirected there."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("BBM_LAB_OUTPUTS", str(tmp_path / "outputs"))
    monkeypatch.setenv("BBM_LAB_WORKERS", "2")
    return tmp_path
