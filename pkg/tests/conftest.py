import sys
import warnings

import pytest

from epictrl import ModelSpec, SeirsParams, SirParams
from epictrl.pipeline import run_pipeline
from epictrl.scenario import SIR_MU, preset

SIR_PARAMS = SirParams(mu=SIR_MU, beta=0.2, gamma=0.1, n0=1e5)
SEIRS_PARAMS = SeirsParams(mu=3e-5, beta=0.25, gamma=0.14, alpha=0.33, theta=0.07, n0=1e5)


@pytest.fixture
def sir_model():
    return ModelSpec(SIR_PARAMS, (95000.0, 5000.0, 0.0))


@pytest.fixture
def seirs_model():
    return ModelSpec(SEIRS_PARAMS, (95000.0, 0.0, 5000.0, 0.0))


@pytest.fixture(scope="session")
def sir_run():
    """Full four-kind run of the SIR preset at the default mesh (shared, slow)."""
    return run_pipeline(preset("sir-ebola-2015"))


@pytest.fixture(scope="session")
def seirs_run():
    return run_pipeline(preset("seirs-trawicki-2017"))


@pytest.fixture
def no_weight_warning():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        yield


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
