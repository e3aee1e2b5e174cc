# tests/conftest.py

import pytest

from src.graph.fixtures import BENCHMARK_GRAPHS
from src.train.config import TrainConfig
from src.utils.logger import RunLogger


def pytest_addoption(parser):
    parser.addoption('--runslow', action='store_true', default=False,
                     help='run desk-scale acceptance tests')


def pytest_collection_modifyitems(config, items):
    if config.getoption('--runslow'):
        return
    skip = pytest.mark.skip(reason='needs --runslow')
    for item in items:
        if 'slow' in item.keywords:
            item.add_marker(skip)


@pytest.fixture
def quiet_logger():
    return RunLogger(echo=False)


@pytest.fixture
def tiny_config():
    """Enough to exercise every training path in well under a second per epoch."""
    return TrainConfig(epochs=3, mc_samples=64, estimation_mc_samples=256, mc_batch_size=None,
                       hidden=(4,), patience=2, log_every=1, seed=7)


@pytest.fixture(params=[b.name for b in BENCHMARK_GRAPHS])
def benchmark(request):
    from src.graph.fixtures import BY_NAME
    return BY_NAME[request.param]
