import pytest

from segworld.core.benchkit.toy import generate_toy_dataset


def pytest_addoption(parser):
    parser.addoption(
        "--runslow", action="store_true", default=False, help="run long acceptance tests"
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def toy_samples():
    """Standard toy world: 8 train and 4 test samples, one test sample on a train image."""
    return generate_toy_dataset(train=8, test=4, overlap_fraction=0.25, seed=0)
