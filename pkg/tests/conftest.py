import random

import pytest

from pairkex.backend import param_gen

TEST_SEED = b"pairkex-test-vectors"


@pytest.fixture(scope="session")
def params():
    return param_gen("tiny", seed=TEST_SEED)


@pytest.fixture()
def rng():
    return random.Random(0x5EED)
