import random

import numpy as np
import pytest

from rackcoop import codec, field, params


@pytest.fixture(scope="session")
def base_params():
    return params.validate(8, 4, 2, 4, 2, 2)


@pytest.fixture(scope="session")
def base_spec(base_params):
    return codec.build_code(base_params, field.gf256(), seed=7)


@pytest.fixture(scope="session")
def base_message(base_spec):
    rng = random.Random(99)
    return np.array(
        [rng.randrange(base_spec.field.order) for _ in range(base_spec.file_size)],
        dtype=np.int64,
    )


@pytest.fixture(scope="session")
def base_state(base_spec, base_message):
    """Encoded base cluster; tests that mutate must clone it."""
    return codec.encode(base_spec, base_message)


@pytest.fixture()
def fresh_state(base_state):
    return base_state.clone()
