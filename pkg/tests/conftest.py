import numpy as np
import pytest

from backend.app.schemas import ScenarioParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_scenarios(rng, count, t_sq_range=(0.0, 1.0)):
    return [
        ScenarioParams(
            s=float(rng.uniform(0.1, 2.0)),
            n_bar=float(rng.uniform(0.0, 5.0)),
            t_sq=float(rng.uniform(*t_sq_range)),
        )
        for _ in range(count)
    ]
