import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from orthant_gibbs import models


@pytest.fixture
def logistic_model():
    return models.simulate("logistic", np.array([1.0, 0.5, 0.0]), 200, seed=7)


@pytest.fixture
def poisson_model():
    return models.simulate("poisson", np.array([1.0, 0.5, 0.0]), 200, seed=7)


@pytest.fixture
def gmm_model():
    theta_star = np.array([1.0, 1.0, 4.0, 0.0])
    return models.simulate("gmm", theta_star, 300, seed=7,
                           weights=np.array([0.6, 0.4]),
                           covariances=np.stack([np.eye(2), np.eye(2)]))
