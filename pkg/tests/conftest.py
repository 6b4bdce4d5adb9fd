import numpy as np
import pytest

from colorevo import build_meaning_model, default_grid


@pytest.fixture(scope="session")
def grid():
    return default_grid()


@pytest.fixture(scope="session")
def meaning(grid):
    return build_meaning_model(grid)


@pytest.fixture(scope="session")
def tiny_domain():
    """Six chips in three well-separated pairs, for exhaustive-search oracles.

    Returns (labs, prior, meaning-likelihood, sigma_sq): a miniature analog
    of the full stimulus space small enough to brute-force.
    """
    labs = np.array(
        [
            [10.0, 0.0, 0.0],
            [12.0, 0.0, 0.0],
            [60.0, 50.0, 0.0],
            [62.0, 50.0, 0.0],
            [90.0, -50.0, 30.0],
            [92.0, -50.0, 30.0],
        ]
    )
    prior = np.full(6, 1.0 / 6.0)
    # wide enough that meanings overlap across clusters (lossy channel),
    # so the degenerate encoder is uniquely optimal at beta = 1
    sigma_sq = 600.0
    d2 = ((labs[:, None, :] - labs[None, :, :]) ** 2).sum(-1)
    like = np.exp(-d2 / (2 * sigma_sq))
    like /= like.sum(1, keepdims=True)
    return labs, prior, like, sigma_sq
