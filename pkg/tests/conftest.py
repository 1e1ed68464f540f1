import numpy as np
import pytest

from heatlaser import BathSpec, build_four_level, build_three_level


def make_fig2_model(n_h=1.0, n_c=0.05, g=14.0, kappa=1.0, gamma=32.0):
    """Standard three-level configuration used throughout the suite."""
    return build_three_level(BathSpec(gamma, n_h), BathSpec(gamma, n_c), g, kappa)


def make_fig5_model(n_h=0.5, n_c=0.1, n_a=0.1, g=14.0, kappa=1.0, gamma=32.0):
    """Standard four-level configuration."""
    return build_four_level(
        BathSpec(gamma, n_h), BathSpec(gamma, n_c), BathSpec(gamma, n_a), g, kappa
    )


def random_three_level(rng):
    gh, gc = rng.uniform(0.5, 50.0, 2)
    nh, nc = rng.uniform(0.01, 5.0, 2)
    g = rng.uniform(0.5, 30.0)
    return build_three_level(BathSpec(gh, nh), BathSpec(gc, nc), g, 1.0)


def random_four_level(rng):
    gh, gc, ga = rng.uniform(0.5, 50.0, 3)
    nh, nc, na = rng.uniform(0.01, 5.0, 3)
    g = rng.uniform(0.5, 30.0)
    return build_four_level(BathSpec(gh, nh), BathSpec(gc, nc), BathSpec(ga, na), g, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
