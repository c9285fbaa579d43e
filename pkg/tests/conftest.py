import numpy as np
import pytest

from symspace.verify import rand_ball, rand_orthogonal, rand_spd, rand_sym, rand_unit


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


class Draw:
    """Bundles the random-input helpers around one generator."""

    def __init__(self, rng):
        self.rng = rng

    def sym(self, m, scale=1.0):
        return rand_sym(self.rng, m, scale)

    def spd(self, m):
        return rand_spd(self.rng, m)

    def ball(self, m, r=0.9):
        return rand_ball(self.rng, m, r)

    def unit(self, m):
        return rand_unit(self.rng, m)

    def orth(self, m):
        return rand_orthogonal(self.rng, m)


@pytest.fixture
def draw(rng):
    return Draw(rng)
