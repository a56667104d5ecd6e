from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from polscat.fock import random_state
from polscat.modespace import FrequencySector, ModeSpace
from polscat.scatmat import dilate_transmission, haar_unitary, random_contraction
from polscat.scatter import ScatteringScenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def random_scenario(seed: int, sizes=(2,), lossless: bool = False, max_sectors: int = 2,
                    max_n_s: int = 3) -> ScatteringScenario:
    """Seeded scenario: 1..max_sectors frequency sectors, dilated random
    contractions (or Haar unitaries when lossless) and a random s-only input."""
    rng = np.random.default_rng(seed)
    n_sectors = int(rng.integers(1, max_sectors + 1))
    dims = [int(rng.integers(1, max_n_s + 1)) for _ in range(n_sectors)]
    mats, secs = [], []
    for k, n in enumerate(dims):
        if lossless:
            T = haar_unitary(n, rng)
        else:
            T = random_contraction(n, rng, float(rng.uniform(0.1, 0.9)))
        Z = dilate_transmission(T, float(rng.uniform()), sector=k)
        mats.append(Z)
        secs.append(FrequencySector(float(k + 1), *Z.dims))
    space = ModeSpace(secs)
    return ScatteringScenario(space, mats, random_state(space, sizes, rng))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
