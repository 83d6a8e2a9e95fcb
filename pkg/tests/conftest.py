"""Shared fixtures: benchmark models, seeded generators and random box collections."""

import numpy as np
import pytest

from services.benchmarks import tank_model, vdp_model
from services.interval import Box, BoxCollection
from state import TankParams, VdPParams


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


@pytest.fixture
def vdp():
    return vdp_model(VdPParams())


@pytest.fixture
def vdp_easy():
    return vdp_model(VdPParams(mu=0.1))


@pytest.fixture
def tank5():
    return tank_model(TankParams(n=5))


@pytest.fixture
def tank30():
    return tank_model(TankParams(n=30))


def sample_in_box(box: Box, count: int, rng) -> np.ndarray:
    """Uniform samples from a box, shape (count, n)."""
    return rng.uniform(box.lo, box.hi, size=(count, box.dim))


def sample_in_collection(collection: BoxCollection, count: int, rng) -> np.ndarray:
    """Uniform samples from randomly chosen member boxes."""
    picks = rng.integers(0, len(collection), size=count)
    return rng.uniform(collection.lo[picks], collection.hi[picks])


def random_collection(rng, count: int, n: int = 2, span: float = 10.0,
                      max_width: float = 3.0) -> BoxCollection:
    """Random boxes with strictly positive widths inside [0, span]^n."""
    lo = rng.uniform(0.0, span, size=(count, n))
    widths = rng.uniform(0.05, max_width, size=(count, n))
    return BoxCollection(lo, lo + widths)


def nested_collection(rng, count: int, n: int = 2) -> BoxCollection:
    """Random boxes where roughly half are shrunk copies of earlier ones."""
    base = random_collection(rng, count, n)
    lo = base.lo.copy()
    hi = base.hi.copy()
    for b in range(1, count):
        if rng.random() < 0.5:
            parent = rng.integers(0, b)
            shrink = rng.uniform(0.0, 0.3, size=(2, n)) * (hi[parent] - lo[parent])
            lo[b] = lo[parent] + shrink[0]
            hi[b] = hi[parent] - shrink[1]
    return BoxCollection(lo, hi)
