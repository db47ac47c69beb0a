import numpy as np
import pytest

from evcap.events import EVENT_DTYPE, EventStream, SensorGeometry


def random_stream(
    rng: np.random.Generator,
    geometry: SensorGeometry,
    count: int,
    t_max: int = 1_000_000,
    allow_pad: bool = False,
) -> EventStream:
    """A sorted, in-bounds stream with random events."""
    arr = np.zeros(count, dtype=EVENT_DTYPE)
    arr["t"] = np.sort(rng.integers(0, t_max, size=count))
    arr["x"] = rng.integers(0, geometry.width, size=count)
    arr["y"] = rng.integers(0, geometry.height, size=count)
    choices = (-1, 0, 1) if allow_pad else (-1, 1)
    arr["p"] = rng.choice(choices, size=count)
    return EventStream(geometry, arr)


@pytest.fixture
def rng():
    return np.random.default_rng(0)
