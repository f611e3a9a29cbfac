import numpy as np
import pytest

from dwadlab.errors import ConfigurationError
from dwadlab.rng import ROLES, stream


def test_same_key_same_stream():
    a = stream(7, 3, "data").standard_normal(5)
    b = stream(7, 3, "data").standard_normal(5)
    assert np.array_equal(a, b)


def test_keys_separate_streams():
    draws = {(s, r, role): stream(s, r, role).standard_normal(4).tobytes()
             for s in (0, 1) for r in (0, 1, 2) for role in ROLES}
    assert len(set(draws.values())) == len(draws)


def test_stream_is_philox():
    assert type(stream(0).bit_generator).__name__ == "Philox"


@pytest.mark.parametrize("args", [(None,), (-1,), (1.5,), (0, -1), (0, 0, "weights")])
def test_bad_keys(args):
    with pytest.raises(ConfigurationError):
        stream(*args)
