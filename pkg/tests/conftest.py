import numpy as np
import pytest

from spencerdef import flatmodel as fm

_CACHE: dict = {}


def cached_model(p, q, parity="symmetric", **kw):
    key = (p, q, parity, tuple(sorted(kw.items())))
    if key not in _CACHE:
        _CACHE[key] = fm.standard_model(p, q, parity=parity, **kw)
    return _CACHE[key]


@pytest.fixture(scope="session")
def model_1_2():
    return cached_model(1, 2)


@pytest.fixture(scope="session")
def model_1_3():
    return cached_model(1, 3)


@pytest.fixture(scope="session")
def model_0_7_skew():
    return cached_model(0, 7, parity="skew")


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)
