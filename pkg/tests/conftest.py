import numpy as np
import pytest

from quatsub import fixtures
from quatsub.manifest import fixture_from_dict


def make_fixture(total, base, components, box=None, structure=None, name="t"):
    """Small helper so tests can describe a submersion inline."""
    tdim = total if isinstance(total, int) else len(total)
    bdim = base if isinstance(base, int) else len(base)
    data = {
        "total": {"dim": tdim, "metric": "euclidean" if isinstance(total, int) else total},
        "base": {"dim": bdim, "metric": "euclidean" if isinstance(base, int) else base},
        "map": {"components": components},
    }
    data["total"]["box"] = box if box is not None else [[-1.0, 1.0]] * tdim
    if structure is not None:
        data["structure"] = structure
    return fixture_from_dict(data, name)


@pytest.fixture(scope="session")
def corpus():
    return {name: fixtures.load(name) for name in fixtures.names()}


def central_grad(f, p, h=1e-5):
    p = np.asarray(p, float)
    out = []
    for i in range(p.size):
        e = np.zeros_like(p)
        e[i] = h
        out.append((np.asarray(f(p + e)) - np.asarray(f(p - e))) / (2 * h))
    return np.stack(out, axis=-1)
