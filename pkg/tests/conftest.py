import numpy as np
import pytest

import toxkg.kge as kge_mod
from toxkg.kernels import available_backends


@pytest.fixture(params=sorted(available_backends()))
def kernel_backend(request, monkeypatch):
    """Run the decorated test once per importable kernel backend, with the
    kge dispatch layer routed through it."""
    module = available_backends()[request.param]
    monkeypatch.setattr(kge_mod, "backend", module)
    return module


def relative_error(a, b, floor=1.0):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    scale = np.maximum(floor, np.maximum(np.abs(a), np.abs(b)))
    return np.max(np.abs(a - b) / scale) if a.size else 0.0
