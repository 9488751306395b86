"""Score/gradient kernel backends.

Two interchangeable implementations of the per-triple scoring kernels:

* ``toxkg._ckernels`` — Cython extension, compiled at install time when a C
  toolchain is available;
* ``toxkg.kernels.numpy_backend`` — pure numpy, always available.

Selection happens at import. The environment variable ``TOXKG_KERNELS``
forces a backend: ``c``/``compiled`` (error if the extension is missing) or
``py``/``python``/``numpy``. Both backends expose the same function names and
agree numerically (HolE differs algorithmically: FFT vs direct correlation,
equal to ~1e-8).
"""

import os
import types

from . import numpy_backend

_PREF = os.environ.get("TOXKG_KERNELS", "").strip().lower()


def _with_fft_hole(compiled):
    """The compiled backend, with HolE routed to the FFT implementation.

    The Cython HolE kernel evaluates the circular correlation directly in
    O(k^2) per row, which loses badly to the O(k log k) FFT path at the
    embedding dimensions used in practice (see benchmarks/bench_kernels.py),
    so the dispatch object keeps those two functions on numpy.
    """
    ns = types.SimpleNamespace(**{
        name: getattr(compiled, name)
        for name in dir(compiled) if not name.startswith("_")
    })
    ns.hole_scores = numpy_backend.hole_scores
    ns.hole_grads = numpy_backend.hole_grads
    return ns


backend = numpy_backend
_active = "python"

if _PREF in ("", "c", "compiled"):
    try:
        from toxkg import _ckernels

        backend = _with_fft_hole(_ckernels)
        _active = "compiled"
    except ImportError:
        if _PREF in ("c", "compiled"):
            raise ImportError(
                "TOXKG_KERNELS requested the compiled backend but "
                "toxkg._ckernels is not built"
            ) from None
        backend = numpy_backend
elif _PREF in ("py", "python", "numpy"):
    backend = numpy_backend
else:
    raise ImportError(f"unknown TOXKG_KERNELS value: {_PREF!r}")


def active_backend():
    """Name of the selected backend: 'compiled' or 'python'."""
    return _active


def available_backends():
    """Mapping of backend name -> module for every importable backend."""
    found = {"python": numpy_backend}
    try:
        from toxkg import _ckernels

        found["compiled"] = _ckernels
    except ImportError:
        pass
    return found
