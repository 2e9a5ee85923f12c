"""Hot kernels: Gibbs sweeps and K-Means iterations.

The compiled Cython backend is used when its extension module built; the
pure-Python backend is a drop-in replacement (bit-identical Gibbs chains,
same K-Means iteration semantics). Set ``STORMTOPICS_KERNELS=python`` to
force the fallback, e.g. for benchmarking one against the other.
"""

import os

if os.environ.get("STORMTOPICS_KERNELS", "").lower() == "python":
    from stormtopics._kernels import _py as _impl
else:
    try:
        from stormtopics._kernels import _ext as _impl  # type: ignore[no-redef]
    except ImportError:
        from stormtopics._kernels import _py as _impl  # type: ignore[no-redef]

backend = _impl.name
lda_sweep = _impl.lda_sweep
btm_sweep = _impl.btm_sweep
lloyd_run = _impl.lloyd_run
elkan_run = _impl.elkan_run

__all__ = ["backend", "lda_sweep", "btm_sweep", "lloyd_run", "elkan_run"]
