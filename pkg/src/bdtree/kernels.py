"""Backend selection for the scan kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback. Set ``BDTREE_BACKEND=python`` to force the fallback.
"""
import os

from . import _fallback

fallback = _fallback

if os.environ.get("BDTREE_BACKEND", "").lower() == "python":
    compiled = None
else:
    try:
        from . import _kernels as compiled
    except ImportError:  # extension not built
        compiled = None

impl = compiled if compiled is not None else _fallback
BACKEND = "cython" if compiled is not None else "python"

pair_uniforms = impl.pair_uniforms
min_uniform_to_set = impl.min_uniform_to_set
prim_uniform = impl.prim_uniform
prim_split = impl.prim_split
