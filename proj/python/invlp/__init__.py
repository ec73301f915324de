"""Learning parametric linear programs from observed optimal decisions.

Thin wrapper around the compiled `_invlp` module: an interior-point LP
solver, loss gradients through the solution map, parametric model families,
and the bi-level learning harness.
"""

try:
    from ._invlp import *  # noqa: F401,F403  (installed layout)
    from . import _invlp as _impl
except ImportError:  # build-tree layout: _invlp sits next to the package
    from _invlp import *  # noqa: F401,F403
    import _invlp as _impl

__all__ = [name for name in dir(_impl) if not name.startswith("_")]
__version__ = "0.1.0"
