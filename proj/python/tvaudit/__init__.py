"""Test-validity auditing for sampled interaction graphs."""

try:
    from ._core import *  # noqa: F401,F403  (installed package layout)
except ImportError:  # build-tree layout: extension dir sits on PYTHONPATH
    from _core import *  # noqa: F401,F403
