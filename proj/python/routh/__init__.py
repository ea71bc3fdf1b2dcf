"""Bubble-cluster toolkit bindings.

Everything is re-exported from the compiled extension; structured arguments
and results are JSON strings (see each function's docstring).
"""

try:
    from ._routh import *  # noqa: F401,F403  (installed wheel layout)
except ImportError:  # in-tree builds put the extension on PYTHONPATH as a top-level module
    from _routh import *  # noqa: F401,F403
