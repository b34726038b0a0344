"""Numerical toolkit for the nonlocal logistic elliptic system with
nonlinear advection: eigenvalue thresholds, positive-branch continuation
and bifurcation-direction analysis."""

try:
    from ._core import *  # noqa: F401,F403  (installed layout)
except ImportError:  # in-tree build: _core sits next to the package on sys.path
    from _core import *  # noqa: F401,F403

__version__ = "0.1.0"
