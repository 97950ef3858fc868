"""Monte Carlo laboratory for stationary random fields.

Thin wrapper around the compiled extension: weight families and their derived
scales, exact circulant-embedding Gaussian synthesis, Boolean and block-iid
models, spatial-average estimators, predicted bound curves and exact
small-instance oracles.
"""

from ._core import *  # noqa: F401,F403
from ._core import __version__  # noqa: F401
