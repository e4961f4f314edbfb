"""Budget-constrained bid optimization for real-time bidding.

Thin wrapper around the C++ core: log parsing, CTR estimation, market-price
landscape fitting, the value-table solver with its bid policies, the neural
value-differential approximator, and episode-based auction replay.
"""

from bidopt._core import *  # noqa: F401,F403

__all__ = [name for name in dir() if not name.startswith("_")]
