"""Entanglement entropy of free fermionic chains, Mobius flows on couplings and
their Riemann-surface asymptotics."""

from ._core import *  # noqa: F401,F403
from ._core import FermobiusError, boost, entropy

__version__ = "0.1.0"


def entropy_shift(chain, zeta, alpha, X, mode="thermo"):
    """S(boosted chain) - S(chain) for a single interval of length X."""
    moved = transform(boost(zeta), chain)  # noqa: F405
    return entropy(moved, alpha, X=X, mode=mode) - entropy(chain, alpha, X=X, mode=mode)
