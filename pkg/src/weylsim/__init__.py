"""Quasiprobability simulation and benchmarking of noisy qudit circuits in the Weyl basis."""

__version__ = "0.1.0"

from .weyl_core import (  # noqa: F401
    WeylIndex,
    character,
    materialize,
    weyl_coefficient,
    weyl_conjugate,
    weyl_mul,
)
