"""Exact symbolic toolkit for deformed loop-algebra modules.

Everything is computed over an exact rational-function ground field in the
deformation variable t (with q = t**2) and finitely many declared spectral
parameters.  Series and distribution identities are checked on explicit
finite windows, never numerically.
"""

from .scalar import ScalarField, SpectralPoint

__all__ = ["ScalarField", "SpectralPoint"]
