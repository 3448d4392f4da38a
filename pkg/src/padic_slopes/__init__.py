"""Exact truncated Tate-algebra arithmetic and p-adic spectral computations.

Subpackages cover the coefficient rings, Mahler expansions, operator
matrices on the orthonormalized function/distribution spaces, Fredholm
characteristic series with Newton polygons and slope factorization, root
data with the classicality bound, the rank-one U_p engine, determinant
laws, and a JSON-driven command line front end.
"""

from .rings import (
    FpLaurent,
    MixedAnnulus,
    PrecisionError,
    Qp,
    Ring,
    RingElem,
    RingError,
    RingSpec,
    Zp,
    arith,
    make_ring,
)

__version__ = "0.1.0"
