"""Finite matrix models of compact surfaces.

Subpackages:

* ``angmom``       exact Clebsch-Gordan / 3j / 6j coefficients
* ``heisenberg``   exact Heisenberg-plane algebra and star products
* ``fuzzy_sphere`` su(2) fuzzy sphere, harmonics and product law
* ``surfaces``     surfaces of rotation and the noncommutative torus
* ``geometry``     Poisson calculus, metric from brackets, limit checks
* ``encode``       field <-> matrix pipeline (phi_n / upsilon_n)
* ``studies``      convergence studies over N
* ``cli``          command-line driver
"""

__version__ = "0.1.0"

from . import angmom, encode, fuzzy_sphere, geometry, heisenberg, sphharm, studies, surfaces

__all__ = [
    "angmom",
    "heisenberg",
    "fuzzy_sphere",
    "surfaces",
    "geometry",
    "encode",
    "sphharm",
    "studies",
]
