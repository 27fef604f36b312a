"""Numerical toolkit for folded holomorphic maps into the folded 4-sphere.

Modules
-------
sphere             geometric structures on S^4 and its fold S^3
polarization       compatible triples from skew endomorphisms near the fold
harmonic           spectral boundary value solvers on disks and exteriors
tunneling          tunneling maps, conjugacy checks and construction
moduli             explicit families of folded holomorphic maps
boundary_operator  the fold transmission operator, ellipticity, indices
cli                batch front-end
"""

__version__ = "0.1.0"
