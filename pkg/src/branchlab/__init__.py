"""branchlab: numerical laboratory for branched harmonic fields.

Computes two-valued harmonic sections on flat 2-D domains with prescribed
branch points, extracts the leading branch-point coefficients, evaluates the
nonlocal operator mapping prescribed singular data to leading coefficients,
and runs the deformation / Newton machinery that moves branch points toward
a target coefficient field.  Closed-form flat-model kernels and an
elliptic-curve oracle provide independent cross checks throughout.
"""

__version__ = "0.1.0"
