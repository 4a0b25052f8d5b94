"""Central numeric conventions.

Natural logarithms everywhere, 0*log(0) = 0, and three shared tolerances:
simplex membership 1e-10, solver termination 1e-8, finite-difference
step 1e-5.
"""

SIMPLEX_TOL = 1e-10
SOLVER_TOL = 1e-8
FD_STEP = 1e-5
