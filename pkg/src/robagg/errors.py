"""Exception taxonomy for robagg.

Every error carries an ``exit_code`` so the CLI can map failures onto its
documented process exit codes without string matching:

    2  bad input (schema violations, malformed vectors, unknown ids, ...)
    3  a solver gave up (no root, no bracket, no convergence)
    4  the problem is well-posed but infeasible (empty intersection, ...)
"""


class RobaggError(Exception):
    """Base class for all package errors."""

    exit_code = 1


# ---------------------------------------------------------------------------
# input / schema problems -> exit code 2
# ---------------------------------------------------------------------------

class InputError(RobaggError):
    """Invalid argument values or malformed problem data."""

    exit_code = 2


class SchemaError(InputError):
    """A scenario file violates the documented schema."""


class DimensionMismatch(InputError):
    """Vectors or distributions defined over different state spaces."""


class AllZero(InputError):
    """A raw mass vector sums to zero and cannot be normalized."""


class NegativeMass(InputError):
    """A raw mass vector has a negative entry."""


class WeightSumError(InputError):
    """Explicit weights do not sum to one within tolerance."""


class EmptyList(InputError):
    """An operation that needs at least one element got none."""


class RhoOutOfRange(InputError):
    """The rho-divergence order must lie strictly inside (0, 1)."""


class DomainError(InputError):
    """An argument sits outside a function's mathematical domain."""


class UnknownAct(InputError):
    """An act id is not declared in the profile."""


class UnknownOutcome(InputError):
    """An act maps a state to an outcome an agent has no utility for."""


class TooFewSignals(InputError):
    """The shrinkage preset needs at least three advisor signals."""


class InconsistentInputs(InputError):
    """Observed certainty equivalents admit no parameter in range."""


# ---------------------------------------------------------------------------
# solver failures -> exit code 3
# ---------------------------------------------------------------------------

class SolverError(RobaggError):
    """Base class for numerical-solver failures."""

    exit_code = 3


class SolverDiverged(SolverError):
    """Iterates left the feasible region beyond tolerance."""


class NoConvergence(SolverError):
    """An iteration cap was reached without meeting tolerance."""


class BracketFailure(SolverError):
    """A bracket for a 1-d search never captured the optimum/root."""


class NoRoot(SolverError):
    """A scalar equation has no sign change on the expanded bracket."""


class NonConcaveDetected(SolverError):
    """A pre-scan found multiple interior local maxima where one was assumed."""


# ---------------------------------------------------------------------------
# infeasibility -> exit code 4
# ---------------------------------------------------------------------------

class InfeasibleError(RobaggError):
    """The constraint set is empty or the data rules out any answer."""

    exit_code = 4


class EmptyIntersection(InfeasibleError):
    """The intersection of the given divergence balls is empty."""


class AbsoluteContinuityFailure(InfeasibleError):
    """A divergence is +inf everywhere on the feasible set."""


class NoFosdOrder(InfeasibleError):
    """Candidate beliefs are not totally ordered by stochastic dominance."""


class TargetOutOfRange(InfeasibleError):
    """No reweighting of the reference belief can reach the target price."""
