"""Exception hierarchy shared by every module."""


class BorderStarError(Exception):
    """Base class for all errors raised by this package."""


class MeasureError(BorderStarError, ValueError):
    """A measure, grid or subset violates its structural invariants."""


class InstanceTooLarge(BorderStarError):
    """Brute-force enumeration was requested above the configured cap."""

    def __init__(self, bits, cap):
        super().__init__(
            f"instance too large for brute force: {bits} axis points > cap {cap}"
        )
        self.bits = bits
        self.cap = cap


class NotIndependent(BorderStarError):
    """A measure that must be a product of its marginals is not."""


class NotIndependentPrior(NotIndependent):
    pass


class NotIndependentPosterior(NotIndependent):
    pass


class NotMonotone(BorderStarError):
    """An interim rule that must be nondecreasing is not."""

    def __init__(self, agents):
        super().__init__(f"interim rule not nondecreasing for agents {list(agents)}")
        self.agents = tuple(agents)


class AtomSplitRequired(BorderStarError):
    """A prior atom would have to be split across several belief atoms."""


class InfeasibleInput(BorderStarError):
    """A construction was asked for on an infeasible input.

    The violating witness is carried on ``verdict``.
    """

    def __init__(self, verdict):
        w = verdict.witness
        msg = "input is infeasible"
        if w is not None:
            msg += f" ({w.form} form violated: lhs={w.lhs}, rhs={w.rhs})"
        elif verdict.reason:
            msg += f" ({verdict.reason})"
        super().__init__(msg)
        self.verdict = verdict


class BadEventStructure(BorderStarError, ValueError):
    """Payoff-relevant events are not pairwise disjoint and exhaustive."""


class SaturatingCut(BorderStarError):
    """``cut_to_witness`` was called on a cut of value one."""
