"""Exception types raised across the package."""


class FlagRiccatiError(Exception):
    """Base class for all package errors."""


class NotHermitian(FlagRiccatiError, ValueError):
    def __init__(self, defect):
        self.defect = float(defect)
        super().__init__(f"matrix is not Hermitian (defect {self.defect:.3e})")


class NotPositiveDefinite(FlagRiccatiError, ValueError):
    def __init__(self, min_eigenvalue):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"matrix is not positive definite (min eigenvalue {self.min_eigenvalue:.3e})"
        )


class SingularMatrix(FlagRiccatiError, ValueError):
    def __init__(self, min_singular_value):
        self.min_singular_value = float(min_singular_value)
        super().__init__(
            f"matrix is numerically singular (min singular value {self.min_singular_value:.3e})"
        )


class IndexOutOfRange(FlagRiccatiError, IndexError):
    pass


class UnsupportedPartition(FlagRiccatiError, ValueError):
    pass


class StepRejected(FlagRiccatiError, RuntimeError):
    """Unitarity defect of the propagator grew past the rejection threshold."""

    def __init__(self, time, defect):
        self.time = float(time)
        self.defect = float(defect)
        super().__init__(
            f"unitarity defect {self.defect:.3e} at t={self.time:.6g}; step too large"
        )


class ChartSingular(FlagRiccatiError, ArithmeticError):
    """The block inverted during coordinate extraction is numerically singular.

    ``which`` names the inversion that failed ("first" or "second"), ``time``
    is filled in when the failure happens along a trajectory.
    """

    def __init__(self, condition, which="first", time=None):
        self.condition = float(condition)
        self.which = which
        self.time = time
        where = "" if time is None else f" at t={time:.6g}"
        super().__init__(
            f"chart singular{where}: {which} block has condition {self.condition:.3e}"
        )


class ChartEscape(FlagRiccatiError, ArithmeticError):
    """A Riccati trajectory left the coordinate chart.

    ``partial`` holds the trajectory recorded up to ``last_good_time``.
    """

    def __init__(self, time, last_good_time, norm, partial=None):
        self.time = float(time)
        self.last_good_time = float(last_good_time)
        self.norm = float(norm)
        self.partial = partial
        super().__init__(
            f"coordinates left the chart at t={self.time:.6g} "
            f"(norm {self.norm:.3e}; last good t={self.last_good_time:.6g})"
        )


class DegenerateConfiguration(FlagRiccatiError, ZeroDivisionError):
    def __init__(self, denominators, time=None):
        self.denominators = tuple(denominators)
        self.time = time
        where = "" if time is None else f" at t={time:.6g}"
        super().__init__(f"degenerate configuration{where}: vanishing {', '.join(self.denominators)}")


class ConfigError(FlagRiccatiError, ValueError):
    pass
