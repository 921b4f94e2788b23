class PdaeError(Exception):
    """Base class for solver and diagnostics failures."""


class NumericalError(PdaeError):
    pass


class SingularMatrixError(NumericalError):
    def __init__(self, pivot_index: int, pivot: float):
        self.pivot_index = pivot_index
        self.pivot = pivot
        super().__init__(f"matrix is singular: pivot {pivot_index} has magnitude {pivot:.3e}")


class SingularCellError(NumericalError):
    def __init__(self, i: int, j: int, pivot_index: int):
        self.i = i
        self.j = j
        self.pivot_index = pivot_index
        super().__init__(
            f"singular collocation system in cell (i={i}, j={j}) at pivot {pivot_index}; "
            "check the separation condition r*xi_gbar*xi_J != -xi_g (analyze command)"
        )


class InstabilityError(NumericalError):
    def __init__(self, i: int, j: int):
        self.i = i
        self.j = j
        super().__init__(f"non-finite values after cell (i={i}, j={j})")


class PreconditionError(PdaeError):
    pass


class UnsupportedOperationError(PdaeError):
    pass
