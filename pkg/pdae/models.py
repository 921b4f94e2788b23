from typing import List, Optional, Union

from pydantic import BaseModel, root_validator, validator

from pdae.services.stencil import MAX_DEGREE


# ---------------------------------------------------------
# Grid
# ---------------------------------------------------------
class GridSpec(BaseModel):
    x0: float = 0.0
    X: float = 1.0
    t0: float = 0.0
    T: float = 1.0
    h: float
    tau: float
    # derived
    n1: int = 0
    n2: int = 0
    r: float = 0.0

    class Config:
        allow_mutation = False

    @root_validator(skip_on_failure=True)
    def derive_counts(cls, values):
        x0, X, t0, T = values["x0"], values["X"], values["t0"], values["T"]
        h, tau = values["h"], values["tau"]
        if h <= 0 or tau <= 0:
            raise ValueError("steps h and tau must be positive")
        if X <= x0 or T <= t0:
            raise ValueError("domain must satisfy x0 < X and t0 < T")
        n1 = int(round((X - x0) / h))
        n2 = int(round((T - t0) / tau))
        if n1 < 1 or abs(n1 * h - (X - x0)) > 1e-9 * (X - x0):
            raise ValueError(f"h={h} does not divide [{x0}, {X}] into whole steps")
        if n2 < 1 or abs(n2 * tau - (T - t0)) > 1e-9 * (T - t0):
            raise ValueError(f"tau={tau} does not divide [{t0}, {T}] into whole steps")
        values["n1"] = n1
        values["n2"] = n2
        values["r"] = tau / h
        return values

    def x(self, i: int) -> float:
        return self.x0 + i * self.h

    def t(self, j: int) -> float:
        return self.t0 + j * self.tau


# ---------------------------------------------------------
# Solver report
# ---------------------------------------------------------
class SolveReport(BaseModel):
    delta_u: Optional[float] = None
    max_solution_norm: float
    cells_solved: int
    clamped_cells: int = 0
    wall_time: float
    warnings: List[str] = []
    n1: int
    n2: int
    m1: int
    m2: int
    h: float
    tau: float
    r: float
    stride: str = "cell"


# ---------------------------------------------------------
# Pencil report
# ---------------------------------------------------------
class RootRecord(BaseModel):
    re: float
    im: float
    mult: int


class SampleRecord(BaseModel):
    x: float
    t: float
    rank_a: int
    rank_b: int
    degree: int
    roots: List[RootRecord]
    rank_degree_b: bool
    rank_degree_a: bool


class PencilReport(BaseModel):
    samples: List[SampleRecord]
    rank_degree_b: bool
    rank_degree_a: bool
    multiplicity_constant: bool
    # null when there is no J block (d = 0) or no canonical data
    lemma2_min_separation: Optional[float] = None
    mu: float
    xi_j_min: Optional[float] = None
    canonical_residual: Optional[float] = None
    mu_x: Optional[float] = None
    status: str = "pass"
    warnings: List[str] = []


# fields emitted by the analyze command
PENCIL_JSON_FIELDS = {
    "samples": {"__all__": {"x", "t", "rank_a", "rank_b", "degree", "roots"}},
    "rank_degree_b": ...,
    "rank_degree_a": ...,
    "multiplicity_constant": ...,
    "lemma2_min_separation": ...,
    "mu": ...,
    "xi_j_min": ...,
    "canonical_residual": ...,
}


# ---------------------------------------------------------
# Theory report
# ---------------------------------------------------------
class Lemma3Fit(BaseModel):
    m: int
    alpha_sequence: List[float]
    residuals: List[float]
    fitted_order: Optional[float] = None
    passed: bool = True


class GammaSpectrum(BaseModel):
    m: int
    min_re: float
    # counts toward gamma_passed
    required: bool


class TheoryCheckReport(BaseModel):
    el19_residual: float
    el19_passed: bool
    lemma3_orders: List[Lemma3Fit]
    lemma3_passed: bool
    gamma_eig_min_real: float
    gamma_passed: bool
    gamma_spectra: List[GammaSpectrum] = []
    sign_convention_note: str
    gamma_note: str = ""

    @property
    def passed(self) -> bool:
        return self.el19_passed and self.lemma3_passed and self.gamma_passed


# ---------------------------------------------------------
# Sweeps
# ---------------------------------------------------------
class SweepRow(BaseModel):
    label: Union[int, str]
    example: str
    h: float
    tau: float
    x0: float = 0.0
    X: float = 1.0
    t0: float = 0.0
    T: float = 1.0
    m1: int
    m2: int
    stride: str = "cell"
    expected_delta_u: Optional[float] = None

    @validator("example", pre=True)
    def example_as_text(cls, v):
        return str(v)

    @validator("stride")
    def known_stride(cls, v):
        if v not in ("cell", "node"):
            raise ValueError("stride must be cell or node")
        return v

    @validator("m1", "m2")
    def degree_in_range(cls, v):
        if not 1 <= v <= MAX_DEGREE:
            raise ValueError(f"degree must be in 1..{MAX_DEGREE}")
        return v

    @root_validator(skip_on_failure=True)
    def grid_is_valid(cls, values):
        grid = GridSpec(x0=values["x0"], X=values["X"], t0=values["t0"], T=values["T"],
                        h=values["h"], tau=values["tau"])
        if values["m1"] > grid.n1 or values["m2"] > grid.n2:
            raise ValueError("cell size m1 x m2 exceeds the grid")
        return values

    def grid(self) -> GridSpec:
        return GridSpec(x0=self.x0, X=self.X, t0=self.t0, T=self.T, h=self.h, tau=self.tau)


class SweepConfig(BaseModel):
    rows: List[SweepRow]
    output_format: str = "table"
    tolerance_factor: float = 3.0

    @validator("rows")
    def rows_not_empty(cls, v):
        if not v:
            raise ValueError("sweep config has no rows")
        return v

    @validator("output_format")
    def known_format(cls, v):
        if v not in ("table", "csv", "json"):
            raise ValueError("output_format must be table, csv or json")
        return v

    @validator("tolerance_factor")
    def factor_at_least_one(cls, v):
        if v < 1.0:
            raise ValueError("tolerance_factor must be >= 1")
        return v


class SweepResultRow(BaseModel):
    N: Union[int, str]
    h: float
    tau: float
    t0: float
    T: float
    x0: float
    X: float
    m1: int
    m2: int
    delta_u: Optional[float] = None
    expected_delta_u: Optional[float] = None
    within_tolerance: Optional[bool] = None
    error: Optional[str] = None
