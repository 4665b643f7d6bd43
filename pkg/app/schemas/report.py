from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from ..core.config import REPORT_SCHEMA_VERSION


class AmplifierParamsOut(BaseModel):
    a: float
    tau: float
    k_max: int


class RunReport(BaseModel):
    schema_version: int = Field(REPORT_SCHEMA_VERSION, serialization_alias="schema")
    instance: Optional[str] = None
    n: int
    num_clauses: int
    r: Optional[int] = None
    q_squared: float
    params: AmplifierParamsOut
    verdict: str
    crossing_step: Optional[int] = None
    trajectory: Optional[List[float]] = None
    wall_time: Optional[float] = None

    @model_validator(mode="after")
    def _consistent(self):
        if self.r is not None and abs(self.r / 2**self.n - self.q_squared) > 1e-12:
            raise ValueError(f"r/2^n = {self.r / 2**self.n!r} disagrees with q_squared = {self.q_squared!r}")
        if (self.verdict == "SAT") != (self.crossing_step is not None):
            raise ValueError("verdict must be SAT exactly when a crossing step is present")
        return self


class OracleReport(BaseModel):
    instance: Optional[str] = None
    n: int
    r: int
    fraction: float
    formula: Optional[dict] = None


class LyapunovReport(BaseModel):
    a: float
    x0: float
    burn_in: int
    samples: int
    # null when every sample was skipped
    exponent: Optional[float]
    used: int
    skipped: int


class SlaterReport(BaseModel):
    N: int
    d: int
    norm: float
    is_zero: bool
    amplitudes: Optional[List[dict]] = None


class OverlapReport(BaseModel):
    N: int
    d: int
    overlap: List[float]
    brute_force: List[float]
    abs_difference: float
    match: bool
