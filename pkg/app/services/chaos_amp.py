"""Logistic-map amplification of the flag probability q^2.

Only the |1><1| diagonal entry m of the iterated density matrix is tracked.
Starting from m_0 = q^2, m_{k+1} = a m_k (1 - m_k). Zero is a fixed point, so
an unsatisfiable instance (q = 0) never leaves 0, while any q^2 = 2^-n grows by
roughly a factor a per step until it enters the chaotic band
[a^2 (4 - a) / 16, a / 4], which lies above the default threshold tau = 0.2.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..core.config import (
    DEFAULT_A,
    DEFAULT_BURN_IN,
    DEFAULT_SAMPLES,
    DEFAULT_TAU,
    DEFAULT_X0,
    K_MAX_MARGIN,
    STATE_MAX_QUBITS,
)
from ..core.errors import DomainError

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


def chaotic_band(a: float) -> Tuple[float, float]:
    """Invariant interval [f(f(1/2)), f(1/2)] of x -> a x (1 - x)."""
    return a * a * (4.0 - a) / 16.0, a / 4.0


def default_k_max(n: int, a: float = DEFAULT_A) -> int:
    """ceil(n ln2 / ln a) + margin; q^2 = 2^-n needs about n ln2 / ln a steps."""
    if a <= 1.0:
        return K_MAX_MARGIN
    return math.ceil(n * math.log(2) / math.log(a)) + K_MAX_MARGIN


def effective_qubits(q_squared: float) -> int:
    """Register size n for which q^2 = 2^-n would be the smallest nonzero flag probability."""
    if not math.isfinite(q_squared):
        raise DomainError(f"q_squared must be finite, got {q_squared!r}")
    if q_squared <= 0.0:
        return STATE_MAX_QUBITS
    return max(1, math.ceil(-math.log2(q_squared)))


class LogisticParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    a: float = Field(DEFAULT_A, gt=0.0, le=4.0)
    tau: float = Field(DEFAULT_TAU, gt=0.0, lt=1.0)
    k_max: int = Field(default_k_max(STATE_MAX_QUBITS), ge=1)

    @model_validator(mode="after")
    def _tau_below_band(self):
        # The band is only an attractor once the map is past the period-doubling cascade.
        if self.a > 3.5699456:
            floor, _ = chaotic_band(self.a)
            if self.tau >= floor:
                raise ValueError(f"tau={self.tau} must lie below the chaotic band floor {floor:.6f} for a={self.a}")
        return self

    @classmethod
    def for_qubits(cls, n: int, a: float = DEFAULT_A, tau: float = DEFAULT_TAU) -> "LogisticParams":
        return cls(a=a, tau=tau, k_max=default_k_max(n, a))


@dataclass(frozen=True)
class AmplifierState:
    m: float
    step: int


@dataclass(frozen=True)
class LogisticTrajectory:
    params: LogisticParams
    values: List[float]
    crossing_step: Optional[int] = None

    @property
    def crossed(self) -> bool:
        return self.crossing_step is not None


@dataclass(frozen=True)
class LyapunovEstimate:
    exponent: float
    used: int
    skipped: int


@dataclass
class AmplificationTable:
    steps: List[int]
    columns: Dict[str, List[float]] = field(default_factory=dict)
    crossings: Dict[str, Optional[int]] = field(default_factory=dict)


def _check_unit(name: str, x: float):
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"{name} must lie in [0, 1], got {x!r}")


def _check_a(a: float):
    if not 0.0 < a <= 4.0:
        raise DomainError(f"Map parameter a must lie in (0, 4], got {a!r}")


def logistic_step(x: float, a: float = DEFAULT_A) -> float:
    _check_unit("x", x)
    _check_a(a)
    return a * x * (1.0 - x)


def amplifier_first_step(q_squared: float, a: float = DEFAULT_A) -> AmplifierState:
    """rho_1 = a q^2 (1 - q^2) on the flag entry."""
    return AmplifierState(m=logistic_step(q_squared, a), step=1)


def iterate(q_squared: float, params: LogisticParams) -> LogisticTrajectory:
    """Iterate from m_0 = q^2 until the value reaches tau or k_max steps are spent.

    A start at or above tau crosses at step 0 and is not iterated; q^2 = 1 would
    fall onto the fixed point 0.
    """
    _check_unit("q_squared", q_squared)
    a, tau = params.a, params.tau
    values = [q_squared]
    if q_squared >= tau:
        return LogisticTrajectory(params=params, values=values, crossing_step=0)
    x = q_squared
    for step in range(1, params.k_max + 1):
        x = a * x * (1.0 - x)
        values.append(x)
        if x >= tau:
            return LogisticTrajectory(params=params, values=values, crossing_step=step)
    return LogisticTrajectory(params=params, values=values)


def classify(q_squared: float, params: LogisticParams) -> Tuple[Verdict, LogisticTrajectory]:
    trajectory = iterate(q_squared, params)
    verdict = Verdict.SAT if trajectory.crossed else Verdict.UNSAT
    logger.info(
        f"Amplifier verdict {verdict.value} for q^2={q_squared!r} "
        f"(crossing step {trajectory.crossing_step}, k_max {params.k_max})"
    )
    return verdict, trajectory


def orbit(x0: float, a: float, steps: int) -> List[float]:
    """Full trajectory of length steps+1, without early stopping."""
    _check_unit("x0", x0)
    _check_a(a)
    values = [x0]
    x = x0
    for _ in range(steps):
        x = a * x * (1.0 - x)
        values.append(x)
    return values


def lyapunov(
    a: float = DEFAULT_A,
    x0: float = DEFAULT_X0,
    burn_in: int = DEFAULT_BURN_IN,
    samples: int = DEFAULT_SAMPLES,
) -> LyapunovEstimate:
    """Time average of ln|a (1 - 2 x_k)| after discarding burn_in iterates.

    Samples that land exactly on x = 1/2 have zero derivative and are skipped;
    if every sample is skipped the orbit is superstable and the estimate is -inf.
    """
    _check_unit("x0", x0)
    _check_a(a)
    if burn_in < 1 or samples < 1:
        raise DomainError(f"burn_in and samples must be >= 1, got {burn_in}, {samples}")

    x = x0
    for _ in range(burn_in):
        x = a * x * (1.0 - x)

    total = 0.0
    used = skipped = 0
    for _ in range(samples):
        derivative = abs(a * (1.0 - 2.0 * x))
        if derivative == 0.0:
            skipped += 1
        else:
            total += math.log(derivative)
            used += 1
        x = a * x * (1.0 - x)

    if skipped:
        logger.warning(f"Lyapunov estimate for a={a}: skipped {skipped} of {samples} samples at x=1/2")
    exponent = total / used if used else -math.inf
    return LyapunovEstimate(exponent=exponent, used=used, skipped=skipped)


def sensitivity(x0: float, delta: float, a: float = DEFAULT_A, steps: int = 50) -> List[float]:
    """|x_k - y_k| for two orbits started delta apart."""
    _check_unit("x0 + delta", x0 + delta)
    first = orbit(x0, a, steps)
    second = orbit(x0 + delta, a, steps)
    return [abs(u - v) for u, v in zip(first, second)]


def column_label(q_squared: float) -> str:
    return repr(float(q_squared))


def trace_amplification(q_squared_list: Sequence[float], params: LogisticParams) -> AmplificationTable:
    """Step-by-value table, one column per starting q^2, each run for k_max steps."""
    table = AmplificationTable(steps=list(range(params.k_max + 1)))
    for q_squared in q_squared_list:
        _check_unit("q_squared", q_squared)
        label = column_label(q_squared)
        values = orbit(q_squared, params.a, params.k_max)
        table.columns[label] = values
        table.crossings[label] = next((k for k, v in enumerate(values) if v >= params.tau), None)
    return table
