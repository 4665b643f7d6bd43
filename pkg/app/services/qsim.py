"""State-vector simulation of the oracle step on n register qubits plus one flag qubit.

Basis index convention: index = 2 * x + y, where x is the register value with
x_1 as its most significant bit and y is the flag qubit. The flag is therefore
the least significant bit: the projector onto y=1 is a stride-2 sum and the
oracle U_f|x,y> = |x, y xor f(x)> is a swap of the pair (2x, 2x+1).
"""
import csv
import logging
import math
from dataclasses import dataclass
from typing import TextIO, Tuple

import numpy as np

from ..core.config import NORM_TOL, STATE_MAX_QUBITS
from ..core.errors import BoundExceededError, DimensionMismatchError, DomainError
from .sat_core import CnfFormula, satisfying_mask

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StateVector:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << (self.n + 1),):
            raise DimensionMismatchError(
                f"State for n={self.n} needs {1 << (self.n + 1)} amplitudes, got shape {amplitudes.shape}"
            )
        amplitudes.flags.writeable = False
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def check_normalized(self, tol: float = NORM_TOL):
        if abs(self.norm - 1.0) > tol:
            raise DomainError(f"State is not normalized: norm={self.norm!r}")


@dataclass(frozen=True)
class FlagReduction:
    """Flag-qubit handoff |psi> = sqrt(1-q^2)|0> + q|1>."""
    q: float
    q_squared: float

    @property
    def coefficients(self) -> Tuple[float, float]:
        return math.sqrt(1.0 - self.q_squared), self.q

    @property
    def density_diagonal(self) -> Tuple[float, float]:
        """Diagonal of rho = q^2 P1 + (1 - q^2) P0, ordered (P0, P1)."""
        return 1.0 - self.q_squared, self.q_squared


def prepare_uniform(n: int, max_qubits: int = STATE_MAX_QUBITS) -> StateVector:
    """|v> = 2^(-n/2) sum_x |x, 0>, the register Hadamard transform of |0, 0>."""
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"Qubit count must be a positive integer, got {n!r}")
    if n > max_qubits:
        raise BoundExceededError(f"n={n} exceeds the state-vector bound of {max_qubits} qubits")
    amplitudes = np.zeros(1 << (n + 1), dtype=np.complex128)
    amplitudes[0::2] = 1.0 / math.sqrt(1 << n)
    return StateVector(n=n, amplitudes=amplitudes)


def apply_oracle(state: StateVector, f: CnfFormula) -> StateVector:
    """U_f as a pairwise amplitude swap wherever f(x)=1. Never builds a matrix."""
    if state.n != f.n:
        raise DimensionMismatchError(f"State has n={state.n} register qubits, formula has n={f.n}")
    mask = satisfying_mask(f, max_vars=STATE_MAX_QUBITS)
    pairs = state.amplitudes.reshape(-1, 2)
    swapped = pairs.copy()
    swapped[mask] = pairs[mask][:, ::-1]
    return StateVector(n=state.n, amplitudes=swapped.reshape(-1))


def measure_flag_probability(state: StateVector) -> float:
    """||(I x |1><1|) v||^2, the probability of reading y=1."""
    state.check_normalized()
    flag = state.amplitudes[1::2]
    return float(np.sum(flag.real**2 + flag.imag**2))


def reduce_to_flag(state: StateVector) -> FlagReduction:
    q_squared = min(1.0, max(0.0, measure_flag_probability(state)))
    return FlagReduction(q=math.sqrt(q_squared), q_squared=q_squared)


def run_pipeline(f: CnfFormula) -> Tuple[StateVector, FlagReduction]:
    """Prepare |v>, apply U_f and reduce to the flag qubit."""
    state = apply_oracle(prepare_uniform(f.n), f)
    reduction = reduce_to_flag(state)
    logger.info(f"Flag probability for n={f.n}: q^2={reduction.q_squared!r}")
    return state, reduction


def basis_label(index: int, n: int) -> str:
    x, y = divmod(index, 2)
    return f"{x:0{n}b}|{y}"


def dump_state_csv(state: StateVector, stream: TextIO):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["index", "label", "re", "im"])
    for index, amplitude in enumerate(state.amplitudes):
        writer.writerow([index, basis_label(index, state.n), repr(float(amplitude.real)), repr(float(amplitude.imag))])
