"""Nonlinear one-qubit gates and a one-dimensional Hartree-Fock model.

Three pieces live here:

* the spin gate  i dphi/dt = A phi + B(phi) phi  for a two-component spinor,
  integrated with classical fourth-order Runge-Kutta (no renormalization, so
  norm drift stays visible as an integrator diagnostic);
* the time-dependent Hartree-Fock equations on a uniform 1D grid with a
  3-point Laplacian, direct term U_i and exchange kernel W evaluated by
  quadrature;
* Slater determinants on a d-dimensional one-particle space and their overlaps.
"""
import cmath
import itertools
import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from ..core.config import (
    DEFAULT_DT,
    HERMITIAN_TOL,
    HF_DRIFT_TOL,
    ORTHONORMAL_TOL,
    SLATER_MAX_DIM,
    SLATER_MAX_PARTICLES,
    SPINOR_DRIFT_TOL,
    SPINOR_MAX_STEPS,
    SPINOR_NORM_TOL,
)
from ..core.errors import BoundExceededError, DimensionMismatchError, DomainError

logger = logging.getLogger(__name__)

BForm = Callable[[np.ndarray, float], np.ndarray]


def _rk4(rhs: Callable[[np.ndarray], np.ndarray], y: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * h * k1)
    k3 = rhs(y + 0.5 * h * k2)
    k4 = rhs(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _is_hermitian(matrix: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.allclose(matrix, matrix.conj().T, rtol=0.0, atol=tol))


# B(phi) registry

_B_FORMS: Dict[str, BForm] = {}

_PROBE_SPINORS = [
    np.array([1.0, 0.0], dtype=complex),
    np.array([0.0, 1.0], dtype=complex),
    np.array([1.0, 1.0], dtype=complex) / math.sqrt(2.0),
    np.array([0.6, 0.8j], dtype=complex),
    np.array([0.3 + 0.4j, -0.5 + 0.7j], dtype=complex),
    np.array([2.0, -1.0j], dtype=complex),
]
_PROBE_COUPLINGS = (1.0, -0.7, 2.5)


def register_b_form(name: str, fn: BForm):
    """Register a B(phi) form after checking it is Hermitian on a fixed probe set."""
    for phi in _PROBE_SPINORS:
        for g in _PROBE_COUPLINGS:
            matrix = np.asarray(fn(phi, g), dtype=complex)
            if matrix.shape != (2, 2):
                raise DimensionMismatchError(f"B-form {name!r} returned shape {matrix.shape}, expected (2, 2)")
            if not _is_hermitian(matrix):
                raise DomainError(f"B-form {name!r} is not Hermitian at phi={phi.tolist()}, g={g}")
    _B_FORMS[name] = fn
    logger.debug(f"Registered B-form {name!r}")


def available_b_forms() -> List[str]:
    return sorted(_B_FORMS)


def _cross_density(phi: np.ndarray, g: float) -> np.ndarray:
    return g * np.diag([abs(phi[1]) ** 2, abs(phi[0]) ** 2]).astype(complex)


def _self_density(phi: np.ndarray, g: float) -> np.ndarray:
    return g * np.diag([abs(phi[0]) ** 2, abs(phi[1]) ** 2]).astype(complex)


def _no_coupling(phi: np.ndarray, g: float) -> np.ndarray:
    return np.zeros((2, 2), dtype=complex)


register_b_form("cross_density", _cross_density)
register_b_form("self_density", _self_density)
register_b_form("none", _no_coupling)


# Spin gate

@dataclass(frozen=True)
class Spinor:
    c0: complex
    c1: complex

    def __post_init__(self):
        c0, c1 = complex(self.c0), complex(self.c1)
        if not (cmath.isfinite(c0) and cmath.isfinite(c1)):
            raise DomainError(f"Spinor components must be finite, got ({c0}, {c1})")
        object.__setattr__(self, "c0", c0)
        object.__setattr__(self, "c1", c1)

    @classmethod
    def from_array(cls, values: np.ndarray) -> "Spinor":
        return cls(complex(values[0]), complex(values[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.c0, self.c1], dtype=complex)

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.c0) ** 2 + abs(self.c1) ** 2)


@dataclass(frozen=True, eq=False)
class NonlinearGateSpec:
    A: np.ndarray
    g: float = 0.0
    b_form: str = "cross_density"

    def __post_init__(self):
        A = np.array(self.A, dtype=complex)
        if A.shape != (2, 2):
            raise DimensionMismatchError(f"A must be 2x2, got shape {A.shape}")
        if not _is_hermitian(A):
            raise DomainError("A must be Hermitian")
        if self.b_form not in _B_FORMS:
            raise DomainError(f"Unknown b_form {self.b_form!r}; available: {available_b_forms()}")
        A.flags.writeable = False
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "g", float(self.g))

    def B(self, phi: np.ndarray) -> np.ndarray:
        return _B_FORMS[self.b_form](phi, self.g)

    def rhs(self, phi: np.ndarray) -> np.ndarray:
        """dphi/dt = -i (A + B(phi)) phi."""
        return -1j * ((self.A + self.B(phi)) @ phi)


def _plan_steps(T: float, dt: float, max_steps: int) -> Tuple[int, float]:
    if not (math.isfinite(T) and math.isfinite(dt)):
        raise DomainError(f"T and dt must be finite, got T={T!r}, dt={dt!r}")
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    if T < 0.0:
        raise DomainError(f"T must be non-negative, got {T!r}")
    if T == 0.0:
        return 0, 0.0
    count = math.ceil(T / dt - 1e-9)
    if count > max_steps:
        raise BoundExceededError(f"T/dt = {count} steps exceeds the limit of {max_steps}")
    return count, T / count


def evolve_spinor_trace(
    phi0: Spinor,
    spec: NonlinearGateSpec,
    T: float,
    dt: float = DEFAULT_DT,
    every: Optional[int] = None,
) -> List[Tuple[float, Spinor]]:
    """(t, phi(t)) samples every `every` steps, always including t=0 and t=T."""
    if abs(phi0.norm - 1.0) > SPINOR_NORM_TOL:
        raise DomainError(f"Initial spinor must be normalized, norm={phi0.norm!r}")
    count, h = _plan_steps(T, dt, SPINOR_MAX_STEPS)

    y = phi0.as_array()
    samples = [(0.0, phi0)]
    for k in range(1, count + 1):
        y = _rk4(spec.rhs, y, h)
        if k == count or (every and k % every == 0):
            samples.append((k * h, Spinor.from_array(y)))

    drift = abs(samples[-1][1].norm - 1.0)
    if drift > SPINOR_DRIFT_TOL:
        logger.warning(f"Spinor norm drifted by {drift:.3e} over T={T} with dt={h:.3e}")
    return samples


def evolve_spinor(phi0: Spinor, spec: NonlinearGateSpec, T: float, dt: float = DEFAULT_DT) -> Spinor:
    return evolve_spinor_trace(phi0, spec, T, dt)[-1][1]


def linear_reference(A: np.ndarray, phi0: Spinor, T: float) -> Spinor:
    """exp(-i A T) phi0, the exact g=0 evolution."""
    return Spinor.from_array(expm(-1j * np.asarray(A, dtype=complex) * T) @ phi0.as_array())


# Hartree-Fock on a grid

@dataclass(frozen=True, eq=False)
class GridOrbitalSet:
    """Orbitals Phi_i sampled on d grid points (rows of `orbitals`) with the Hamiltonian data."""
    orbitals: np.ndarray
    V: np.ndarray
    v_ext: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    masses: Optional[np.ndarray] = None
    spacing: float = 1.0
    boundary: str = "periodic"

    def __post_init__(self):
        orbitals = np.array(self.orbitals, dtype=complex)
        if orbitals.ndim != 2 or orbitals.shape[0] < 1:
            raise DimensionMismatchError(f"orbitals must be an N x d array, got shape {orbitals.shape}")
        N, d = orbitals.shape
        V = np.array(self.V, dtype=float)
        if V.shape != (d, d):
            raise DimensionMismatchError(f"V must be {d}x{d}, got shape {V.shape}")
        if not np.allclose(V, V.T, rtol=0.0, atol=HERMITIAN_TOL):
            raise DomainError("Interaction kernel V must be symmetric")
        if self.spacing <= 0.0:
            raise DomainError(f"Grid spacing must be positive, got {self.spacing!r}")
        if self.boundary not in ("periodic", "dirichlet"):
            raise DomainError(f"boundary must be 'periodic' or 'dirichlet', got {self.boundary!r}")

        v_ext = np.zeros(d) if self.v_ext is None else np.array(self.v_ext, dtype=float)
        weights = np.full(d, float(self.spacing)) if self.weights is None else np.array(self.weights, dtype=float)
        masses = np.ones(N) if self.masses is None else np.array(self.masses, dtype=float)
        for name, array, size in (("v_ext", v_ext, d), ("weights", weights, d), ("masses", masses, N)):
            if array.shape != (size,):
                raise DimensionMismatchError(f"{name} must have length {size}, got shape {array.shape}")
        if np.any(weights <= 0.0) or np.any(masses <= 0.0):
            raise DomainError("Quadrature weights and masses must be positive")

        for name, array in (("orbitals", orbitals), ("V", V), ("v_ext", v_ext), ("weights", weights), ("masses", masses)):
            array.flags.writeable = False
            object.__setattr__(self, name, array)

    @classmethod
    def create(cls, orbitals, V, **kwargs) -> "GridOrbitalSet":
        """Construct and require orthonormal orbitals under the weighted inner product."""
        orb = cls(orbitals=orbitals, V=V, **kwargs)
        error = orthonormality_error(orb)
        if error > ORTHONORMAL_TOL:
            raise DomainError(f"Orbitals are not orthonormal (max deviation {error:.3e})")
        return orb

    @property
    def N(self) -> int:
        return self.orbitals.shape[0]

    @property
    def d(self) -> int:
        return self.orbitals.shape[1]

    def with_orbitals(self, orbitals: np.ndarray) -> "GridOrbitalSet":
        return replace(self, orbitals=orbitals)

    def gram(self) -> np.ndarray:
        """G[i, j] = <Phi_i, Phi_j>_w."""
        return (self.orbitals.conj() * self.weights) @ self.orbitals.T

    def norms(self) -> np.ndarray:
        return np.sqrt(np.real(np.diag(self.gram())))


def orthonormality_error(orb: GridOrbitalSet) -> float:
    return float(np.max(np.abs(orb.gram() - np.eye(orb.N))))


def _mean_fields(phi: np.ndarray, orb: GridOrbitalSet) -> Tuple[np.ndarray, np.ndarray]:
    """Direct terms U (N x d, one row per orbital) and exchange kernel W[r', r]."""
    density = np.abs(phi) ** 2
    N = phi.shape[0]
    U = np.empty(phi.shape, dtype=float)
    for i in range(N):
        others = np.delete(density, i, axis=0).sum(axis=0)
        U[i] = (orb.weights * others) @ orb.V
    W = orb.V * (phi.conj().T @ phi)
    return U, W


def mean_field_potentials(orb: GridOrbitalSet, i: int) -> Tuple[np.ndarray, np.ndarray]:
    """U_i(r) = sum_{j != i} int dr' |Phi_j(r')|^2 V(r', r) and W(r', r) = sum_j Phi_j*(r') V(r', r) Phi_j(r).

    `i` is 1-based, matching particle labels.
    """
    if not 1 <= i <= orb.N:
        raise DomainError(f"Particle index {i} outside 1..{orb.N}")
    U, W = _mean_fields(orb.orbitals, orb)
    return U[i - 1], W


def _laplacian(phi: np.ndarray, spacing: float, boundary: str) -> np.ndarray:
    if boundary == "periodic":
        left = np.roll(phi, 1, axis=1)
        right = np.roll(phi, -1, axis=1)
    else:
        padded = np.pad(phi, ((0, 0), (1, 1)))
        left, right = padded[:, :-2], padded[:, 2:]
    return (left - 2.0 * phi + right) / spacing**2


def _hf_action(phi: np.ndarray, orb: GridOrbitalSet) -> np.ndarray:
    """H(Phi) Phi_i for every orbital, with mean fields taken from phi itself."""
    kinetic = -_laplacian(phi, orb.spacing, orb.boundary) / (2.0 * orb.masses[:, None])
    U, W = _mean_fields(phi, orb)
    exchange = (phi * orb.weights) @ W
    return kinetic + (orb.v_ext + U) * phi - exchange


def hf_step(orb: GridOrbitalSet, dt: float = DEFAULT_DT) -> GridOrbitalSet:
    """One RK4 step of i dPhi_i/dt = H(Phi) Phi_i, mean fields recomputed at every stage."""
    if dt <= 0.0:
        raise DomainError(f"dt must be positive, got {dt!r}")
    before = orb.norms()
    advanced = orb.with_orbitals(_rk4(lambda y: -1j * _hf_action(y, orb), orb.orbitals, dt))
    drift = float(np.max(np.abs(advanced.norms() - before)))
    if drift > HF_DRIFT_TOL:
        logger.warning(f"Orbital norm drift {drift:.3e} in one step of dt={dt}")
    return advanced


def hf_evolve(orb: GridOrbitalSet, dt: float = DEFAULT_DT, steps: int = 1000, every: int = 100):
    """Run `steps` HF steps; returns the final set and diagnostic rows (step, t, norms, orthonormality error)."""
    if steps < 0 or every < 1:
        raise DomainError(f"steps must be >= 0 and every >= 1, got {steps}, {every}")
    start_error = orthonormality_error(orb)
    rows = [{"step": 0, "t": 0.0, "norms": orb.norms().tolist(), "orthonormality_error": start_error}]
    for k in range(1, steps + 1):
        orb = hf_step(orb, dt)
        if k % every == 0 or k == steps:
            rows.append({"step": k, "t": k * dt, "norms": orb.norms().tolist(), "orthonormality_error": orthonormality_error(orb)})

    growth = rows[-1]["orthonormality_error"] - start_error
    if growth > ORTHONORMAL_TOL:
        logger.warning(f"Orthonormality deviation grew by {growth:.3e} over {steps} steps")
    return orb, rows


# Slater determinants

@dataclass(frozen=True, eq=False)
class SlaterState:
    N: int
    d: int
    amplitudes: np.ndarray

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def is_zero(self) -> bool:
        return self.norm < 1e-12

    def inner(self, other: "SlaterState") -> complex:
        if self.amplitudes.shape != other.amplitudes.shape:
            raise DimensionMismatchError(f"Cannot contract shapes {self.amplitudes.shape} and {other.amplitudes.shape}")
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _orbital_matrix(orbitals: Sequence) -> np.ndarray:
    phi = np.array(orbitals, dtype=complex)
    if phi.ndim != 2 or phi.shape[0] < 1:
        raise DimensionMismatchError(f"Expected N orbitals of equal dimension d, got shape {phi.shape}")
    return phi


def permutation_sign(perm: Sequence[int]) -> int:
    inversions = sum(1 for i, j in itertools.combinations(range(len(perm)), 2) if perm[i] > perm[j])
    return -1 if inversions % 2 else 1


def slater_compose(orbitals: Sequence) -> SlaterState:
    """(1/sqrt(N!)) sum_sigma sgn(sigma) prod_k Phi_sigma(k)(i_k) as a d^N tensor.

    Each sorted index tuple is evaluated once and copied to its permutations with
    the permutation sign, so antisymmetry holds bit for bit.
    """
    phi = _orbital_matrix(orbitals)
    N, d = phi.shape
    if N > d:
        raise DomainError(f"N={N} orbitals in dimension d={d} cannot be antisymmetrized (state vanishes)")
    if N > SLATER_MAX_PARTICLES or d > SLATER_MAX_DIM:
        raise BoundExceededError(
            f"Slater tensor limited to N <= {SLATER_MAX_PARTICLES}, d <= {SLATER_MAX_DIM}; got N={N}, d={d}"
        )

    amplitudes = np.zeros((d,) * N, dtype=complex)
    if any(np.array_equal(phi[i], phi[j]) for i, j in itertools.combinations(range(N), 2)):
        logger.warning("Repeated orbital in Slater determinant, state is identically zero")
        return SlaterState(N=N, d=d, amplitudes=amplitudes)

    perms = list(itertools.permutations(range(N)))
    signs = [permutation_sign(p) for p in perms]
    scale = 1.0 / math.sqrt(math.factorial(N))
    for combo in itertools.combinations(range(d), N):
        value = 0j
        for perm, sign in zip(perms, signs):
            term = complex(sign)
            for k in range(N):
                term *= phi[perm[k], combo[k]]
            value += term
        value *= scale
        for perm, sign in zip(perms, signs):
            amplitudes[tuple(combo[p] for p in perm)] = sign * value
    return SlaterState(N=N, d=d, amplitudes=amplitudes)


def slater_overlap(a_orbitals: Sequence, b_orbitals: Sequence) -> complex:
    """<Psi_a|Psi_b> = det G with G[i, j] = <a_i, b_j>."""
    a, b = _orbital_matrix(a_orbitals), _orbital_matrix(b_orbitals)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"Orbital sets differ in shape: {a.shape} vs {b.shape}")
    return complex(np.linalg.det(a.conj() @ b.T))


def slater_inner(a_orbitals: Sequence, b_orbitals: Sequence) -> complex:
    """Brute-force tensor inner product of the two Slater states."""
    return slater_compose(a_orbitals).inner(slater_compose(b_orbitals))
