"""CNF formulas as Boolean polynomials over GF(2) and the exhaustive root-count oracle.

A clause with plain literals S and complemented literals T is violated exactly
when every x_a (a in S) is 0 and every x_b (b in T) is 1, so the formula value is

    f(x) = prod_i (1 + prod_{a in S_i} (1 + x_a) * prod_{b in T_i} x_b)   (mod 2)

Assignments are indexed by the integer whose most significant bit is x_1.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np

from ..core.config import ORACLE_CHUNK, ORACLE_MAX_VARS
from ..core.errors import BoundExceededError, DimacsParseError, DimensionMismatchError, DomainError

logger = logging.getLogger(__name__)

Assignment = Sequence[int]


@dataclass(frozen=True)
class Clause:
    positives: FrozenSet[int] = frozenset()
    negatives: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "positives", frozenset(self.positives))
        object.__setattr__(self, "negatives", frozenset(self.negatives))
        if not self.positives and not self.negatives:
            raise DomainError("A clause needs at least one literal")

    @classmethod
    def from_literals(cls, literals: Iterable[int]) -> "Clause":
        literals = list(literals)
        return cls(
            positives=frozenset(lit for lit in literals if lit > 0),
            negatives=frozenset(-lit for lit in literals if lit < 0),
        )

    @property
    def is_tautology(self) -> bool:
        return bool(self.positives & self.negatives)

    def literals(self) -> List[int]:
        """Signed DIMACS literals, positives ascending then negatives ascending."""
        return sorted(self.positives) + [-b for b in sorted(self.negatives)]


@dataclass(frozen=True)
class CnfFormula:
    n: int
    clauses: Tuple[Clause, ...] = ()
    source: Optional[str] = field(default=None, compare=False)

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise DomainError(f"Variable count must be a positive integer, got {self.n!r}")
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for i, clause in enumerate(self.clauses, start=1):
            for var in clause.positives | clause.negatives:
                if not 1 <= var <= self.n:
                    raise DomainError(f"Clause {i}: variable {var} outside 1..{self.n}")

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


def assignment_from_index(index: int, n: int) -> Tuple[int, ...]:
    return tuple((index >> (n - k)) & 1 for k in range(1, n + 1))


def _check_assignment(f: CnfFormula, x: Assignment) -> List[int]:
    if len(x) != f.n:
        raise DimensionMismatchError(f"Assignment has {len(x)} bits, formula has n={f.n}")
    bits = [int(b) for b in x]
    if any(b not in (0, 1) for b in bits):
        raise DomainError(f"Assignment bits must be 0 or 1, got {list(x)}")
    return bits


def eval_formula(f: CnfFormula, x: Assignment) -> int:
    """Value of the Boolean polynomial f at x, all arithmetic mod 2."""
    bits = _check_assignment(f, x)
    value = 1
    for clause in f.clauses:
        violated = 1
        for a in clause.positives:
            violated *= 1 ^ bits[a - 1]
        for b in clause.negatives:
            violated *= bits[b - 1]
        value *= 1 ^ violated
    return value


def direct_clause_eval(f: CnfFormula, x: Assignment) -> bool:
    bits = _check_assignment(f, x)
    return all(
        any(bits[a - 1] == 1 for a in clause.positives)
        or any(bits[b - 1] == 0 for b in clause.negatives)
        for clause in f.clauses
    )


def _check_bound(n: int, max_vars: int):
    if n > max_vars:
        raise BoundExceededError(f"n={n} exceeds the exhaustive bound of {max_vars} variables")


def _evaluate_chunk(f: CnfFormula, start: int, stop: int) -> np.ndarray:
    index = np.arange(start, stop, dtype=np.int64)
    bit_cache: Dict[int, np.ndarray] = {}

    def bit(var: int) -> np.ndarray:
        if var not in bit_cache:
            bit_cache[var] = ((index >> (f.n - var)) & 1).astype(np.uint8)
        return bit_cache[var]

    value = np.ones(stop - start, dtype=np.uint8)
    for clause in f.clauses:
        violated = np.ones_like(value)
        for a in clause.positives:
            violated &= 1 ^ bit(a)
        for b in clause.negatives:
            violated &= bit(b)
        value &= 1 ^ violated
    return value.astype(bool)


def satisfying_mask(f: CnfFormula, max_vars: int = ORACLE_MAX_VARS) -> np.ndarray:
    """f evaluated on every assignment index 0..2^n-1, in fixed-size chunks."""
    _check_bound(f.n, max_vars)
    size = 1 << f.n
    mask = np.empty(size, dtype=bool)
    for start in range(0, size, ORACLE_CHUNK):
        stop = min(start + ORACLE_CHUNK, size)
        mask[start:stop] = _evaluate_chunk(f, start, stop)
    return mask


def count_roots(f: CnfFormula, max_vars: int = ORACLE_MAX_VARS) -> int:
    r = int(np.count_nonzero(satisfying_mask(f, max_vars)))
    logger.debug(f"Oracle sweep over 2^{f.n} assignments found r={r}")
    return r


# DIMACS

def parse_dimacs(text: Union[str, TextIO], source: Optional[str] = None) -> CnfFormula:
    """Parse DIMACS CNF text. Errors carry the offending line number."""
    if not isinstance(text, str):
        text = text.read()

    n = declared = header_line = None
    clauses: List[Clause] = []
    current: List[int] = []
    ended = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if ended:
            if line == "0":
                continue
            raise DimacsParseError(f"Trailing garbage after end marker: {line!r}", lineno)
        if line.startswith("c"):
            continue
        if line.startswith("%"):
            ended = True
            continue
        if line.startswith("p"):
            if header_line is not None:
                raise DimacsParseError(f"Duplicate header (first header on line {header_line})", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsParseError(f"Malformed header {line!r}, expected 'p cnf <n> <N>'", lineno)
            try:
                n, declared = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsParseError(f"Malformed header {line!r}, expected integers", lineno)
            if n < 1 or declared < 0:
                raise DimacsParseError(f"Header needs n >= 1 and N >= 0, got n={n}, N={declared}", lineno)
            header_line = lineno
            continue

        if header_line is None:
            raise DimacsParseError("Clause data before the 'p cnf' header", lineno)
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsParseError(f"Trailing garbage: unexpected token {token!r}", lineno)
            if lit == 0:
                if token != "0":
                    raise DimacsParseError(f"Invalid literal {token!r}: variable index 0", lineno)
                if not current:
                    raise DimacsParseError("Empty clause (no literals before terminating 0)", lineno)
                clauses.append(Clause.from_literals(current))
                current = []
            elif abs(lit) > n:
                raise DimacsParseError(f"Variable index {abs(lit)} exceeds n={n}", lineno)
            else:
                current.append(lit)

    if header_line is None:
        raise DimacsParseError("Missing 'p cnf' header")
    if current:
        clauses.append(Clause.from_literals(current))
    if len(clauses) != declared:
        logger.warning(f"Header declares {declared} clauses but {len(clauses)} were read")

    return CnfFormula(n=n, clauses=tuple(clauses), source=source)


def to_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.n} {f.num_clauses}"]
    for clause in f.clauses:
        lines.append(" ".join(str(lit) for lit in clause.literals()) + " 0")
    return "\n".join(lines) + "\n"


def formula_to_json(f: CnfFormula) -> Dict[str, Any]:
    return {
        "n": f.n,
        "clauses": [
            {"pos": sorted(c.positives), "neg": sorted(c.negatives)} for c in f.clauses
        ],
    }


def formula_from_json(data: Dict[str, Any], source: Optional[str] = None) -> CnfFormula:
    if not isinstance(data, dict) or "n" not in data:
        raise DomainError("Formula JSON must be an object with an 'n' field")
    try:
        clauses = tuple(
            Clause(positives=frozenset(c.get("pos", [])), negatives=frozenset(c.get("neg", [])))
            for c in data.get("clauses", [])
        )
    except (AttributeError, TypeError):
        raise DomainError("Each clause must be an object with 'pos' and 'neg' lists")
    return CnfFormula(n=data["n"], clauses=clauses, source=source)


def read_formula_file(path: Union[str, Path]) -> Tuple[CnfFormula, str]:
    """Load a .json formula or a DIMACS file, returning the formula and the raw text."""
    with open(path, encoding="utf-8") as f:
        text = f.read()
    if str(path).lower().endswith(".json"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise DomainError(f"Invalid JSON in {path}: {e}")
        return formula_from_json(data, source=str(path)), text
    return parse_dimacs(text, source=str(path)), text
