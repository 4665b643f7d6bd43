import sys
import os
from datetime import datetime
from unittest.mock import MagicMock, Mock
import numpy as np
import pytest
from sqlalchemy.orm import Session

# Add the project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from app.services.sat_core import Clause, CnfFormula  # noqa: E402

SAMPLE_DIR = os.path.abspath(os.path.join(os.path.dirname(__file__), '..', 'sample_data'))


@pytest.fixture
def sample_path():
    """Resolve a file name inside sample_data/"""
    return lambda name: os.path.join(SAMPLE_DIR, name)


@pytest.fixture
def three_clause_formula():
    """(x1 v ~x2)(~x1)(x2 v ~x3), satisfied only by x = (0, 0, 0)"""
    return CnfFormula(n=3, clauses=(
        Clause(positives={1}, negatives={2}),
        Clause(negatives={1}),
        Clause(positives={2}, negatives={3}),
    ))


@pytest.fixture
def contradiction():
    """(x1)(~x1)"""
    return CnfFormula(n=1, clauses=(Clause(positives={1}), Clause(negatives={1})))


@pytest.fixture
def empty_formula():
    """Empty clause list over two variables, f == 1"""
    return CnfFormula(n=2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def make_random_formula(rng, n, num_clauses, max_width=3):
    clauses = []
    for _ in range(num_clauses):
        width = int(rng.integers(1, max_width + 1))
        variables = rng.choice(np.arange(1, n + 1), size=min(width, n), replace=False)
        signs = rng.integers(0, 2, size=len(variables))
        clauses.append(Clause.from_literals(int(v) if s else -int(v) for v, s in zip(variables, signs)))
    return CnfFormula(n=n, clauses=tuple(clauses))


@pytest.fixture
def random_formula(rng):
    """Factory for random CNF formulas with a shared seeded generator"""
    return lambda n, num_clauses, max_width=3: make_random_formula(rng, n, num_clauses, max_width)


@pytest.fixture
def mock_db():
    """Mock database session"""
    db = MagicMock(spec=Session)
    db.commit = Mock()
    db.rollback = Mock()
    db.refresh = Mock()
    db.add = Mock()
    db.query = Mock()
    db.delete = Mock()
    return db


@pytest.fixture
def mock_query():
    """Mock SQLAlchemy query object"""
    query = MagicMock()
    query.filter = Mock(return_value=query)
    query.order_by = Mock(return_value=query)
    query.offset = Mock(return_value=query)
    query.limit = Mock(return_value=query)
    query.count = Mock(return_value=10)
    query.all = Mock(return_value=[])
    query.first = Mock(return_value=None)
    query.delete = Mock(return_value=None)
    return query


@pytest.fixture
def mock_run():
    """Mock RunRecord object"""
    run = MagicMock()
    run.run_id = "abc123"
    run.instance = "sample_data/three_clause.cnf"
    run.n = 3
    run.num_clauses = 3
    run.r = None
    run.q_squared = 0.125
    run.a = 3.71
    run.tau = 0.2
    run.k_max = 11
    run.verdict = "SAT"
    run.crossing_step = 1
    run.created_at = datetime(2024, 6, 1, 12, 0, 0)
    return run
