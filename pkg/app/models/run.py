from datetime import datetime, timezone

from sqlalchemy import Column, DateTime, Float, Integer, String
from ..core.database import Base


class RunRecord(Base):
    __tablename__ = "runs"

    pk = Column(Integer, primary_key=True, index=True)
    run_id = Column(String, unique=True, index=True)
    instance = Column(String, index=True)
    n = Column(Integer)
    num_clauses = Column(Integer)

    # Oracle / flag reduction
    r = Column(Integer, nullable=True)
    q_squared = Column(Float)

    # Amplifier parameters and outcome
    a = Column(Float)
    tau = Column(Float)
    k_max = Column(Integer)
    verdict = Column(String, index=True)
    crossing_step = Column(Integer, nullable=True)

    created_at = Column(DateTime, default=lambda: datetime.now(timezone.utc))
