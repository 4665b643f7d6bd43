import csv
import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, TextIO

import numpy as np
from sqlalchemy.orm import Session

from ..core.config import DEFAULT_DT
from ..core.errors import DimensionMismatchError, DomainError
from ..models.run import RunRecord
from ..schemas.report import RunReport
from ..services.chaos_amp import AmplificationTable, LogisticTrajectory
from ..services.hf_gate import GridOrbitalSet, NonlinearGateSpec, Spinor

logger = logging.getLogger(__name__)


def read_json_file(path: str) -> Any:
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise DomainError(f"Invalid JSON in {path}: {e}")


def to_complex_array(data: Any, ndim: int) -> np.ndarray:
    """Normalize a JSON array of complex numbers. Handles both [re, im]-pair and plain real formats."""
    try:
        values = np.asarray(data, dtype=float)
    except (TypeError, ValueError):
        raise DomainError("Complex arrays must be nested lists of numbers or [re, im] pairs")

    # Pair format carries one extra trailing axis of length 2
    if values.ndim == ndim + 1 and values.shape[-1] == 2:
        return values[..., 0] + 1j * values[..., 1]
    if values.ndim == ndim:
        return values.astype(complex)
    raise DimensionMismatchError(f"Expected a {ndim}-dimensional complex array, got shape {values.shape}")


def complex_to_pair(z: complex) -> List[float]:
    return [float(z.real), float(z.imag)]


@dataclass(frozen=True, eq=False)
class GateRequest:
    spec: NonlinearGateSpec
    phi0: Spinor
    T: float
    dt: float
    every: Optional[int]


def load_gate_request(data: Dict[str, Any]) -> GateRequest:
    """Gate description: {"A": 2x2, "g": .., "b_form": .., "phi0": [c0, c1], "T": .., "dt": .., "every": ..}."""
    if not isinstance(data, dict):
        raise DomainError("Gate spec must be a JSON object")
    missing = [key for key in ("A", "phi0", "T") if key not in data]
    if missing:
        raise DomainError(f"Gate spec is missing fields: {missing}")

    spec = NonlinearGateSpec(
        A=to_complex_array(data["A"], ndim=2),
        g=float(data.get("g", 0.0)),
        b_form=data.get("b_form", "cross_density"),
    )
    phi0 = to_complex_array(data["phi0"], ndim=1)
    if phi0.shape != (2,):
        raise DimensionMismatchError(f"phi0 must have two components, got {phi0.shape[0]}")
    every = data.get("every")
    return GateRequest(
        spec=spec,
        phi0=Spinor.from_array(phi0),
        T=float(data["T"]),
        dt=float(data.get("dt", DEFAULT_DT)),
        every=int(every) if every is not None else None,
    )


def load_orbitals(data: Any) -> np.ndarray:
    return to_complex_array(data, ndim=2)


def load_orbital_set(data: Dict[str, Any]) -> GridOrbitalSet:
    """Orbital set: {"orbitals": N x d, "V": d x d, optional "v_ext", "weights", "masses", "spacing", "boundary"}."""
    if not isinstance(data, dict) or "orbitals" not in data or "V" not in data:
        raise DomainError("Orbital set must be a JSON object with 'orbitals' and 'V'")
    optional = {key: np.asarray(data[key], dtype=float) for key in ("v_ext", "weights", "masses") if key in data}
    return GridOrbitalSet.create(
        orbitals=load_orbitals(data["orbitals"]),
        V=np.asarray(data["V"], dtype=float),
        spacing=float(data.get("spacing", 1.0)),
        boundary=data.get("boundary", "periodic"),
        **optional,
    )


# CSV writers

def _csv_writer(stream: TextIO):
    return csv.writer(stream, lineterminator="\n")


def write_trajectory_csv(trajectory: LogisticTrajectory, stream: TextIO, label: str):
    writer = _csv_writer(stream)
    writer.writerow(["step", label])
    for step, value in enumerate(trajectory.values):
        writer.writerow([step, repr(value)])


def write_table_csv(table: AmplificationTable, stream: TextIO):
    writer = _csv_writer(stream)
    labels = list(table.columns)
    writer.writerow(["step"] + labels)
    for step in table.steps:
        writer.writerow([step] + [repr(table.columns[label][step]) for label in labels])


def table_to_json(table: AmplificationTable) -> Dict[str, Any]:
    return {"steps": table.steps, "columns": table.columns, "crossings": table.crossings}


def write_spinor_trace_csv(samples, stream: TextIO):
    writer = _csv_writer(stream)
    writer.writerow(["t", "re0", "im0", "re1", "im1", "norm"])
    for t, phi in samples:
        writer.writerow([repr(t), repr(phi.c0.real), repr(phi.c0.imag), repr(phi.c1.real), repr(phi.c1.imag), repr(phi.norm)])


def write_hf_trace_csv(rows: List[Dict[str, Any]], stream: TextIO):
    writer = _csv_writer(stream)
    N = len(rows[0]["norms"]) if rows else 0
    writer.writerow(["step", "t"] + [f"norm_{i}" for i in range(1, N + 1)] + ["orthonormality_error"])
    for row in rows:
        writer.writerow([row["step"], repr(row["t"])] + [repr(v) for v in row["norms"]] + [repr(row["orthonormality_error"])])


# Run archive

def make_run_id(instance_text: str, a: float, tau: float, k_max: int) -> str:
    digest = hashlib.sha256()
    digest.update(instance_text.encode())
    digest.update(f"|{a!r}|{tau!r}|{k_max}".encode())
    return digest.hexdigest()


def normalize_and_insert_report(report: RunReport, instance_text: str, db: Session) -> str:
    """Upsert a solve report into the run archive, keyed by instance text and amplifier parameters."""
    run_id = make_run_id(instance_text, report.params.a, report.params.tau, report.params.k_max)
    fields = dict(
        instance=report.instance or "",
        n=report.n,
        num_clauses=report.num_clauses,
        r=report.r,
        q_squared=report.q_squared,
        a=report.params.a,
        tau=report.params.tau,
        k_max=report.params.k_max,
        verdict=report.verdict,
        crossing_step=report.crossing_step,
    )

    existing = db.query(RunRecord).filter(RunRecord.run_id == run_id).first()
    if existing:
        for key, value in fields.items():
            setattr(existing, key, value)
        added = 0
        logger.info(f"Updated archived run {run_id[:12]}")
    else:
        db.add(RunRecord(run_id=run_id, **fields))
        added = 1
        logger.info(f"Archived new run {run_id[:12]}")

    db.commit()
    return f"Processed 1 run. Added {added} new runs."
