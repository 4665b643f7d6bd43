import os

# Logistic amplifier
DEFAULT_A = 3.71
DEFAULT_TAU = 0.2
K_MAX_MARGIN = 8

# Lyapunov estimator
DEFAULT_X0 = 0.3
DEFAULT_BURN_IN = 1000
DEFAULT_SAMPLES = 100_000

# Exhaustive bounds
ORACLE_MAX_VARS = 24
STATE_MAX_QUBITS = 20
ORACLE_CHUNK = 1 << 20

# Tolerances
NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
SPINOR_NORM_TOL = 1e-9
SPINOR_DRIFT_TOL = 1e-6
ORTHONORMAL_TOL = 1e-8
HF_DRIFT_TOL = 1e-6

# Nonlinear gate / Hartree-Fock
DEFAULT_DT = 1e-3
SPINOR_MAX_STEPS = 10**8
SLATER_MAX_PARTICLES = 4
SLATER_MAX_DIM = 8

REPORT_SCHEMA_VERSION = 1

DATABASE_URL = os.environ.get("CHAOSQC_DATABASE_URL", "sqlite:///./chaosqc_runs.db")
