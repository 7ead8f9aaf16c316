import os
from dotenv import load_dotenv

load_dotenv()  # Load environment variables from .env file


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    return int(raw) if raw not in (None, "") else default


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    return float(raw) if raw not in (None, "") else default


# Enumeration caps
MAX_PATHS = _int_env("CJSR_MAX_PATHS", 1_000_000)
MAX_CYCLES = _int_env("CJSR_MAX_CYCLES", 100_000)
MAX_LIFTED_DIM = _int_env("CJSR_MAX_LIFTED_DIM", 2000)

# SDP Configuration
SDP_SOLVER = os.getenv("CJSR_SDP_SOLVER", "CLARABEL")
FEASIBILITY_TOL = _float_env("CJSR_FEASIBILITY_TOL", 1e-8)
INDETERMINATE_BAND = _float_env("CJSR_INDETERMINATE_BAND", 1e-6)
FORM_BOUND = _float_env("CJSR_FORM_BOUND", 1e5)  # Q_v <= FORM_BOUND * I

# Estimator Configuration
BISECTION_TOL = _float_env("CJSR_BISECTION_TOL", 1e-6)
EIG_TOL = _float_env("CJSR_EIG_TOL", 1e-6)
MAX_INDETERMINATE_FRACTION = _float_env("CJSR_MAX_INDETERMINATE_FRACTION", 0.25)
BRACKET_MAX_K = _int_env("CJSR_BRACKET_MAX_K", 4)
BRACKET_CYCLE_LEN = _int_env("CJSR_BRACKET_CYCLE_LEN", 8)

# Batch runs
WORKERS = _int_env("CJSR_WORKERS", 1)

# Bundled systems
# Handle running from the repo root, from scripts/ or from tests/
if os.path.exists("Database/systems"):
    SYSTEMS_PATH = "Database/systems"
elif os.path.exists("../Database/systems"):
    SYSTEMS_PATH = "../Database/systems"
else:
    SYSTEMS_PATH = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "Database", "systems")
SYSTEMS_PATH = os.getenv("CJSR_SYSTEMS_PATH", SYSTEMS_PATH)

SCHEMA_VERSION = 1


def max_paths() -> int:
    """Path cap, re-read so a CJSR_MAX_PATHS set after import still applies."""
    return _int_env("CJSR_MAX_PATHS", MAX_PATHS)


def max_cycles() -> int:
    return _int_env("CJSR_MAX_CYCLES", MAX_CYCLES)


def max_lifted_dim() -> int:
    return _int_env("CJSR_MAX_LIFTED_DIM", MAX_LIFTED_DIM)
