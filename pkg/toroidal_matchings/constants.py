import os
from pathlib import Path

PROJECT_ROOT = Path(__file__).parent.parent
ENV_FILE = PROJECT_ROOT / ".env.local"

GUARD_ENV_VAR = "TORUS_MATCH_GUARD"
THREADS_ENV_VAR = "TORUS_MATCH_THREADS"
LOG_LEVEL_ENV_VAR = "TORUS_MATCH_LOG_LEVEL"
PFAFFIAN_LIMIT_ENV_VAR = "TORUS_MATCH_PFAFFIAN_LIMIT"

# Exhaustive runs are refused above m*n = 48 (T_{6,8}) unless overridden.
DEFAULT_GUARD = 48
MIN_SIDE = 4

# Exact Pfaffians and determinants are skipped above m*n = 144 (T_{12,12}).
DEFAULT_PFAFFIAN_LIMIT = 144

LAYER_CONVENTION = (
    "A: vertical edges between rows m-1 and 0; "
    "B: horizontal edges between columns n-1 and 0"
)


def _resolve_guard() -> int:
    """Resolve the desk-scale guard on m*n.

    Precedence:
    1. TORUS_MATCH_GUARD env var
    2. Default: DEFAULT_GUARD
    """
    env = os.environ.get(GUARD_ENV_VAR)
    if env:
        return int(env)
    return DEFAULT_GUARD
