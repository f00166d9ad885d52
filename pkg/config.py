import logging
import os

VERSION = "1.0.0"

# Numerical tolerances
TOL_HERM = 1e-10
TOL_EIG = 1e-12
TOL_PSD = 1e-10
TOL_TRACE = 1e-10
TOL_CPTP = 1e-9
TOL_CLAMP = 1e-8  # D, Q_D and E_R are nonnegative; smaller negatives are noise
TOL_RESIDUAL = 1e-8
TOL_SUPPORT_SIGMA = 1e-12
TOL_SUPPORT_RHO = 1e-10
TOL_CLOSED_FORM = 1e-8

# Discord optimizer
DISCORD_GRID = 32
DISCORD_XATOL = 1e-6
DISCORD_FATOL = 1e-12

# Relative entropy of entanglement optimizer
ER_RESTARTS = 8
ER_MAXITER = 400
ER_MAX_DIM = 16
ER_SEED = 20170321
ER_NULL_LOGIT = -40.0  # softmax logit for components absent from the seed


def _thread_count() -> int:
    raw = os.getenv("COHDIST_THREADS", "0")
    try:
        count = int(raw)
    except ValueError:
        logging.getLogger(__name__).warning(f"COHDIST_THREADS={raw!r} is not an integer; using the CPU count")
        count = 0
    return count if count > 0 else (os.cpu_count() or 1)


# Worker pool
COHDIST_THREADS = _thread_count()
LOG_LEVEL = os.getenv("COHDIST_LOG_LEVEL", "INFO")

# Exit codes
EXIT_OK = 0
EXIT_IO = 1
EXIT_VIOLATION = 2
EXIT_CLOSED_FORM = 3
EXIT_USAGE = 64
EXIT_DATAERR = 65

# Sweep output
CSV_HEADER = [
    'sample_id',
    'd',
    'channel',
    'param',
    'coherence',
    'disturbance',
    'extra_terms_json',
    'residual',
    'seed'
]
FLOAT_FORMAT = '.17g'

# Channel families available to sweeps and the report command
SINGLE_CHANNELS = {
    'identity': 'Identity',
    'weak': 'Weak measurement',
    'projective': 'Projective measurement',
    'depolarizing': 'Depolarizing',
    'amplitude-damping': 'Amplitude damping',
    'bit-flip': 'Bit flip',
    'phase-flip': 'Phase flip',
    'bit-phase-flip': 'Bit-phase flip'
}
BIPARTITE_CHANNELS = dict(SINGLE_CHANNELS, **{'global-depolarizing': 'Global depolarizing'})

RELATIONS = ['single', 'measurement', 'bipartite-entanglement', 'bipartite-discord']
BASES = ['computational', 'plus-minus', 'schmidt-family']
