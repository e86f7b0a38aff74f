import os
from dotenv import load_dotenv

load_dotenv()


def _flag(name):
    return (os.environ.get(name) or '').lower() in ('1', 'true', 'yes', 'on')


def _optional_int(name):
    value = os.environ.get(name)
    return int(value) if value else None


class Config:
    # Exploration budgets
    NODE_BUDGET = int(os.environ.get('QWE_NODE_BUDGET') or 1000000)
    MONOID_CAP = int(os.environ.get('QWE_MONOID_CAP') or 4096)
    CYCLE_CAP = int(os.environ.get('QWE_CYCLE_CAP') or 10000)
    SKELETON_LIMIT = int(os.environ.get('QWE_SKELETON_LIMIT') or 10000)

    # Bounded search; None means derived from the problem size
    SEARCH_BOUND = _optional_int('QWE_SEARCH_BOUND')
    WITNESS_BOUND = int(os.environ.get('QWE_WITNESS_BOUND') or 64)
    WITNESS_BUDGET = int(os.environ.get('QWE_WITNESS_BUDGET') or 48)
    FALLBACK_BOUND = int(os.environ.get('QWE_FALLBACK_BOUND') or 8)
    # Largest sum of per-variable length bounds decided by exhaustive word search
    BOX_BUDGET = int(os.environ.get('QWE_BOX_BUDGET') or 24)

    # Cycles at least this long use the compact path formula
    LONG_CYCLE = int(os.environ.get('QWE_LONG_CYCLE') or 32)

    # Artifacts written when a verdict stays UNKNOWN
    ARTIFACT_DIR = os.environ.get('QWE_ARTIFACT_DIR') or None

    # External SMT solver, e.g. "z3 -in"
    SMT_SOLVER = os.environ.get('QWE_SMT_SOLVER') or None
    SMT_TIMEOUT = int(os.environ.get('QWE_SMT_TIMEOUT') or 60)

    REPRODUCIBLE = _flag('QWE_REPRODUCIBLE')
    LOG_LEVEL = os.environ.get('QWE_LOG_LEVEL') or 'WARNING'
