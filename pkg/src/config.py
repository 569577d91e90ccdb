"""
Configuration module for the HPDS reduction toolkit
Settings come from the environment (optionally a .env file).
"""

import logging
import os
import sys
from dotenv import load_dotenv

load_dotenv()


def _float_env(key, default):
    raw = os.getenv(key, default)
    try:
        return float(raw)
    except ValueError as err:
        raise ValueError(f"{key} must be a number, got {raw!r}") from err


def _int_env(key, default):
    raw = os.getenv(key, default)
    try:
        return int(raw)
    except ValueError as err:
        raise ValueError(f"{key} must be an integer, got {raw!r}") from err


THREADS = _int_env('HPDS_REDUCE_THREADS', '-1')
TOL = _float_env('HPDS_TOL', '1e-8')
RANK_TOL = _float_env('HPDS_RANK_TOL', '1e-8')
SYMMETRY_TOL = _float_env('HPDS_SYMMETRY_TOL', '1e-10')
DT = _float_env('HPDS_DT', '1e-3')
DIVERGENCE_BOUND = _float_env('HPDS_DIVERGENCE_BOUND', '1e6')
SIZE_CAP = _int_env('HPDS_SIZE_CAP', '100000000')
LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FILE = os.getenv('LOG_FILE')

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def configure_logging(level=None, log_file=None):
    """Send log records to stderr, and to LOG_FILE when one is configured.

    stdout is left alone so command output stays machine-readable.
    """
    level = (level or LOG_LEVEL).upper()
    log_file = log_file if log_file is not None else LOG_FILE

    handlers = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file))

    logging.basicConfig(level=level, format=LOG_FORMAT, handlers=handlers, force=True)
