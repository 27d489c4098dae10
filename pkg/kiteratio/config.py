import os
import logging
from logging.handlers import RotatingFileHandler

import psutil
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()


def _default_threads():
    """Physical core count, falling back to 1 when psutil cannot tell."""
    try:
        return psutil.cpu_count(logical=False) or 1
    except Exception:
        return 1


LOG_LEVEL = os.getenv("KITERATIO_LOG_LEVEL", "WARNING")
# No file logging unless a path is configured
LOG_FILE = os.getenv("KITERATIO_LOG_FILE")

PERRON_TOL = float(os.getenv("KITERATIO_PERRON_TOL", "1e-12"))
PERRON_MAX_ITER = int(os.getenv("KITERATIO_PERRON_MAX_ITER", "1000000"))
SCAN_TOL = float(os.getenv("KITERATIO_SCAN_TOL", "1e-10"))
RESOLVE_TOL = float(os.getenv("KITERATIO_RESOLVE_TOL", "1e-13"))
KITE_TOL = float(os.getenv("KITERATIO_KITE_TOL", "1e-13"))
PRECISION_BITS = int(os.getenv("KITERATIO_PRECISION_BITS", "113"))
THREADS = int(os.getenv("KITERATIO_THREADS", "0")) or _default_threads()

# Relative tie tolerance for argmin/argmax membership
TIE_TOL = 1e-9
# Absolute tolerance for every log-domain bound comparison
LOG_TOL = 1e-9

log_formatter = logging.Formatter('%(asctime)s - %(name)s - %(levelname)s - %(message)s')

logger = logging.getLogger('kiteratio')
logger.addHandler(logging.NullHandler())

_handlers_installed = []


def setup_logging(level=None, log_file=None):
    """Attach console and (optionally) rotating file handlers to the package logger.

    Calling it again replaces the handlers installed by the previous call.
    """
    for handler in _handlers_installed:
        logger.removeHandler(handler)
        handler.close()
    _handlers_installed.clear()

    console_handler = logging.StreamHandler()
    console_handler.setFormatter(log_formatter)
    _handlers_installed.append(console_handler)

    log_file = log_file or LOG_FILE
    if log_file:
        # 5MB per file, keep 5 backup files
        file_handler = RotatingFileHandler(log_file, maxBytes=5*1024*1024, backupCount=5, encoding='utf-8')
        file_handler.setFormatter(log_formatter)
        _handlers_installed.append(file_handler)

    for handler in _handlers_installed:
        logger.addHandler(handler)
    logger.setLevel((level or LOG_LEVEL).upper())
    return logger


def memory_usage_mb():
    """Resident set size of this process in MB."""
    return psutil.Process(os.getpid()).memory_info().rss / (1024 * 1024)
