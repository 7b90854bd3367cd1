"""
Utility functions for the Rivlin cube toolkit.
"""

import logging
import math
import time
from pathlib import Path
from typing import Callable, List, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


def ensure_parent_directory(path: str) -> Path:
    """Create the directory that will hold the output file at path; returns that directory."""
    parent = Path(path).parent
    parent.mkdir(parents=True, exist_ok=True)
    return parent


def format_float(value: float) -> str:
    """
    Format a float for CSV/JSON output.

    Uses the shortest representation that round-trips (never more than 17
    significant digits), so identical runs produce identical files.
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return repr(value)


def format_duration(seconds: float) -> str:
    """Format duration in seconds to human-readable string."""
    if seconds < 60:
        return f"{seconds:.2f}s"
    elif seconds < 3600:
        minutes = int(seconds // 60)
        remaining_seconds = seconds % 60
        return f"{minutes}m {remaining_seconds:.1f}s"
    else:
        hours = int(seconds // 3600)
        remaining_minutes = int((seconds % 3600) // 60)
        return f"{hours}h {remaining_minutes}m"


def log_grid(lower: float, upper: float, n_samples: int) -> np.ndarray:
    """Log-spaced sample points on [lower, upper], endpoints included."""
    return np.logspace(math.log10(lower), math.log10(upper), num=n_samples)


def linear_grid(lower: float, upper: float, n_samples: int) -> List[float]:
    """Evenly spaced points on [lower, upper]; a single point collapses to lower."""
    if n_samples == 1:
        return [float(lower)]
    return [float(v) for v in np.linspace(lower, upper, n_samples)]


def alpha_grid(alpha_min: float, alpha_max: float, step: float) -> List[float]:
    """
    Load grid alpha_min, alpha_min + step, ... up to alpha_max inclusive.

    Values are built as alpha_min + k * step and rounded to 12 decimals so the
    grid does not accumulate drift.
    """
    count = int(math.floor((alpha_max - alpha_min) / step + 1e-9)) + 1
    return [round(alpha_min + k * step, 12) for k in range(count)]


def fd_step(x: float) -> float:
    """Central-difference step 1e-6 * max(1, |x|)."""
    return 1e-6 * max(1.0, abs(x))


def central_gradient(func: Callable[[np.ndarray], float], x: Sequence[float]) -> np.ndarray:
    """Central finite-difference gradient of a scalar function."""
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        h = fd_step(x[i])
        forward = x.copy()
        backward = x.copy()
        forward[i] += h
        backward[i] -= h
        grad[i] = (func(forward) - func(backward)) / (2.0 * h)
    return grad


def central_jacobian(func: Callable[[np.ndarray], np.ndarray], x: Sequence[float]) -> np.ndarray:
    """Central finite-difference Jacobian of a vector function, J[i, j] = d f_i / d x_j."""
    x = np.asarray(x, dtype=float)
    columns = []
    for j in range(x.size):
        h = fd_step(x[j])
        forward = x.copy()
        backward = x.copy()
        forward[j] += h
        backward[j] -= h
        columns.append((np.asarray(func(forward)) - np.asarray(func(backward))) / (2.0 * h))
    return np.column_stack(columns)


def relative_error(actual, expected) -> float:
    """Max-norm error of actual vs expected, relative to max(1, |expected|)."""
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    scale = max(1.0, float(np.max(np.abs(expected))))
    return float(np.max(np.abs(actual - expected))) / scale


class Timer:
    """Simple timer context manager."""

    def __init__(self, description: str = "Operation"):
        self.description = description
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None

    def __enter__(self):
        self.start_time = time.time()
        logger.debug("%s started", self.description)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.end_time = time.time()
        logger.info("%s completed in %s", self.description, format_duration(self.elapsed))

    @property
    def elapsed(self) -> float:
        """Get elapsed time in seconds."""
        if self.start_time is None:
            return 0
        end = self.end_time or time.time()
        return end - self.start_time
