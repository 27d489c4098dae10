"""
Perron data of a connected graph: spectral radius, principal eigenvector
scaled to maximum entry 1, principal ratio, sigma and the min-max distance.
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from . import config
from .errors import ConvergenceError, DisconnectedGraphError, DomainError
from .graph_core import bfs_distances, is_connected, pendant_paths

logger = logging.getLogger('kiteratio.spectral')

# Above this order matrix-vector products go through a CSR matrix
DENSE_LIMIT = 256
# Largest log(gamma) still exposed as a linear-domain float
LINEAR_LOG_LIMIT = 700.0
# Eigenvector entries are listed in reports only for small graphs
REPORT_VECTOR_LIMIT = 100

LOG2 = math.log(2.0)
# Rounding of one log-domain sweep, per unit of |log x| and per summed term
LOG_SWEEP_ROUNDING = 32.0 * np.finfo(np.float64).eps


@dataclass(frozen=True, eq=False)
class PerronData:
    lambda1: float
    x: np.ndarray
    log_x: np.ndarray
    log_gamma: float
    argmin_set: Tuple[int, ...]
    argmax_set: Tuple[int, ...]
    k_minus_1: int
    sigma: Optional[float]
    residual: float
    iterations: int

    @property
    def gamma(self):
        if self.log_gamma < LINEAR_LOG_LIMIT:
            return math.exp(self.log_gamma)
        return math.inf

    @property
    def k(self):
        return self.k_minus_1 + 1

    @property
    def x_min(self):
        return float(self.x.min())

    @property
    def norm_squared(self):
        """Squared 2-norm under the max-entry-1 scaling."""
        return float(np.dot(self.x, self.x))

    def to_dict(self):
        data = {
            "n": int(self.x.shape[0]),
            "lambda1": self.lambda1,
            "gamma": self.gamma,
            "log_gamma": self.log_gamma,
            "sigma": self.sigma,
            "k_minus_1": self.k_minus_1,
            "argmin_set": list(self.argmin_set),
            "argmax_set": list(self.argmax_set),
            "norm_squared": self.norm_squared,
            "residual": self.residual,
            "iterations": self.iterations,
        }
        if self.x.shape[0] <= REPORT_VECTOR_LIMIT:
            data["x"] = [float(v) for v in self.x]
        return data


def sigma_of(lambda1):
    """Larger root of sigma + 1/sigma = lambda1."""
    if not lambda1 > 2.0:
        raise DomainError(f"sigma is defined only for lambda1 > 2, got {lambda1}")
    return (lambda1 + math.sqrt(lambda1 * lambda1 - 4.0)) / 2.0


def _log_sinh(u):
    return u + np.log(-np.expm1(-2.0 * u)) - LOG2


def log_phi(lambda1, j):
    """log of (sigma^j - sigma^-j)/(sigma - sigma^-1), j >= 1, without overflow.

    With t = arccosh(lambda1/2) this is log sinh(j t) - log sinh(t). Accepts a
    scalar or an array of j.
    """
    if not lambda1 > 2.0:
        raise DomainError(f"phi_j(sigma) needs lambda1 > 2, got {lambda1}")
    j_arr = np.asarray(j, dtype=np.float64)
    if (j_arr < 1).any():
        raise DomainError(f"phi_j needs j >= 1, got {j}")
    t = math.acosh(lambda1 / 2.0)
    out = _log_sinh(j_arr * t) - _log_sinh(t)
    if out.ndim == 0:
        return float(out)
    return out


def _operator(g):
    if g.n <= DENSE_LIMIT:
        return g.adjacency.astype(np.float64)
    rows, cols = np.nonzero(g.adjacency)
    return sparse.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))


def _refine_pendant_paths(g, lambda1, log_x):
    """Rebuild pendant-path entries from their attachment in log domain.

    On a pendant path v1..vm hanging from a, the eigen-equations of v1..vm give
    x_{v_i} = x_a * phi_i / phi_{m+1}, which stays finite where the iterated
    vector underflows.
    """
    for pp in pendant_paths(g):
        if g.degrees[pp.attachment] < 3 or not np.isfinite(log_x[pp.attachment]):
            continue
        m = pp.length
        logs = log_phi(lambda1, np.arange(1, m + 2))
        log_x[list(pp.vertices)] = log_x[pp.attachment] + logs[:m] - logs[m]


def _closed_neighbourhoods(g):
    """CSR structure of A + I."""
    closed = g.adjacency | np.eye(g.n, dtype=bool)
    return sparse.csr_matrix(closed)


def _log_sweep(closed, rows, log_x):
    """log((A + I) x) from log x, one stable log-sum-exp per closed neighbourhood."""
    starts = closed.indptr[:-1]
    vals = log_x[closed.indices]
    row_max = np.maximum.reduceat(vals, starts)
    return row_max + np.log(np.add.reduceat(np.exp(vals - row_max[rows]), starts))


def _fill_underflow(g, lambda1, log_x):
    """Replace underflowed entries by a guess decaying with distance from the finite ones."""
    finite = np.isfinite(log_x)
    if finite.all():
        return
    dist = bfs_distances(g, np.flatnonzero(finite).tolist())
    step = math.log(max(lambda1, 1.0) + 1.0)
    log_x[~finite] = log_x[finite].min() - step * dist[~finite]


def _polish_log_domain(g, lambda1, log_x, tol, max_iter):
    """Shifted power sweeps in log domain until every entry is converged relative to itself.

    Stops once max_v |(Ax)_v - lambda1 x_v| / x_v is within tol (scaled like the
    absolute criterion) plus the rounding floor of log-domain arithmetic.
    Returns (log_x, relative residual, sweeps).
    """
    closed = _closed_neighbourhoods(g)
    rows = np.repeat(np.arange(g.n), np.diff(closed.indptr))
    width = float(g.degrees.max()) + 1.0
    relative = math.inf
    for sweep in range(max_iter + 1):
        y = _log_sweep(closed, rows, log_x)
        relative = float(np.max(np.abs(np.expm1(y - log_x) - lambda1)))
        allowed = tol * max(1.0, lambda1) + (lambda1 + 1.0) * LOG_SWEEP_ROUNDING * (width - log_x.min())
        if relative <= allowed:
            return log_x, relative, sweep
        log_x = y - y.max()
    raise ConvergenceError(
        f"Log-domain sweeps did not reach relative residual {tol:g} in {max_iter} sweeps "
        f"(last residual {relative:.3e})",
        iterations=max_iter, residual=relative)


def _extreme_sets(log_x):
    lo, hi = log_x.min(), log_x.max()
    argmin = tuple(int(v) for v in np.flatnonzero(log_x <= lo + config.TIE_TOL))
    argmax = tuple(int(v) for v in np.flatnonzero(log_x >= hi - config.TIE_TOL))
    return argmin, argmax


def _set_distance(g, argmin, argmax):
    dist = bfs_distances(g, argmax)
    return int(min(dist[v] for v in argmin))


def perron(g, tol=None, max_iter=None):
    """Shifted power iteration on A + I for the Perron data of a connected graph.

    The linear phase stops on an absolute residual. The log-domain phase then
    drives the residual of every entry relative to that entry below tol, with
    tiny entries kept as logs.
    """
    tol = config.PERRON_TOL if tol is None else tol
    max_iter = config.PERRON_MAX_ITER if max_iter is None else max_iter
    if not tol > 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    if not is_connected(g):
        raise DisconnectedGraphError(f"Perron data needs a connected graph ({g!r} is disconnected)")

    if g.n == 1:
        one = np.ones(1)
        zero = np.zeros(1)
        one.setflags(write=False)
        zero.setflags(write=False)
        return PerronData(lambda1=0.0, x=one, log_x=zero, log_gamma=0.0, argmin_set=(0,),
                          argmax_set=(0,), k_minus_1=0, sigma=None, residual=0.0, iterations=0)

    a = _operator(g)
    x = g.degrees.astype(np.float64)
    x /= x.max()
    residual = math.inf
    lambda1 = 0.0
    for iteration in range(1, max_iter + 1):
        ax = a @ x
        lambda1 = float(x @ ax) / float(x @ x)
        residual = float(np.max(np.abs(ax - lambda1 * x)))
        if residual <= tol * max(1.0, lambda1):
            break
        x = ax + x
        x /= x.max()
    else:
        raise ConvergenceError(
            f"Power iteration did not reach residual {tol:g} in {max_iter} sweeps (last residual {residual:.3e})",
            iterations=max_iter, residual=residual)

    with np.errstate(divide='ignore'):
        log_x = np.log(x)
    if lambda1 > 2.0:
        _refine_pendant_paths(g, lambda1, log_x)
    _fill_underflow(g, lambda1, log_x)
    log_x -= log_x.max()
    log_x, residual, sweeps = _polish_log_domain(g, lambda1, log_x, tol, max_iter)
    iteration += sweeps
    x = np.exp(log_x)
    x.setflags(write=False)
    log_x.setflags(write=False)

    argmin, argmax = _extreme_sets(log_x)
    sigma = sigma_of(lambda1) if lambda1 > 2.0 else None
    logger.debug(f"perron: n={g.n} lambda1={lambda1:.15g} iterations={iteration} residual={residual:.3e}")
    return PerronData(
        lambda1=lambda1,
        x=x,
        log_x=log_x,
        log_gamma=float(-log_x.min()),
        argmin_set=argmin,
        argmax_set=argmax,
        k_minus_1=_set_distance(g, argmin, argmax),
        sigma=sigma,
        residual=residual,
        iterations=iteration,
    )


def min_max_distance(g, pd):
    """Shortest distance between an argmin and an argmax vertex (k - 1)."""
    return _set_distance(g, pd.argmin_set, pd.argmax_set)
