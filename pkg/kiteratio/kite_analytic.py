"""
Analytic kite graphs P_r . K_s.

lambda1 comes from bisection on the secular equation of the pendant-path
transfer recurrence phi_{j+1} = lambda*phi_j - phi_{j-1} (phi_0 = 0, phi_1 = 1),
and the principal ratio from the pendant-path equality case
gamma = phi_r(sigma), kept in log domain.
"""

import math
import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import config
from .errors import DomainError
from .graph_core import KiteSpec
from .spectral import LINEAR_LOG_LIMIT, log_phi, sigma_of

logger = logging.getLogger('kiteratio.kite_analytic')

# Rescale the recurrence this often to keep phi finite
RESCALE_EVERY = 50
BISECTION_CAP = 200
BRACKET_OFFSET = 1e-9
# path_profile is filled in only for paths up to this order
PROFILE_LIMIT = 200


@dataclass(frozen=True)
class KiteSolution:
    spec: KiteSpec
    lambda1: float
    sigma: Optional[float]
    log_gamma: float
    path_profile: Optional[Tuple[float, ...]] = None

    @property
    def gamma(self):
        if self.log_gamma < LINEAR_LOG_LIMIT:
            return math.exp(self.log_gamma)
        return None

    def to_dict(self):
        return {
            "r": self.spec.r,
            "s": self.spec.s,
            "n": self.spec.n,
            "lambda1": self.lambda1,
            "sigma": self.sigma,
            "log_gamma": self.log_gamma,
            "gamma": self.gamma,
            "path_profile": list(self.path_profile) if self.path_profile is not None else None,
        }


def log_phi_sequence(lambda1, m):
    """log phi_1 .. log phi_m from the recurrence, rescaled every 50 steps.

    Valid while every phi_j is positive (always for lambda1 >= 2).
    """
    logs = np.empty(m)
    prev, cur = 0.0, 1.0
    offset = 0.0
    logs[0] = 0.0
    for j in range(1, m):
        prev, cur = cur, lambda1 * cur - prev
        if j % RESCALE_EVERY == 0:
            scale = max(abs(prev), abs(cur))
            prev, cur = prev / scale, cur / scale
            offset += math.log(scale)
        logs[j] = math.log(cur) + offset
    return logs


def secular_function(spec, lam):
    """F(lam) = lam*phi_r - phi_{r-1} - (s-1)*phi_r/(lam - s + 2), up to a positive factor.

    phi is run through the scaled recurrence, so only the sign and relative size
    are meaningful; F is homogeneous in (phi_r, phi_{r-1}).
    """
    r, s = spec.r, spec.s
    prev, cur = 0.0, 1.0
    for j in range(1, r):
        prev, cur = cur, lam * cur - prev
        if j % RESCALE_EVERY == 0:
            scale = max(abs(prev), abs(cur))
            prev, cur = prev / scale, cur / scale
    return lam * cur - prev - (s - 1) * cur / (lam - s + 2)


def _reduced_secular(lam, r, s):
    """F/phi_r with phi_{r-1}/phi_r in closed form; arrays allowed, lam > 2."""
    t = np.arccosh(lam / 2.0)
    ratio = np.exp(-t) * np.expm1(-2.0 * (r - 1) * t) / np.expm1(-2.0 * r * t)
    return lam - ratio - (s - 1) / (lam - s + 2)


def _bisect_many(r, s, tol):
    """Vectorised bisection of the reduced secular function on (s-1+1e-9, s)."""
    r = np.asarray(r, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    lo = s - 1.0 + BRACKET_OFFSET
    hi = s.copy()
    for _ in range(BISECTION_CAP):
        if np.max(hi - lo) <= tol:
            break
        mid = 0.5 * (lo + hi)
        negative = _reduced_secular(mid, r, s) < 0
        lo = np.where(negative, mid, lo)
        hi = np.where(negative, hi, mid)
    return 0.5 * (lo + hi)


def kite_lambda1(spec, tol=None):
    """Spectral radius of P_r . K_s.

    r = 1 is K_s (s - 1); s = 2 is a path of r + 1 vertices (2 cos(pi/(r+2))).
    """
    tol = config.KITE_TOL if tol is None else tol
    if not tol > 0:
        raise DomainError(f"Tolerance must be positive, got {tol}")
    if spec.r == 1:
        return float(spec.s - 1)
    if spec.s == 2:
        return 2.0 * math.cos(math.pi / (spec.r + 2))
    return float(_bisect_many([spec.r], [spec.s], tol)[0])


def kite_log_gamma(spec, tol=None):
    """Natural log of gamma(P_r . K_s) = phi_r(sigma)."""
    if spec.r == 1:
        return 0.0
    lambda1 = kite_lambda1(spec, tol)
    if not lambda1 > 2.0:
        raise DomainError(f"Kite {spec} has lambda1 = {lambda1} <= 2; its ratio is outside the sigma formula")
    return log_phi(lambda1, spec.r)


def solve_kite(spec, tol=None, with_profile=True):
    """Full KiteSolution; the path profile phi_j/phi_r is attached for r <= 200."""
    lambda1 = kite_lambda1(spec, tol)
    if spec.r == 1:
        return KiteSolution(spec=spec, lambda1=lambda1,
                            sigma=sigma_of(lambda1) if lambda1 > 2.0 else None,
                            log_gamma=0.0, path_profile=(1.0,) if with_profile else None)
    log_gamma = kite_log_gamma(spec, tol)
    profile = None
    if with_profile and spec.r <= PROFILE_LIMIT:
        logs = log_phi_sequence(lambda1, spec.r)
        profile = tuple(float(v) for v in np.exp(logs - logs[-1]))
    return KiteSolution(spec=spec, lambda1=lambda1, sigma=sigma_of(lambda1),
                        log_gamma=log_gamma, path_profile=profile)


def kite_sweep(n, tol=None):
    """(r values, lambda1 values, log gamma values) for every kite of order n with 2 <= r <= n-2."""
    if n < 4:
        raise DomainError(f"Kite sweeps need n >= 4, got {n}")
    tol = config.KITE_TOL if tol is None else tol
    r = np.arange(2, n - 1)
    s = n - r + 1
    lambdas = _bisect_many(r, s, tol)
    t = np.arccosh(lambdas / 2.0)
    log_sinh_rt = r * t + np.log(-np.expm1(-2.0 * r * t))
    log_sinh_t = t + np.log(-np.expm1(-2.0 * t))
    return r, lambdas, log_sinh_rt - log_sinh_t


def best_kite(n, tol=None):
    """Kite of order n with the largest principal ratio; ties go to the smaller r."""
    r, lambdas, log_gammas = kite_sweep(n, tol)
    i = int(np.argmax(log_gammas))
    spec = KiteSpec(int(r[i]), n - int(r[i]) + 1)
    logger.info(f"best kite for n={n}: r={spec.r}, s={spec.s}, log gamma={log_gammas[i]:.12g}")
    return solve_kite(spec, tol, with_profile=spec.r <= PROFILE_LIMIT)


def is_strict_local_max(n, r, tol=None):
    """True when log gamma at r beats both neighbours r-1 and r+1 that exist."""
    rs, _, log_gammas = kite_sweep(n, tol)
    i = int(r - rs[0])
    left = i == 0 or log_gammas[i] > log_gammas[i - 1]
    right = i == len(rs) - 1 or log_gammas[i] > log_gammas[i + 1]
    return bool(left and right)
