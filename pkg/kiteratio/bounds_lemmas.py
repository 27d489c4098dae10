"""
Principal-ratio bounds evaluated on one graph, plus the structural checks of
the extremal-graph lemmas. Every comparison is in log domain.
"""

import math
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from . import config
from .errors import DomainError
from .graph_core import shortest_path
from .spectral import log_phi

logger = logging.getLogger('kiteratio.bounds_lemmas')

# Lemmas about the extremal graph are stated for n >= 5000
LARGE_N = 5000
# lemma21 sequences are listed only for paths up to this length
LEMMA21_MAX_K = 500


@dataclass
class BoundReport:
    n: int
    log_gamma: float
    k: int
    schneider: Optional[float] = None
    cg_distance_bound: Optional[float] = None
    lemma21: Optional[List[float]] = None
    lemma22_j: Optional[int] = None
    lemma22_lower: Optional[float] = None
    lemma22_upper: Optional[float] = None
    k_window: Optional[Tuple[float, float]] = None
    slacks: Dict[str, float] = field(default_factory=dict)

    def holds(self, tol=config.LOG_TOL):
        return all(v >= -tol for v in self.slacks.values())

    def to_dict(self):
        return {
            "n": self.n,
            "k": self.k,
            "log_gamma": self.log_gamma,
            "schneider": self.schneider,
            "cg_distance_bound": self.cg_distance_bound,
            "lemma21": self.lemma21,
            "lemma22_j": self.lemma22_j,
            "lemma22_lower": self.lemma22_lower,
            "lemma22_upper": self.lemma22_upper,
            "k_window": list(self.k_window) if self.k_window is not None else None,
            "slacks": dict(sorted(self.slacks.items())),
        }


@dataclass
class LemmaCheckOutcome:
    lemma: str
    applicable: bool
    holds: Optional[bool]
    lhs: Optional[float]
    rhs: Optional[float]
    context: Dict[str, object]

    def to_dict(self):
        return {
            "lemma": self.lemma,
            "applicable": self.applicable,
            "holds": self.holds,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "context": self.context,
        }


def schneider_bound(pd, n):
    """log of lambda1^(n-1)."""
    if not pd.lambda1 > 1.0:
        raise DomainError(f"Schneider bound needs lambda1 > 1, got {pd.lambda1}")
    return (n - 1) * math.log(pd.lambda1)


def cg_distance_bound(pd):
    """log phi_{d+1}(sigma) with d the min-max distance."""
    return log_phi(pd.lambda1, pd.k_minus_1 + 1)


def min_max_path(g, pd):
    """The path v1..vk from an argmin to an argmax vertex used by every bound."""
    return shortest_path(g, pd.argmin_set, pd.argmax_set)


def lemma21_bound(pd, path, j):
    """log(phi_j(sigma) / x_{v_j}) along the min-max path, 1 <= j <= k."""
    if not 1 <= j <= len(path):
        raise DomainError(f"j must lie in 1..{len(path)}, got {j}")
    return log_phi(pd.lambda1, j) - float(pd.log_x[path[j - 1]])


def lemma22_sandwich(lambda1, j):
    """(lower, upper) in log domain around log phi_j(sigma); both sides non-strict."""
    if j < 2:
        raise DomainError(f"The sandwich needs j >= 2, got {j}")
    if not lambda1 > 2.0:
        raise DomainError(f"The sandwich needs lambda1 > 2, got {lambda1}")
    log_lambda = math.log(lambda1)
    lower = (j - 2) * math.log(lambda1 - 1.0 / (lambda1 - 1.0)) + log_lambda
    upper = (j - 2) * math.log(lambda1 - 1.0 / lambda1) + log_lambda
    return lower, upper


def k_window(n):
    """Open interval for k on an extremal graph of order n >= 5000."""
    if n < LARGE_N:
        raise DomainError(f"The k-window is stated for n >= {LARGE_N}, got {n}")
    log_n = math.log(n)
    lower = n - (n / log_n) * (1.0 + 1.1 / math.sqrt(log_n))
    upper = n - (n / log_n) * (1.0 - 1.0 / log_n)
    return lower, upper


def bound_report(g, pd, j=None):
    """Every bound that applies to (g, pd); j defaults to k for the sandwich."""
    report = BoundReport(n=g.n, log_gamma=pd.log_gamma, k=pd.k)
    if pd.lambda1 > 1.0:
        report.schneider = schneider_bound(pd, g.n)
        report.slacks["schneider"] = report.schneider - pd.log_gamma

    if pd.lambda1 > 2.0:
        report.cg_distance_bound = cg_distance_bound(pd)
        report.slacks["cg_distance"] = report.cg_distance_bound - pd.log_gamma
        path = min_max_path(g, pd)
        if len(path) <= LEMMA21_MAX_K:
            report.lemma21 = [lemma21_bound(pd, path, i) for i in range(1, len(path) + 1)]
        report.slacks["lemma21"] = lemma21_bound(pd, path, len(path)) - pd.log_gamma

        j = pd.k if j is None else j
        if j >= 2:
            report.lemma22_j = j
            report.lemma22_lower, report.lemma22_upper = lemma22_sandwich(pd.lambda1, j)
            if j == pd.k:
                report.slacks["lemma22_upper"] = report.lemma22_upper - pd.log_gamma

    if g.n >= LARGE_N:
        report.k_window = k_window(g.n)
    return report


def _outcome(lemma, holds, lhs, rhs, context):
    return LemmaCheckOutcome(lemma=lemma, applicable=True, holds=bool(holds),
                             lhs=None if lhs is None else float(lhs),
                             rhs=None if rhs is None else float(rhs), context=context)


def _not_applicable(lemma, context):
    return LemmaCheckOutcome(lemma=lemma, applicable=False, holds=None, lhs=None, rhs=None, context=context)


def lemma_checks(g, pd):
    """One outcome per extremal-graph lemma; inapplicable checks are marked, not dropped."""
    n, k, lam = g.n, pd.k, pd.lambda1
    path = min_max_path(g, pd)
    v_k = path[-1]
    v_k_minus_1 = path[-2] if k >= 2 else None
    x_k_minus_1 = float(pd.x[v_k_minus_1]) if v_k_minus_1 is not None else None
    context = {
        "n": n,
        "k": k,
        "lambda1": lam,
        "norm_squared": pd.norm_squared,
        "x_k_minus_1": x_k_minus_1,
        "degree_v_k_minus_1": int(g.degrees[v_k_minus_1]) if v_k_minus_1 is not None else None,
    }
    outcomes = []

    # v1..v_{k-1} is a pendant path and v_k sees everything off it
    on_path = set(path[:-1])
    violations = 0
    if k >= 2:
        if g.degrees[path[0]] != 1:
            violations += 1
        violations += sum(1 for v in path[1:-1] if g.degrees[v] != 2 and v != path[-2])
    violations += sum(1 for v in range(n) if v != v_k and v not in on_path and not g.has_edge(v_k, v))
    outcomes.append(_outcome("pendant_path", violations == 0, violations, 0, context))

    # maximum degree n-k+1 and lambda < n-k+1
    max_degree = int(g.degrees.max())
    outcomes.append(_outcome("max_degree", max_degree == n - k + 1 and lam < n - k + 1,
                             lam, n - k + 1, dict(context, max_degree=max_degree)))

    outcomes.append(_outcome("lambda_lower", lam > n - k, lam, n - k, context))

    if n >= LARGE_N:
        lower, upper = k_window(n)
        outcomes.append(_outcome("k_window", lower < k < upper, k, upper,
                                 dict(context, window=[lower, upper])))
        norm = pd.norm_squared
        outcomes.append(_outcome("norm_window", lam < norm < lam + 10.0 / 9.0, norm, lam + 10.0 / 9.0, context))
        outcomes.append(_outcome("lambda_upper", lam < n - k + 0.6, lam, n - k + 0.6, context))
        if x_k_minus_1 is not None:
            outcomes.append(_outcome("x_k_minus_1", x_k_minus_1 < n ** -0.24, x_k_minus_1, n ** -0.24, context))
        else:
            outcomes.append(_not_applicable("x_k_minus_1", context))
    else:
        for lemma in ("k_window", "norm_window", "lambda_upper", "x_k_minus_1"):
            outcomes.append(_not_applicable(lemma, context))

    if k >= 3:
        degree = context["degree_v_k_minus_1"]
        outcomes.append(_outcome("degree_v_k_minus_1", degree == 2, degree, 2, context))
    else:
        outcomes.append(_not_applicable("degree_v_k_minus_1", context))

    failed = [o.lemma for o in outcomes if o.applicable and not o.holds]
    if failed:
        logger.info(f"lemma checks failing on n={n}, k={k}: {failed}")
    return outcomes
