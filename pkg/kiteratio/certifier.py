"""
Dual-precision certificates for the analytic inequalities behind the k-window.

Every quantity is written once against a small numeric backend and evaluated
twice: with 53-bit floats and with a private mpmath context. A verdict is
issued only when both evaluations agree in sign and the margin dominates their
discrepancy; otherwise the certificate is indeterminate. Powers (n - x)^x are
always handled as x * log(n - x).
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import mpmath
import numpy as np

from . import config
from .errors import CertifierError

logger = logging.getLogger('kiteratio.certifier')

HOLDS = "holds"
FAILS = "fails"
INDETERMINATE = "indeterminate"

# The margin must exceed the cross-precision discrepancy by this factor
AGREEMENT_FACTOR = 10
LEMMA23_MIN_N = 16
APPENDIX_MIN_N = 5000


class FloatBackend:
    bits = 53

    def num(self, value):
        return float(value)

    def log(self, value):
        return math.log(value)

    def sqrt(self, value):
        return math.sqrt(value)


class MPBackend:
    """Extended precision on a private context so threads never share precision state."""

    def __init__(self, bits):
        self.bits = bits
        self.ctx = mpmath.MPContext()
        self.ctx.prec = bits

    def num(self, value):
        return self.ctx.mpf(value)

    def log(self, value):
        return self.ctx.log(value)

    def sqrt(self, value):
        return self.ctx.sqrt(value)


FLOAT = FloatBackend()


@dataclass(frozen=True)
class Certificate:
    target: str
    n: Optional[int]
    verdict: str
    margin_lo: float
    margin_hi: float
    bits_lo: int
    bits_hi: int
    x: Optional[float] = None

    @property
    def holds(self):
        return self.verdict == HOLDS

    def to_dict(self):
        data = {"target": self.target, "n": self.n}
        if self.x is not None:
            data["x"] = self.x
        data["verdict"] = self.verdict
        data["margin_lo"] = self.margin_lo
        data["margin_hi"] = self.margin_hi
        return data


@dataclass(frozen=True)
class SweepSummary:
    target: str
    n_values: int
    certificates: int
    holds: int
    fails: int
    indeterminate: int

    @property
    def all_hold(self):
        return self.holds == self.certificates

    def to_dict(self):
        return {
            "summary": True,
            "target": self.target,
            "n_values": self.n_values,
            "certificates": self.certificates,
            "holds": self.holds,
            "fails": self.fails,
            "indeterminate": self.indeterminate,
        }


# Auxiliary functions. n and x are exact inputs; m is the backend.

def _logs(m, value):
    log_v = m.log(m.num(value))
    return log_v, m.log(log_v)


def log_f(n, x, m=FLOAT):
    """log f_n(x) = x * log(n - x)."""
    x = m.num(x)
    return x * m.log(m.num(n) - x)


def _g_at_gap(m, n, gap):
    return m.log(gap) - m.num(n) / gap + 1


def g(n, x, m=FLOAT):
    """log(n - x) - n/(n - x) + 1, the logarithmic derivative of f_n."""
    return _g_at_gap(m, n, m.num(n) - m.num(x))


def h(x, m=FLOAT):
    log_x, loglog_x = _logs(m, x)
    root = m.sqrt(log_x)
    return loglog_x / root * (1 + 1 / root)


def p(x, m=FLOAT):
    x = m.num(x)
    log_x = m.log(x)
    root = m.sqrt(log_x)
    return (m.num('0.014') * x / root + m.log(x / log_x) + x / log_x
            + m.num('1.1') * x / (log_x * root) - 40 * root * (log_x - 1) + 44)


def p_prime_brackets(x, m=FLOAT):
    """The three bracketed groups of p'(x); each is positive for x >= 5000."""
    x = m.num(x)
    log_x = m.log(x)
    root = m.sqrt(log_x)
    first = m.num('0.014') / root - m.num('0.007') / (log_x * root)
    second = 1 / log_x - 1 / log_x ** 2 - m.num('1.65') / (log_x ** 2 * root) - 60 * root / x
    third = m.num('1.1') / (log_x * root) - 1 / (x * log_x)
    return first, second, third


def q(x, m=FLOAT):
    x = m.num(x)
    log_x = m.log(x)
    loglog_x = m.log(log_x)
    linear = (loglog_x + loglog_x / log_x - 1 / log_x ** 2 - 2) * x
    return linear + (100 * log_x - 199) / 99 * log_x - 100 * log_x ** 3 / 99


def q_prime_tail(x, m=FLOAT):
    """loglog x/(log x)^2 + 199/(99x) + 100(log x)^2/(33x), bounded by 0.1 for x >= 5000."""
    x = m.num(x)
    log_x = m.log(x)
    loglog_x = m.log(log_x)
    return loglog_x / log_x ** 2 + m.num(199) / (99 * x) + 100 * log_x ** 2 / (33 * x)


def A(n, m=FLOAT):
    log_n = m.log(m.num(n))
    return 1 + m.num(n) / log_n * (1 + 1 / m.sqrt(log_n))


def B(n, m=FLOAT):
    log_n = m.log(m.num(n))
    return m.num(n) / log_n * (1 + 1 / log_n) - 2


def _offsets(m, n):
    """(c0, c1, c2, c3) = (n/log n) times 1+1/sqrt(log n), 1+1.1/sqrt(log n), 1-1/log n, 1+1/log n."""
    log_n = m.log(m.num(n))
    base = m.num(n) / log_n
    root = m.sqrt(log_n)
    return (base * (1 + 1 / root), base * (1 + m.num('1.1') / root),
            base * (1 - 1 / log_n), base * (1 + 1 / log_n))


# Certificate plumbing

def _sign(value):
    return (value > 0) - (value < 0)


def _certify(target, n, margin_fn, bits=None, x=None):
    bits = config.PRECISION_BITS if bits is None else bits
    hi_backend = MPBackend(bits)
    lo = float(margin_fn(FLOAT))
    hi_exact = margin_fn(hi_backend)
    hi = float(hi_exact)
    discrepancy = float(abs(hi_exact - hi_backend.num(lo)))

    if _sign(lo) != _sign(hi) or abs(hi) <= AGREEMENT_FACTOR * discrepancy:
        verdict = INDETERMINATE
        logger.warning(f"{target} at n={n}{'' if x is None else f', x={x:.6g}'} is indeterminate "
                       f"(margins {lo:.3e} / {hi:.3e})")
    else:
        verdict = HOLDS if hi > 0 else FAILS
    return Certificate(target=target, n=n, verdict=verdict, margin_lo=lo, margin_hi=hi,
                       bits_lo=FLOAT.bits, bits_hi=bits, x=x)


def _require_n(n, minimum, what):
    if int(n) != n or n < minimum:
        raise CertifierError(f"{what} needs an integer n >= {minimum}, got {n}")


def check_lemma23(n, bits=None):
    """g(n - c0) > 0 and g(n - c3) < 0, then three decreasing spot checks of g between them."""
    _require_n(n, LEMMA23_MIN_N, "check_lemma23")

    def positive(m):
        return _g_at_gap(m, n, _offsets(m, n)[0])

    def negative(m):
        return -_g_at_gap(m, n, _offsets(m, n)[3])

    certs = [_certify("lemma23.g_positive", n, positive, bits),
             _certify("lemma23.g_negative", n, negative, bits)]

    c0, _, _, c3 = _offsets(FLOAT, n)
    step = (c0 - c3) / 8.0
    for i in (1, 2, 3):
        gap = c0 - i * (c0 - c3) / 4.0

        def decreasing(m, gap=gap):
            return _g_at_gap(m, n, m.num(gap + step)) - _g_at_gap(m, n, m.num(gap - step))

        certs.append(_certify("lemma23.g_decreasing", n, decreasing, bits, x=n - gap))
    return certs


def check_appendix_A_minimum(bits=None):
    """x/2 - 2 log x + 1 is positive at its minimiser x = 4 and larger on either side."""
    def value(m, x):
        x = m.num(x)
        return x / 2 - 2 * m.log(x) + 1

    return [
        _certify("appendixA.minimum", None, lambda m: value(m, 4), bits, x=4.0),
        _certify("appendixA.minimum_left", None, lambda m: value(m, '3.9') - value(m, 4), bits, x=3.9),
        _certify("appendixA.minimum_right", None, lambda m: value(m, '4.1') - value(m, 4), bits, x=4.1),
    ]


def check_appendix_A(n, bits=None):
    _require_n(n, APPENDIX_MIN_N, "check_appendix_A")

    def sqrt_chain(m):
        log_n, loglog_n = _logs(m, n)
        return m.sqrt(log_n) / 2 - loglog_n + 1

    def loglog_threshold(m):
        return _logs(m, n)[1] - m.num('2.125')

    return [_certify("appendixA.sqrt_chain", n, sqrt_chain, bits),
            _certify("appendixA.loglog", n, loglog_threshold, bits)]


def _inequality6(m, n):
    c0, c1, _, _ = _offsets(m, n)
    lhs = (n - 1 - c1) * m.log(1 + c1)
    rhs = (n - 3 - c0) * m.log(A(n, m))
    return rhs - lhs


def _inequality7(m, n):
    _, _, c2, c3 = _offsets(m, n)
    lhs = (n - 1 - c2) * m.log(1 + c2)
    rhs = (n - c3) * m.log(B(n, m))
    return rhs - lhs


def check_appendix_B(n, bits=None, samples=(1, 10, 100)):
    """h, A log A, p, the brackets of p' at n*samples and the end-to-end lower-window inequality."""
    _require_n(n, APPENDIX_MIN_N, "check_appendix_B")

    def a_log_a(m):
        log_n = m.log(m.num(n))
        a = A(n, m)
        return a * m.log(a) - (n + m.num('0.014') * n / m.sqrt(log_n) + m.log(n / log_n))

    certs = [
        _certify("appendixB.h", n, lambda m: m.num('0.986') - h(n, m), bits),
        _certify("appendixB.A_log_A", n, a_log_a, bits),
        _certify("appendixB.p_positive", n, lambda m: p(n, m), bits),
    ]
    for factor in samples:
        x = n * factor
        for i in range(3):
            certs.append(_certify(f"appendixB.p_prime_bracket{i + 1}", n,
                                  lambda m, x=x, i=i: p_prime_brackets(x, m)[i], bits, x=float(x)))
    certs.append(_certify("appendixB.inequality6", n, lambda m: _inequality6(m, n), bits))
    return certs


def check_appendix_C(n, bits=None):
    """The 0.1 tail bound, q, q' lower bound, the B log B step and the upper-window inequality."""
    _require_n(n, APPENDIX_MIN_N, "check_appendix_C")

    def b_log_b(m):
        log_n, loglog_n = _logs(m, n)
        base = m.num(n) / log_n
        lhs = base * (1 + 1 / log_n) * (log_n + 1 / log_n - loglog_n)
        rhs = (1 - log_n ** 2 / (m.num('0.99') * n)) * (n - base * (1 - 1 / log_n) - 1)
        return rhs - lhs

    return [
        _certify("appendixC.tail_bound", n, lambda m: m.num('0.1') - q_prime_tail(n, m), bits),
        _certify("appendixC.q_positive", n, lambda m: q(n, m), bits),
        _certify("appendixC.q_prime", n, lambda m: _logs(m, n)[1] - m.num('2.1'), bits),
        _certify("appendixC.inequality7", n, lambda m: _inequality7(m, n), bits),
        _certify("appendixC.B_log_B", n, b_log_b, bits),
    ]


def check_inequality5(n, k, j, bits=None):
    """(n-k+1)^(k-1) > (n-j-1)^(j-1), compared as (k-1)log(n-k+1) - (j-1)log(n-j-1)."""
    for name, value in (("k", k), ("j", j)):
        if not 2 <= value <= n - 2:
            raise CertifierError(f"{name} must lie in 2..{n - 2}, got {value}")

    def margin(m):
        return (k - 1) * m.log(m.num(n - k + 1)) - (j - 1) * m.log(m.num(n - j - 1))

    return _certify("inequality5", n, margin, bits)


def window_j_values(n):
    """The comparison points used against k at both ends of the window."""
    c0, _, _, c3 = _offsets(FLOAT, n)
    return n - 1 - math.ceil(c0), n + 1 - math.ceil(c3)


def check_f_monotonicity(n, region, samples=5, bits=None):
    """Finite-difference direction of log f_n at interior points of one region.

    region is "increasing" (1 < x < n - c0) or "decreasing" (n - c3 < x < n).
    """
    _require_n(n, LEMMA23_MIN_N, "check_f_monotonicity")
    c0, _, _, c3 = _offsets(FLOAT, n)
    if region == "increasing":
        lo, hi, direction = 1.0, n - c0, 1
    elif region == "decreasing":
        lo, hi, direction = n - c3, float(n), -1
    else:
        raise CertifierError(f"Unknown region {region!r}")

    width = (hi - lo) / (samples + 1)
    step = width / 10.0
    certs = []
    for i in range(1, samples + 1):
        x = lo + i * width

        def margin(m, x=x):
            return direction * (log_f(n, x + step, m) - log_f(n, x, m))

        certs.append(_certify(f"f_monotone.{region}", n, margin, bits, x=x))
    return certs


def check_h_decreasing(xs, bits=None, ratio='1.01'):
    """h(x) > h(ratio * x) at each sample; stated for x > e^(e^2)."""
    threshold = math.exp(math.exp(2.0))
    certs = []
    for x in xs:
        if not x > threshold:
            raise CertifierError(f"h is decreasing only above e^(e^2) ~ {threshold:.1f}, got {x}")
        certs.append(_certify("h_decreasing", None,
                              lambda m, x=x: h(x, m) - h(m.num(x) * m.num(ratio), m), bits, x=float(x)))
    return certs


_INCREASING = {"p": p, "q": q}


def check_increasing(fn, xs, bits=None, ratio='1.01'):
    """fn(ratio * x) > fn(x) at each sample, for fn in {"p", "q"} on x >= 5000."""
    if fn not in _INCREASING:
        raise CertifierError(f"Unknown function {fn!r}; expected one of {sorted(_INCREASING)}")
    func = _INCREASING[fn]
    certs = []
    for x in xs:
        if x < APPENDIX_MIN_N:
            raise CertifierError(f"{fn} is increasing on x >= {APPENDIX_MIN_N}, got {x}")
        certs.append(_certify(f"{fn}_increasing", None,
                              lambda m, x=x: func(m.num(x) * m.num(ratio), m) - func(x, m), bits, x=float(x)))
    return certs


def log_spaced(start, stop, count):
    """Distinct integers spaced evenly in log between start and stop inclusive."""
    if count < 1 or start < 1 or stop < start:
        raise CertifierError(f"Bad log-spaced range ({start}, {stop}, {count})")
    values = np.unique(np.rint(np.geomspace(start, stop, count)).astype(np.int64))
    return [int(v) for v in values]


def _f_monotone_both(n, bits=None):
    return check_f_monotonicity(n, "increasing", bits=bits) + check_f_monotonicity(n, "decreasing", bits=bits)


TARGETS = {
    "lemma23": (LEMMA23_MIN_N, check_lemma23),
    "appendixA": (APPENDIX_MIN_N, check_appendix_A),
    "appendixB": (APPENDIX_MIN_N, check_appendix_B),
    "appendixC": (APPENDIX_MIN_N, check_appendix_C),
    "f_monotone": (LEMMA23_MIN_N, _f_monotone_both),
}


def summarize(target, n_count, certificates):
    verdicts = [c.verdict for c in certificates]
    return SweepSummary(target=target, n_values=n_count, certificates=len(certificates),
                        holds=verdicts.count(HOLDS), fails=verdicts.count(FAILS),
                        indeterminate=verdicts.count(INDETERMINATE))


def sweep(target, n_values, threads=None, bits=None):
    """Certificates for every n in order, evaluated on a thread pool, plus their summary."""
    if target not in TARGETS:
        raise CertifierError(f"Unknown target {target!r}; expected one of {sorted(TARGETS)}")
    n_values = list(n_values)
    if not n_values:
        raise CertifierError("sweep needs at least one n")
    minimum, check = TARGETS[target]
    for n in n_values:
        _require_n(n, minimum, target)

    threads = config.THREADS if threads is None else threads
    logger.info(f"sweeping {target} over {len(n_values)} values of n with {threads} threads")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        batches = list(executor.map(lambda n: check(n, bits=bits), n_values))

    certificates = [c for batch in batches for c in batch]
    summary = summarize(target, len(n_values), certificates)
    logger.info(f"{target}: {summary.holds} hold, {summary.fails} fail, {summary.indeterminate} indeterminate")
    return certificates, summary
