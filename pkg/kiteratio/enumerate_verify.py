"""
Brute-force search for the connected graph of largest principal ratio.

Graphs come either from the built-in labelled enumeration (every edge subset on
n <= 7 vertices) or from a graph6 corpus. Both are processed in chunks: each
chunk is turned into a stack of adjacency matrices, filtered for connectivity
with a reachability closure, pruned against the shared top values and solved
with one batched eigendecomposition.
"""

import time
import logging
import threading
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import config
from .errors import DomainError, VerificationError
from .graph_core import (Graph, KiteSpec, find_pendant_path, is_complete, is_regular,
                         diameter, kite, parse_graph6, read_graph6_file)
from .kite_analytic import best_kite
from .spectral import perron

logger = logging.getLogger('kiteratio.enumerate_verify')

BUILTIN_MIN_N = 2
BUILTIN_MAX_N = 7
CHUNK_SIZE = 1 << 16
# Minimum number of distinct top values tracked for pruning
MIN_TRACKED = 10


@dataclass
class VerificationReport:
    n: int
    source: str
    graphs_scanned: int
    skipped_disconnected: int
    max_log_gamma: float
    argmax_graph: str
    is_kite: bool
    matched_spec: Optional[KiteSpec]
    runner_up_log_gamma: Optional[float]
    best_kite_log_gamma: Optional[float]
    top: List[dict] = field(default_factory=list)
    wall_time: float = 0.0

    def to_dict(self, include_timing=False):
        data = {
            "n": self.n,
            "source": self.source,
            "graphs_scanned": self.graphs_scanned,
            "skipped_disconnected": self.skipped_disconnected,
            "max_log_gamma": self.max_log_gamma,
            "argmax_graph": self.argmax_graph,
            "is_kite": self.is_kite,
            "matched_spec": self.matched_spec.to_dict() if self.matched_spec is not None else None,
            "runner_up_log_gamma": self.runner_up_log_gamma,
            "best_kite_log_gamma": self.best_kite_log_gamma,
            "top": self.top,
        }
        if include_timing:
            data["wall_time"] = self.wall_time
        return data

    def csv_rows(self):
        rows = [["rank", "graph6", "log_gamma", "is_kite"]]
        for rank, row in enumerate(self.top, start=1):
            rows.append([rank, row["graph6"], format(row["log_gamma"], '.17g'), row["is_kite"]])
        return rows


def _pair_index(n):
    """Row and column of each vertex pair in graph6 bit order (column by column)."""
    rows = [i for j in range(1, n) for i in range(j)]
    cols = [j for j in range(1, n) for i in range(j)]
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)


def _masks_to_adjacency(masks, n):
    rows, cols = _pair_index(n)
    bits = ((masks[:, None] >> np.arange(len(rows), dtype=np.int64)) & 1).astype(bool)
    adj = np.zeros((len(masks), n, n), dtype=bool)
    adj[:, rows, cols] = bits
    adj[:, cols, rows] = bits
    return adj


def _graph6_rows(adj):
    """Short-form graph6 text for each matrix of a stack."""
    count, n, _ = adj.shape
    rows, cols = _pair_index(n)
    bits = adj[:, rows, cols].astype(np.int64)
    pad = -bits.shape[1] % 6
    if pad:
        bits = np.concatenate([bits, np.zeros((count, pad), dtype=np.int64)], axis=1)
    values = bits.reshape(count, -1, 6) @ np.array([32, 16, 8, 4, 2, 1]) + 63
    head = chr(n + 63)
    return [head + "".join(map(chr, row)) for row in values.tolist()]


def _closure(adj):
    """(connected mask, diameter) for each matrix of a stack, from powers of I + A."""
    count, n, _ = adj.shape
    eye = np.eye(n, dtype=bool)
    step = (adj | eye).astype(np.float32)
    reach = np.broadcast_to(eye, adj.shape).astype(np.float32)
    done = np.full(count, n == 1)
    diam = np.zeros(count, dtype=np.int64)
    for k in range(1, n):
        reach = ((reach @ step) > 0).astype(np.float32)
        full = reach.min(axis=(1, 2)) > 0
        diam[full & ~done] = k
        done |= full
    return done, diam


def _bounds(adj, diam):
    """Upper bound on log gamma: 0 when regular, else diam * log(max degree)."""
    degrees = adj.sum(axis=2)
    regular = degrees.min(axis=1) == degrees.max(axis=1)
    bound = diam * np.log(np.maximum(degrees.max(axis=1), 1))
    return np.where(regular, 0.0, bound)


def log_gamma_upper_bound(g):
    """Upper bound on log gamma(g): 0 when regular, else diam(g) * log(max degree).

    gamma <= lambda1^diam <= Delta^diam, and diam <= n - 1, so this never
    exceeds the (n - 1) * log(Delta) bound.
    """
    if is_regular(g):
        return 0.0
    return diameter(g) * float(np.log(g.degrees.max()))


def prune_bound(g, best):
    """True when g cannot beat a graph of log principal ratio `best`.

    Every graph pruned under (n - 1) * log(Delta) < best is pruned here too.
    """
    return log_gamma_upper_bound(g) < best


def _group_ends(values_desc, k):
    """Greedy grouping of descending values within TIE_TOL; returns (starts, end of the k-th group)."""
    ascending = -np.asarray(values_desc, dtype=np.float64)
    starts = []
    i = 0
    while i < len(ascending) and len(starts) < k:
        starts.append(i)
        i = int(np.searchsorted(ascending, ascending[i] + config.TIE_TOL, side='right'))
    return starts, i


class SharedBest:
    """Top distinct log gamma values seen so far; read without the lock, stale reads only prune less."""

    def __init__(self, k):
        self.k = k
        self.values = []
        self._lock = threading.Lock()

    def threshold(self):
        values = self.values
        if len(values) < self.k:
            return -np.inf
        return values[self.k - 1] - 2 * config.TIE_TOL

    def offer(self, tops):
        with self._lock:
            merged = sorted(self.values + list(tops), reverse=True)
            starts, _ = _group_ends(merged, self.k)
            self.values = [merged[i] for i in starts]


@dataclass
class _ChunkResult:
    connected: int
    disconnected: int
    pruned: int
    log_gammas: List[float]
    graph6: List[str]


def _scan_stack(adj, shared, prune, tracked):
    connected, diam = _closure(adj)
    adj = adj[connected]
    diam = diam[connected]
    disconnected = int((~connected).sum())
    if len(adj) == 0:
        return _ChunkResult(0, disconnected, 0, [], [])

    keep = np.ones(len(adj), dtype=bool)
    if prune:
        keep = _bounds(adj, diam) >= shared.threshold()
    solved = adj[keep]
    pruned = int((~keep).sum())
    if len(solved) == 0:
        return _ChunkResult(len(adj), disconnected, pruned, [], [])

    a = solved.astype(np.float64)
    w, v = np.linalg.eigh(a)
    lam = w[:, -1]
    vec = np.abs(v[:, :, -1])
    residual = np.abs(np.einsum('bij,bj->bi', a, vec) - lam[:, None] * vec).max(axis=1)
    log_gammas = np.log(vec.max(axis=1)) - np.log(vec.min(axis=1))
    bad = np.flatnonzero(~(residual <= config.SCAN_TOL * np.maximum(1.0, lam)) | ~np.isfinite(log_gammas))
    for i in bad:
        logger.debug(f"batched solve residual {residual[i]:.3e} too large, falling back to power iteration")
        log_gammas[i] = perron(Graph(solved[i]), tol=config.SCAN_TOL).log_gamma

    order = np.argsort(-log_gammas, kind='stable')
    _, end = _group_ends(log_gammas[order], tracked)
    top = order[:end]
    shared.offer(log_gammas[top].tolist())
    return _ChunkResult(len(adj), disconnected, pruned, log_gammas[top].tolist(), _graph6_rows(solved[top]))


def enumerate_connected(n):
    """Every connected labelled graph on n vertices, 2 <= n <= 7, in edge-mask order."""
    stacks = _builtin_stacks(n)
    return (Graph(matrix) for adj in stacks for matrix in adj[_closure(adj)[0]])


def _builtin_stacks(n):
    if not BUILTIN_MIN_N <= n <= BUILTIN_MAX_N:
        raise DomainError(f"Built-in enumeration covers {BUILTIN_MIN_N} <= n <= {BUILTIN_MAX_N}, got {n}; "
                          f"use a graph6 corpus for larger n")
    return _mask_stacks(n)


def _mask_stacks(n):
    total = 1 << (n * (n - 1) // 2)
    for start in range(0, total, CHUNK_SIZE):
        yield _masks_to_adjacency(np.arange(start, min(total, start + CHUNK_SIZE), dtype=np.int64), n)


def _corpus_stacks(path, n):
    batch = []
    seen = 0
    try:
        for line_number, g in read_graph6_file(path):
            if g.n != n:
                raise VerificationError(f"{path}:{line_number}: graph has {g.n} vertices, expected {n}")
            seen += 1
            batch.append(g.adjacency)
            if len(batch) == CHUNK_SIZE:
                yield np.stack(batch)
                batch = []
    except OSError as e:
        raise VerificationError(f"Cannot read graph6 source {path}: {e}") from e
    if batch:
        yield np.stack(batch)
    if seen == 0:
        raise VerificationError(f"graph6 source {path} holds no graphs")


def _run_chunks(stacks, worker, threads):
    """Map worker over stacks on a thread pool, keeping a bounded window in flight, results in order."""
    results = []
    with ThreadPoolExecutor(max_workers=threads) as executor:
        pending = deque()
        for stack in stacks:
            pending.append(executor.submit(worker, stack))
            if len(pending) >= 2 * threads:
                results.append(pending.popleft().result())
        while pending:
            results.append(pending.popleft().result())
    return results


def _kite_degree_sequences(n):
    sequences = set()
    for r in range(1, n):
        sequences.add(tuple(sorted(kite(KiteSpec(r, n - r + 1)).degrees.tolist())))
    return sequences


def is_kite_graph(g):
    """The (r, s) with g isomorphic to P_r . K_s, or None."""
    if g.n < 2:
        return None
    if is_complete(g):
        return KiteSpec(1, g.n)
    path = find_pendant_path(g)
    if path is None:
        return None
    on_path = set(path.vertices)
    rest = [v for v in range(g.n) if v not in on_path]
    if len(rest) == 1:
        return KiteSpec(g.n - 1, 2)
    sub = g.adjacency[np.ix_(rest, rest)]
    if int(sub.sum()) != len(rest) * (len(rest) - 1):
        return None
    return KiteSpec(path.length + 1, len(rest))


def _choose(members, kite_sequences):
    """Representative of one tie group: a kite if any, then the smallest graph6."""
    kites = []
    for text in members:
        g = parse_graph6(text)
        if tuple(sorted(g.degrees.tolist())) in kite_sequences:
            spec = is_kite_graph(g)
            if spec is not None:
                kites.append((text, g, spec))
    if kites:
        return min(kites, key=lambda item: item[0])
    text = min(members)
    return text, parse_graph6(text), None


def verify_conjecture(n, source=None, prune=True, threads=None, top_k=10):
    """Scan every connected graph of order n and report whether a kite attains the maximum ratio.

    source is None for the built-in enumeration or a graph6 file path.
    """
    threads = max(1, config.THREADS if threads is None else threads)
    tracked = max(MIN_TRACKED, top_k)
    if source is None:
        stacks = _builtin_stacks(n)
        source_name = "built-in"
    else:
        stacks = _corpus_stacks(source, n)
        source_name = str(source)

    started = time.perf_counter()
    shared = SharedBest(tracked)
    results = _run_chunks(stacks, lambda adj: _scan_stack(adj, shared, prune, tracked), threads)

    scanned = sum(r.connected for r in results)
    skipped = sum(r.disconnected for r in results)
    pruned = sum(r.pruned for r in results)
    if source is not None and skipped:
        logger.warning(f"skipped {skipped} disconnected graphs in {source_name}")
    if scanned == 0:
        raise VerificationError(f"No connected graphs of order {n} in {source_name}")

    candidates = sorted(((lg, text) for r in results for lg, text in zip(r.log_gammas, r.graph6)),
                        key=lambda item: (-item[0], item[1]))
    values = [lg for lg, _ in candidates]
    starts, end = _group_ends(values, tracked)
    bounds = starts[1:] + [end]

    kite_sequences = _kite_degree_sequences(n)
    groups = []
    for lo, hi in zip(starts, bounds):
        text, g, spec = _choose([t for _, t in candidates[lo:hi]], kite_sequences)
        log_gamma = perron(g, tol=config.RESOLVE_TOL).log_gamma
        groups.append({"graph6": text, "log_gamma": log_gamma, "is_kite": spec is not None, "spec": spec})

    head = groups[0]
    best_kite_log_gamma = best_kite(n).log_gamma if n >= 4 else None
    elapsed = time.perf_counter() - started
    logger.info(f"verify n={n}: {scanned} connected graphs ({pruned} pruned, {skipped} disconnected) "
                f"in {elapsed:.2f}s, memory {config.memory_usage_mb():.1f} MB")

    return VerificationReport(
        n=n,
        source=source_name,
        graphs_scanned=scanned,
        skipped_disconnected=skipped,
        max_log_gamma=head["log_gamma"],
        argmax_graph=head["graph6"],
        is_kite=head["is_kite"],
        matched_spec=head["spec"],
        runner_up_log_gamma=groups[1]["log_gamma"] if len(groups) > 1 else None,
        best_kite_log_gamma=best_kite_log_gamma,
        top=[{k: v for k, v in group.items() if k != "spec"} for group in groups[:top_k]],
        wall_time=elapsed,
    )
