"""Segmented prime enumeration and the ordered parallel map over primes."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from multiprocessing import get_context
from typing import Callable, Iterator, Sequence

import numpy as np

DEFAULT_SEGMENT = 1 << 22
# odd-only bitmap bytes allowed per segment
MEMORY_BUDGET = 1 << 28
MAX_HI = 1 << 40


class SegmentTooLarge(ValueError):
    pass


class WorkerError(RuntimeError):
    def __init__(self, p: int, cause: BaseException):
        super().__init__(f"worker failed at p={p}: {type(cause).__name__}: {cause}")
        self.p = p
        self.cause = cause

    def __reduce__(self):
        return (WorkerError, (self.p, self.cause))


@dataclass(frozen=True)
class PrimeSegment:
    lo: int
    hi: int
    primes: tuple[int, ...]

    def __iter__(self):
        return iter(self.primes)

    def __len__(self):
        return len(self.primes)


def small_primes(limit: int) -> np.ndarray:
    """Primes <= limit by a plain sieve."""
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if flags[q]:
            flags[q * q :: q] = False
    return np.flatnonzero(flags).astype(np.int64)


def sieve_segment(lo: int, hi: int, budget: int = MEMORY_BUDGET) -> PrimeSegment:
    """All primes in [lo, hi), ascending."""
    if not (2 <= lo < hi <= MAX_HI):
        raise ValueError(f"need 2 <= lo < hi <= 2**40, got [{lo}, {hi})")
    n_odd = (hi - lo) // 2 + 1
    if n_odd > budget:
        raise SegmentTooLarge(
            f"segment [{lo}, {hi}) needs {n_odd} bytes; split it into pieces of at most {2 * budget} integers"
        )
    out: list[int] = [2] if lo <= 2 < hi else []
    first = lo | 1  # first odd >= lo
    if first < 3:
        first = 3
    if first >= hi:
        return PrimeSegment(lo, hi, tuple(out))
    size = (hi - first + 1) // 2  # odds first, first+2, ... < hi
    flags = np.ones(size, dtype=bool)
    for q in small_primes(math.isqrt(hi - 1))[1:]:
        q = int(q)
        start = max(q * q, ((first + q - 1) // q) * q)
        if start % 2 == 0:
            start += q
        if start >= hi:
            continue
        flags[(start - first) // 2 :: q] = False
    out.extend((first + 2 * np.flatnonzero(flags)).tolist())
    return PrimeSegment(lo, hi, tuple(out))


def iter_segments(lo: int, hi: int, segment: int = DEFAULT_SEGMENT) -> Iterator[PrimeSegment]:
    start = max(lo, 2)
    while start < hi:
        stop = min(start + segment, hi)
        yield sieve_segment(start, stop)
        start = stop


def prime_count(x: int, segment: int = DEFAULT_SEGMENT) -> int:
    """pi(x) by summing segment counts."""
    if x < 2:
        return 0
    return sum(len(s) for s in iter_segments(2, x + 1, segment))


def good_primes(seg: PrimeSegment, curve) -> PrimeSegment:
    """Drop p = 2 and primes of bad reduction for the curve's model."""
    bad = curve.bad_primes
    kept = tuple(p for p in seg.primes if p != 2 and p not in bad)
    return PrimeSegment(seg.lo, seg.hi, kept)


def _call(worker: Callable, p: int):
    try:
        return worker(p)
    except Exception as exc:  # noqa: BLE001 - re-raised with the prime attached
        raise WorkerError(p, exc) from exc


class _Guarded:
    def __init__(self, worker):
        self.worker = worker

    def __call__(self, p):
        return _call(self.worker, p)


def default_workers() -> int:
    env = os.environ.get("CMGROUPS_WORKERS")
    return int(env) if env else 1


def parallel_map_records(primes: Sequence[int], worker: Callable, workers: int = 1, chunksize: int = 64) -> list:
    """Apply a pure per-prime worker; results come back in input order.

    With workers > 1 a process pool is used, but ``imap`` preserves input
    order so the merged list never depends on scheduling.
    """
    primes = list(primes)
    if workers <= 1 or len(primes) < 2 * chunksize:
        return [_call(worker, p) for p in primes]
    ctx = get_context("fork" if "fork" in _start_methods() else "spawn")
    with ctx.Pool(processes=workers) as pool:
        return list(pool.imap(_Guarded(worker), primes, chunksize=chunksize))


def _start_methods():
    from multiprocessing import get_all_start_methods

    return get_all_start_methods()
