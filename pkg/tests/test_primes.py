import numpy as np
import pytest
import sympy

from cmgroups.primes import (
    SegmentTooLarge,
    WorkerError,
    good_primes,
    iter_segments,
    parallel_map_records,
    prime_count,
    sieve_segment,
    small_primes,
)
from cmgroups.presets import get_preset


def test_small_primes():
    assert small_primes(30).tolist() == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]


def test_segments_match_sympy():
    for lo, hi in [(2, 100), (2, 3), (10**6, 10**6 + 5000), (10**12, 10**12 + 3000)]:
        assert list(sieve_segment(lo, hi).primes) == list(sympy.primerange(lo, hi))


def test_iter_segments_is_seamless():
    got = [p for seg in iter_segments(0, 100_000, 7_777) for p in seg]
    assert got == list(sympy.primerange(0, 100_000))


def test_prime_count():
    assert prime_count(10**4) == 1229
    assert prime_count(10**6) == 78498


def test_segment_budget():
    with pytest.raises(SegmentTooLarge):
        sieve_segment(2, 10**8, budget=1000)


def test_good_primes_drop_two_and_bad():
    cm11 = get_preset("cm-11")
    seg = good_primes(sieve_segment(2, 50), cm11)
    assert 2 not in seg.primes and 11 not in seg.primes and 3 not in seg.primes
    assert 5 in seg.primes


def _boom(p):
    if p == 97:
        raise RuntimeError("bad input")
    return p


def test_worker_error_names_prime():
    ps = list(sympy.primerange(3, 400))
    for workers in (1, 2):
        with pytest.raises(WorkerError, match="97"):
            parallel_map_records(ps, _boom, workers=workers, chunksize=4)


def test_parallel_order_preserved():
    ps = list(sympy.primerange(3, 5000))
    assert parallel_map_records(ps, np.square, workers=3, chunksize=7) == [np.square(p) for p in ps]
