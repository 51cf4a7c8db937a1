import numpy as np
import pytest

from cmgroups.cache import CacheMismatch, cache_path, empty_cache, read_cache
from cmgroups.curves import compute_record
from cmgroups.division import good_primes_upto
from cmgroups.presets import get_preset


def _cache(curve, x):
    c = empty_cache(curve)
    c.extend([compute_record(curve, p) for p in good_primes_upto(curve, x)], x)
    return c


def test_round_trip(tmp_path, cm4):
    c = _cache(cm4, 3000)
    path = cache_path(tmp_path, cm4)
    c.write(path)
    back = read_cache(path, cm4)
    assert back.x_max == 3000
    assert back.records() == c.records()
    assert path.read_bytes().startswith(b"CMGROUPS-RECORDS\nformat: 1\ncurve: cm-4\n")


def test_header_is_self_describing(tmp_path, cm4):
    text = _cache(cm4, 100).header()
    for key in ("hash:", "a4: -1", "a6: 0", "conductor: 32", "d_K: -4", "x_max: 100", "p_min: 3", "p_max: 97", "rows: 24"):
        assert key in text


def test_wrong_curve_refused(tmp_path, cm4):
    path = cache_path(tmp_path, cm4)
    _cache(cm4, 200).write(path)
    with pytest.raises(CacheMismatch, match="hash"):
        read_cache(path, get_preset("cm-3"))


def test_tampered_header_refused(tmp_path, cm4):
    path = cache_path(tmp_path, cm4)
    _cache(cm4, 200).write(path)
    blob = path.read_bytes()
    path.write_bytes(blob.replace(b"a4: -1", b"a4: -2"))
    with pytest.raises(CacheMismatch):
        read_cache(path, cm4)
    path.write_bytes(blob[:-3])
    with pytest.raises(CacheMismatch, match="truncated"):
        read_cache(path, cm4)
    path.write_bytes(b"garbage")
    with pytest.raises(CacheMismatch):
        read_cache(path, cm4)


def test_unsorted_rows_refused(tmp_path, cm4):
    c = _cache(cm4, 200)
    c.rows = c.rows[::-1].copy()
    path = cache_path(tmp_path, cm4)
    c.write(path)
    with pytest.raises(CacheMismatch, match="increasing"):
        read_cache(path, cm4)


def test_extend_must_move_forward(cm4):
    c = _cache(cm4, 200)
    with pytest.raises(ValueError):
        c.extend([compute_record(cm4, 101)], 300)


def test_rows_are_little_endian(cm4):
    c = _cache(cm4, 50)
    assert c.rows.dtype["p"] == np.dtype("<u8")
    assert c.rows.dtype["a_p"] == np.dtype("<i8")
