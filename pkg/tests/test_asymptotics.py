import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from cmgroups.asymptotics import (
    CSV_COLUMNS,
    _phi_tail_sum,
    aggregate,
    c_E_truncated,
    coefficient_table,
    li_of,
    nk_sanity,
    theorem_reports,
    weil_check,
)
from cmgroups.curves import InvariantViolation, Method, PrimeRecord, compute_record
from cmgroups.division import CoverageError, estimate_table
from cmgroups.modular import sieve_mu_phi


def test_aggregate_at_13(cm4):
    recs = [compute_record(cm4, p) for p in (3, 5, 7, 11, 13)]
    row = aggregate(recs, cm4, [13], K=4).row(13)
    assert (row.sum_e, row.sum_d, row.sum_p_over_d) == (20, 10, 19.5)
    assert row.pi_E[2] == 5
    assert row.thm12_ratio is None


def test_aggregate_rejects_gaps_and_bad_rows(cm4):
    recs = [compute_record(cm4, p) for p in (3, 5, 7, 11, 13)]
    with pytest.raises(CoverageError):
        aggregate(recs[:-1], cm4, [13])
    broken = recs[:-1] + [PrimeRecord(13, 6, 2, 5, Method.ENUMERATION)]
    with pytest.raises(InvariantViolation, match="13"):
        aggregate(broken, cm4, [13])


def test_li_against_mpmath():
    mpmath.mp.dps = 30
    for y in (2.5, 10, 100, 1e4, 1e6, 1e12):
        ref = float(mpmath.li(y) - mpmath.li(2))
        assert math.isclose(li_of(y), ref, rel_tol=1e-12)
    assert li_of(2) == 0.0
    assert math.isclose(li_of(100), 29.0809778039621, rel_tol=1e-13)
    with pytest.raises(ValueError):
        li_of(1.5)


def test_li_shape():
    for y in np.geomspace(4, 1e14, 40):
        assert li_of(y) < y
    for y in (1e2, 1e4, 1e6):
        h = y * 1e-6
        slope = (li_of(y + h) - li_of(y - h)) / (2 * h)
        assert abs(slope * math.log(y) - 1) < 1e-4


def test_coefficients():
    g = coefficient_table(12)
    assert g[1] == 1 and g[2] == Fraction(-1, 2) and g[4] == Fraction(-1, 4)
    assert g[6] == Fraction(1 - 2 - 3 + 6, 6)
    with pytest.raises(ValueError):
        coefficient_table(0)


def test_coefficients_match_definition():
    mu, _ = sieve_mu_phi(300)
    g = coefficient_table(300)
    for k in range(1, 301):
        direct = sum(Fraction(int(mu[d]), k // d) for d in range(1, k + 1) if k % d == 0)
        assert g[k] == direct


def test_phi_tail_is_an_upper_bound():
    _, phi = sieve_mu_phi(400_000)
    partial = float(np.sum(1.0 / phi[41:].astype(float) ** 2))
    bound = _phi_tail_sum(40)
    assert partial < bound < partial + 0.01


def test_c_E_needs_every_k(cm4, cm4_records_1e4):
    est = estimate_table(cm4, 10, cm4_records_1e4)
    del est[7]
    with pytest.raises(KeyError, match="7"):
        c_E_truncated(cm4, 10, est)


def test_c_E_value(cm4, cm4_records_1e4):
    ce = c_E_truncated(cm4, 40, estimate_table(cm4, 40, cm4_records_1e4))
    assert 0 < ce.value < 1
    assert ce.sigma > 0 and ce.tail > 0
    assert math.isclose(ce.value, sum(t for _, _, t in ce.terms))


def test_weil_check():
    weil_check(PrimeRecord(13, 6, 2, 4, Method.ENUMERATION))
    with pytest.raises(InvariantViolation):
        weil_check(PrimeRecord(13, 6, 1, 9, Method.ENUMERATION))


def test_report_rows(cm4, cm4_records_1e4):
    rep = aggregate(cm4_records_1e4, cm4, [1000, 10_000])
    r = rep.row(10_000)
    assert r.primes == 1228
    assert len(r.csv_values()) == len(CSV_COLUMNS)
    assert r.R == r.sum_e / r.li_x2
    verdicts = theorem_reports(rep, c_E_truncated(cm4, 40, estimate_table(cm4, 40, cm4_records_1e4)))
    assert {v.name for v in verdicts} >= {"R(x) in (0,1)", "R(x_max) vs c_E truncation"}
    names = [v.name for v in nk_sanity(cm4, cm4_records_1e4, 10_000)]
    assert len(names) == 3
