"""Partial sums of d_p and e_p, the logarithmic integral, and the constant c_E."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy import integrate

from .curves import CurveSpec, InvariantViolation, PrimeRecord, check_record
from .division import DivisionFieldEstimate, _check_coverage, envelope, estimate_table, n2_exact, nk_estimate
from .modular import sieve_mu_phi

DEFAULT_K = 40
SPLIT_ENVELOPE_GATE = 30.0
D_SUM_GATE = 5.0
D_SUM_GROWTH = 0.10
DRIFT_ALLOWANCE = 0.05
VARIATION_GATE = 0.2
ENVELOPE_GATE = 10.0
PARITY_KS = range(3, 9)
RATIO_DE_GATE = 1e-2
TAIL_SIEVE = 100_000
CSV_COLUMNS = (
    "x",
    "sum_e",
    "sum_d",
    "sum_p_over_d",
    "li_x2",
    "R",
    "c_E_trunc",
    "sigma_total",
    "lemma23_sup",
    "thm12_ratio",
)


@dataclass(frozen=True)
class CoefficientTable:
    K: int
    g: tuple[Fraction, ...]  # g[k] for 0 <= k <= K, g[0] unused

    def __getitem__(self, k: int) -> Fraction:
        return self.g[k]


def coefficient_table(K: int) -> CoefficientTable:
    """g(k) = sum over d*m = k of mu(d)/m, exactly.

    Written over a common denominator, g(k) = (sum_{d | k} mu(d) d) / k.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    mu, _ = sieve_mu_phi(K)
    num = [0] * (K + 1)
    for d in range(1, K + 1):
        if mu[d]:
            for k in range(d, K + 1, d):
                num[k] += int(mu[d]) * d
    g = (Fraction(0),) + tuple(Fraction(num[k], k) for k in range(1, K + 1))
    return CoefficientTable(K, g)


def li_of(y: float) -> float:
    """Li(y) = integral from 2 to y of dt / log t, by adaptive quadrature in u = log t."""
    if y < 2:
        raise ValueError(f"Li is integrated from 2; got y={y}")
    if y == 2:
        return 0.0
    val, err = integrate.quad(lambda u: math.exp(u) / u, math.log(2.0), math.log(y), epsabs=0.0, epsrel=1e-13, limit=500)
    if err > 1e-10 * abs(val):
        raise ArithmeticError(f"Li({y}) quadrature did not converge: {val} +- {err}")
    return val


def _phi_tail_sum(K: int, M: int = TAIL_SIEVE) -> float:
    """Upper bound for sum_{k > K} 1/phi(k)^2.

    Exact up to M, then phi(k) >= k / h(k) with h(k) = e^gamma loglog k + 3/loglog k
    (valid for k >= 3), summed over dyadic blocks.
    """
    M = max(M, K + 1)
    _, phi = sieve_mu_phi(M)
    head = float(np.sum(1.0 / phi[K + 1 : M + 1].astype(float) ** 2))

    def h(t: float) -> float:
        ll = math.log(math.log(t))
        return math.exp(0.5772156649015329) * ll + 3.0 / ll

    tail, lo = 0.0, float(M)
    for _ in range(400):
        hi = 2 * lo
        tail += h(hi) ** 2 / lo  # sum over (lo, hi] of h^2/k^2 <= h(hi)^2 / lo
        lo = hi
    tail += h(lo) ** 2 / lo * 2  # remaining blocks shrink geometrically
    return head + tail


@dataclass(frozen=True)
class CETruncation:
    K: int
    value: float
    sigma: float
    tail: float
    envelope_floor: float
    terms: tuple[tuple[int, str, float], ...]  # (k, g(k), g(k)/n_k)

    @property
    def total_uncertainty(self) -> float:
        return self.sigma + self.tail


def c_E_truncated(curve: CurveSpec, K: int, estimates: dict[int, DivisionFieldEstimate]) -> CETruncation:
    """sum_{k <= K} g(k)/n_k with its statistical error and a tail envelope.

    The statistical error adds |g(k)| * se(1/n_k) linearly, which is valid
    whatever the correlation between the nested split counts. The tail uses
    n_k >= c phi(k)^2 with c measured on 3 <= k <= 20 and |g(k)| <= 1.
    """
    missing = [k for k in range(1, K + 1) if k not in estimates]
    if missing:
        raise KeyError(f"missing n_k estimates for k = {missing}")
    table = coefficient_table(K)
    value = sigma = 0.0
    terms = []
    for k in range(1, K + 1):
        est = estimates[k]
        gk = table[k]
        term = float(gk) * est.density
        value += term
        if not est.exact:
            q = max(est.density, 1.0 / est.population)
            sigma += abs(float(gk)) * math.sqrt(q * (1.0 - min(q, 1.0)) / est.population)
        terms.append((k, str(gk), term))
    try:
        floor = envelope(estimates, 3, min(20, K)).floor if K >= 3 else 1.0
    except ValueError:
        floor = 0.0  # nothing sampled yet, so the tail cannot be bounded
    tail = _phi_tail_sum(K) / floor if floor > 0 else math.inf
    return CETruncation(K, value, sigma, tail, floor, tuple(terms))


@dataclass
class CheckpointRow:
    x: int
    primes: int
    sum_e: int
    sum_d: int
    sum_p_over_d: float
    li_x2: float
    R: float
    c_E_trunc: float
    sigma_stat: float
    tail: float
    sigma_total: float
    lemma23_sup: float
    split_sup_k: int
    thm12_ratio: float | None
    pi_E: dict[int, int] = field(default_factory=dict)

    def csv_values(self) -> list:
        thm = "" if self.thm12_ratio is None else repr(self.thm12_ratio)
        return [
            self.x,
            self.sum_e,
            self.sum_d,
            repr(self.sum_p_over_d),
            repr(self.li_x2),
            repr(self.R),
            repr(self.c_E_trunc),
            repr(self.sigma_total),
            repr(self.lemma23_sup),
            thm,
        ]


@dataclass
class AggregateReport:
    curve: CurveSpec
    K: int
    rows: list[CheckpointRow]
    nk: dict[int, dict] = field(default_factory=dict)
    li_definition: str = "Li(y) = integral_2^y dt/log t"

    @property
    def checkpoints(self) -> list[int]:
        return [r.x for r in self.rows]

    def row(self, x: int) -> CheckpointRow:
        for r in self.rows:
            if r.x == x:
                return r
        raise KeyError(x)

    def to_json(self) -> dict:
        return {
            "curve": asdict(self.curve),
            "K": self.K,
            "li_definition": self.li_definition,
            "rows": [
                {**asdict(r), "pi_E": {str(k): v for k, v in r.pi_E.items()}} for r in self.rows
            ],
            "nk_estimates": {str(k): v for k, v in self.nk.items()},
        }


def weil_check(rec: PrimeRecord) -> None:
    """|e_p d_p - p| = |1 - a_p| <= 2 sqrt(p) + 1, in integers."""
    dev = abs(rec.e_p * rec.d_p - rec.p)
    if dev != abs(1 - rec.a_p) or (dev > 1 and (dev - 1) ** 2 > 4 * rec.p):
        raise InvariantViolation(f"p={rec.p}: |e_p d_p - p| = {dev} breaks the Weil bound")


def _pi_E_table(d: np.ndarray, kmax: int) -> np.ndarray:
    """counts[k] = #{i : k | d[i]} for 1 <= k <= kmax."""
    top = max(int(d.max()) if d.size else 1, kmax)
    hist = np.bincount(d, minlength=top + 1)
    counts = np.zeros(kmax + 1, dtype=np.int64)
    for k in range(1, kmax + 1):
        counts[k] = hist[k::k].sum()
    return counts


def aggregate(records: Sequence[PrimeRecord], curve: CurveSpec, checkpoints: Sequence[int], K: int = DEFAULT_K) -> AggregateReport:
    """Partial sums and derived ratios at each checkpoint x."""
    checkpoints = sorted(checkpoints)
    if not checkpoints:
        raise ValueError("no checkpoints")
    have = _check_coverage(curve, checkpoints[-1], records)
    for rec in have:
        check_record(rec)
        weil_check(rec)
    ps = np.array([r.p for r in have], dtype=np.int64)
    ds = np.array([r.d_p for r in have], dtype=np.int64)
    es = np.array([r.e_p for r in have], dtype=object)  # exact integer sums
    rows = []
    nk_json: dict[int, dict] = {}
    for x in checkpoints:
        idx = int(np.searchsorted(ps, x, side="right"))
        sum_e = int(sum(es[:idx]))
        sum_d = int(ds[:idx].sum())
        sum_pd = math.fsum((ps[:idx] / ds[:idx]).tolist())
        li = li_of(float(x) ** 2)
        kmax = max(2, math.isqrt(4 * x))
        counts = _pi_E_table(ds[:idx], kmax)
        ks = np.arange(2, kmax + 1)
        scaled = counts[2:] * ks.astype(float) ** 2 / x
        arg = int(np.argmax(scaled))
        est = estimate_table(curve, K, have[:idx], x)
        ce = c_E_truncated(curve, K, est)
        if x == checkpoints[-1]:
            nk_json = {k: _estimate_json(e) for k, e in est.items()}
        rows.append(
            CheckpointRow(
                x=x,
                primes=idx,
                sum_e=sum_e,
                sum_d=sum_d,
                sum_p_over_d=sum_pd,
                li_x2=li,
                R=sum_e / li,
                c_E_trunc=ce.value,
                sigma_stat=ce.sigma,
                tail=ce.tail,
                sigma_total=ce.total_uncertainty,
                lemma23_sup=float(scaled[arg]),
                split_sup_k=arg + 2,
                thm12_ratio=sum_d / (x * math.log(math.log(x))) if x >= 100 else None,
                pi_E={k: int(counts[k]) for k in range(1, kmax + 1) if counts[k]},
            )
        )
    return AggregateReport(curve, K, rows, nk_json)


def _estimate_json(e: DivisionFieldEstimate) -> dict:
    return {
        "value": e.value,
        "stderr": e.stderr if math.isfinite(e.stderr) else None,
        "samples": e.samples,
        "population": e.population,
        "method": e.method.value,
        "lower_bound": e.lower_bound,
        "reliable": e.reliable,
    }


def lemma23_constant(report: AggregateReport) -> dict[int, float]:
    """sup over 2 <= k <= 2 sqrt(x) of pi_E(x;k) k^2 / x, per checkpoint."""
    return {r.x: r.lemma23_sup for r in report.rows}


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str


def theorem_reports(report: AggregateReport, ce: CETruncation) -> list[Verdict]:
    """Pass/fail lines for the convergence and boundedness checks."""
    rows = report.rows
    out = []
    big = [r for r in rows if r.x >= 1000]
    out.append(
        Verdict(
            "R(x) in (0,1)",
            all(0 < r.R < 1 for r in big),
            ", ".join(f"R({r.x})={r.R:.6f}" for r in big),
        )
    )
    last = rows[-1]
    budget = ce.sigma + ce.tail + DRIFT_ALLOWANCE
    gap = abs(last.R - ce.value)
    out.append(
        Verdict(
            "R(x_max) vs c_E truncation",
            gap <= budget,
            f"|{last.R:.6f} - {ce.value:.6f}| = {gap:.6f} <= sigma {ce.sigma:.4g} + tail {ce.tail:.4g} + drift {DRIFT_ALLOWANCE}",
        )
    )
    late = [r.R for r in rows if r.x >= 10_000]
    tv = sum(abs(a - b) for a, b in zip(late, late[1:]))
    out.append(Verdict("R(x) total variation from 1e4", tv < VARIATION_GATE, f"{tv:.6f} < {VARIATION_GATE}"))
    thm = [r for r in rows if r.thm12_ratio is not None]
    out.append(
        Verdict(
            "sum d_p / (x loglog x) bounded",
            all(r.thm12_ratio <= D_SUM_GATE for r in thm),
            ", ".join(f"{r.x}: {r.thm12_ratio:.6f}" for r in thm) + f" <= {D_SUM_GATE}",
        )
    )
    if len(thm) >= 2:
        a, b = thm[-2].thm12_ratio, thm[-1].thm12_ratio
        out.append(
            Verdict(
                "sum d_p / (x loglog x) growth",
                b <= a * (1 + D_SUM_GROWTH),
                f"{a:.6f} -> {b:.6f} (at most +{D_SUM_GROWTH:.0%})",
            )
        )
    out.append(
        Verdict(
            "split-count envelope k^2 pi_E(x;k)/x",
            all(r.lemma23_sup <= SPLIT_ENVELOPE_GATE for r in rows),
            ", ".join(f"{r.x}: {r.lemma23_sup:.4f} (k={r.split_sup_k})" for r in rows) + f" <= {SPLIT_ENVELOPE_GATE}",
        )
    )
    ratio = last.sum_d / last.sum_e
    out.append(Verdict("sum d_p / sum e_p small", ratio < RATIO_DE_GATE or last.x < 10**6, f"{ratio:.3e} at x={last.x}"))
    return out


def nk_sanity(curve: CurveSpec, records: Sequence[PrimeRecord], x_cal: int, kmax: int = 20) -> list[Verdict]:
    """Checks on the sampled division-field degrees: n_2 agreement, parity, envelope."""
    out = []
    exact = n2_exact(curve).value
    est = nk_estimate(curve, 2, records, x_cal)
    gap = abs(est.value - exact)
    out.append(Verdict("n_2 sample vs exact", gap <= 3 * est.stderr, f"|{est.value:.4f} - {exact:g}| = {gap:.4f} <= 3 x {est.stderr:.4f}"))
    table = estimate_table(curve, kmax, records, x_cal)
    parity = {k: round(table[k].value) for k in PARITY_KS}
    out.append(
        Verdict(
            "round(n_k) even for 3 <= k <= 8",
            all(v % 2 == 0 for v in parity.values()),
            ", ".join(f"n_{k}~{table[k].value:.2f}" for k in PARITY_KS),
        )
    )
    env = envelope(table, 3, kmax)
    out.append(
        Verdict(
            f"phi(k)^2/C <= n_k <= C k^2 for k <= {kmax}",
            env.constant <= ENVELOPE_GATE,
            f"C = {env.constant:.4f} (lower {env.lower:.4f}, upper {env.upper:.4f}) <= {ENVELOPE_GATE}",
        )
    )
    return out
