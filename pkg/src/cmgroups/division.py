"""Division polynomials, complete splitting of p in Q(E[k]), and the degrees n_k."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import polymod
from .curves import CurveSpec, PrimeRecord
from .modular import divisors, factorize
from .primes import iter_segments

MAX_K = 60
MIN_SAMPLES = 30


class CoverageError(ValueError):
    pass


@dataclass(frozen=True)
class DivisionPolynomial:
    """Integer polynomial (low to high) whose roots are the x-coordinates of E[k] minus O.

    Odd k: psi_k itself. Even k: (x^3 + a4 x + a6) * psi_k / (2y), so the
    2-torsion x-coordinates are included and k = 2 gives the cubic.
    """

    k: int
    coeffs: tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> int:
        return self.coeffs[-1]

    def mod(self, p: int) -> list[int]:
        return polymod.reduce(self.coeffs, p)


def _pack(cs, width: int) -> int:
    pos = b"".join(max(int(c), 0).to_bytes(width, "little") for c in cs)
    neg = b"".join(max(-int(c), 0).to_bytes(width, "little") for c in cs)
    return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")


def _pmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Product over Z by Kronecker substitution into one big-integer multiply."""
    if len(a) < 8 or len(b) < 8:
        return np.convolve(a, b)
    bound = max(abs(int(c)) for c in a) * max(abs(int(c)) for c in b) * min(len(a), len(b))
    width = bound.bit_length() // 8 + 2  # bytes per coefficient, with a sign margin
    n = len(a) + len(b) - 1
    half = 1 << (8 * width - 1)
    v = _pack(a, width) * _pack(b, width) + _pack([half] * n, width)
    raw = v.to_bytes(n * width, "little")
    return np.array(
        [int.from_bytes(raw[i * width : (i + 1) * width], "little") - half for i in range(n)], dtype=object
    )


def _psub(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = max(len(a), len(b))
    out = np.zeros(n, dtype=object)
    out[: len(a)] += a
    out[: len(b)] -= b
    return out


def _arr(cs) -> np.ndarray:
    return np.array([int(c) for c in cs], dtype=object)


@lru_cache(maxsize=32)
def _g_table(a4: int, a6: int, kmax: int) -> tuple[np.ndarray, ...]:
    """g_n with psi_n = g_n for odd n and psi_n = y g_n for even n (so g_2 = 2)."""
    F = _arr([a6, a4, 0, 1])
    F2 = _pmul(F, F)
    g: list[np.ndarray | None] = [None] * (kmax + 3)
    g[0] = _arr([0])
    g[1] = _arr([1])
    g[2] = _arr([2])
    g[3] = _arr([-a4 * a4, 12 * a6, 6 * a4, 0, 3])
    g[4] = _arr([-4 * (8 * a6 * a6 + a4**3), -16 * a4 * a6, -20 * a4 * a4, 80 * a6, 20 * a4, 0, 4])

    def get(n):
        if g[n] is None:
            m = n // 2
            if n % 2:
                t1 = _pmul(get(m + 2), _pmul(get(m), _pmul(get(m), get(m))))
                t2 = _pmul(get(m - 1), _pmul(get(m + 1), _pmul(get(m + 1), get(m + 1))))
                if m % 2 == 0:
                    t1 = _pmul(t1, F2)
                else:
                    t2 = _pmul(t2, F2)
                g[n] = _psub(t1, t2)
            else:
                inner = _psub(
                    _pmul(get(m + 2), _pmul(get(m - 1), get(m - 1))),
                    _pmul(get(m - 2), _pmul(get(m + 1), get(m + 1))),
                )
                prod = _pmul(get(m), inner)
                if any(c % 2 for c in prod):
                    raise ArithmeticError("division polynomial recurrence lost integrality")
                g[n] = np.array([c // 2 for c in prod], dtype=object)
        return g[n]

    get(kmax)
    return tuple(g[: kmax + 1])


def division_polynomial(curve: CurveSpec, k: int) -> DivisionPolynomial:
    if not 2 <= k <= MAX_K:
        raise ValueError(f"division polynomials supported for 2 <= k <= {MAX_K}, got {k}")
    gk = _g_table(curve.a4, curve.a6, max(k, 4))[k]
    if k % 2:
        cs = list(gk)
    else:
        cs = [c // 2 for c in _pmul(_arr([curve.a6, curve.a4, 0, 1]), gk)]
    while len(cs) > 1 and cs[-1] == 0:
        cs.pop()
    return DivisionPolynomial(k, tuple(int(c) for c in cs))


def _full_torsion_rational(curve: CurveSpec, q: int, p: int) -> bool:
    """E[q] inside E(F_p) for a prime power q with p not dividing q."""
    if (p - 1) % q:
        return False
    P = division_polynomial(curve, q).mod(p)
    xp = polymod.powmod([0, 1], p, P, p)
    if polymod.sub(xp, [0, 1], p):
        return False  # some x-coordinate is not in F_p (P is squarefree)
    F = polymod.reduce([curve.a6, curve.a4, 0, 1], p)
    common = polymod.gcd(P, F, p)
    rest, _ = polymod.divmod_(P, common, p)
    if len(rest) <= 1:
        return True
    # every remaining root x0 needs F(x0) to be a nonzero square
    return polymod.powmod(F, (p - 1) // 2, rest, p) == [1]


def splits_completely(curve: CurveSpec, k: int, p: int) -> bool:
    """Whether E[k] is contained in E(F_p), decided from division polynomials alone."""
    if k % p == 0:
        raise ValueError(f"p={p} divides k={k}")
    if not curve.is_good(p):
        raise ValueError(f"p={p} is a bad prime for {curve.label}")
    if k == 1:
        return True
    return all(_full_torsion_rational(curve, ell**e, p) for ell, e in factorize(k).items())


def cubic_root_count(curve: CurveSpec, p: int) -> int:
    """Roots of x^3 + a4 x + a6 in F_p."""
    return polymod.count_roots([curve.a6, curve.a4, 0, 1], p)


def good_primes_upto(curve: CurveSpec, x: int) -> list[int]:
    return [p for seg in iter_segments(2, x + 1) for p in seg if curve.is_good(p)]


def _check_coverage(curve: CurveSpec, x: int, records: Sequence[PrimeRecord]) -> list[PrimeRecord]:
    have = [r for r in records if r.p <= x]
    want = good_primes_upto(curve, x)
    if len(have) != len(want) or any(r.p != q for r, q in zip(have, want)):
        got = {r.p for r in have}
        missing = next((q for q in want if q not in got), None)
        raise CoverageError(f"records do not cover the good primes <= {x}; first missing p={missing}")
    return have


def pi_E(curve: CurveSpec, x: int, k: int, records: Sequence[PrimeRecord], verify: bool = False) -> int:
    """Number of good p <= x with k | d_p, i.e. splitting completely in Q(E[k])."""
    have = _check_coverage(curve, x, records)
    count = sum(1 for r in have if r.d_p % k == 0)
    if verify:
        # p | k never splits: d_p | p - 1 is prime to p
        recount = sum(1 for r in have if r.p % k and splits_completely(curve, k, r.p))
        if recount != count:
            raise AssertionError(f"pi_E({x};{k}): {count} from d_p but {recount} from splitting")
    return count


class EstimateMethod(enum.Enum):
    TRIVIAL = "trivial"
    EXACT_CUBIC = "exact_cubic"
    CHEBOTAREV_SAMPLE = "chebotarev_sample"


@dataclass(frozen=True)
class DivisionFieldEstimate:
    k: int
    value: float
    stderr: float
    samples: int
    population: int
    method: EstimateMethod
    lower_bound: bool = False

    @property
    def exact(self) -> bool:
        return self.method is not EstimateMethod.CHEBOTAREV_SAMPLE

    @property
    def reliable(self) -> bool:
        return self.exact or self.samples >= MIN_SAMPLES

    @property
    def density(self) -> float:
        """Estimate of 1/n_k."""
        return self.samples / self.population if not self.exact else 1.0 / self.value

    @property
    def density_stderr(self) -> float:
        if self.exact:
            return 0.0
        q = max(self.density, 1.0 / self.population)
        return math.sqrt(q * (1 - min(q, 1.0)) / self.population) if q < 1 else 0.0


def _integer_roots(a4: int, a6: int) -> list[int]:
    if a6 == 0:
        cands = {0} | {s * d for d in divisors(abs(a4)) for s in (1, -1)} if a4 else {0}
    else:
        cands = {0}
        primes = factorize(abs(a6))
        ds = [1]
        for q, e in primes.items():
            ds = [d * q**i for d in ds for i in range(e + 1)]
        cands |= {s * d for d in ds for s in (1, -1)}
    return sorted(r for r in cands if r**3 + a4 * r + a6 == 0)


def n2_exact(curve: CurveSpec) -> DivisionFieldEstimate:
    """[Q(E[2]):Q], the Galois group order of x^3 + a4 x + a6."""
    roots = _integer_roots(curve.a4, curve.a6)
    if len(roots) == 3:
        n = 1
    elif len(roots) == 1:
        n = 2
    else:
        disc = -4 * curve.a4**3 - 27 * curve.a6**2
        n = 3 if disc >= 0 and math.isqrt(disc) ** 2 == disc else 6
    return DivisionFieldEstimate(2, float(n), 0.0, 0, 0, EstimateMethod.EXACT_CUBIC)


def nk_estimate(curve: CurveSpec, k: int, records: Sequence[PrimeRecord], x_cal: int | None = None) -> DivisionFieldEstimate:
    """n_k from the Chebotarev density of primes splitting completely in Q(E[k])."""
    if x_cal is None:
        x_cal = records[-1].p if records else 0
    have = _check_coverage(curve, x_cal, records)
    population = len(have)
    if k == 1:
        return DivisionFieldEstimate(1, 1.0, 0.0, population, population, EstimateMethod.TRIVIAL)
    split = sum(1 for r in have if r.d_p % k == 0)
    if split == 0:
        return DivisionFieldEstimate(k, float(population), math.inf, 0, population, EstimateMethod.CHEBOTAREV_SAMPLE, True)
    q = split / population
    se_q = math.sqrt(q * (1 - q) / population)
    return DivisionFieldEstimate(k, 1 / q, se_q / q**2, split, population, EstimateMethod.CHEBOTAREV_SAMPLE)


def estimate_table(curve: CurveSpec, K: int, records: Sequence[PrimeRecord], x_cal: int | None = None) -> dict[int, DivisionFieldEstimate]:
    """n_1 exact, n_2 from the cubic, the rest by sampling."""
    if x_cal is None:
        x_cal = records[-1].p if records else 0
    have = _check_coverage(curve, x_cal, records)
    d = np.array([r.d_p for r in have], dtype=np.int64)
    population = len(have)
    out = {1: DivisionFieldEstimate(1, 1.0, 0.0, population, population, EstimateMethod.TRIVIAL)}
    if K >= 2:
        out[2] = n2_exact(curve)
    for k in range(3, K + 1):
        split = int(np.count_nonzero(d % k == 0))
        if split == 0:
            out[k] = DivisionFieldEstimate(k, float(population), math.inf, 0, population, EstimateMethod.CHEBOTAREV_SAMPLE, True)
        else:
            q = split / population
            out[k] = DivisionFieldEstimate(k, 1 / q, math.sqrt(q * (1 - q) / population) / q**2, split, population, EstimateMethod.CHEBOTAREV_SAMPLE)
    return out


@dataclass(frozen=True)
class Envelope:
    """Measured constants in phi(k)^2 / C <= n_k <= C k^2 over the sampled k."""

    lower: float  # max phi(k)^2 / n_k
    upper: float  # max n_k / k^2
    ks: tuple[int, ...]

    @property
    def constant(self) -> float:
        return max(self.lower, self.upper)

    @property
    def floor(self) -> float:
        """c with n_k >= c phi(k)^2 on the sample, used for tail bounds."""
        return 1.0 / self.lower


def envelope(estimates: dict[int, DivisionFieldEstimate], kmin: int = 3, kmax: int = 20) -> Envelope:
    from .modular import sieve_mu_phi

    _, phi = sieve_mu_phi(kmax)
    lo = up = 0.0
    ks = []
    for k in range(kmin, kmax + 1):
        est = estimates.get(k)
        if est is None or est.lower_bound:
            continue
        ks.append(k)
        lo = max(lo, float(phi[k]) ** 2 / est.value)
        up = max(up, est.value / k**2)
    if not ks:
        raise ValueError("no usable n_k estimates for the envelope")
    return Envelope(lo, up, tuple(ks))
