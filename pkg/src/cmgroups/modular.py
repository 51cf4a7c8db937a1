"""Arithmetic modulo an odd prime and the sieved arithmetic functions mu, phi."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt

import numpy as np

MAX_MODULUS = 1 << 62


def is_probable_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24."""
    if n < 2:
        return False
    small = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
    for q in small:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in small:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field F_p for an odd prime p < 2**62.

    Elements are plain ints kept in [0, p). Python ints already carry the
    128-bit intermediates, so no Montgomery form is needed here.
    """

    p: int

    def __post_init__(self):
        if not (2 < self.p < MAX_MODULUS) or not is_probable_prime(self.p):
            raise ValueError(f"modulus must be an odd prime below 2**62, got {self.p}")

    def __call__(self, a: int) -> int:
        return a % self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def sub(self, a: int, b: int) -> int:
        return (a - b) % self.p

    def neg(self, a: int) -> int:
        return -a % self.p

    def mul(self, a: int, b: int) -> int:
        return a * b % self.p

    def pow(self, a: int, e: int) -> int:
        return pow(a, e, self.p)

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError(f"0 has no inverse mod {self.p}")
        return pow(a, -1, self.p)

    def legendre(self, a: int) -> int:
        return legendre_symbol(a, self.p)

    def sqrt(self, a: int) -> int:
        return sqrt_mod(a, self.p)


def field_ops(p: int) -> PrimeField:
    return PrimeField(p)


def legendre_symbol(a: int, p: int) -> int:
    """(a|p) for an odd prime p, via Euler's criterion."""
    a %= p
    if a == 0:
        return 0
    return 1 if pow(a, (p - 1) // 2, p) == 1 else -1


def sqrt_mod(a: int, p: int) -> int:
    """Square root of a quadratic residue mod p (Tonelli-Shanks).

    Returns the smaller of the two roots so output is canonical.
    """
    a %= p
    if a == 0:
        return 0
    if legendre_symbol(a, p) != 1:
        raise ValueError(f"{a} is not a quadratic residue mod {p}")
    if p % 4 == 3:
        r = pow(a, (p + 1) // 4, p)
    else:
        q, s = p - 1, 0
        while q % 2 == 0:
            q //= 2
            s += 1
        z = 2
        while legendre_symbol(z, p) != -1:
            z += 1
        m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
        while t != 1:
            i, t2 = 0, t
            while t2 != 1:
                t2 = t2 * t2 % p
                i += 1
            b = pow(c, 1 << (m - i - 1), p)
            m, c = i, b * b % p
            t, r = t * c % p, r * b % p
    return min(r, p - r)


def sieve_mu_phi(K: int) -> tuple[np.ndarray, np.ndarray]:
    """Linear sieve for the Moebius and Euler functions on [0, K]."""
    mu = np.zeros(K + 1, dtype=np.int8)
    phi = np.zeros(K + 1, dtype=np.int64)
    if K >= 1:
        mu[1] = 1
        phi[1] = 1
    composite = np.zeros(K + 1, dtype=bool)
    primes: list[int] = []
    for i in range(2, K + 1):
        if not composite[i]:
            primes.append(i)
            mu[i] = -1
            phi[i] = i - 1
        for q in primes:
            iq = i * q
            if iq > K:
                break
            composite[iq] = True
            if i % q == 0:
                mu[iq] = 0
                phi[iq] = phi[i] * q
                break
            mu[iq] = -mu[i]
            phi[iq] = phi[i] * (q - 1)
    return mu, phi


def divisors(k: int) -> list[int]:
    small, large = [], []
    d = 1
    while d * d <= k:
        if k % d == 0:
            small.append(d)
            if d * d != k:
                large.append(k // d)
        d += 1
    return small + large[::-1]


@dataclass(frozen=True)
class ArithmeticFunctionTable:
    """mu(k) and phi(k) for 1 <= k <= K (index 0 unused)."""

    K: int
    mu: np.ndarray
    phi: np.ndarray

    def reciprocal_identity(self, k: int) -> Fraction:
        """sum over d*m | k of mu(d)/m, which should equal 1/k."""
        total = Fraction(0)
        for j in divisors(k):
            for d in divisors(j):
                if self.mu[d]:
                    total += Fraction(int(self.mu[d]), j // d)
        return total

    def linear_identity(self, k: int) -> int:
        """sum over d*m | k of m*mu(d), which should equal k."""
        total = 0
        for j in divisors(k):
            for d in divisors(j):
                total += (j // d) * int(self.mu[d])
        return total


IDENTITY_CHECK_LIMIT = 10_000


def build_arithmetic_tables(K: int, check_limit: int = IDENTITY_CHECK_LIMIT) -> ArithmeticFunctionTable:
    """Sieve mu and phi up to K and verify both divisor-sum identities.

    The identities are checked in exact arithmetic for k <= min(K, check_limit)
    using divisor-sum convolutions over the whole range at once: the double
    sum over d*m | k equals sum_{j | k} (mu * f)(j).
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    mu, phi = sieve_mu_phi(K)
    table = ArithmeticFunctionTable(K, mu, phi)
    L = min(K, check_limit)
    # inner[j] = sum_{d | j} mu(d) * (j/d)^-1 as a fraction over j: numerator is sum mu(d) d
    inner_num = np.zeros(L + 1, dtype=np.int64)  # (mu * id)(j), so inner = inner_num[j] / j
    lin_inner = np.zeros(L + 1, dtype=np.int64)  # (mu * id)(j) too, with weights m = j/d
    for d in range(1, L + 1):
        if mu[d]:
            js = np.arange(d, L + 1, d)
            inner_num[js] += int(mu[d]) * d
            lin_inner[js] += int(mu[d]) * (js // d)
    recip = [Fraction(0)] * (L + 1)
    lin = np.zeros(L + 1, dtype=np.int64)
    for j in range(1, L + 1):
        fj = Fraction(int(inner_num[j]), j)
        if fj:
            for k in range(j, L + 1, j):
                recip[k] += fj
        lin[j::j] += lin_inner[j]
    for k in range(1, L + 1):
        if recip[k] != Fraction(1, k):
            raise ArithmeticError(f"reciprocal identity fails at k={k}: {recip[k]}")
        if lin[k] != k:
            raise ArithmeticError(f"linear identity fails at k={k}: {lin[k]}")
    phi_sum = np.zeros(L + 1, dtype=np.int64)
    for j in range(1, L + 1):
        phi_sum[j::j] += phi[j]
    bad = np.flatnonzero(phi_sum[1:] != np.arange(1, L + 1))
    if bad.size:
        raise ArithmeticError(f"sum of phi over divisors fails at k={bad[0] + 1}")
    return table



_TRIAL_PRIMES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)


def _rho(n: int, seed: int) -> int:
    # Brent's variant, deterministic in seed
    if n % 2 == 0:
        return 2
    y, c, m = seed % n, (seed * 7 + 1) % n or 1, 64
    g = r = q = 1
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(m, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += m
        r *= 2
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
    return g


def factorize(n: int, trial_limit: int = 1_000_000) -> dict[int, int]:
    """Prime factorization {q: exponent} by trial division then Pollard rho."""
    if n < 1:
        raise ValueError("factorize needs n >= 1")
    out: dict[int, int] = {}
    for q in _TRIAL_PRIMES:
        while n % q == 0:
            out[q] = out.get(q, 0) + 1
            n //= q
    q = 53
    limit = min(trial_limit, isqrt(n))
    while q <= limit:
        if n % q == 0:
            while n % q == 0:
                out[q] = out.get(q, 0) + 1
                n //= q
            limit = min(trial_limit, isqrt(n))
        q += 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_probable_prime(m):
            out[m] = out.get(m, 0) + 1
            continue
        seed = 2
        f = _rho(m, seed)
        while f in (1, m):
            seed += 1
            f = _rho(m, seed)
        stack.extend((f, m // f))
    return dict(sorted(out.items()))
