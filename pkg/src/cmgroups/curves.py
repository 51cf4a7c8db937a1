"""CM curves over Q, reduction mod p, point counting and the group structure of E(F_p)."""

from __future__ import annotations

import enum
import hashlib
from dataclasses import dataclass, field
from functools import cached_property
from math import gcd, isqrt

import numpy as np

from .modular import factorize, legendre_symbol, sqrt_mod

CLASS_NUMBER_ONE = (-3, -4, -7, -8, -11, -19, -43, -67, -163)
ENUMERATION_LIMIT = 100_000
ENUMERATION_THRESHOLD = 2000
DRAW_BUDGET = 64


class CurveError(ArithmeticError):
    """A computation could not produce a certified answer."""


class InvariantViolation(AssertionError):
    pass


class Method(enum.Enum):
    ENUMERATION = "enumeration"
    BSGS = "bsgs"
    CM_FAST = "cm_fast"


@dataclass(frozen=True)
class CurveSpec:
    """y^2 = x^3 + a4 x + a6 over Q with CM by the maximal order of Q(sqrt(d_K))."""

    a4: int
    a6: int
    conductor: int
    d_K: int
    label: str = "adhoc"

    def __post_init__(self):
        if self.discriminant == 0:
            raise ValueError("singular curve: 4*a4^3 + 27*a6^2 = 0")
        if self.d_K not in CLASS_NUMBER_ONE:
            raise ValueError(f"d_K must be one of {CLASS_NUMBER_ONE}, got {self.d_K}")
        if self.conductor < 1:
            raise ValueError("conductor must be positive")

    @property
    def discriminant(self) -> int:
        return -16 * (4 * self.a4**3 + 27 * self.a6**2)

    @cached_property
    def bad_primes(self) -> frozenset[int]:
        """Primes excluded from every sum: 2, divisors of N, divisors of the model discriminant.

        For a short Weierstrass model the last set can include 3 even when the
        curve itself has good reduction there.
        """
        qs = set(factorize(self.conductor)) | set(factorize(abs(self.discriminant)))
        qs.add(2)
        return frozenset(qs)

    def is_good(self, p: int) -> bool:
        return p not in self.bad_primes

    def fingerprint(self) -> str:
        blob = f"{self.a4},{self.a6},{self.conductor},{self.d_K}".encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass(frozen=True)
class PrimeRecord:
    p: int
    a_p: int
    d_p: int
    e_p: int
    method: Method
    crosschecked: bool = False

    @property
    def n(self) -> int:
        return self.p + 1 - self.a_p


def check_record(rec: PrimeRecord) -> None:
    """Raise InvariantViolation unless the record satisfies the group-structure constraints."""
    p, a, d, e = rec.p, rec.a_p, rec.d_p, rec.e_p
    problems = []
    if a * a >= 4 * p:
        problems.append(f"|a_p|={abs(a)} violates the Hasse bound")
    if d < 1 or e < 1 or d * e != rec.n:
        problems.append(f"d*e={d * e} != n={rec.n}")
    if d >= 1 and e % d:
        problems.append(f"d={d} does not divide e={e}")
    if d >= 1 and (p - 1) % d:
        problems.append(f"d={d} does not divide p-1={p - 1}")
    if problems:
        raise InvariantViolation(f"p={p}: " + "; ".join(problems))


class PointStream:
    """Deterministic pseudo-random integers seeded by (label, p, tag)."""

    def __init__(self, label: str, p: int, tag: str = ""):
        self._prefix = f"{label}|{p}|{tag}|".encode()
        self._counter = 0

    def next(self, bound: int) -> int:
        h = hashlib.blake2b(self._prefix + self._counter.to_bytes(8, "little"), digest_size=16)
        self._counter += 1
        return int.from_bytes(h.digest(), "little") % bound


class CurveModP:
    """Affine group law on y^2 = x^3 + a x + b over F_p; ``None`` is the identity."""

    __slots__ = ("a", "b", "p", "_stream")

    def __init__(self, a: int, b: int, p: int, stream: PointStream | None = None):
        self.a, self.b, self.p = a % p, b % p, p
        self._stream = stream

    def rhs(self, x: int) -> int:
        return (x * x * x + self.a * x + self.b) % self.p

    def on_curve(self, P) -> bool:
        if P is None:
            return True
        x, y = P
        return (y * y - self.rhs(x)) % self.p == 0

    def neg(self, P):
        return None if P is None else (P[0], -P[1] % self.p)

    def double(self, P):
        if P is None:
            return None
        x, y = P
        p = self.p
        if y == 0:
            return None
        lam = (3 * x * x + self.a) * pow(2 * y, -1, p) % p
        x3 = (lam * lam - 2 * x) % p
        return (x3, (lam * (x - x3) - y) % p)

    def add(self, P, Q):
        if P is None:
            return Q
        if Q is None:
            return P
        x1, y1 = P
        x2, y2 = Q
        p = self.p
        if x1 == x2:
            if (y1 + y2) % p == 0:
                return None
            return self.double(P)
        lam = (y2 - y1) * pow(x2 - x1, -1, p) % p
        x3 = (lam * lam - x1 - x2) % p
        return (x3, (lam * (x1 - x3) - y1) % p)

    def mul(self, k: int, P):
        if k < 0:
            return self.mul(-k, self.neg(P))
        R = None
        for bit in bin(k)[2:] if k else "":
            R = self.double(R)
            if bit == "1":
                R = self.add(R, P)
        return R

    def checked(self, P):
        if not self.on_curve(P):
            raise ValueError(f"point {P} is not on the curve mod {self.p}")
        return P

    def random_point(self):
        if self._stream is None:
            raise RuntimeError("curve has no point stream")
        p = self.p
        for _ in range(8 * p + 64):
            x = self._stream.next(p)
            f = self.rhs(x)
            if f == 0:
                return (x, 0)
            if legendre_symbol(f, p) == 1:
                y = sqrt_mod(f, p)
                return (x, y) if self._stream.next(2) else (x, p - y)
        raise CurveError(f"no affine point found mod {p}")


def point_ops(curve: CurveSpec, p: int, tag: str = "") -> CurveModP:
    if not curve.is_good(p):
        raise ValueError(f"p={p} is a bad prime for {curve.label}")
    return CurveModP(curve.a4, curve.a6, p, PointStream(curve.label, p, tag))


def quadratic_twist(curve: CurveSpec, p: int, tag: str = "twist") -> CurveModP:
    """The twist y^2 = x^3 + a4 c^2 x + a6 c^3 by the least non-residue c."""
    c = 2
    while legendre_symbol(c, p) != -1:
        c += 1
    return CurveModP(curve.a4 * c * c, curve.a6 * c**3, p, PointStream(curve.label, p, tag))


# -- point counting ---------------------------------------------------------


def count_points_enumeration(curve: CurveSpec, p: int) -> int:
    """|E(F_p)| = 1 + sum_x (1 + (f(x)|p)), evaluated with a table of squares."""
    if p > ENUMERATION_LIMIT:
        raise ValueError(f"enumeration oracle limited to p <= {ENUMERATION_LIMIT}, got {p}")
    xs = np.arange(p, dtype=np.int64)
    f = (xs * xs % p * xs + (curve.a4 % p) * xs + curve.a6 % p) % p
    chi = -np.ones(p, dtype=np.int64)
    chi[xs * xs % p] = 1
    chi[0] = 0
    return int(1 + p + chi[f].sum())


def point_order(E: CurveModP, P, n: int, fac: dict[int, int]) -> int:
    """Order of P given a multiple n of it and the factorization of n."""
    m = n
    for q, e in fac.items():
        for _ in range(e):
            if E.mul(m // q, P) is None:
                m //= q
            else:
                break
    return m


def _hasse_window(p: int) -> tuple[int, int]:
    r = isqrt(4 * p)  # 4p is never a square, so |a_p| <= r
    return p + 1 - r, p + 1 + r


def _bsgs_multiple(E: CurveModP, P, lo: int, hi: int) -> int | None:
    """Some N in [lo, hi] with N*P = O, by baby-step giant-step."""
    width = hi - lo
    m = isqrt(width) + 1
    baby = {}
    R = None
    for j in range(m + 1):
        if R is None:
            baby.setdefault(None, j)
        else:
            baby.setdefault(R, j)
        R = E.add(R, P)
    step = E.mul(m, P)
    Q = E.mul(lo, P)
    for i in range(m + 1):
        # Q = (lo + i m) P; want (lo + i m + j) P = O, i.e. Q = -jP
        target = E.neg(Q)
        if target in baby:
            N = lo + i * m + baby[target]
            if N <= hi:
                return N
        Q = E.add(Q, step)
    return None


def _window_multiples(L: int, lo: int, hi: int) -> list[int]:
    first = -(-lo // L) * L
    return list(range(first, hi + 1, L))


def _draw_limit(p: int, budget: int) -> int:
    # tiny fields can need the distinct-point bound, which needs more draws
    return budget if p > 1000 else budget + 4 * p


def count_points_bsgs(curve: CurveSpec, p: int, budget: int = DRAW_BUDGET) -> int:
    """|E(F_p)| as the unique Hasse-window multiple of the observed point orders.

    Points of the quadratic twist are used as well: a twist point order L'
    forces L' | 2p + 2 - N. Distinct sampled points bound both orders below.
    """
    E = point_ops(curve, p, "bsgs")
    T = quadratic_twist(curve, p)
    lo, hi = _hasse_window(p)
    L = Lt = 1
    seen: tuple[set, set] = (set(), set())
    candidates = list(range(lo, hi + 1))
    for draw in range(_draw_limit(p, budget)):
        on_twist = draw % 2 == 1
        C = T if on_twist else E
        P = C.random_point()
        seen[on_twist].add(P)
        N0 = _bsgs_multiple(C, P, lo, hi)  # the window is symmetric about p + 1
        if N0 is None:
            raise CurveError(f"BSGS found no multiple of a point order at p={p}")
        o = point_order(C, P, N0, factorize(N0))
        if on_twist:
            Lt = Lt * o // gcd(Lt, o)
        else:
            L = L * o // gcd(L, o)
        candidates = [
            N
            for N in _window_multiples(L, lo, hi)
            if (2 * p + 2 - N) % Lt == 0 and N > len(seen[0]) and 2 * p + 2 - N > len(seen[1])
        ]
        if len(candidates) == 1:
            return candidates[0]
    raise CurveError(f"BSGS could not isolate |E(F_p)| at p={p}: candidates {candidates}")


def _cornacchia(d: int, p: int, four: bool = False) -> tuple[int, int] | None:
    """Solve u^2 + d v^2 = p (or = 4p when ``four``) with u, v >= 0."""
    m = 4 * p if four else p
    r = -d % p
    if legendre_symbol(r, p) == -1:
        return None
    x0 = sqrt_mod(r, p)
    if four:
        if (x0 - d) % 2:
            x0 = p - x0
        a, b, bound = 2 * p, x0, isqrt(4 * p)
    else:
        x0 = max(x0, p - x0)
        a, b, bound = p, x0, isqrt(p)
    while b > bound:
        a, b = b, a % b
    rest = m - b * b
    if rest % d:
        return None
    c = rest // d
    v = isqrt(c)
    if v * v != c:
        return None
    return b, v


def cm_trace_candidates(d_K: int, p: int) -> list[int]:
    """Traces of the Frobenius candidates u*pi for all units u, pi of norm p."""
    kron = legendre_symbol(d_K, p)
    if kron == 0:
        raise ValueError(f"p={p} ramifies in Q(sqrt({d_K}))")
    if kron == -1:
        return [0]
    if d_K % 4 == 0:
        sol = _cornacchia(-d_K // 4, p)
        if sol is None:
            raise CurveError(f"no norm representation of p={p} for d_K={d_K}")
        a, b = sol
        ts = {2 * a, -2 * a}
        if d_K == -4:
            ts |= {2 * b, -2 * b}
    else:
        sol = _cornacchia(-d_K, p, four=True)
        if sol is None:
            raise CurveError(f"no norm representation of 4p={4 * p} for d_K={d_K}")
        u, v = sol
        ts = {u, -u}
        if d_K == -3:
            ts |= {(u + 3 * v) // 2, -(u + 3 * v) // 2, (u - 3 * v) // 2, -(u - 3 * v) // 2}
    return sorted(ts)


def cm_trace_fast(curve: CurveSpec, p: int, budget: int = DRAW_BUDGET) -> int:
    """a_p from the norm equation in O_K, with the unit ambiguity settled by point orders."""
    cands = cm_trace_candidates(curve.d_K, p)
    if len(cands) == 1:
        return cands[0]
    E = point_ops(curve, p, "cm")
    T = quadratic_twist(curve, p)
    seen: tuple[set, set] = (set(), set())
    for draw in range(_draw_limit(p, budget)):
        if draw % 4 == 3:
            P = T.random_point()
            seen[1].add(P)
            cands = [t for t in cands if T.mul(p + 1 + t, P) is None]
        else:
            P = E.random_point()
            seen[0].add(P)
            cands = [t for t in cands if E.mul(p + 1 - t, P) is None]
        cands = [t for t in cands if p + 1 - t > len(seen[0]) and p + 1 + t > len(seen[1])]
        if len(cands) == 1:
            return cands[0]
        if not cands:
            break
    raise CurveError(f"CM trace not isolated at p={p} for {curve.label}: {cands}")


# -- group structure --------------------------------------------------------


def _cyclic_log(E: CurveModP, G, ell: int, b: int, Q, digits: dict) -> int | None:
    """x with x*G = Q where G has order ell^b (Pohlig-Hellman), or None if Q is not in <G>."""
    x = 0
    for i in range(b):
        h = E.mul(ell ** (b - 1 - i), E.add(Q, E.neg(E.mul(x, G))))
        dgt = digits.get(h)
        if dgt is None:
            return None
        x += dgt * ell**i
    return x if E.mul(x, G) == Q else None


def _certify_sylow(E: CurveModP, n: int, ell: int, v: int, k: int, tries: int) -> bool:
    """Prove the ell-Sylow subgroup (order ell^v) is Z/ell^k + Z/ell^(v-k).

    Find R1 of order ell^b, b = v - k, and R2 killed by ell^b with
    ell^(k-1) R2 outside <R1>; then <R1, R2> has order ell^v, so it is the
    whole Sylow subgroup and its exponent is ell^b.
    """
    b = v - k
    proj = n // ell**v
    top = ell ** (b - 1)
    R1 = None
    for _ in range(tries):
        R = E.mul(proj, E.random_point())
        if E.mul(ell**b, R) is not None:
            return False
        if E.mul(top, R) is not None:
            R1 = R
            break
    if R1 is None:
        return False
    gamma = E.mul(top, R1)
    digits = {}
    G = None
    for dgt in range(ell):
        digits[G] = dgt
        G = E.add(G, gamma)
    for _ in range(tries):
        R2 = E.mul(proj, E.random_point())
        if E.mul(ell**b, R2) is not None:
            return False
        if _cyclic_log(E, R1, ell, b, E.mul(ell ** (k - 1), R2), digits) is None:
            return True
    return False


def _certify_exponent(E: CurveModP, n: int, fac: dict[int, int], L: int, p: int, tries: int = 24) -> bool:
    """Prove that L is the exponent of E(F_p), a group of order n."""
    d = n // L
    if d == 1:
        return True
    if gcd(L, p - 1) % d:
        return False
    for ell, k in factorize(d).items():
        if fac[ell] < 2 * k or not _certify_sylow(E, n, ell, fac[ell], k, tries):
            return False
    return True


def _exhaustive_exponent(E: CurveModP, n: int, fac: dict[int, int]) -> int:
    L = 1
    p = E.p
    for x in range(p):
        f = E.rhs(x)
        if f == 0:
            pts = [(x, 0)]
        elif legendre_symbol(f, p) == 1:
            pts = [(x, sqrt_mod(f, p))]
        else:
            continue
        for P in pts:
            o = point_order(E, P, n, fac)
            L = L * o // gcd(L, o)
    return L


def group_structure(curve: CurveSpec, p: int, n: int, budget: int = DRAW_BUDGET) -> tuple[int, int]:
    """(d_p, e_p) with E(F_p) = Z/d_p + Z/e_p.

    e_p is the lcm of random point orders, accepted only once every Sylow
    subgroup touching d_p = n/e_p is shown to be generated by two witness
    points of the claimed orders.
    """
    if n == 1:
        return 1, 1
    fac = factorize(n)
    if len(fac) == 1 and next(iter(fac.values())) == 1:
        return 1, n
    E = point_ops(curve, p, "group")
    L = 1
    for _ in range(budget):
        o = point_order(E, E.random_point(), n, fac)
        L = L * o // gcd(L, o)
        if L == n:
            return 1, n
        d = n // L
        if gcd(L, p - 1) % d == 0 and _certify_exponent(E, n, fac, L, p):
            return d, L
    if p <= ENUMERATION_LIMIT:
        L = _exhaustive_exponent(E, n, fac)
        return n // L, L
    raise CurveError(f"exponent of E(F_p) not certified at p={p} for {curve.label}")


def compute_record(curve: CurveSpec, p: int, crosscheck: bool = False, method: Method | None = None) -> PrimeRecord:
    """Full record for one good prime; ``crosscheck`` recounts with an independent method."""
    if method is None:
        method = Method.ENUMERATION if p <= ENUMERATION_THRESHOLD else Method.CM_FAST
    if method is Method.ENUMERATION:
        n = count_points_enumeration(curve, p)
    elif method is Method.BSGS:
        n = count_points_bsgs(curve, p)
    else:
        n = p + 1 - cm_trace_fast(curve, p)
    if crosscheck:
        other = count_points_bsgs(curve, p) if method is not Method.BSGS else p + 1 - cm_trace_fast(curve, p)
        if other != n:
            raise InvariantViolation(f"p={p}: {method.value} gives n={n}, crosscheck gives {other}")
    d, e = group_structure(curve, p, n)
    rec = PrimeRecord(p, p + 1 - n, d, e, method, crosscheck)
    check_record(rec)
    return rec


@dataclass(frozen=True)
class RecordWorker:
    """Picklable per-prime worker for the parallel map."""

    curve: CurveSpec
    crosscheck_rate: float = 0.0
    method: Method | None = field(default=None)

    def wants_crosscheck(self, p: int) -> bool:
        if self.crosscheck_rate <= 0:
            return False
        h = int.from_bytes(hashlib.blake2b(f"x|{p}".encode(), digest_size=8).digest(), "little")
        return h < self.crosscheck_rate * 2**64

    def __call__(self, p: int) -> PrimeRecord:
        return compute_record(self.curve, p, self.wants_crosscheck(p), self.method)
