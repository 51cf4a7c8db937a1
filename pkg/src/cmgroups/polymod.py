"""Dense polynomials over F_p, coefficient lists from low to high degree."""

from __future__ import annotations


def trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def reduce(a, p: int) -> list[int]:
    return trim([c % p for c in a])


def sub(a: list[int], b: list[int], p: int) -> list[int]:
    n = max(len(a), len(b))
    return trim([((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p for i in range(n)])


def mul(a: list[int], b: list[int], p: int) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
    return reduce(out, p)


def divmod_(a: list[int], b: list[int], p: int) -> tuple[list[int], list[int]]:
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    a = list(a)
    db = len(b) - 1
    inv_lead = pow(b[-1], -1, p)
    q = [0] * max(len(a) - db, 0)
    for i in range(len(a) - 1, db - 1, -1):
        c = a[i] * inv_lead % p
        if c:
            q[i - db] = c
            for j in range(db + 1):
                a[i - db + j] = (a[i - db + j] - c * b[j]) % p
    return trim(q), trim(a[:db])


def mod(a, m, p):
    return divmod_(a, m, p)[1]


def mulmod(a, b, m, p):
    return mod(mul(a, b, p), m, p)


def powmod(base: list[int], e: int, m: list[int], p: int) -> list[int]:
    result = [1] if len(m) > 1 else []
    base = mod(base, m, p)
    while e:
        if e & 1:
            result = mulmod(result, base, m, p)
        e >>= 1
        if e:
            base = mulmod(base, base, m, p)
    return result


def gcd(a, b, p):
    a, b = reduce(a, p), reduce(b, p)
    while b:
        a, b = b, mod(a, b, p)
    if a:
        inv = pow(a[-1], -1, p)
        a = [c * inv % p for c in a]
    return a


def evaluate(a, x: int, p: int) -> int:
    acc = 0
    for c in reversed(a):
        acc = (acc * x + c) % p
    return acc


def count_roots(a, p: int) -> int:
    """Number of distinct roots in F_p: degree of gcd(a, x^p - x)."""
    a = reduce(a, p)
    if len(a) <= 1:
        return 0
    xp = powmod([0, 1], p, a, p)
    return len(gcd(a, sub(xp, [0, 1], p), p)) - 1
