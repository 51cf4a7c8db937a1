import random
from fractions import Fraction

import pytest
import sympy

from cmgroups.modular import (
    PrimeField,
    build_arithmetic_tables,
    divisors,
    factorize,
    field_ops,
    is_probable_prime,
    legendre_symbol,
    sieve_mu_phi,
    sqrt_mod,
)


def test_known_values():
    assert sqrt_mod(2, 7) == 3
    assert legendre_symbol(6, 7) == -1
    assert field_ops(17).inv(6) == 3


def test_field_rejects_bad_moduli():
    for bad in (1, 2, 9, 1 << 62):
        with pytest.raises(ValueError):
            PrimeField(bad)
    with pytest.raises(ZeroDivisionError):
        field_ops(13).inv(0)


def test_sqrt_mod_non_residue():
    with pytest.raises(ValueError):
        sqrt_mod(3, 7)


def test_sqrt_mod_against_sympy():
    rng = random.Random(5)
    for _ in range(300):
        p = sympy.randprime(3, 10**12)
        a = rng.randrange(p)
        if legendre_symbol(a, p) == -1:
            continue
        r = sqrt_mod(a, p)
        assert r * r % p == a
        assert r == min(sympy.sqrt_mod(a, p, all_roots=True))


def test_legendre_against_sympy():
    for p in (3, 5, 101, 7919, 1_000_003):
        for a in range(1, 60):
            assert legendre_symbol(a, p) == (sympy.legendre_symbol(a, p) if a % p else 0)


def test_primality_against_sympy():
    rng = random.Random(1)
    for n in list(range(2000)) + [rng.randrange(1 << 61) for _ in range(500)]:
        assert is_probable_prime(n) == sympy.isprime(n)
    assert is_probable_prime(3825123056546413051) is False  # strong pseudoprime to bases 2..23


def test_factorize_against_sympy():
    rng = random.Random(2)
    for _ in range(300):
        n = rng.randrange(2, 10**13)
        assert factorize(n) == sympy.factorint(n)


def test_mu_phi_against_sympy():
    mu, phi = sieve_mu_phi(3000)
    for k in range(1, 3001):
        assert mu[k] == sympy.mobius(k)
        assert phi[k] == sympy.totient(k)


def test_divisors():
    assert divisors(12) == [1, 2, 3, 4, 6, 12]
    assert divisors(1) == [1]


def test_identities_small():
    t = build_arithmetic_tables(500, check_limit=500)
    assert t.reciprocal_identity(12) == Fraction(1, 12)
    assert t.linear_identity(12) == 12
