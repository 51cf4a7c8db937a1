"""Slow reference implementations used only as test oracles.

Nothing here shares code with the package: points are listed by brute force,
orders come from repeated addition, and division polynomials are expanded
symbolically with sympy.
"""

from math import gcd

import sympy


def points(a, b, p):
    """All affine points of y^2 = x^3 + a x + b over F_p."""
    roots = {}
    for y in range(p):
        roots.setdefault(y * y % p, []).append(y)
    return [(x, y) for x in range(p) for y in roots.get((x**3 + a * x + b) % p, [])]


def count(a, b, p):
    return len(points(a, b, p)) + 1


def _add(P, Q, a, p):
    if P is None:
        return Q
    if Q is None:
        return P
    if P[0] == Q[0] and (P[1] + Q[1]) % p == 0:
        return None
    if P == Q:
        lam = (3 * P[0] * P[0] + a) * pow(2 * P[1], -1, p) % p
    else:
        lam = (Q[1] - P[1]) * pow(Q[0] - P[0], -1, p) % p
    x = (lam * lam - P[0] - Q[0]) % p
    return x, (lam * (P[0] - x) - P[1]) % p


def order(P, a, p):
    k, Q = 1, P
    while Q is not None:
        Q = _add(Q, P, a, p)
        k += 1
    return k


def structure(a, b, p):
    """(d, e) with E(F_p) = Z/d + Z/e, from the group exponent."""
    pts = points(a, b, p)
    n = len(pts) + 1
    exp = 1
    for P in pts:
        o = order(P, a, p)
        exp = exp * o // gcd(exp, o)
    return n // exp, exp


def division_polys(a, b, nmax):
    """psi_n as sympy expressions in x, y with y^2 reduced to x^3 + a x + b."""
    x, y = sympy.symbols("x y")
    F = x**3 + a * x + b

    def red(expr):
        q = sympy.Poly(sympy.expand(expr), y)
        out = 0
        for (e,), c in q.terms():
            out += c * F ** (e // 2) * y ** (e % 2)
        return sympy.expand(out)

    psi = {0: sympy.Integer(0), 1: sympy.Integer(1), 2: 2 * y}
    psi[3] = 3 * x**4 + 6 * a * x**2 + 12 * b * x - a * a
    psi[4] = 4 * y * (x**6 + 5 * a * x**4 + 20 * b * x**3 - 5 * a * a * x**2 - 4 * a * b * x - 8 * b * b - a**3)
    for n in range(5, nmax + 1):
        m = n // 2
        if n % 2:
            psi[n] = red(psi[m + 2] * psi[m] ** 3 - psi[m - 1] * psi[m + 1] ** 3)
        else:
            psi[n] = red(psi[m] * (psi[m + 2] * psi[m - 1] ** 2 - psi[m - 2] * psi[m + 1] ** 2) / (2 * y))
    return x, y, F, psi


def stored_form(a, b, n):
    """Coefficients (low to high) of the x-only polynomial the package stores for index n."""
    x, y, F, psi = division_polys(a, b, n)
    expr = psi[n] if n % 2 else sympy.expand(sympy.cancel(psi[n] * F / (2 * y)))
    return [int(c) for c in reversed(sympy.Poly(expr, x).all_coeffs())]
