"""Reduction invariants (d_p, e_p) of CM elliptic curves and their average orders."""

__version__ = "0.1.0"
