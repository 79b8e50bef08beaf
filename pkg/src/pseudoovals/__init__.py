"""Pseudo-ovals in PG(3n-1, 2) via Wild subspaces of o-permutations."""

from .field import Field, make_field

__all__ = ["Field", "make_field"]
__version__ = "0.1.0"
