"""Exact computation of semiinvariant differential forms of complex reflection groups."""

from .exactnum import CycNum
from .polyring import DiffForm, LinearChange, MPoly
from .reflgroup import ReflectionGroup, character, load_fixture, load_group
from .semiinv import (
    SemiInvariantContext, basic_invariants, chi_wedge, context, find_generators, saito_check,
)

__all__ = [
    "CycNum", "DiffForm", "LinearChange", "MPoly", "ReflectionGroup", "SemiInvariantContext",
    "basic_invariants", "character", "chi_wedge", "context", "find_generators", "load_fixture",
    "load_group", "saito_check",
]
__version__ = "0.1.0"
