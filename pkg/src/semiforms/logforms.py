"""Logarithmic forms along a multiarrangement.

An element w/Q of Omega^p(A, m) is stored by its polynomial numerator w.
Membership asks that w ^ d(alpha_H) be divisible by alpha_H^m(H) for every H.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .polyring import DiffForm, MPoly, NotDivisible, exact_divide
from .reflgroup import Hyperplane
from .semiinv import SemiInvariantContext


@dataclass(frozen=True)
class Multiarrangement:
    hyperplanes: tuple[tuple[Hyperplane, int], ...]

    @property
    def nvars(self) -> int:
        return self.hyperplanes[0][0].alpha.nvars

    @property
    def m(self) -> int:
        return self.hyperplanes[0][0].alpha.m

    @property
    def defining_poly(self) -> MPoly:
        out = MPoly.const(self.nvars, self.m, 1)
        for H, a in self.hyperplanes:
            if a:
                out = out * H.alpha ** a
        return out

    def simple(self) -> Multiarrangement:
        """The underlying arrangement, every multiplicity 1."""
        return Multiarrangement(tuple((H, 1) for H, _ in self.hyperplanes))


def multiarrangement_for(ctx: SemiInvariantContext) -> Multiarrangement:
    """A_chi: each H carried with multiplicity a_H(chi), zeros included."""
    return Multiarrangement(tuple(zip(ctx.arrangement, ctx.a)))


@dataclass
class LogCheck:
    passed: bool
    hyperplane: Hyperplane | None = None
    index: tuple[int, ...] | None = None

    def __bool__(self) -> bool:
        return self.passed


def _divisible_power(f: MPoly, alpha: MPoly, a: int) -> bool:
    for _ in range(a):
        try:
            f = exact_divide(f, alpha)
        except NotDivisible:
            return False
    return True


def is_logarithmic(w: DiffForm, M: Multiarrangement) -> LogCheck:
    """Does w/Q_M lie in Omega(M)?  On failure, the first offending (H, I) is reported."""
    for H, a in M.hyperplanes:
        if a < 1:
            continue
        v = w.wedge(DiffForm.exterior_derivative(H.alpha))
        for I in sorted(v.comps):
            if not _divisible_power(v.comps[I], H.alpha, a):
                return LogCheck(False, H, I)
    return LogCheck(True)


def closure_product_check(w: DiffForm, mu: DiffForm, M: Multiarrangement) -> LogCheck:
    """(w/Q) ^ (mu/Q) is again in Omega(M): Q divides w ^ mu and the quotient is logarithmic."""
    for x in (w, mu):
        if not is_logarithmic(x, M):
            raise ValueError("operand is not logarithmic")
    prod = w.wedge(mu)
    Q = M.defining_poly
    try:
        quotient = prod.divide(Q)
    except NotDivisible:
        return LogCheck(False)
    return is_logarithmic(quotient, M)


def log_battery(ctx: SemiInvariantContext, forms: Sequence[DiffForm]) -> tuple[int, int]:
    """Membership of each form and closure of consecutive pairs; returns (checks, failures)."""
    M = multiarrangement_for(ctx)
    checks = fails = 0
    ok = []
    for w in forms:
        checks += 1
        passed = bool(is_logarithmic(w, M))
        fails += not passed
        ok.append(passed)
    for i in range(len(forms) - 1):
        checks += 1
        if ok[i] and ok[i + 1]:
            fails += not closure_product_check(forms[i], forms[i + 1], M)
        else:
            fails += 1
    return checks, fails
