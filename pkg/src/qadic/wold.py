"""Wold analysis for monomial isometries and the extension unitary.

Given two monomial isometries S0, S1 whose range projections sum to the
identity, the partial sums

    V_n = sum_{k=0..n} S0^k S1 S0* (S1*)^k

converge strongly; the limit V is a partial isometry between the
complements of the unitary parts of S1 and S0, and extending it across the
(at most one-dimensional) unitary parts yields a unitary U with

    U S0 = S1   and   S0 U = U^2 S0.

Everything here is exact: on a fixed basis vector the limit of V_n is
reached after finitely many steps, and the number of steps is computed
from the S1*-orbit of the index rather than guessed.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import Element, Monomial, one
from .errors import (
    CuntzRelationViolation,
    HypothesisViolation,
    NonTermination,
    UnsupportedIsometry,
)

GUARD_FACTOR = 64


@dataclass(frozen=True)
class MonomialIsometry:
    """A single monomial with full domain; automatically an isometry."""

    map: Monomial

    def __post_init__(self):
        if self.map.dom_level != 0:
            raise UnsupportedIsometry("isometry must be defined on all of Z")

    @classmethod
    def from_element(cls, e: Element) -> "MonomialIsometry":
        if not e.exact or len(e.terms) != 1:
            raise UnsupportedIsometry("only single-monomial isometries are supported")
        m, c = next(iter(e.terms.items()))
        if not (c.re == 1 and c.im == 0):
            raise UnsupportedIsometry("isometry coefficient must be 1")
        return cls(m)

    def element(self) -> Element:
        return Element.monomial(self.map)

    @property
    def slope_exp(self) -> int:
        return self.map.range_level

    @property
    def offset(self) -> int:
        return self.map.base_image

    def apply_index(self, n: int) -> int:
        return self.map.apply_index(n)

    def adjoint_index(self, n: int) -> int | None:
        return self.map.adjoint().apply_index(n)


@dataclass(frozen=True)
class WoldData:
    """Support of the unitary part: nothing, one basis line, or everything."""

    isometry: MonomialIsometry
    kind: str  # "empty" | "fixed" | "all"
    fixed_point: int | None = None

    def __post_init__(self):
        if self.kind not in ("empty", "fixed", "all"):
            raise ValueError(f"bad kind {self.kind!r}")
        if self.kind == "fixed" and self.isometry.apply_index(self.fixed_point) != self.fixed_point:
            raise ValueError("fixed_point is not fixed by the isometry")


def unitary_part(S: MonomialIsometry) -> WoldData:
    """Locate the invariant subspace that carries the unitary part.

    For n -> 2^i n + c with i >= 1 the images of the iterates shrink to the
    2-adic fixed point c / (1 - 2^i); the intersection is a basis line when
    that value is an integer and trivial otherwise.  Slope-one maps are
    unitary outright.
    """
    i, c = S.slope_exp, S.offset
    if i == 0:
        return WoldData(S, "all")
    denom = (1 << i) - 1
    if c % denom == 0:
        return WoldData(S, "fixed", -c // denom)
    return WoldData(S, "empty")


def _check_cuntz(S0: MonomialIsometry, S1: MonomialIsometry) -> None:
    e0, e1 = S0.element(), S1.element()
    total = e0 * e0.adjoint() + e1 * e1.adjoint()
    if not total.equals(one()):
        raise CuntzRelationViolation("S0 S0* + S1 S1* != 1")


def build_vn(S0: MonomialIsometry, S1: MonomialIsometry, n: int) -> Element:
    """The n-th partial sum of the shift-part intertwiner, in canonical form."""
    _check_cuntz(S0, S1)
    e0, e1 = S0.element(), S1.element()
    out = Element.zero()
    left, right = one(), one()
    for _ in range(n + 1):
        out = out + left * e1 * e0.adjoint() * right
        left = left * e0
        right = right * e1.adjoint()
    return out


def _chain_length(S1: MonomialIsometry, b: int, guard: int,
                  fixed_point: int | None) -> int | None:
    """Number of S1* steps from basis index b until it leaves im(S1).

    Returns None when the orbit sits on the fixed point forever (the vector
    is annihilated by the limit).  Raises NonTermination past the guard.
    """
    steps = 0
    while True:
        if b == fixed_point:
            return None
        nxt = S1.adjoint_index(b)
        if nxt is None:
            return steps
        b = nxt
        steps += 1
        if steps > guard:
            raise NonTermination(f"S1* orbit exceeded {guard} steps")


def apply_v_limit(S0: MonomialIsometry, S1: MonomialIsometry, vec: dict) -> dict:
    """The stable value of V_n applied to a finitely supported vector.

    V_n v changes for the last time at the maximal S1*-orbit length over the
    support of v, so the limit is evaluated there exactly (and checked
    against one more step).
    """
    _check_cuntz(S0, S1)
    if not vec:
        return {}
    wd1 = unitary_part(S1)
    guard = GUARD_FACTOR * max(1, max(abs(n) for n in vec))
    lengths = [_chain_length(S1, n, guard, wd1.fixed_point) for n in vec]
    stable = max((k for k in lengths if k is not None), default=0)
    out = build_vn(S0, S1, stable).apply(vec)
    assert build_vn(S0, S1, stable + 1).apply(vec) == out
    return out


def build_extension_unitary(S0: MonomialIsometry, S1: MonomialIsometry,
                            window: int, w_phase: complex = 1.0) -> dict:
    """Table n -> (image index, amplitude) of the extension unitary on [-N, N].

    The shift parts are matched by the strong limit of the partial sums;
    the unitary parts (when present) are matched by sending the S1 fixed
    basis vector to the S0 one, by default with amplitude +1.
    """
    _check_cuntz(S0, S1)
    wd0, wd1 = unitary_part(S0), unitary_part(S1)
    if {wd0.kind, wd1.kind} not in ({"fixed"}, {"empty"}):
        raise HypothesisViolation(
            f"unitary parts are not equivalent: {wd0.kind} vs {wd1.kind}")
    table = {}
    for n in range(-window, window + 1):
        if wd1.kind == "fixed" and n == wd1.fixed_point:
            table[n] = (wd0.fixed_point, complex(w_phase))
            continue
        image = apply_v_limit(S0, S1, {n: 1})
        if len(image) != 1:
            raise NonTermination(f"V is not a permutation at {n}: {image}")
        ((m, c),) = image.items()
        table[n] = (m, complex(c))
    return table


def check_intertwining(table: dict, S0: MonomialIsometry, S1: MonomialIsometry) -> dict:
    """Verify U S0 = S1 and S0 U = U^2 S0 wherever the window allows.

    Returns {'US0=S1': bool, 'S0U=U2S0': bool, 'checked': count}.
    """
    ok1 = ok2 = True
    checked = 0
    for n in table:
        m = S0.apply_index(n)
        if m in table:
            # U S0 eps_n against S1 eps_n
            checked += 1
            img, amp = table[m]
            ok1 &= img == S1.apply_index(n) and abs(amp - 1) < 1e-12
            # S0 U eps_n against U U S0 eps_n
            un, ua = table[n]
            first, a1 = table[m]
            if first in table:
                second, a2 = table[first]
                checked += 1
                ok2 &= S0.apply_index(un) == second and abs(ua - a1 * a2) < 1e-12
    return {"US0=S1": bool(ok1), "S0U=U2S0": bool(ok2), "checked": checked}
