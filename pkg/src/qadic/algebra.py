"""Exact model of the *-algebra generated by the bilateral shift and the
doubling isometry on l^2(Z).

Every word u^a s^i s*^j u^b acts on basis vectors as a partial affine map

    n  ->  2^(i-j) * (n - r) + m0      for n = r (mod 2^j),  0 otherwise,

so monomials are stored as the tuple (dom_level j, dom_residue r,
range_level i, base_image m0).  Operator products become compositions of
partial affine maps, the defining relations of the algebra become theorems
instead of rewrite rules, and equality of canonical forms is decidable.

Elements are finite linear combinations of monomials.  Coefficients are
either exact Gaussian rationals or complex doubles; mixed arithmetic
promotes to the numeric mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

NUMERIC_EPS = 1e-12
APPROX_EQ_TOL = 1e-9


@dataclass(frozen=True)
class RationalComplex:
    """Complex number with rational real and imaginary parts."""

    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    def __add__(self, other):
        return RationalComplex(self.re + other.re, self.im + other.im)

    def __sub__(self, other):
        return RationalComplex(self.re - other.re, self.im - other.im)

    def __neg__(self):
        return RationalComplex(-self.re, -self.im)

    def __mul__(self, other):
        return RationalComplex(self.re * other.re - self.im * other.im,
                               self.re * other.im + self.im * other.re)

    def conjugate(self):
        return RationalComplex(self.re, -self.im)

    def is_zero(self):
        return self.re == 0 and self.im == 0

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __str__(self):
        if self.im == 0:
            return _frac_str(self.re)
        if self.re == 0:
            return "i" if self.im == 1 else ("-i" if self.im == -1 else _frac_str(self.im) + "i")
        sign = "+" if self.im > 0 else "-"
        return f"({_frac_str(self.re)}{sign}{_frac_str(abs(self.im))}i)"


def _frac_str(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


RC_ONE = RationalComplex(Fraction(1))


def _coerce(c):
    """Map a python scalar to (coefficient, exact_flag)."""
    if isinstance(c, RationalComplex):
        return c, True
    if isinstance(c, (int, Fraction)):
        return RationalComplex(Fraction(c)), True
    if isinstance(c, (float, complex)):
        return complex(c), False
    raise TypeError(f"unsupported coefficient {c!r}")


@dataclass(frozen=True, order=True)
class Monomial:
    """A partial dyadic affine transformation of Z.

    Sends basis index n to 2^(range_level - dom_level) * (n - dom_residue)
    + base_image when n = dom_residue (mod 2^dom_level), and kills it
    otherwise.  The map is a bijection from its domain class onto
    base_image + 2^range_level Z.
    """

    dom_level: int
    dom_residue: int
    range_level: int
    base_image: int

    def __post_init__(self):
        if self.dom_level < 0 or self.range_level < 0:
            raise ValueError("levels must be non-negative")
        if not 0 <= self.dom_residue < (1 << self.dom_level):
            raise ValueError("dom_residue must be reduced mod 2^dom_level")

    def apply_index(self, n: int) -> int | None:
        if (n - self.dom_residue) % (1 << self.dom_level):
            return None
        return self.base_image + (((n - self.dom_residue) >> self.dom_level) << self.range_level)

    def word(self) -> tuple[int, int, int, int]:
        """The canonical exponents (a, i, j, b) of u^a s^i s*^j u^b."""
        i, j = self.range_level, self.dom_level
        a = self.base_image % (1 << i)
        k = (self.base_image - a) >> i
        b = -self.dom_residue + (k << j)
        return a, i, j, b

    @classmethod
    def from_word(cls, a: int, i: int, j: int, b: int) -> "Monomial":
        if i < 0 or j < 0:
            raise ValueError("isometry exponents must be non-negative")
        r = (-b) % (1 << j)
        m0 = (((r + b) >> j) << i) + a
        return cls(j, r, i, m0)

    def adjoint(self) -> "Monomial":
        """The inverse partial bijection."""
        r = self.base_image % (1 << self.range_level)
        m0 = (((r - self.base_image) >> self.range_level) << self.dom_level) + self.dom_residue
        return Monomial(self.range_level, r, self.dom_level, m0)

    def is_diagonal(self) -> bool:
        """True when the map is the identity on its domain class."""
        return self.range_level == self.dom_level and self.base_image == self.dom_residue

    def children(self) -> tuple["Monomial", "Monomial"]:
        """The same map restricted to the two halves of the domain class."""
        j, r, i, m0 = self.dom_level, self.dom_residue, self.range_level, self.base_image
        return (Monomial(j + 1, r, i + 1, m0),
                Monomial(j + 1, r + (1 << j), i + 1, m0 + (1 << i)))

    def parent_sibling(self) -> tuple["Monomial", "Monomial"] | None:
        """Parent map on the doubled class and the other child, if any."""
        j, r, i, m0 = self.dom_level, self.dom_residue, self.range_level, self.base_image
        if j == 0 or i == 0:
            return None
        half, ihalf = 1 << (j - 1), 1 << (i - 1)
        if r < half:
            return Monomial(j - 1, r, i - 1, m0), Monomial(j, r + half, i, m0 + ihalf)
        return (Monomial(j - 1, r - half, i - 1, m0 - ihalf),
                Monomial(j, r - half, i, m0 - ihalf))

    def __str__(self):
        return word_str(*self.word())


IDENTITY = Monomial(0, 0, 0, 0)


def word_str(a: int, i: int, j: int, b: int) -> str:
    parts = []
    if a:
        parts.append("u" if a == 1 else f"u^{a}")
    if i:
        parts.append("s" if i == 1 else f"s^{i}")
    if j:
        parts.append("s*" if j == 1 else f"s*^{j}")
    if b:
        parts.append("u" if b == 1 else f"u^{b}")
    return " ".join(parts) if parts else "1"


def compose(m1: Monomial, m2: Monomial) -> Monomial | None:
    """The operator product m1 m2 (m2 applied first); None when zero.

    The domain is the m2-preimage of the intersection of m2's range class
    with m1's domain class, itself a residue class or empty.
    """
    j1, r1 = m1.dom_level, m1.dom_residue
    i2, m02 = m2.range_level, m2.base_image
    t = min(i2, j1)
    if (r1 - m02) % (1 << t):
        return None
    if j1 > i2:
        extra = j1 - i2
        t0 = ((r1 - m02) >> i2) % (1 << extra)
        level = m2.dom_level + extra
        res = m2.dom_residue + (t0 << m2.dom_level)
    else:
        level = m2.dom_level
        res = m2.dom_residue
    rng = m1.range_level + max(0, i2 - j1)
    image = m1.apply_index(m2.apply_index(res))
    return Monomial(level, res, rng, image)


class Element:
    """Finite linear combination of monomials in canonical form.

    The canonical form has no zero coefficients, no two sibling terms with
    the same parent map and equal coefficients (those merge into the
    parent), and deterministic term order.  Equality of canonical forms is
    equality of the represented operators.
    """

    __slots__ = ("terms", "exact")
    __hash__ = None

    def __init__(self, terms=None, exact=True, _normalized=False):
        self.terms = dict(terms or {})
        self.exact = exact
        if not _normalized:
            self._normalize()

    # -- construction -----------------------------------------------------

    @classmethod
    def zero(cls, exact=True):
        return cls({}, exact, _normalized=True)

    @classmethod
    def one(cls):
        return cls({IDENTITY: RC_ONE}, True, _normalized=True)

    @classmethod
    def monomial(cls, m: Monomial, coeff=1):
        c, exact = _coerce(coeff)
        return cls({m: c}, exact)

    @classmethod
    def from_word(cls, a: int, i: int, j: int, b: int, coeff=1):
        return cls.monomial(Monomial.from_word(a, i, j, b), coeff)

    @classmethod
    def scalar(cls, c):
        return cls.monomial(IDENTITY, c)

    # -- canonical form ----------------------------------------------------

    def _is_small(self, c) -> bool:
        return c.is_zero() if self.exact else abs(c) <= NUMERIC_EPS

    def _coeffs_equal(self, c1, c2) -> bool:
        return c1 == c2 if self.exact else abs(c1 - c2) <= NUMERIC_EPS

    def _normalize(self):
        terms = {m: c for m, c in self.terms.items() if not self._is_small(c)}
        changed = True
        while changed:
            changed = False
            for m in sorted(terms):
                if m not in terms or m.dom_level == 0 or m.range_level == 0:
                    continue
                parent, sibling = m.parent_sibling()
                cs = terms.get(sibling)
                if cs is None or not self._coeffs_equal(terms[m], cs):
                    continue
                c = terms[m] if self.exact else (terms[m] + cs) / 2
                del terms[m]
                del terms[sibling]
                total = terms.get(parent)
                total = c if total is None else total + c
                if self._is_small(total):
                    terms.pop(parent, None)
                else:
                    terms[parent] = total
                changed = True
        self.terms = dict(sorted(terms.items()))

    # -- ring structure -----------------------------------------------------

    def _promote(self, other: "Element"):
        exact = self.exact and other.exact
        if exact:
            return self.terms, other.terms, True
        return ({m: complex(c) for m, c in self.terms.items()} if self.exact else self.terms,
                {m: complex(c) for m, c in other.terms.items()} if other.exact else other.terms,
                False)

    def __add__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        t1, t2, exact = self._promote(other)
        out = dict(t1)
        for m, c in t2.items():
            out[m] = out[m] + c if m in out else c
        return Element(out, exact)

    def __sub__(self, other):
        return self + (-other)

    def __neg__(self):
        return Element({m: -c for m, c in self.terms.items()}, self.exact, _normalized=True)

    def __mul__(self, other):
        if not isinstance(other, Element):
            return self.scale(other)
        t1, t2, exact = self._promote(other)
        out = {}
        for ma, ca in t1.items():
            for mb, cb in t2.items():
                m = compose(ma, mb)
                if m is None:
                    continue
                c = ca * cb
                out[m] = out[m] + c if m in out else c
        return Element(out, exact)

    def __rmul__(self, other):
        if isinstance(other, Element):
            return NotImplemented
        return self.scale(other)

    def scale(self, c):
        c, c_exact = _coerce(c)
        exact = self.exact and c_exact
        if exact:
            return Element({m: v * c for m, v in self.terms.items()}, True)
        cc = complex(c) if isinstance(c, RationalComplex) else c
        return Element({m: (complex(v) if self.exact else v) * cc
                        for m, v in self.terms.items()}, False)

    def adjoint(self) -> "Element":
        return Element({m.adjoint(): c.conjugate() for m, c in self.terms.items()}, self.exact)

    def power(self, n: int) -> "Element":
        if n < 0:
            raise ValueError("negative powers are not defined on general elements")
        out = Element.one()
        for _ in range(n):
            out = out * self
        return out

    # -- predicates ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.exact == other.exact and self.terms == other.terms

    def equals(self, other: "Element") -> bool:
        """Exact operator equality (canonical forms of the difference empty)."""
        if not (self.exact and other.exact):
            raise ValueError("equals requires exact coefficients; use approx_equals")
        return (self - other).is_zero()

    def approx_equals(self, other: "Element", tol: float = APPROX_EQ_TOL) -> bool:
        diff = self - other
        if diff.exact:
            return diff.is_zero()
        return all(abs(c) <= tol for c in diff.terms.values())

    # -- representation on l^2(Z) --------------------------------------------

    def apply(self, vec: dict) -> dict:
        """Image of a finitely supported vector under the basis representation.

        The vector is a map basis index -> coefficient; exact coefficients
        stay exact when both the element and the vector are exact.
        """
        exact = self.exact and all(
            isinstance(v, (int, Fraction, RationalComplex)) for v in vec.values())
        out = {}
        for m, c in self.terms.items():
            cc = c if exact else complex(c)
            for n, vn in vec.items():
                image = m.apply_index(n)
                if image is None:
                    continue
                vv = _coerce(vn)[0] if exact else complex(vn)
                contrib = cc * vv
                out[image] = out[image] + contrib if image in out else contrib
        if exact:
            return {n: v for n, v in out.items() if not v.is_zero()}
        return {n: v for n, v in out.items() if abs(v) > NUMERIC_EPS}

    def matrix_window(self, half_width: int):
        """Sparse matrix of the element on basis indices [-N, N].

        Returns (entries, boundary_loss) where entries maps (row, col) to a
        complex amplitude and boundary_loss flags any image that fell
        outside the window.
        """
        entries = {}
        boundary_loss = False
        for col in range(-half_width, half_width + 1):
            for m, c in self.terms.items():
                row = m.apply_index(col)
                if row is None:
                    continue
                if abs(row) > half_width:
                    boundary_loss = True
                    continue
                entries[(row, col)] = entries.get((row, col), 0j) + complex(c)
        return entries, boundary_loss

    # -- serialization ---------------------------------------------------------

    def __str__(self):
        if not self.terms:
            return "0"
        pieces = []
        for idx, (m, c) in enumerate(self.terms.items()):
            coeff, neg = _coeff_str(c, self.exact)
            body = str(m)
            if coeff == "1":
                text = body
            elif body == "1":
                text = coeff
            else:
                text = f"{coeff} {body}"
            if idx == 0:
                pieces.append(("-" if neg else "") + text)
            else:
                pieces.append(("- " if neg else "+ ") + text)
        return " ".join(pieces)

    __repr__ = __str__

    def to_json_dict(self) -> dict:
        return {"terms": [
            {"j": m.dom_level, "r": m.dom_residue, "i": m.range_level, "m0": m.base_image,
             "re": float(c.re) if self.exact else c.real,
             "im": float(c.im) if self.exact else c.imag}
            for m, c in self.terms.items()]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Element":
        terms = {}
        for t in data["terms"]:
            m = Monomial(t["j"], t["r"], t["i"], t["m0"])
            terms[m] = complex(t["re"], t["im"])
        return cls(terms, exact=False)


def _coeff_str(c, exact: bool) -> tuple[str, bool]:
    """Printable magnitude of a coefficient and whether its sign is negative."""
    if exact:
        neg = c.re < 0 or (c.re == 0 and c.im < 0)
        return str(-c if neg else c), neg
    neg = c.real < 0 or (c.real == 0 and c.imag < 0)
    d = -c if neg else c
    if abs(d.imag) <= NUMERIC_EPS:
        return repr(d.real), neg
    if abs(d.real) <= NUMERIC_EPS:
        return f"{d.imag!r}i", neg
    sign = "+" if d.imag > 0 else "-"
    return f"({d.real!r}{sign}{abs(d.imag)!r}i)", neg


# -- generators and common elements ------------------------------------------


def u(power: int = 1) -> Element:
    return Element.monomial(Monomial(0, 0, 0, power))


def s() -> Element:
    return Element.monomial(Monomial(0, 0, 1, 0))


def s_adj() -> Element:
    return Element.monomial(Monomial(1, 0, 0, 0))


def one() -> Element:
    return Element.one()


def zero() -> Element:
    return Element.zero()


def projection(offset: int, level: int) -> Element:
    """u^offset e u^-offset: the diagonal projection onto offset + 2^level Z."""
    r = offset % (1 << level)
    return Element.monomial(Monomial(level, r, level, r))


def diagonal_expectation(e: Element) -> Element:
    """Project onto the diagonal subalgebra.

    Keeps exactly the terms whose monomial acts as the identity on its
    domain class; everything else maps to zero.
    """
    return Element({m: c for m, c in e.terms.items() if m.is_diagonal()},
                   e.exact, _normalized=True)


# -- 2x2 matrix embedding ------------------------------------------------------


def mat_mul(A, B):
    return [[A[r][0] * B[0][c] + A[r][1] * B[1][c] for c in range(2)] for r in range(2)]


def mat_add(A, B):
    return [[A[r][c] + B[r][c] for c in range(2)] for r in range(2)]


def mat_adjoint(A):
    return [[A[c][r].adjoint() for c in range(2)] for r in range(2)]


def mat_scale(A, c):
    return [[A[r][col].scale(c) for col in range(2)] for r in range(2)]


def mat_identity():
    return [[Element.one(), Element.zero()], [Element.zero(), Element.one()]]


def mat_zero():
    return [[Element.zero(), Element.zero()], [Element.zero(), Element.zero()]]


_EMBED_U = [[Element.zero(), u()], [Element.one(), Element.zero()]]
_EMBED_S = [[s(), u() * s()], [Element.zero(), Element.zero()]]


def _mat_pow(A, n):
    out = mat_identity()
    for _ in range(n):
        out = mat_mul(out, A)
    return out


def embed_2x2(e: Element):
    """The unital *-homomorphism into 2x2 matrices determined by

    u -> [[0, u], [1, 0]],   s -> [[s, u s], [0, 0]],

    extended linearly and multiplicatively.
    """
    u_inv = mat_adjoint(_EMBED_U)
    s_adj_mat = mat_adjoint(_EMBED_S)
    out = mat_zero()
    for m, c in e.terms.items():
        a, i, j, b = m.word()
        M = _mat_pow(_EMBED_U, a)  # a lies in [0, 2^i)
        M = mat_mul(M, _mat_pow(_EMBED_S, i))
        M = mat_mul(M, _mat_pow(s_adj_mat, j))
        M = mat_mul(M, _mat_pow(_EMBED_U if b >= 0 else u_inv, abs(b)))
        out = mat_add(out, mat_scale(M, c))
    return out
