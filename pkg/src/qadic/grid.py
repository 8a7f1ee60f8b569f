"""Compactly supported functions on dyadic grids and the operators on them.

A GridFunction stores complex samples at the points (start_index + k) * h
with h = 2^-spacing_exp, so every sample point is a dyadic rational and the
translation / dilation operators act by exact reindexing.  The continuous
Fourier transform uses the e(tx) = exp(2*pi*i*t*x) convention throughout
and is realized by an FFT with the phase and scale corrections that turn
the DFT into a Riemann sum of the defining integral.

Grid refinement follows a per-function style flag: "step" functions refine
by sample duplication (exact for indicators with grid-aligned breakpoints),
"smooth" functions by trigonometric interpolation.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .numbers import DyadicRational, PowerOfTwo, as_dyadic

TOL_FFT = 1e-8
TWO_PI = 2.0 * math.pi
_TAIL_CUTOFF = 1e-16


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1)).bit_length()


class GridFunction:
    """Finitely supported samples on the dyadic grid 2^-spacing_exp * Z."""

    __slots__ = ("spacing_exp", "start_index", "samples", "style")

    def __init__(self, spacing_exp: int, start_index: int, samples, style: str = "smooth"):
        samples = np.asarray(samples, dtype=complex)
        nz = np.nonzero(samples)[0]
        if len(nz) == 0:
            start_index, samples = 0, samples[:0]
        else:
            start_index += int(nz[0])
            samples = samples[nz[0]:nz[-1] + 1]
        if style not in ("step", "smooth"):
            raise ValueError(f"unknown style {style!r}")
        self.spacing_exp = spacing_exp
        self.start_index = start_index
        self.samples = samples
        self.style = style

    # -- basic geometry ------------------------------------------------------

    @property
    def h(self) -> float:
        return 2.0 ** (-self.spacing_exp)

    def __len__(self):
        return len(self.samples)

    def is_zero(self) -> bool:
        return len(self.samples) == 0

    def points(self) -> np.ndarray:
        return (self.start_index + np.arange(len(self.samples))) * self.h

    def support(self) -> tuple[float, float]:
        """Closed interval carrying the nonzero samples (0-length if empty)."""
        if self.is_zero():
            return 0.0, 0.0
        return self.start_index * self.h, (self.start_index + len(self.samples) - 1) * self.h

    def value_at(self, x: float) -> complex:
        """Linear interpolation between neighbouring samples; 0 outside."""
        if self.is_zero():
            return 0j
        pos = x / self.h - self.start_index
        i = math.floor(pos)
        if i < -1 or i >= len(self.samples):
            return 0j
        frac = pos - i
        left = self.samples[i] if i >= 0 else 0j
        right = self.samples[i + 1] if i + 1 < len(self.samples) else 0j
        return left * (1 - frac) + right * frac

    # -- refinement ------------------------------------------------------------

    def refine(self) -> "GridFunction":
        """Double the sampling rate according to the style flag."""
        if self.is_zero():
            return GridFunction(self.spacing_exp + 1, 0, [], self.style)
        if self.style == "step":
            return GridFunction(self.spacing_exp + 1, 2 * self.start_index,
                                np.repeat(self.samples, 2), "step")
        return self._refine_trig()

    def _refine_trig(self) -> "GridFunction":
        margin = 16
        n = len(self.samples)
        size = _next_pow2(n + 2 * margin)
        buf = np.zeros(size, dtype=complex)
        buf[margin:margin + n] = self.samples
        spec = np.fft.fft(buf)
        out = np.zeros(2 * size, dtype=complex)
        half = size // 2
        out[:half] = spec[:half]
        out[half] = spec[half] / 2
        out[2 * size - half] = spec[half] / 2
        out[2 * size - half + 1:] = spec[half + 1:]
        fine = np.fft.ifft(out) * 2
        return GridFunction(self.spacing_exp + 1, 2 * (self.start_index - margin),
                            fine, "smooth")

    def to_grid(self, spacing_exp: int) -> "GridFunction":
        if spacing_exp < self.spacing_exp:
            raise ValueError("cannot coarsen a grid function")
        out = self
        while out.spacing_exp < spacing_exp:
            out = out.refine()
        return out

    # -- linear structure ---------------------------------------------------------

    def scale(self, c: complex) -> "GridFunction":
        return GridFunction(self.spacing_exp, self.start_index, self.samples * c, self.style)

    def __neg__(self):
        return self.scale(-1)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        if not isinstance(other, GridFunction):
            return NotImplemented
        if other.is_zero():
            return self
        if self.is_zero():
            return other
        g = max(self.spacing_exp, other.spacing_exp)
        a, b = self.to_grid(g), other.to_grid(g)
        lo = min(a.start_index, b.start_index)
        hi = max(a.start_index + len(a), b.start_index + len(b))
        buf = np.zeros(hi - lo, dtype=complex)
        buf[a.start_index - lo:a.start_index - lo + len(a)] += a.samples
        buf[b.start_index - lo:b.start_index - lo + len(b)] += b.samples
        style = a.style if a.style == b.style else "smooth"
        return GridFunction(g, lo, buf, style)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__


def grid_sample(src: GridFunction, x) -> np.ndarray:
    """Evaluate a grid function at query points, exactly when possible.

    Queries that form a uniform dyadic grid aligned with a refinement of
    the source are answered by exact sample lookup (after trigonometric or
    duplication refinement); anything else falls back to linear
    interpolation.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if src.is_zero() or len(x) == 0:
        return np.zeros(len(x), dtype=complex)
    exp = src.spacing_exp
    if len(x) > 1:
        diffs = np.diff(x)
        step = diffs[0]
        if step > 0 and np.allclose(diffs, step, rtol=0, atol=1e-12):
            mantissa, e2 = math.frexp(step)
            if mantissa == 0.5:
                exp = max(exp, 1 - e2)
    scaled = x * 2.0 ** exp
    idx = np.round(scaled)
    if np.max(np.abs(scaled - idx)) < 1e-9:
        fine = src.to_grid(exp)
        pos = idx.astype(int) - fine.start_index
        valid = (pos >= 0) & (pos < len(fine.samples))
        out = np.zeros(len(x), dtype=complex)
        out[valid] = fine.samples[pos[valid]]
        return out
    pts = src.points()
    re = np.interp(x, pts, src.samples.real, left=0.0, right=0.0)
    im = np.interp(x, pts, src.samples.imag, left=0.0, right=0.0)
    return re + 1j * im


def indicator(spacing_exp: int, lo: DyadicRational | int, hi: DyadicRational | int) -> GridFunction:
    """Indicator of the half-open interval [lo, hi) sampled left-closed."""
    lo, hi = as_dyadic(lo), as_dyadic(hi)
    g = max(spacing_exp, lo.exponent, hi.exponent)
    start = lo.numerator << (g - lo.exponent)
    end = hi.numerator << (g - hi.exponent)
    return GridFunction(g, start, np.ones(max(0, end - start)), "step")


def sample_symbol(f, spacing_exp: int, lo: float, hi: float) -> GridFunction:
    """Sample a closed-form function on [lo, hi] at the given resolution."""
    start = math.floor(lo * 2 ** spacing_exp)
    end = math.ceil(hi * 2 ** spacing_exp)
    x = (start + np.arange(end - start + 1)) * 2.0 ** (-spacing_exp)
    vals = np.asarray(f.f_values(x), dtype=complex)
    vals = np.where(np.abs(vals) < _TAIL_CUTOFF, 0, vals)
    return GridFunction(spacing_exp, start, vals, "smooth")


# -- elementary operators ---------------------------------------------------------


def translate(xi: GridFunction, b: DyadicRational | int) -> GridFunction:
    """(T_b xi)(x) = xi(x - b); exact reindexing, refining if b is finer."""
    b = as_dyadic(b)
    if xi.is_zero():
        return xi
    out = xi.to_grid(max(xi.spacing_exp, b.exponent))
    shift = b.numerator << (out.spacing_exp - b.exponent)
    return GridFunction(out.spacing_exp, out.start_index + shift, out.samples, out.style)


def dilate(xi: GridFunction, a: PowerOfTwo) -> GridFunction:
    """(D_a xi)(x) = a^(-1/2) xi(x / a); exact on the grid representation."""
    return GridFunction(xi.spacing_exp - a.exponent, xi.start_index,
                        xi.samples * 2.0 ** (-a.exponent / 2), xi.style)


def affine_reindex(xi: GridFunction, scale_exp: int, shift: DyadicRational | int) -> GridFunction:
    """The function t -> xi(2^scale_exp * t + shift) as exact reindexing."""
    shift = as_dyadic(shift)
    if xi.is_zero():
        return GridFunction(xi.spacing_exp + scale_exp, 0, [], xi.style)
    src = xi.to_grid(max(xi.spacing_exp, shift.exponent))
    offset = shift.numerator << (src.spacing_exp - shift.exponent)
    return GridFunction(src.spacing_exp + scale_exp, src.start_index - offset,
                        src.samples, src.style)


def multiply(f, xi: GridFunction) -> GridFunction:
    """Pointwise multiplication by a closed-form symbol."""
    if xi.is_zero():
        return xi
    vals = np.asarray(f.f_values(xi.points()), dtype=complex)
    return GridFunction(xi.spacing_exp, xi.start_index, vals * xi.samples, xi.style)


def rep_apply(f, b: DyadicRational | int, a: PowerOfTwo, xi: GridFunction) -> GridFunction:
    """M_f T_b D_a xi: multiplication after translation after dilation."""
    return multiply(f, translate(dilate(xi, a), b))


def inner(xi1: GridFunction, xi2: GridFunction) -> complex:
    """L^2 pairing, conjugate-linear in the first argument.

    Riemann sum at the common refined spacing; exact for step functions
    with grid-aligned breakpoints.
    """
    if xi1.is_zero() or xi2.is_zero():
        return 0j
    g = max(xi1.spacing_exp, xi2.spacing_exp)
    a, b = xi1.to_grid(g), xi2.to_grid(g)
    lo = max(a.start_index, b.start_index)
    hi = min(a.start_index + len(a), b.start_index + len(b))
    if hi <= lo:
        return 0j
    va = a.samples[lo - a.start_index:hi - a.start_index]
    vb = b.samples[lo - b.start_index:hi - b.start_index]
    return complex(np.vdot(va, vb) * a.h)


def norm(xi: GridFunction) -> float:
    return math.sqrt(max(inner(xi, xi).real, 0.0))


# -- Fourier layer ------------------------------------------------------------------


def _fft_size(xi: GridFunction) -> int:
    m = len(xi.samples)
    # all indices must fit in [-size/2, size/2) to avoid wraparound, and the
    # reciprocal grid is kept at least as fine as the input's
    fit = 2 * max(-xi.start_index, xi.start_index + m, 1)
    resolution = 1 << max(0, min(2 * xi.spacing_exp, 26))
    return _next_pow2(max(m, fit, resolution, 8))


def fourier(xi: GridFunction) -> GridFunction:
    """(F xi)(t) = integral of e(tx) xi(x) dx, discretized on the reciprocal grid."""
    return _fourier(xi, +1)


def fourier_inv(xi: GridFunction) -> GridFunction:
    """Inverse transform: conjugate phase convention."""
    return _fourier(xi, -1)


def _fourier(xi: GridFunction, sign: int) -> GridFunction:
    if xi.is_zero():
        return GridFunction(0, 0, [], "smooth")
    size = _fft_size(xi)
    buf = np.zeros(size, dtype=complex)
    buf[:len(xi.samples)] = xi.samples
    if sign > 0:
        spec = np.fft.ifft(buf) * size
    else:
        spec = np.fft.fft(buf)
    j = np.arange(-size // 2, size // 2)
    vals = xi.h * np.exp(sign * 2j * np.pi * j * xi.start_index / size) * spec[j % size]
    out_exp = size.bit_length() - 1 - xi.spacing_exp
    return GridFunction(out_exp, -size // 2, vals, "smooth")


# -- the phase-twisted correlation and its intertwining check ------------------------


def twisted_correlation(f, d: DyadicRational | int, c: PowerOfTwo,
                        xi: GridFunction) -> GridFunction:
    """The function t -> e(t d / c) * integral e(s d) fcheck(s) xi(t + s c) ds.

    The integral is truncated to the support of fcheck and evaluated as a
    Riemann sum whose nodes land exactly on a refinement of xi's grid.
    """
    d = as_dyadic(d)
    e = c.exponent
    g = xi.spacing_exp
    gs = g + max(0, e)            # quadrature grid for s
    lookup = xi.to_grid(g + max(0, -e))
    stride = 1 << (lookup.spacing_exp - g)
    slo, shi = f.fcheck_support()
    delta = 2.0 ** (-gs)
    m_lo, m_hi = math.ceil(slo / delta), math.floor(shi / delta)
    if m_hi < m_lo or lookup.is_zero():
        return GridFunction(g, 0, [], "smooth")
    s_vals = np.arange(m_lo, m_hi + 1) * delta
    weights = delta * np.asarray(f.fcheck_values(s_vals), dtype=complex) \
        * np.exp(2j * np.pi * float(d) * s_vals)

    src_lo, src_hi = lookup.start_index, lookup.start_index + len(lookup) - 1
    k_lo = math.ceil((src_lo - m_hi) / stride)
    k_hi = math.floor((src_hi - m_lo) / stride)
    out = np.zeros(k_hi - k_lo + 1, dtype=complex)
    for mi, m in enumerate(range(m_lo, m_hi + 1)):
        w = weights[mi]
        if abs(w) < _TAIL_CUTOFF:
            continue
        # positions k*stride + m for k in [k_lo, k_hi], clipped to the source
        k0 = max(k_lo, math.ceil((src_lo - m) / stride))
        k1 = min(k_hi, math.floor((src_hi - m) / stride))
        if k1 < k0:
            continue
        pos = k0 * stride + m - lookup.start_index
        out[k0 - k_lo:k1 - k_lo + 1] += w * lookup.samples[pos:pos + (k1 - k0) * stride + 1:stride]
    t = (k_lo + np.arange(len(out))) * 2.0 ** (-g)
    out *= np.exp(2j * np.pi * t * float(d) * 2.0 ** (-e))
    return GridFunction(g, k_lo, out, "smooth")


def intertwining_residual(f, d: DyadicRational | int, c: PowerOfTwo,
                          xi: GridFunction) -> float:
    """Relative discrepancy between the two transport routes of xi.

    Compares D_c* applied to the twisted correlation with the conjugation
    of M_f T_d D_c by the Fourier transform.
    """
    lhs = dilate(twisted_correlation(f, d, c, xi), c.inverse())
    rhs = fourier(rep_apply(f, d, c, fourier_inv(xi)))
    return norm(lhs - rhs) / norm(xi)


# -- closed-form symbols ----------------------------------------------------------


class GaussianSymbol:
    """exp(-pi ((x - center)/width)^2) * e(modulation * x).

    The inverse transform is again Gaussian:
    fcheck(s) = width * exp(-pi width^2 (s - modulation)^2) * e(-(s - modulation) center).
    """

    kind = "gaussian"

    def __init__(self, center: float = 0.0, width: float = 1.0, modulation=0):
        if width <= 0:
            raise ValueError("width must be positive")
        self.center = float(center)
        self.width = float(width)
        self.modulation = float(as_dyadic(modulation)) if not isinstance(modulation, float) \
            else modulation

    def f_values(self, x):
        x = np.asarray(x, dtype=float)
        return np.exp(-np.pi * ((x - self.center) / self.width) ** 2) \
            * np.exp(2j * np.pi * self.modulation * x)

    def fcheck_values(self, s):
        s = np.asarray(s, dtype=float)
        rel = s - self.modulation
        return self.width * np.exp(-np.pi * self.width ** 2 * rel ** 2) \
            * np.exp(-2j * np.pi * rel * self.center)

    def fcheck_support(self):
        radius = math.sqrt(-math.log(_TAIL_CUTOFF) / math.pi) / self.width
        return self.modulation - radius, self.modulation + radius

    def sup_estimate(self):
        return 1.0

    def params(self):
        return {"center": self.center, "width": self.width, "modulation": self.modulation}


class BumpSymbol:
    """Symbol whose inverse transform is a raised-cosine bump.

    fcheck is the Hann window of the given radius around center; f is its
    transform, a combination of three sinc terms times a phase.
    """

    kind = "bump"

    def __init__(self, center: float = 0.0, radius: float = 1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.center = float(center)
        self.radius = float(radius)

    def f_values(self, x):
        x = np.asarray(x, dtype=float)
        length = 2 * self.radius
        main = np.sinc(length * x)
        side = 0.5 * (np.sinc(length * x - 1) + np.sinc(length * x + 1))
        return (length / 2) * (main + side) * np.exp(2j * np.pi * self.center * x)

    def fcheck_values(self, s):
        s = np.asarray(s, dtype=float)
        rel = (s - self.center) / (2 * self.radius)
        inside = np.abs(rel) <= 0.5
        return np.where(inside, np.cos(np.pi * rel) ** 2, 0.0).astype(complex)

    def fcheck_support(self):
        return self.center - self.radius, self.center + self.radius

    def sup_estimate(self):
        return self.radius

    def params(self):
        return {"center": self.center, "radius": self.radius}


class TabulatedFourierPair:
    """A symbol given by samples of f and of its inverse transform.

    The pair must pass a round-trip check: the Fourier transform of the
    tabulated fcheck has to reproduce the tabulated f within check_tol.
    """

    kind = "tabulated"

    def __init__(self, f_grid: GridFunction, fcheck_grid: GridFunction,
                 check_tol: float = 1e-6):
        back = fourier(fcheck_grid)
        scale = max(norm(f_grid), 1e-30)
        err = norm(back - f_grid) / scale
        if err > check_tol:
            raise ValueError(f"tabulated pair fails round-trip check: {err:.2e}")
        self.f_grid = f_grid
        self.fcheck_grid = fcheck_grid

    def f_values(self, x):
        return grid_sample(self.f_grid, x)

    def fcheck_values(self, s):
        return grid_sample(self.fcheck_grid, s)

    def fcheck_support(self):
        return self.fcheck_grid.support()

    def sup_estimate(self):
        return float(np.max(np.abs(self.f_grid.samples))) if not self.f_grid.is_zero() else 0.0

    def params(self):
        return {"support": self.fcheck_grid.support()}


# -- CSV interchange -----------------------------------------------------------------


def export_csv(xi: GridFunction, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "re", "im"])
        for x, v in zip(xi.points(), xi.samples):
            writer.writerow([repr(float(x)), repr(float(v.real)), repr(float(v.imag))])


def import_csv(path, style: str = "smooth") -> GridFunction:
    xs, vals = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if [c.strip() for c in header[:3]] != ["x", "re", "im"]:
            raise ValueError("expected header x,re,im")
        for row in reader:
            if not row:
                continue
            xs.append(float(row[0]))
            vals.append(complex(float(row[1]), float(row[2])))
    if not xs:
        return GridFunction(0, 0, [], style)
    diffs = sorted({round(b - a, 15) for a, b in zip(xs, xs[1:])})
    if not diffs:
        h = 1.0
    else:
        h = diffs[0]
    mantissa, exp = math.frexp(h)
    if mantissa != 0.5:
        raise ValueError(f"spacing {h} is not a power of two")
    spacing_exp = 1 - exp
    start = round(xs[0] / h)
    length = round(xs[-1] / h) - start + 1
    buf = np.zeros(length, dtype=complex)
    for x, v in zip(xs, vals):
        idx = round(x / h) - start
        if abs(x / h - round(x / h)) > 1e-9:
            raise ValueError(f"sample point {x} is not on the grid")
        buf[idx] = v
    return GridFunction(spacing_exp, start, buf, style)
