import math
import random

import numpy as np
import pytest

from qadic.grid import (
    BumpSymbol,
    GaussianSymbol,
    GridFunction,
    TabulatedFourierPair,
    affine_reindex,
    dilate,
    export_csv,
    fourier,
    fourier_inv,
    import_csv,
    indicator,
    inner,
    intertwining_residual,
    multiply,
    norm,
    rep_apply,
    sample_symbol,
    translate,
    twisted_correlation,
)
from qadic.numbers import PowerOfTwo, dyadic

rng = random.Random(31337)

G = 6
WINDOW = 16.0


def gaussian(center=0.0, width=1.0, modulation=0, g=G):
    sym = GaussianSymbol(center, width, modulation)
    return sample_symbol(sym, g, -WINDOW, WINDOW)


# -- translation and dilation -------------------------------------------------


def test_translate_identity():
    xi = gaussian()
    out = translate(xi, 0)
    assert out.start_index == xi.start_index
    assert np.allclose(out.samples, xi.samples)


def test_translate_integer_reindex():
    xi = indicator(3, 0, 1)
    out = translate(xi, 1)
    assert out.spacing_exp == 3
    assert out.start_index == xi.start_index + 8
    assert norm(out) == pytest.approx(norm(xi))


def test_translate_refines_fine_shift():
    xi = indicator(3, 0, 1)
    out = translate(xi, dyadic(1, 4))
    assert out.spacing_exp == 4
    assert out.start_index == 1
    assert len(out) == 16
    assert norm(out) == pytest.approx(norm(xi), abs=1e-12)


def test_dilate_unitary_and_inverse():
    xi = gaussian(0.25, 0.5)
    two = PowerOfTwo(1)
    assert norm(dilate(xi, two)) == pytest.approx(norm(xi), abs=1e-12)
    back = dilate(dilate(xi, two), PowerOfTwo(-1))
    assert back.spacing_exp == xi.spacing_exp
    assert np.allclose(back.samples, xi.samples)


def test_dilate_translate_commutation():
    # D_a T_b = T_{ab} D_a
    xi = gaussian(-0.5, 0.75)
    a, b = PowerOfTwo(1), dyadic(3, 2)
    lhs = dilate(translate(xi, b), a)
    rhs = translate(dilate(xi, a), dyadic(3, 1))  # ab = 2 * 3/4 = 3/2
    assert norm(lhs - rhs) <= 1e-12 * norm(xi)


def test_dilate_values():
    xi = indicator(G, 0, 1)
    out = rep_apply(GaussianSymbol(0, 1e9), 0, PowerOfTwo(1), xi)  # f ~ 1 on the window
    expected = indicator(G - 1, 0, 1)  # support [0, 2) after x -> x/2
    assert out.support()[1] * 1.0 == pytest.approx(2.0 - out.h, abs=1e-9)
    assert abs(out.samples[0] - 2 ** -0.5) < 1e-9


# -- multiplication and the covariant representation ------------------------------


def test_multiply_by_one_like():
    xi = indicator(G, 0, 1)
    flat = GaussianSymbol(0.0, 1e8)
    out = multiply(flat, xi)
    assert np.allclose(out.samples, xi.samples, atol=1e-9)


def test_multiply_contraction_bound():
    xi = gaussian(0.5, 0.5, 2)
    f = GaussianSymbol(0.25, 0.3, 1)
    assert norm(multiply(f, xi)) <= f.sup_estimate() * norm(xi) + 1e-12


def test_rep_apply_pure_translation():
    xi = gaussian()
    out = rep_apply(GaussianSymbol(0, 1e8), dyadic(1, 1), PowerOfTwo(0), xi)
    ref = translate(xi, dyadic(1, 1))
    assert norm(out - ref) <= 1e-8 * norm(xi)


def test_rep_apply_covariance_law():
    # pi(f,(b,a)) pi(1,(b',a')) = pi(f,(b + a b', a a'))
    f = GaussianSymbol(0.0, 0.8, 1)
    xi = gaussian(0.25, 0.6)
    one_sym = GaussianSymbol(0.0, 1e8)
    b, bp = dyadic(1, 1), dyadic(-3, 2)
    a, ap = PowerOfTwo(1), PowerOfTwo(-1)
    lhs = rep_apply(f, b, a, rep_apply(one_sym, bp, ap, xi))
    combined_b = b + dyadic(-3, 2) * a.as_dyadic()  # b + a b' = 1/2 - 3/2 = -1
    rhs = rep_apply(f, combined_b, a * ap, xi)
    assert norm(lhs - rhs) <= 1e-7 * norm(xi)


# -- Fourier layer ------------------------------------------------------------------


def test_gaussian_self_duality():
    xi = gaussian()
    ft = fourier(xi)
    # closed form under the e(tx) convention
    pts = ft.points()
    mask = np.abs(pts) <= 4.0
    exact = np.exp(-np.pi * pts[mask] ** 2)
    assert np.max(np.abs(ft.samples[mask] - exact)) <= 1e-6


def test_fourier_matches_direct_quadrature():
    # oracle: Riemann sum of the defining integral at a handful of t values
    xi = gaussian(0.5, 0.7, 1)
    ft = fourier(xi)
    x = xi.points()
    for t in (0.0, 0.25, -1.5, 3.0):
        direct = np.sum(np.exp(2j * np.pi * t * x) * xi.samples) * xi.h
        assert abs(ft.value_at(t) - direct) <= 1e-9


def test_plancherel():
    for xi in (gaussian(), gaussian(1.5, 0.4, 3), gaussian(-2.0, 2.0)):
        assert abs(norm(fourier(xi)) - norm(xi)) <= 1e-6 * norm(xi)


def test_fourier_round_trip():
    xi = gaussian(0.5, 0.9, 2)
    back = fourier_inv(fourier(xi))
    assert norm(back - xi) <= 1e-8 * norm(xi)
    forth = fourier(fourier_inv(xi))
    assert norm(forth - xi) <= 1e-8 * norm(xi)


def test_fourier_translation_modulation():
    xi = gaussian(0.0, 0.8)
    b = dyadic(3, 1)
    lhs = fourier(translate(xi, b))
    ft = fourier(xi)
    rhs = GridFunction(ft.spacing_exp, ft.start_index,
                       ft.samples * np.exp(2j * np.pi * float(b) * ft.points()))
    assert norm(lhs - rhs) <= 1e-7 * norm(xi)


# -- inner products --------------------------------------------------------------------


def test_inner_positive_real():
    xi = gaussian(0.5, 0.5, 2)
    val = inner(xi, xi)
    assert val.imag == pytest.approx(0.0, abs=1e-12)
    assert val.real > 0


def test_inner_indicator_exact():
    xi = indicator(4, 0, 1)
    assert inner(xi, xi) == pytest.approx(1.0, abs=1e-12)


def test_inner_disjoint_supports():
    assert inner(indicator(4, 0, 1), indicator(4, 2, 3)) == 0


def test_inner_conjugate_linear_first():
    xi = gaussian(0, 0.5, 1)
    eta = gaussian(0.25, 0.5)
    assert inner(xi.scale(2j), eta) == pytest.approx(-2j * inner(xi, eta))
    assert inner(xi, eta.scale(2j)) == pytest.approx(2j * inner(xi, eta))


def test_inner_mixed_grids():
    a = indicator(4, 0, 1)
    b = indicator(6, dyadic(1, 1), 1)
    assert inner(a, b) == pytest.approx(0.5, abs=1e-12)


def test_affine_reindex_matches_pointwise():
    xi = indicator(4, 0, 1)
    out = affine_reindex(xi, 1, dyadic(1, 2))  # t -> xi(2t + 1/4)
    for k in range(-20, 20):
        t = k * out.h
        expected = 1.0 if 0 <= 2 * t + 0.25 < 1 else 0.0
        assert out.value_at(t).real == pytest.approx(expected, abs=1e-12)


# -- twisted correlation ----------------------------------------------------------------


def test_correlation_identity_case():
    # d = 0, c = 1 reduces to F M_f F^-1
    f = GaussianSymbol(0.0, 0.9)
    xi = gaussian(0.25, 0.8)
    lhs = twisted_correlation(f, 0, PowerOfTwo(0), xi)
    rhs = fourier(rep_apply(f, 0, PowerOfTwo(0), fourier_inv(xi)))
    assert norm(lhs - rhs) <= 1e-6 * norm(xi)


def test_correlation_approximate_identity():
    # a near-delta fcheck leaves xi almost unchanged
    f = BumpSymbol(0.0, 0.05)
    xi = gaussian(0.0, 2.0)
    out = twisted_correlation(f, 0, PowerOfTwo(0), xi)
    mass = 0.05  # integral of the Hann bump of radius r is r
    assert norm(out - xi.scale(mass)) <= 5e-3 * norm(xi) * mass + 5e-3


def test_correlation_linear():
    f = GaussianSymbol(0.0, 0.7, 1)
    xi1, xi2 = gaussian(0.5, 0.5), gaussian(-0.25, 0.75, 2)
    d, c = dyadic(1, 1), PowerOfTwo(1)
    lhs = twisted_correlation(f, d, c, xi1 + xi2)
    rhs = twisted_correlation(f, d, c, xi1) + twisted_correlation(f, d, c, xi2)
    assert norm(lhs - rhs) <= 1e-10 * (norm(xi1) + norm(xi2))


INTERTWINING_CASES = [
    (dyadic(0), PowerOfTwo(0), 1e-5),
    (dyadic(1), PowerOfTwo(0), 1e-5),
    (dyadic(1, 1), PowerOfTwo(1), 1e-4),
    (dyadic(3, 1), PowerOfTwo(-1), 1e-4),
    (dyadic(0), PowerOfTwo(1), 1e-4),
]


@pytest.mark.parametrize("d,c,tol", INTERTWINING_CASES)
def test_intertwining_residuals(d, c, tol):
    f = GaussianSymbol(0.0, 1.0)
    xi = gaussian(0.25, 0.9)
    assert intertwining_residual(f, d, c, xi) <= tol


def test_intertwining_modulated_data():
    f = GaussianSymbol(0.5, 0.8)
    xi = gaussian(0.0, 0.7, 2)
    assert intertwining_residual(f, dyadic(1, 1), PowerOfTwo(-1), xi) <= 1e-4


# -- refinement consistency ----------------------------------------------------------


def test_refinement_consistency():
    f = GaussianSymbol(0.0, 1.0)
    d, c = dyadic(1, 1), PowerOfTwo(1)
    coarse = intertwining_residual(f, d, c, gaussian(0.25, 0.9, g=6))
    fine = intertwining_residual(f, d, c, gaussian(0.25, 0.9, g=7))
    assert fine <= 4 * coarse + 1e-9


def test_step_refine_exact():
    xi = indicator(4, 0, 1)
    fine = xi.to_grid(6)
    assert inner(fine, fine) == pytest.approx(1.0, abs=1e-12)
    assert fine.style == "step"


def test_trig_refine_interpolates():
    xi = gaussian(0.0, 1.0)
    fine = xi.refine()
    # even samples reproduce the original ones
    for k in range(0, len(xi), 37):
        idx = 2 * (xi.start_index + k) - fine.start_index
        if 0 <= idx < len(fine):
            assert abs(fine.samples[idx] - xi.samples[k]) <= 1e-9


# -- symbols ----------------------------------------------------------------------------


def test_bump_symbol_round_trip():
    f = BumpSymbol(0.5, 1.5)
    s = np.linspace(-2, 3, 301)
    vals = f.fcheck_values(s)
    assert np.max(np.abs(vals)) == pytest.approx(1.0, abs=1e-9)
    # transform of the tabulated bump agrees with the closed form
    bump_grid = sample_symbol_fcheck(f, 8)
    ft = fourier(bump_grid)
    pts = ft.points()
    mask = np.abs(pts) <= 4
    assert np.max(np.abs(ft.samples[mask] - f.f_values(pts[mask]))) <= 1e-4


def sample_symbol_fcheck(f, g):
    lo, hi = f.fcheck_support()
    start = math.floor(lo * 2 ** g)
    end = math.ceil(hi * 2 ** g)
    x = (start + np.arange(end - start + 1)) * 2.0 ** -g
    return GridFunction(g, start, f.fcheck_values(x), "smooth")


def test_tabulated_pair_validation():
    f = GaussianSymbol(0.0, 1.0)
    f_grid = sample_symbol(f, 6, -8, 8)
    fcheck_grid = sample_symbol_fcheck(f, 6)
    pair = TabulatedFourierPair(f_grid, fcheck_grid)
    x = np.array([0.0, 0.5, 1.25])
    assert np.allclose(pair.f_values(x), f.f_values(x), atol=1e-5)
    bad = fcheck_grid.scale(2.0)
    with pytest.raises(ValueError):
        TabulatedFourierPair(f_grid, bad)


# -- CSV ----------------------------------------------------------------------------------


def test_csv_round_trip(tmp_path):
    xi = gaussian(0.5, 0.7, 1)
    path = tmp_path / "xi.csv"
    export_csv(xi, path)
    back = import_csv(path)
    assert back.spacing_exp == xi.spacing_exp
    assert back.start_index == xi.start_index
    assert np.allclose(back.samples, xi.samples)


def test_csv_rejects_bad_spacing(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,re,im\n0.0,1.0,0.0\n0.3,1.0,0.0\n")
    with pytest.raises(ValueError):
        import_csv(path)
