import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from periodic_nft.poly import (
    MatrixPolynomial,
    ScaledPolynomial,
    eval_unit_circle_batch,
    evaluate,
    fft_convolve,
    largest_coefficient,
    matmul,
    nfft_evaluate,
    product_tree,
    product_tree_coeffs,
)

rng = np.random.default_rng(1234)


def crandn(*shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def value(p: ScaledPolynomial):
    return np.ldexp(1.0, p.scale_exp) * p.coeffs


def test_binomial_square():
    p = ScaledPolynomial(np.array([1, 1], complex))
    out = fft_convolve(p, p)
    np.testing.assert_allclose(value(out)[:3], [1, 2, 1])


def test_four_linear_factors_pairwise():
    f = [ScaledPolynomial(np.array([-k, 1], complex)) for k in (1, 2, 3, 4)]
    out = fft_convolve(fft_convolve(f[0], f[1]), fft_convolve(f[2], f[3]))
    np.testing.assert_allclose(value(out)[:5], [24, -50, 35, -10, 1], atol=1e-12)


def test_fft_matches_schoolbook_degree_63():
    a, b = crandn(64), crandn(64)
    out = fft_convolve(ScaledPolynomial(a), ScaledPolynomial(b))
    ref = np.convolve(a, b)
    err = np.abs(value(out)[:ref.size] - ref).max() / np.abs(ref).max()
    assert err <= 1e-12


def test_convolve_scale_exponents_add():
    a = ScaledPolynomial(np.array([1, 1], complex), 3)
    b = ScaledPolynomial(np.array([1, -1], complex), -5)
    out = fft_convolve(a, b)
    np.testing.assert_allclose(value(out)[:3], 2.0 ** -2 * np.array([1, 0, -1]))


def test_zero_input_gives_zero():
    out = fft_convolve(ScaledPolynomial(np.zeros(3, complex)), ScaledPolynomial(crandn(4)))
    assert out.is_zero


def test_product_tree_single_factor():
    f = MatrixPolynomial(crandn(2, 2, 3))
    out = product_tree([f])
    assert out.scale_exp == 0
    np.testing.assert_array_equal(out.coeffs, f.coeffs)


def test_product_tree_diagonal_power():
    c = np.zeros((2, 2, 2), complex)
    c[0, 0, 1] = 1
    c[1, 1, 0] = 1
    out = product_tree([MatrixPolynomial(c)] * 8)
    v = np.ldexp(1.0, out.scale_exp) * out.coeffs
    assert out.deg == 8
    assert v[0, 0, 8] == 1 and v[1, 1, 0] == 1
    assert np.count_nonzero(v) == 2


def sequential_product(factors):
    acc = factors[0]
    for f in factors[1:]:
        acc = matmul(f, acc)
        W = int(np.floor(np.log2(largest_coefficient(acc))))
        acc = MatrixPolynomial(np.ldexp(acc.coeffs.real, -W) + 1j * np.ldexp(acc.coeffs.imag, -W),
                               acc.scale_exp + W)
    return acc


@pytest.mark.parametrize("N", [2, 7, 64, 256])
def test_product_tree_matches_sequential(N):
    factors = [MatrixPolynomial(crandn(2, 2, 3) / np.sqrt(2)) for _ in range(N)]
    tree = product_tree(factors)
    seq = sequential_product(factors)
    # compare as values relative to the sequential result
    shift = tree.scale_exp - seq.scale_exp
    t = tree.coeffs * 2.0 ** shift
    s = seq.coeffs[..., :t.shape[-1]]
    assert np.abs(t - s).max() / np.abs(s).max() <= 1e-10


def test_product_tree_exact_bookkeeping_small():
    factors = [crandn(3) for _ in range(8)]
    coeffs, W = product_tree_coeffs(np.array(factors))
    ref = factors[0]
    for f in factors[1:]:
        ref = np.convolve(ref, f)
    np.testing.assert_allclose(np.ldexp(1.0, W) * coeffs, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max())


def test_product_tree_normalized_range_and_degree():
    factors = [MatrixPolynomial(crandn(2, 2, 2)) for _ in range(33)]
    out = product_tree(factors)
    assert 1 <= largest_coefficient(out) < 2
    assert out.deg == 33


def test_eval_basic():
    p = ScaledPolynomial(np.array([1, 2, 1], complex))
    assert evaluate(p, 1) == 4
    assert evaluate(ScaledPolynomial(np.array([1, 2, 1], complex), 2), 1) == 16


@pytest.mark.parametrize("D", [128, 256])
def test_eval_decaying_sum_is_one(D):
    c = np.array([0] + [10.0 ** -d / D for d in range(1, D + 1)], complex)
    assert abs(evaluate(ScaledPolynomial(c), 10) - 1) <= 1e-12


def test_eval_decaying_sum_underflows_at_512():
    # coefficients below the subnormal range vanish, so the sum loses terms
    D = 512
    c = np.array([0] + [10.0 ** -d / D for d in range(1, D + 1)], complex)
    v = evaluate(ScaledPolynomial(c), 10).real
    assert 0.55 < v < 0.7
    # in the transformed coordinate x = 10 u every coefficient is 1/D
    u = ScaledPolynomial(np.array([0] + [1 / D] * D, complex))
    assert abs(evaluate(u, 1.0) - 1) <= 1e-12


def test_eval_reverse_horner_extended_precision():
    c = crandn(201)
    w = 0.5
    mpmath.mp.dps = 40
    ref = mpmath.polyval([mpmath.mpc(x.real, x.imag) for x in c[::-1]], w)
    got = evaluate(ScaledPolynomial(c), w)
    assert abs(got - complex(ref)) / abs(complex(ref)) <= 1e-10


def test_unit_circle_monomial_and_constant():
    D = 40
    c = np.zeros(D + 1, complex)
    c[D] = 1
    theta = rng.uniform(-np.pi, np.pi, 57)
    for method in ("nfft", "direct"):
        np.testing.assert_allclose(eval_unit_circle_batch(ScaledPolynomial(c), theta, method),
                                   np.exp(1j * D * theta), atol=1e-10)
    const = ScaledPolynomial(np.array([2 - 1j]))
    np.testing.assert_allclose(eval_unit_circle_batch(const, theta), 2 - 1j)


def horner(c, w):
    acc = np.zeros_like(w)
    for ck in c[::-1]:
        acc = acc * w + ck
    return acc


def test_unit_circle_equispaced_degree_1023():
    c = crandn(1024)
    theta = -0.3 + np.arange(4096) * (2 * np.pi / 4096)
    ref = horner(c, np.exp(1j * theta))
    for method in ("auto", "czt", "nfft"):
        got = eval_unit_circle_batch(ScaledPolynomial(c), theta, method)
        assert np.abs(got - ref).max() / np.abs(ref).max() <= 1e-9, method


def test_unit_circle_arbitrary_angles():
    c = crandn(1000)
    theta = np.sort(rng.uniform(-7, 7, 3001))
    ref = horner(c, np.exp(1j * theta))
    got = nfft_evaluate(c, theta)
    assert np.abs(got - ref).max() / np.abs(ref).max() <= 1e-9


def test_unit_circle_rejects_off_circle():
    p = ScaledPolynomial(crandn(5))
    with pytest.raises(ValueError):
        eval_unit_circle_batch(p, np.array([1.0 + 1e-9, 1j]))


@settings(max_examples=25, deadline=None)
@given(deg=st.integers(0, 300), npts=st.integers(1, 200), seed=st.integers(0, 2**31))
def test_batch_agrees_with_scalar_eval(deg, npts, seed):
    r = np.random.default_rng(seed)
    c = r.standard_normal(deg + 1) + 1j * r.standard_normal(deg + 1)
    p = ScaledPolynomial(c, int(r.integers(-5, 5)))
    theta = r.uniform(-4, 4, npts)
    got = eval_unit_circle_batch(p, theta)
    ref = np.array([evaluate(p, np.exp(1j * t)) for t in theta])
    scale = np.abs(c).sum() * np.ldexp(1.0, p.scale_exp)
    assert np.abs(got - ref).max() <= 1e-9 * scale
