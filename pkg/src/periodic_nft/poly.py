"""Scaled complex polynomials, FFT products and evaluation.

A :class:`ScaledPolynomial` stores ``2**scale_exp * sum(coeffs[k] * w**k)``.
The power-of-two exponent lets long products of polynomials be formed
without overflow, since rescaling by a power of two is exact in IEEE 754.

Coefficients are kept in ascending order (``coeffs[k]`` multiplies ``w**k``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.signal

__all__ = [
    "ScaledPolynomial",
    "MatrixPolynomial",
    "largest_coefficient",
    "fft_convolve",
    "matmul",
    "product_tree",
    "product_tree_coeffs",
    "evaluate",
    "eval_unit_circle_batch",
    "nfft_evaluate",
    "SCHOOLBOOK_CUTOFF",
]

SCHOOLBOOK_CUTOFF = 16
UNIT_CIRCLE_TOL = 1e-12


def _as_coeffs(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=np.complex128)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    return arr


def _degree(coeffs: np.ndarray) -> int:
    nz = np.flatnonzero(coeffs.reshape(-1, coeffs.shape[-1]).any(axis=0))
    return int(nz[-1]) if nz.size else 0


def _normalization_exponent(magnitude):
    """floor(log2(m)) computed exactly through frexp; 0 where m == 0."""
    magnitude = np.asarray(magnitude, dtype=float)
    _, e = np.frexp(magnitude)
    return np.where(magnitude > 0, e - 1, 0).astype(np.int64)


def _scale_pow2(coeffs: np.ndarray, exps) -> np.ndarray:
    """Multiply by 2**exps exactly (exps broadcasts against leading axes)."""
    exps = np.asarray(exps, dtype=np.int64)
    exps = exps.reshape(exps.shape + (1,) * (coeffs.ndim - exps.ndim))
    return np.ldexp(coeffs.real, exps) + 1j * np.ldexp(coeffs.imag, exps)


@dataclass(frozen=True)
class ScaledPolynomial:
    """Complex polynomial ``2**scale_exp * sum_k coeffs[k] w**k``."""

    coeffs: np.ndarray
    scale_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        object.__setattr__(self, "scale_exp", int(self.scale_exp))

    @property
    def deg(self) -> int:
        return _degree(self.coeffs)

    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def normalized(self) -> "ScaledPolynomial":
        """Rescale so the largest coefficient magnitude lies in [1, 2)."""
        if self.is_zero():
            return ScaledPolynomial(np.zeros(1, complex), 0)
        a = int(_normalization_exponent(np.abs(self.coeffs).max()))
        return ScaledPolynomial(_scale_pow2(self.coeffs, -a), self.scale_exp + a)

    def trimmed(self) -> "ScaledPolynomial":
        return ScaledPolynomial(self.coeffs[: self.deg + 1], self.scale_exp)

    def to_numpy(self) -> np.ndarray:
        """Unscaled coefficients (may overflow for large ``scale_exp``)."""
        return _scale_pow2(self.coeffs, self.scale_exp)

    def __call__(self, w):
        return evaluate(self, w)


@dataclass(frozen=True)
class MatrixPolynomial:
    """2x2 matrix polynomial; ``coeffs`` has shape (2, 2, n) and one shared exponent."""

    coeffs: np.ndarray
    scale_exp: int = 0

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=np.complex128)
        if arr.ndim == 2:
            arr = arr[..., None]
        if arr.shape[:2] != (2, 2):
            raise ValueError(f"expected shape (2, 2, n), got {arr.shape}")
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "scale_exp", int(self.scale_exp))

    def entry(self, i: int, j: int) -> ScaledPolynomial:
        return ScaledPolynomial(self.coeffs[i, j], self.scale_exp)

    @property
    def deg(self) -> int:
        return _degree(self.coeffs)

    def __call__(self, w):
        return np.array([[evaluate(self.entry(i, j), w) for j in range(2)]
                         for i in range(2)])


Polynomial = Union[ScaledPolynomial, MatrixPolynomial]


def largest_coefficient(p: Polynomial) -> float:
    """Absolute value of the largest coefficient (ignoring ``scale_exp``)."""
    return float(np.abs(p.coeffs).max()) if p.coeffs.size else 0.0


# ----------------------------------------------------------------------------
# products
# ----------------------------------------------------------------------------

def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _convolve_batch(a: np.ndarray, b: np.ndarray, matrix: bool) -> np.ndarray:
    """Batched product along the last axis.

    For matrices (shape (..., 2, 2, n)) the result is the matrix product
    ``a @ b`` of the polynomial matrices.
    """
    la, lb = a.shape[-1], b.shape[-1]
    lc = la + lb - 1
    if la - 1 + lb - 1 < SCHOOLBOOK_CUTOFF:
        out_shape = np.broadcast_shapes(a.shape[:-1], b.shape[:-1]) + (lc,)
        c = np.zeros(out_shape, dtype=np.complex128)
        for k in range(la):
            if matrix:
                c[..., k:k + lb] += np.einsum("...ij,...jkf->...ikf", a[..., k], b)
            else:
                c[..., k:k + lb] += a[..., k:k + 1] * b
        return c
    nfft = _next_pow2(lc)
    fa = np.fft.fft(a, nfft, axis=-1)
    fb = np.fft.fft(b, nfft, axis=-1)
    if matrix:
        fc = np.einsum("...ijf,...jkf->...ikf", fa, fb)
    else:
        fc = fa * fb
    return np.fft.ifft(fc, axis=-1)[..., :lc]


def fft_convolve(a: ScaledPolynomial, b: ScaledPolynomial) -> ScaledPolynomial:
    """Product of two scaled polynomials; exponents add, no renormalization."""
    ca, cb = a.trimmed().coeffs, b.trimmed().coeffs
    if a.is_zero() or b.is_zero():
        return ScaledPolynomial(np.zeros(1, complex), 0)
    return ScaledPolynomial(_convolve_batch(ca, cb, matrix=False),
                            a.scale_exp + b.scale_exp)


def matmul(a: MatrixPolynomial, b: MatrixPolynomial) -> MatrixPolynomial:
    """Matrix polynomial product ``a @ b``."""
    return MatrixPolynomial(_convolve_batch(a.coeffs, b.coeffs, matrix=True),
                            a.scale_exp + b.scale_exp)


def product_tree_coeffs(factors: np.ndarray, degrees=None):
    """Normalized tree product of stacked coefficient arrays.

    Parameters
    ----------
    factors : ndarray
        Shape (N, n) for scalar factors or (N, 2, 2, n) for matrix factors.
        ``factors[0]`` is applied first, so the result is
        ``factors[N-1] @ ... @ factors[0]``.
    degrees : array_like of int, optional
        Degree bound per factor; defaults to ``n - 1`` for every factor.

    Returns
    -------
    coeffs : ndarray
        Coefficients of the product, trimmed to the total degree bound.
    W : int
        Accumulated power-of-two exponent; the exact product is
        ``2**W * coeffs``.
    """
    p = np.array(factors, dtype=np.complex128)
    if p.ndim not in (2, 4):
        raise ValueError("factors must have shape (N, n) or (N, 2, 2, n)")
    if p.shape[0] == 0:
        raise ValueError("product_tree needs at least one factor")
    matrix = p.ndim == 4
    if degrees is None:
        deg = np.full(p.shape[0], p.shape[-1] - 1, dtype=np.int64)
    else:
        deg = np.asarray(degrees, dtype=np.int64).copy()
    total = int(deg.sum())
    W = 0
    while p.shape[0] >= 2:
        n = p.shape[0]
        odd = n % 2
        first, second = p[0:n - odd:2], p[1:n - odd:2]
        if matrix:
            prod = _convolve_batch(second, first, matrix=True)
        else:
            prod = _convolve_batch(first, second, matrix=False)
        new_deg = deg[0:n - odd:2] + deg[1:n - odd:2]
        # FFT round-off above the true degree would become spurious roots
        mask = np.arange(prod.shape[-1]) > new_deg[:, None]
        if matrix:
            prod[np.broadcast_to(mask[:, None, None, :], prod.shape)] = 0
            mags = np.abs(prod).max(axis=(1, 2, 3))
        else:
            prod[mask] = 0
            mags = np.abs(prod).max(axis=1)
        a = _normalization_exponent(mags)
        prod = _scale_pow2(prod, -a)
        W += int(a.sum())
        if odd:
            last = p[-1:]
            pad = prod.shape[-1] - last.shape[-1]
            last = np.concatenate(
                [last, np.zeros(last.shape[:-1] + (pad,), complex)], axis=-1)
            prod = np.concatenate([prod, last], axis=0)
            new_deg = np.append(new_deg, deg[-1])
        p, deg = prod, new_deg
    return p[0][..., :total + 1], W


def product_tree(factors: Sequence[Polynomial]) -> Polynomial:
    """Product of many low-degree polynomials by pairwise FFT multiplication.

    Matrix factors multiply right to left, ``factors[-1] @ ... @ factors[0]``.
    After every pairwise product the coefficients are divided by
    ``2**floor(log2(max|coef|))`` and the exponent is accumulated, so the
    result's largest coefficient lies in [1, 2) (unless N == 1, where the
    single factor is returned unchanged). An all-zero intermediate product is
    left unnormalized.
    """
    factors = list(factors)
    if not factors:
        raise ValueError("product_tree needs at least one factor")
    matrix = isinstance(factors[0], MatrixPolynomial)
    if len(factors) == 1:
        f = factors[0]
        return type(f)(f.coeffs.copy(), f.scale_exp)
    n = max(f.coeffs.shape[-1] for f in factors)
    degs = [f.deg for f in factors]
    stack = np.zeros((len(factors),) + factors[0].coeffs.shape[:-1] + (n,), complex)
    for k, f in enumerate(factors):
        stack[k, ..., :f.coeffs.shape[-1]] = f.coeffs
    coeffs, W = product_tree_coeffs(stack, degs)
    W += sum(f.scale_exp for f in factors)
    return (MatrixPolynomial if matrix else ScaledPolynomial)(coeffs, W)


# ----------------------------------------------------------------------------
# evaluation
# ----------------------------------------------------------------------------

def evaluate(p: ScaledPolynomial, w: complex) -> complex:
    """Evaluate at a single point.

    Horner's rule is used for ``|w| >= 1``; for ``|w| < 1`` the reversed
    polynomial is evaluated at ``1/w`` and multiplied by ``w**deg``.
    """
    c = p.coeffs
    w = complex(w)
    if abs(w) >= 1:
        acc = 0j
        for ck in c[::-1]:
            acc = acc * w + ck
    else:
        n = len(c) - 1
        if w == 0:
            acc = complex(c[0])
        else:
            u = 1.0 / w
            acc = 0j
            for ck in c:
                acc = acc * u + ck
            acc *= w ** n
    return complex(np.ldexp(acc.real, p.scale_exp) + 1j * np.ldexp(acc.imag, p.scale_exp))


def _horner_vec(c: np.ndarray, w: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(w, dtype=complex)
    for ck in c[::-1]:
        acc = acc * w + ck
    return acc


def _is_equispaced(theta: np.ndarray) -> bool:
    if theta.size < 3:
        return True
    step = (theta[-1] - theta[0]) / (theta.size - 1)
    ideal = theta[0] + step * np.arange(theta.size)
    return bool(np.max(np.abs(theta - ideal)) <= 1e-13 * max(1.0, np.max(np.abs(theta))))


def _kb_window(x, n, m, sigma):
    """Kaiser-Bessel window in the period-one variable x, support |x| <= m/n."""
    b = np.pi * (2.0 - 1.0 / sigma)
    arg = m * m - (n * x) ** 2
    out = np.zeros_like(x)
    inside = arg > 0
    r = np.sqrt(arg[inside])
    out[inside] = np.sinh(b * r) / (np.pi * r)
    out[arg == 0] = b / np.pi
    return out


def _kb_hat(k, n, m, sigma):
    b = np.pi * (2.0 - 1.0 / sigma)
    return np.i0(m * np.sqrt(b * b - (2 * np.pi * k / n) ** 2)) / n


def nfft_evaluate(c: np.ndarray, theta: np.ndarray, sigma: int = 2, m: int = 8) -> np.ndarray:
    """Approximate ``sum_k c[k] exp(1j*k*theta_j)`` at arbitrary angles.

    Standard gridding NFFT: deconvolve by the window's Fourier coefficients,
    inverse FFT onto an oversampled grid of size ``sigma * N``, then sum the
    ``2m + 1`` nearest grid values weighted by a Kaiser-Bessel window.
    """
    c = np.asarray(c, dtype=complex)
    theta = np.asarray(theta, dtype=float)
    N = c.size
    h = N // 2
    Nc = 2 * (h + 1)  # centered frequencies -h .. N-1-h fit in [-Nc/2, Nc/2)
    n = sigma * Nc
    k = np.arange(-h, N - h)
    g_hat = np.zeros(n, dtype=complex)
    g_hat[k % n] = c / _kb_hat(k, n, m, sigma)
    g = np.fft.ifft(g_hat)  # g_l = (1/n) sum_k g_hat_k e^{2 pi i k l / n}
    x = theta / (2 * np.pi)
    x = x - np.floor(x)
    base = np.ceil(n * x - m).astype(np.int64)
    offsets = np.arange(2 * m + 1)
    idx = base[:, None] + offsets[None, :]
    dist = x[:, None] - idx / n
    weights = _kb_window(dist, n, m, sigma)
    vals = np.sum(g[idx % n] * weights, axis=1)
    return vals * np.exp(1j * h * theta)


def _czt_evaluate(c: np.ndarray, theta0: float, dtheta: float, count: int) -> np.ndarray:
    # X_k = sum_n c_n (A W^{-k})^{-n} with A = e^{-i theta0}, W = e^{i dtheta}
    return scipy.signal.czt(c, m=count, w=np.exp(1j * dtheta), a=np.exp(-1j * theta0))


def eval_unit_circle_batch(p: ScaledPolynomial, angles, method: str = "auto") -> np.ndarray:
    """Evaluate ``p(exp(1j*theta))`` for many angles at once.

    Parameters
    ----------
    p : ScaledPolynomial
    angles : array_like
        Real angles in radians, or complex points on the unit circle (points
        further than 1e-12 from the circle are rejected).
    method : {"auto", "czt", "nfft", "direct"}
        ``auto`` uses the chirp-z transform when the angles are equispaced
        and the NFFT otherwise; ``direct`` is vectorized Horner, O(M * deg).
    """
    arr = np.asarray(angles)
    if np.iscomplexobj(arr):
        dev = np.abs(np.abs(arr) - 1.0)
        if arr.size and dev.max() > UNIT_CIRCLE_TOL:
            raise ValueError(
                f"point off the unit circle by {dev.max():.3g} (> {UNIT_CIRCLE_TOL})")
        theta = np.angle(arr)
    else:
        theta = arr.astype(float)
    shape = theta.shape
    theta = theta.ravel()
    c = p.trimmed().coeffs
    if theta.size == 0:
        return np.zeros(shape, complex)
    if method == "auto":
        method = "czt" if theta.size >= 2 and _is_equispaced(theta) else "nfft"
    if c.size <= 32 and method != "czt":
        method = "direct"
    if method == "direct":
        vals = _horner_vec(c, np.exp(1j * theta))
    elif method == "czt":
        if not _is_equispaced(theta):
            raise ValueError("czt evaluation requires equispaced angles")
        step = (theta[-1] - theta[0]) / (theta.size - 1) if theta.size > 1 else 0.0
        vals = _czt_evaluate(c, theta[0], step, theta.size)
    elif method == "nfft":
        vals = nfft_evaluate(c, theta)
    else:
        raise ValueError(f"unknown method {method!r}")
    return _scale_pow2(vals, p.scale_exp).reshape(shape)
