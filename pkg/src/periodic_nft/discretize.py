"""Rational approximations of the monodromy matrix from sampled signals.

A periodic signal sampled at ``x_n = x0 + n*eps`` (``eps = ell/D``) is turned
into ``M(z) ~ S(w) / d(w)`` with ``w = transform.inverse(z)``, where ``S`` is a
2x2 polynomial matrix and ``d`` a scalar polynomial. Three one-step schemes
are supported: forward Euler, Crank-Nicolson and Ablowitz-Ladik.

The same schemes can also be iterated directly at given spectral parameters
``z`` (:func:`eval_monodromy_direct`), which is O(D) per point and serves as
the reference against which the polynomial route is checked.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .poly import MatrixPolynomial, ScaledPolynomial, evaluate, product_tree_coeffs

__all__ = [
    "Signal",
    "FeasibilityError",
    "Moebius",
    "Exponential",
    "Identity",
    "CoordinateTransform",
    "Scheme",
    "FORWARD_EULER",
    "CRANK_NICOLSON",
    "ABLOWITZ_LADIK",
    "RationalMonodromy",
    "default_transform",
    "factor_sequence",
    "build_monodromy",
    "eval_monodromy_direct",
    "eval_monodromy_with_derivative",
]


class FeasibilityError(ValueError):
    """A discretization cannot be formed for this signal (e.g. AL amplitude bound)."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(message)
        self.index = index


@dataclass(frozen=True)
class Signal:
    """D equidistant samples of one period of q (and optionally r).

    In NSE mode (``r_samples is None``) the second potential is
    ``kappa * conj(q)``; ``kappa = +1`` is focusing, ``-1`` defocusing. In AKNS
    mode ``r_samples`` is used as given and ``kappa`` is ignored.
    """

    q_samples: np.ndarray
    ell: float
    x0: float = 0.0
    kappa: int = 1
    r_samples: Optional[np.ndarray] = None

    def __post_init__(self):
        q = np.asarray(self.q_samples, dtype=np.complex128).ravel()
        object.__setattr__(self, "q_samples", q)
        if q.size < 2:
            raise ValueError(f"need at least 2 samples, got {q.size}")
        if not np.all(np.isfinite(q)):
            raise ValueError("q_samples contains non-finite values")
        if not self.ell > 0:
            raise ValueError(f"period ell must be positive, got {self.ell}")
        if self.kappa not in (1, -1):
            raise ValueError(f"kappa must be +1 or -1, got {self.kappa}")
        if self.r_samples is not None:
            r = np.asarray(self.r_samples, dtype=np.complex128).ravel()
            if r.size != q.size:
                raise ValueError(
                    f"r_samples has {r.size} entries, q_samples has {q.size}")
            object.__setattr__(self, "r_samples", r)

    @property
    def D(self) -> int:
        return self.q_samples.size

    @property
    def eps(self) -> float:
        return self.ell / self.D

    @property
    def akns(self) -> bool:
        return self.r_samples is not None

    @property
    def r(self) -> np.ndarray:
        if self.r_samples is not None:
            return self.r_samples
        return self.kappa * np.conj(self.q_samples)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.eps * np.arange(self.D)

    def scaled(self, factor: complex) -> "Signal":
        r = None if self.r_samples is None else factor * self.r_samples
        return Signal(factor * self.q_samples, self.ell, self.x0, self.kappa, r)


# ----------------------------------------------------------------------------
# coordinate transforms z = phi(w)
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Moebius:
    """``z = (a w + b) / (c w + d)``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) == 0:
            raise ValueError("Moebius transform needs ad - bc != 0")

    def forward(self, w):
        w = np.asarray(w, dtype=complex)
        return (self.a * w + self.b) / (self.c * w + self.d)

    def inverse(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.d * z - self.b) / (self.a - self.c * z)

    @property
    def phi1(self) -> np.ndarray:
        return np.array([self.b, self.a], dtype=complex)

    @property
    def phi2(self) -> np.ndarray:
        return np.array([self.d, self.c], dtype=complex)


@dataclass(frozen=True)
class Exponential:
    """``w = exp(-1j*eps*z)``, i.e. ``z = 1j*log(w)/eps`` (principal branch)."""

    eps: float

    def forward(self, w):
        return 1j * np.log(np.asarray(w, dtype=complex)) / self.eps

    def inverse(self, z):
        return np.exp(-1j * self.eps * np.asarray(z, dtype=complex))


@dataclass(frozen=True)
class Identity:
    def forward(self, w):
        return np.asarray(w, dtype=complex)

    def inverse(self, z):
        return np.asarray(z, dtype=complex)

    @property
    def phi1(self) -> np.ndarray:
        return np.array([0, 1], dtype=complex)

    @property
    def phi2(self) -> np.ndarray:
        return np.array([1, 0], dtype=complex)


CoordinateTransform = Union[Moebius, Exponential, Identity]


@dataclass(frozen=True)
class Scheme:
    name: str
    normalized: bool = True

    def __post_init__(self):
        if self.name not in ("euler", "cn", "al"):
            raise ValueError(f"unknown scheme {self.name!r}")


FORWARD_EULER = Scheme("euler")
CRANK_NICOLSON = Scheme("cn")
ABLOWITZ_LADIK = Scheme("al")


def default_transform(scheme: Scheme, eps: float) -> CoordinateTransform:
    """Transform mapping the real z-axis onto the unit circle for ``scheme``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    if scheme.name == "al":
        return Exponential(eps)
    M = 1.0 if scheme.name == "euler" else 2.0
    a = -M / eps
    return Moebius(a, -a, 1j, 1j)


# ----------------------------------------------------------------------------
# factors
# ----------------------------------------------------------------------------

def _check_pair(scheme: Scheme, transform) -> None:
    if isinstance(transform, Exponential):
        if scheme.name != "al":
            raise ValueError("the exponential transform only applies to Ablowitz-Ladik")
    elif scheme.name == "al":
        raise ValueError("Ablowitz-Ladik requires the exponential transform")


def _al_alpha(signal: Signal) -> np.ndarray:
    eps = signal.eps
    det = 1.0 + eps ** 2 * signal.q_samples * signal.r
    if signal.akns:
        bad = np.flatnonzero(np.abs(det) == 0)
    else:
        bad = np.flatnonzero(det.real <= 0)
    if bad.size:
        n = int(bad[0])
        raise FeasibilityError(
            f"Ablowitz-Ladik step infeasible at sample {n}: "
            f"1 + kappa*eps^2*|q|^2 = {det[n].real:.6g} <= 0 "
            f"(|q| = {abs(signal.q_samples[n]):.6g}, eps = {eps:.6g})", index=n)
    if signal.akns:
        return np.sqrt(det)
    return np.sqrt(det.real)


def _poly_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)


def _factor_arrays(signal: Signal, scheme: Scheme, transform):
    """Stacked coefficient arrays (D, 2, 2, K+1) and (D, K'+1)."""
    _check_pair(scheme, transform)
    D, eps = signal.D, signal.eps
    q, r = signal.q_samples, signal.r
    if scheme.name == "al":
        alpha = _al_alpha(signal)
        if not scheme.normalized:
            alpha = np.ones(D)
        S = np.zeros((D, 2, 2, 3), dtype=complex)
        S[:, 0, 0, 2] = 1.0 / alpha
        S[:, 0, 1, 1] = -eps * q / alpha
        S[:, 1, 0, 1] = eps * r / alpha
        S[:, 1, 1, 0] = 1.0 / alpha
        d = np.zeros((D, 2), dtype=complex)
        d[:, 1] = 1.0
        return S, d
    phi1, phi2 = transform.phi1, transform.phi2
    if scheme.name == "euler":
        S = np.zeros((D, 2, 2, 2), dtype=complex)
        S[:, 0, 0] = phi2 - 1j * eps * phi1
        S[:, 0, 1] = -eps * q[:, None] * phi2
        S[:, 1, 0] = eps * r[:, None] * phi2
        S[:, 1, 1] = phi2 + 1j * eps * phi1
        d = np.broadcast_to(phi2, (D, 2)).copy()
        return S, d
    # Crank-Nicolson: factor n is A_n @ B_n with A_n built from sample n+1 (mod D)
    h = eps / 2
    qn, rn = np.roll(q, -1), np.roll(r, -1)
    B = np.zeros((D, 2, 2, 2), dtype=complex)
    B[:, 0, 0] = phi2 - 1j * h * phi1
    B[:, 0, 1] = -h * q[:, None] * phi2
    B[:, 1, 0] = h * r[:, None] * phi2
    B[:, 1, 1] = phi2 + 1j * h * phi1
    A = B.copy()
    A[:, 0, 1] = -h * qn[:, None] * phi2
    A[:, 1, 0] = h * rn[:, None] * phi2
    S = np.zeros((D, 2, 2, 3), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for n1 in range(2):
                    for n2 in range(2):
                        S[:, i, j, n1 + n2] += A[:, i, k, n1] * B[:, k, j, n2]
    p22 = _poly_mul(phi2, phi2)
    p11 = _poly_mul(phi1, phi1)
    d = p22[None, :] + h * h * (p11[None, :] + (qn * rn)[:, None] * p22[None, :])
    return S, d


def factor_sequence(signal: Signal, scheme: Scheme, transform):
    """Per-sample polynomial factors whose products give S(w) and d(w).

    Returns
    -------
    matrix_factors : list of MatrixPolynomial
        ``S(w) = matrix_factors[D-1] @ ... @ matrix_factors[0]``.
    denom_factors : list of ScaledPolynomial
        ``d(w) = prod(denom_factors)``.
    """
    S, d = _factor_arrays(signal, scheme, transform)
    return ([MatrixPolynomial(s) for s in S], [ScaledPolynomial(x) for x in d])


def _quadratic_roots(c: np.ndarray) -> np.ndarray:
    """Roots of c0 + c1 w + c2 w^2 per row, avoiding cancellation."""
    out = []
    for c0, c1, c2 in c:
        if c2 == 0:
            if c1 != 0:
                out.append(-c0 / c1)
            continue
        disc = np.sqrt(c1 * c1 - 4 * c2 * c0)
        s = -c1 - disc if (np.conj(c1) * disc).real >= 0 else -c1 + disc
        if s == 0:
            out.extend([0j, 0j])
            continue
        out.extend([s / (2 * c2), 2 * c0 / s])
    return np.array(out, dtype=complex)


@dataclass(frozen=True)
class RationalMonodromy:
    """``M(z) = 2**(S.scale_exp - d.scale_exp) * S(w) / d(w)``, ``w = transform.inverse(z)``."""

    S: MatrixPolynomial
    d: ScaledPolynomial
    transform: CoordinateTransform
    scheme: Scheme
    denom_roots: np.ndarray = field(repr=False)
    D: int = 0

    @property
    def W_S(self) -> int:
        return self.S.scale_exp

    @property
    def W_d(self) -> int:
        return self.d.scale_exp

    def __call__(self, z) -> np.ndarray:
        """Evaluate the 2x2 matrix at a single spectral parameter z."""
        w = complex(self.transform.inverse(z))
        den = evaluate(self.d, w)
        M = np.empty((2, 2), dtype=complex)
        for i in range(2):
            for j in range(2):
                M[i, j] = evaluate(self.S.entry(i, j), w) / den
        return M

    def discriminant(self, z) -> complex:
        M = self(z)
        return 0.5 * (M[0, 0] + M[1, 1])


def build_monodromy(signal: Signal, scheme: Scheme = ABLOWITZ_LADIK,
                    transform=None) -> RationalMonodromy:
    """Monomial expansions of S(w) and d(w) via the normalized product tree."""
    if transform is None:
        transform = default_transform(scheme, signal.eps)
    S_f, d_f = _factor_arrays(signal, scheme, transform)
    S, W_S = product_tree_coeffs(S_f)
    D = signal.D
    if scheme.name == "al":
        # d = w^D exactly; a numerical product would leave FFT noise below w^D
        d = np.zeros(D + 1, complex)
        d[D] = 1.0
        W_d = 0
        roots = np.zeros(D, complex)
    else:
        d, W_d = product_tree_coeffs(d_f)
        if scheme.name == "euler":
            if isinstance(transform, Identity) or transform.c == 0:
                roots = np.zeros(0, complex)
            else:
                roots = np.full(D, -transform.d / transform.c, dtype=complex)
        else:
            roots = _quadratic_roots(d_f)
    return RationalMonodromy(MatrixPolynomial(S, W_S), ScaledPolynomial(d, W_d),
                             transform, scheme, roots, D)


# ----------------------------------------------------------------------------
# direct iteration
# ----------------------------------------------------------------------------

def _step_matrices(signal: Signal, scheme: Scheme, z: np.ndarray, n: int, alpha=None):
    """Entries (f11, f12, f21, f22) of the one-step map at sample n, vectorized in z."""
    eps = signal.eps
    q, r = signal.q_samples, signal.r
    if scheme.name == "euler":
        return (1 - 1j * eps * z, -eps * q[n], eps * r[n], 1 + 1j * eps * z)
    if scheme.name == "al":
        a = alpha[n]
        return (np.exp(-1j * eps * z) / a, -eps * q[n] / a, eps * r[n] / a,
                np.exp(1j * eps * z) / a)
    h = eps / 2
    m = (n + 1) % signal.D
    # (I - h P(x_{n+1}))^{-1} = adj / det, adj = I + h P(x_{n+1})
    det = 1 + (h * z) ** 2 + h * h * q[m] * r[m]
    if np.any(det == 0):
        raise ZeroDivisionError(f"Crank-Nicolson step singular at sample {n}")
    a11, a12, a21, a22 = 1 - 1j * h * z, -h * q[m], h * r[m], 1 + 1j * h * z
    b11, b12, b21, b22 = 1 - 1j * h * z, -h * q[n], h * r[n], 1 + 1j * h * z
    return ((a11 * b11 + a12 * b21) / det, (a11 * b12 + a12 * b22) / det,
            (a21 * b11 + a22 * b21) / det, (a21 * b12 + a22 * b22) / det)


def eval_monodromy_direct(signal: Signal, scheme: Scheme, z) -> np.ndarray:
    """Iterate the scheme from V[0] = I and return V[D].

    ``z`` may be a scalar (returns a 2x2 array) or an array (returns shape
    ``z.shape + (2, 2)``). Cost O(D) per point.
    """
    z_arr = np.asarray(z, dtype=complex)
    zz = z_arr.ravel()
    alpha = None
    if scheme.name == "al":
        alpha = _al_alpha(signal)
        if not scheme.normalized:
            alpha = np.ones(signal.D)
    v11 = np.ones_like(zz)
    v12 = np.zeros_like(zz)
    v21 = np.zeros_like(zz)
    v22 = np.ones_like(zz)
    for n in range(signal.D):
        f11, f12, f21, f22 = _step_matrices(signal, scheme, zz, n, alpha)
        v11, v12, v21, v22 = (f11 * v11 + f12 * v21, f11 * v12 + f12 * v22,
                              f21 * v11 + f22 * v21, f21 * v12 + f22 * v22)
    out = np.stack([np.stack([v11, v12], -1), np.stack([v21, v22], -1)], -2)
    return out.reshape(z_arr.shape + (2, 2))


def eval_monodromy_with_derivative(signal: Signal, z):
    """Forward-Euler monodromy matrix and its z-derivative.

    Differentiating ``V[n+1] = (I + eps P_z(x_n)) V[n]`` gives
    ``V'[n+1] = (I + eps P_z(x_n)) V'[n] + eps diag(-1j, 1j) V[n]``
    with ``V'[0] = 0``.
    """
    z = complex(z)
    eps = signal.eps
    q, r = signal.q_samples, signal.r
    V = np.eye(2, dtype=complex)
    dV = np.zeros((2, 2), dtype=complex)
    dP = np.diag([-1j * eps, 1j * eps])
    for n in range(signal.D):
        F = np.array([[1 - 1j * eps * z, -eps * q[n]],
                      [eps * r[n], 1 + 1j * eps * z]])
        dV = F @ dV + dP @ V
        V = F @ V
    return V, dV
