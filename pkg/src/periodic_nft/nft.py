"""Numerical nonlinear Fourier transforms for periodic signals.

Two pipelines are provided:

* :func:`eigen_nft` forms the numerator polynomials of ``Delta(z) -+ 1``,
  ``M12(z)`` and ``Psi^{+-}(z)`` from the rational monodromy approximation and
  roots them (O(D^2) with the Aberth solver).
* :func:`defocusing_spectra_sampling` exploits that for the defocusing NSE
  all these spectra are real: the discriminant is sampled on a real grid,
  sign changes are bracketed and refined by bisection. All evaluations use
  batched unit-circle polynomial evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .discretize import (
    ABLOWITZ_LADIK,
    Exponential,
    RationalMonodromy,
    Scheme,
    Signal,
    build_monodromy,
    default_transform,
    eval_monodromy_direct,
)
from .poly import ScaledPolynomial, eval_unit_circle_batch
from .rootfind import RootSet, cancel_roots, cluster_points, newton_refine, poly_roots, sign_change_bisect

__all__ = [
    "DefocusingOnlyError",
    "SpectrumResult",
    "SpectrumFilter",
    "main_spectrum_eigen",
    "aux_spectrum_ki",
    "aux_spectrum_ma",
    "aux_spectrum_eta",
    "eigen_nft",
    "discriminant_on_grid",
    "psi_on_grid",
    "defocusing_spectra_sampling",
    "newton_search",
    "filter_spectrum",
    "spectrum_error",
    "FloquetDiagram",
    "floquet_diagram",
    "clip_floquet",
    "count_band_crossings",
]


class DefocusingOnlyError(ValueError):
    """Raised when a real-axis method is applied to a non-defocusing signal."""


@dataclass
class SpectrumResult:
    main: np.ndarray
    aux_ki: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    aux_ma_rho: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    aux_ma_xi: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    main_multiplicity: Optional[np.ndarray] = None
    aux_eta: np.ndarray = field(default_factory=lambda: np.zeros(0, complex))
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.main = np.asarray(self.main).ravel()
        if self.main_multiplicity is None:
            self.main_multiplicity = np.ones(self.main.size, dtype=int)


@dataclass(frozen=True)
class SpectrumFilter:
    """A-priori knowledge used to prune numerical spectra.

    box : (lower_left, upper_right) complex corners, or None for no box.
    dedup_tol : points closer than this are merged (0 disables merging).
    drop_double_roots : remove merged points of multiplicity >= 2.
    """

    box: Optional[Tuple[complex, complex]] = None
    dedup_tol: float = 0.0
    drop_double_roots: bool = False

    def __post_init__(self):
        if self.box is not None:
            lo, hi = complex(self.box[0]), complex(self.box[1])
            if lo.real > hi.real or lo.imag > hi.imag:
                raise ValueError("box corners must be (lower-left, upper-right)")
            object.__setattr__(self, "box", (lo, hi))
        if self.drop_double_roots and self.dedup_tol <= 0:
            raise ValueError("drop_double_roots needs a positive dedup_tol")


def _in_rect(points: np.ndarray, rect) -> np.ndarray:
    lo, hi = complex(rect[0]), complex(rect[1])
    x0, x1 = sorted((lo.real, hi.real))
    y0, y1 = sorted((lo.imag, hi.imag))
    return ((points.real >= x0) & (points.real <= x1)
            & (points.imag >= y0) & (points.imag <= y1))


def filter_spectrum(points, spectrum_filter: Optional[SpectrumFilter] = None,
                    return_counts: bool = False):
    """Apply box restriction, merging of near-duplicates and double-root removal."""
    pts = np.asarray(points, dtype=complex).ravel()
    pts = pts[np.isfinite(pts)]
    f = spectrum_filter or SpectrumFilter()
    if f.box is not None:
        pts = pts[_in_rect(pts, f.box)]
    counts = np.ones(pts.size, dtype=int)
    if f.dedup_tol > 0:
        pts, counts = cluster_points(pts, f.dedup_tol)
        if f.drop_double_roots:
            keep = counts < 2
            pts, counts = pts[keep], counts[keep]
    order = np.lexsort((pts.imag, pts.real))
    pts, counts = pts[order], counts[order]
    return (pts, counts) if return_counts else pts


def spectrum_error(truth, numerical, rect) -> float:
    """Two-sided max-min distance between point sets restricted to ``rect``.

    Returns ``inf`` if exactly one restricted set is empty and 0 if both are.
    """
    t = np.asarray(truth, dtype=complex).ravel()
    n = np.asarray(numerical, dtype=complex).ravel()
    t = t[_in_rect(t, rect)]
    n = n[np.isfinite(n)]
    n = n[_in_rect(n, rect)]
    if t.size == 0 and n.size == 0:
        return 0.0
    if t.size == 0 or n.size == 0:
        return float("inf")
    dist = np.abs(t[:, None] - n[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


# ----------------------------------------------------------------------------
# eigenmethod
# ----------------------------------------------------------------------------

def _combine(p: np.ndarray, Wp: int, q: np.ndarray, Wq: int, sign: float) -> np.ndarray:
    """Coefficients proportional to 2**Wp p + sign 2**Wq q, without overflow."""
    n = max(p.size, q.size)
    pp = np.zeros(n, complex)
    qq = np.zeros(n, complex)
    pp[:p.size] = p
    qq[:q.size] = q
    k = Wq - Wp
    if k <= 0:
        return pp + sign * (np.ldexp(qq.real, k) + 1j * np.ldexp(qq.imag, k))
    return (np.ldexp(pp.real, -k) + 1j * np.ldexp(pp.imag, -k)) + sign * qq


def _main_numerators(rm: RationalMonodromy):
    S = rm.S.coeffs
    tr = S[0, 0] + S[1, 1]
    return {sign: _combine(tr, rm.W_S, rm.d.coeffs, rm.W_d + 1, sign) for sign in (1, -1)}


def _psi_numerators(rm: RationalMonodromy, kappa: int):
    S = rm.S.coeffs
    sq_k = 1.0 if kappa == 1 else 1j
    out = {}
    for sign in (1, -1):
        sq_pm = 1.0 if sign == 1 else 1j
        out[sign] = (1j * S[1, 1] - 1j * S[0, 0]
                     - sq_pm * sq_k * (S[1, 0] + sign * kappa * S[0, 1]))
    return out


def _roots_mapped(rm: RationalMonodromy, coeffs: np.ndarray, diag: dict, key: str,
                  tol: float = 1e-12) -> np.ndarray:
    if not np.any(coeffs):
        diag.setdefault("notes", []).append(f"{key}: numerator identically zero")
        diag.setdefault("roots", {})[key] = 0
        return np.zeros(0, complex)
    if np.flatnonzero(coeffs)[-1] == 0:
        return np.zeros(0, complex)
    rs = poly_roots(coeffs, tol=tol)
    survivors = cancel_roots(rs, rm.denom_roots)
    diag.setdefault("roots", {})[key] = len(rs)
    diag.setdefault("cancelled", {})[key] = len(rs) - len(survivors)
    diag.setdefault("max_residual", {})[key] = float(rs.residuals.max()) if len(rs) else 0.0
    diag.setdefault("unconverged", {})[key] = int((~rs.converged).sum())
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.asarray(rm.transform.forward(survivors.roots), dtype=complex)
    return z[np.isfinite(z)]


def main_spectrum_eigen(rm: RationalMonodromy, diagnostics: Optional[dict] = None,
                        tol: float = 1e-12) -> np.ndarray:
    """Roots of both numerators of ``Delta -+ 1`` mapped back to z (unfiltered)."""
    diag = {} if diagnostics is None else diagnostics
    nums = _main_numerators(rm)
    parts = [_roots_mapped(rm, nums[s], diag, f"main{'+' if s > 0 else '-'}", tol)
             for s in (1, -1)]
    return np.concatenate(parts)


def aux_spectrum_ki(rm: RationalMonodromy, diagnostics: Optional[dict] = None,
                    tol: float = 1e-12) -> np.ndarray:
    """Roots of the upper-right monodromy entry, mapped back to z."""
    diag = {} if diagnostics is None else diagnostics
    return _roots_mapped(rm, rm.S.coeffs[0, 1], diag, "aux_ki", tol)


def aux_spectrum_eta(rm: RationalMonodromy, diagnostics: Optional[dict] = None,
                     tol: float = 1e-12) -> np.ndarray:
    """Roots of the lower-left monodromy entry (extra AKNS auxiliary variables)."""
    diag = {} if diagnostics is None else diagnostics
    return _roots_mapped(rm, rm.S.coeffs[1, 0], diag, "aux_eta", tol)


def aux_spectrum_ma(rm: RationalMonodromy, kappa: int, diagnostics: Optional[dict] = None,
                    tol: float = 1e-12):
    """Roots of the Psi^+ and Psi^- numerators: returns (rho, xi)."""
    if kappa not in (1, -1):
        raise ValueError("kappa must be +1 or -1")
    diag = {} if diagnostics is None else diagnostics
    nums = _psi_numerators(rm, kappa)
    rho = _roots_mapped(rm, nums[1], diag, "aux_ma_rho", tol)
    xi = _roots_mapped(rm, nums[-1], diag, "aux_ma_xi", tol)
    return rho, xi


def _drop_near(points: np.ndarray, removed: np.ndarray, tol: float) -> np.ndarray:
    if removed.size == 0 or points.size == 0:
        return points
    d = np.abs(points[:, None] - removed[None, :]).min(axis=1)
    return points[d > tol]


def eigen_nft(signal: Signal, scheme: Scheme = ABLOWITZ_LADIK, transform=None,
              spectrum_filter: Optional[SpectrumFilter] = None, aux: bool = True,
              tol: float = 1e-12) -> SpectrumResult:
    """Full eigenmethod: main spectrum and auxiliary spectra with filtering.

    When double roots are dropped from the main spectrum, auxiliary points
    within ``dedup_tol`` of a dropped point are removed as well, since they
    belong to the same degenerate mode.
    """
    rm = build_monodromy(signal, scheme, transform)
    diag = {"method": "eigen", "scheme": scheme.name, "D": signal.D,
            "W_S": rm.W_S, "W_d": rm.W_d}
    main_raw = main_spectrum_eigen(rm, diag, tol)
    f = spectrum_filter or SpectrumFilter()
    main, counts = filter_spectrum(main_raw, f, return_counts=True)
    dropped = np.zeros(0, complex)
    if f.drop_double_roots:
        kept = SpectrumFilter(f.box, f.dedup_tol, False)
        allpts, allc = filter_spectrum(main_raw, kept, return_counts=True)
        dropped = allpts[allc >= 2]
    res = SpectrumResult(main, main_multiplicity=counts, diagnostics=diag)
    if aux:
        aux_f = SpectrumFilter(f.box, 0.0, False)
        ki = filter_spectrum(aux_spectrum_ki(rm, diag, tol), aux_f)
        res.aux_ki = _drop_near(ki, dropped, f.dedup_tol)
        if signal.akns:
            res.aux_eta = _drop_near(filter_spectrum(aux_spectrum_eta(rm, diag, tol), aux_f),
                                     dropped, f.dedup_tol)
        else:
            rho, xi = aux_spectrum_ma(rm, signal.kappa, diag, tol)
            res.aux_ma_rho = _drop_near(filter_spectrum(rho, aux_f), dropped, f.dedup_tol)
            res.aux_ma_xi = _drop_near(filter_spectrum(xi, aux_f), dropped, f.dedup_tol)
    diag["cancelled_total"] = int(sum(diag.get("cancelled", {}).values()))
    diag["all_converged"] = not any(diag.get("unconverged", {}).values())
    return res


# ----------------------------------------------------------------------------
# sampling method (defocusing)
# ----------------------------------------------------------------------------

def _angles(rm: RationalMonodromy, z: np.ndarray) -> np.ndarray:
    if isinstance(rm.transform, Exponential):
        return -rm.transform.eps * z
    w = rm.transform.inverse(z)
    return np.angle(w)


def _ratio_on_grid(rm: RationalMonodromy, numer: ScaledPolynomial, z, method="auto"):
    z = np.asarray(z, dtype=float)
    theta = _angles(rm, z)
    # divide before applying 2**W: the scales alone can overflow for CN
    num = eval_unit_circle_batch(ScaledPolynomial(numer.coeffs), theta, method)
    den = eval_unit_circle_batch(ScaledPolynomial(rm.d.coeffs), theta, method)
    ratio = num / den
    return np.ldexp(ratio.real, numer.scale_exp - rm.d.scale_exp) \
        + 1j * np.ldexp(ratio.imag, numer.scale_exp - rm.d.scale_exp)


def discriminant_on_grid(rm: RationalMonodromy, z, method: str = "auto") -> np.ndarray:
    """Delta(z) at real points through batched unit-circle evaluation."""
    S = rm.S.coeffs
    tr = ScaledPolynomial(S[0, 0] + S[1, 1], rm.W_S - 1)
    return _ratio_on_grid(rm, tr, z, method)


def psi_on_grid(rm: RationalMonodromy, kappa: int, sign: int, z, method: str = "auto"):
    """Psi^{sign}(z) at real points through batched unit-circle evaluation."""
    num = ScaledPolynomial(_psi_numerators(rm, kappa)[sign], rm.W_S)
    return _ratio_on_grid(rm, num, z, method)


def _require_defocusing(signal: Signal) -> None:
    if signal.akns or signal.kappa != -1:
        raise DefocusingOnlyError(
            "this method applies only to the defocusing NSE (kappa = -1): "
            "real-valued spectra are required")


def _direct_values(signal: Signal, scheme: Scheme, z):
    """(Delta, Psi^+, Psi^-) at real points by per-point direct iteration."""
    M = eval_monodromy_direct(signal, scheme, np.asarray(z, dtype=float))
    delta = 0.5 * (M[..., 0, 0] + M[..., 1, 1])
    base = 1j * M[..., 1, 1] - 1j * M[..., 0, 0]
    # kappa = -1: sqrt(kappa) = i, sqrt(-1) = i
    psi_p = base - 1j * (M[..., 1, 0] - M[..., 0, 1])
    psi_m = base + (M[..., 1, 0] + M[..., 0, 1])
    return delta, psi_p, psi_m


def defocusing_spectra_sampling(signal: Signal, A: float, B: float, G: int = 1, L: int = 5,
                                scheme: Scheme = ABLOWITZ_LADIK, transform=None,
                                aux: bool = True, evaluator: str = "batch") -> SpectrumResult:
    """Main and Ma-Ablowitz spectra of a defocusing signal on [A, B].

    Samples Delta on ``G*D`` equispaced points ``A + n (B-A)/(G*D-1)``,
    brackets sign changes of ``Re(Delta) -+ 1`` (and of ``Re(Psi^{+-})``) and
    refines every bracket with ``L`` batched bisection rounds.

    ``evaluator="direct"`` replaces the fast polynomial evaluation by
    per-point iteration of the transfer matrices (O(D) per point); it exists
    as a reference for the fast path.
    """
    _require_defocusing(signal)
    if not A < B:
        raise ValueError("need A < B")
    if G < 1 or L < 1:
        raise ValueError("G and L must be positive")
    if evaluator not in ("batch", "direct"):
        raise ValueError("evaluator must be 'batch' or 'direct'")
    n = G * signal.D
    z = A + np.arange(n) * ((B - A) / (n - 1))

    if evaluator == "batch":
        rm = build_monodromy(signal, scheme, transform)

        def delta(x):
            return discriminant_on_grid(rm, x).real

        def psi(x, s):
            return psi_on_grid(rm, -1, s, x).real
    else:
        def delta(x):
            return _direct_values(signal, scheme, x)[0].real

        def psi(x, s):
            return _direct_values(signal, scheme, x)[1 if s == 1 else 2].real

    v = delta(z)
    roots = []
    for s in (1, -1):
        roots.append(sign_change_bisect(v - s, z, lambda x, s=s: delta(x) - s, L))
    main = np.sort(np.concatenate(roots))
    res = SpectrumResult(main.astype(float),
                         diagnostics={"method": "sample", "scheme": scheme.name,
                                      "evaluator": evaluator, "D": signal.D,
                                      "grid_points": n, "G": G, "L": L, "A": A, "B": B})
    if aux:
        out = {}
        for s in (1, -1):
            out[s] = np.sort(sign_change_bisect(psi(z, s), z, lambda x, s=s: psi(x, s), L))
        res.aux_ma_rho, res.aux_ma_xi = out[1].astype(float), out[-1].astype(float)
    return res


def newton_search(signal: Signal, seeds: Sequence[complex], beta: float = 1e-10,
                  max_iter: int = 50, dedup_tol: float = 1e-6) -> SpectrumResult:
    """Search-based main spectrum: Newton from every seed for both targets."""
    found = []
    for z0 in np.asarray(seeds, dtype=complex).ravel():
        for target in (1, -1):
            r = newton_refine(z0, target, signal, beta, max_iter)
            if r.converged:
                found.append(r.z)
    pts, counts = cluster_points(np.array(found, dtype=complex), dedup_tol)
    order = np.lexsort((pts.imag, pts.real))
    return SpectrumResult(pts[order], main_multiplicity=np.ones(pts.size, int),
                          diagnostics={"method": "newton", "scheme": "euler",
                                       "D": signal.D, "seeds": len(seeds)})


# ----------------------------------------------------------------------------
# Floquet diagram
# ----------------------------------------------------------------------------

class FloquetDiagram(NamedTuple):
    z: np.ndarray
    delta: np.ndarray
    clipped: np.ndarray


def clip_floquet(delta) -> np.ndarray:
    """Linear inside [-1, 1], ``sign * (1 + ln|delta|)`` outside."""
    delta = np.asarray(delta, dtype=float)
    mag = np.abs(delta)
    with np.errstate(divide="ignore"):
        out = np.where(mag <= 1, delta, np.sign(delta) * (1 + np.log(np.maximum(mag, 1))))
    return out


def floquet_diagram(signal: Signal, A: float, B: float, M: int,
                    scheme: Scheme = ABLOWITZ_LADIK) -> FloquetDiagram:
    """Delta on M equispaced real points, with the log-clipped display value."""
    _require_defocusing(signal)
    if M < 2:
        raise ValueError("M must be at least 2")
    if not A < B:
        raise ValueError("need A < B")
    rm = build_monodromy(signal, scheme)
    z = np.linspace(A, B, M)
    delta = discriminant_on_grid(rm, z).real
    return FloquetDiagram(z, delta, clip_floquet(delta))


def count_band_crossings(diagram: FloquetDiagram, gap_tol: float = 1e-5) -> int:
    """Number of boundary crossings of the region ``|Delta| <= 1`` along the grid.

    Gaps where ``max |Delta| - 1`` stays below ``gap_tol`` are treated as
    closed: their width is exponentially small and whether they show up on
    a finite grid depends on D and sampling density rather than on the signal.
    """
    mag = np.abs(np.asarray(diagram.delta, dtype=float))
    out = mag > 1
    edges = np.diff(np.concatenate([[0], out.astype(int), [0]]))
    starts, ends = np.flatnonzero(edges == 1), np.flatnonzero(edges == -1)
    for a, b in zip(starts, ends):
        if mag[a:b].max() - 1 < gap_tol:
            out[a:b] = False
    return int(np.count_nonzero(np.diff(out.astype(int))))
