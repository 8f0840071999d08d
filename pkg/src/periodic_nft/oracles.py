"""Signals with closed-form periodic spectra, used as references."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .discretize import Signal

__all__ = [
    "AnalyticCase",
    "plane_wave_discriminant",
    "plane_wave_focusing",
    "one_band_defocusing",
    "gaussian_wavepacket",
]


@dataclass(frozen=True)
class AnalyticCase:
    """A signal family with (possibly partial) exact spectral data.

    ``signal(D)`` samples the signal. ``exact_main(rect)`` returns
    ``(points, multiplicities)`` or None when no closed form is known.
    ``exact_discriminant`` is a vectorized callable or None.
    """

    name: str
    signal: Callable[[int], Signal]
    exact_main: Optional[Callable] = None
    exact_discriminant: Optional[Callable] = None
    degenerate_points: Optional[Callable] = None
    note: str = ""


def plane_wave_discriminant(q0: float, mu: float, ell: float, kappa: int):
    """Exact Delta(z) of ``q0 exp(i mu x)`` over one period ``ell``.

    The gauge ``diag(exp(i mu x/2), exp(-i mu x/2))`` makes the system
    constant with spectral parameter ``z + mu/2``; the gauge returns a factor
    ``(-1)^m`` with ``m = mu ell / 2 pi``.
    """
    m = mu * ell / (2 * np.pi)
    sign = (-1.0) ** round(m)

    def delta(z):
        zs = np.asarray(z, dtype=complex) + mu / 2
        return sign * np.cos(ell * np.sqrt(zs * zs + kappa * q0 * q0))

    return delta


def _check_period(mu: float, ell: float, what: str) -> None:
    m = mu * ell / (2 * np.pi)
    if abs(m - round(m)) > 1e-9 * max(1.0, abs(m)):
        raise ValueError(f"{what}: mu * ell / (2 pi) = {m} is not an integer, "
                         "the signal is not periodic")


def _grid(D: int, ell: float, x0: float) -> np.ndarray:
    return x0 + np.arange(D) * (ell / D)


def plane_wave_focusing(q0: float = 3.0, mu: float = 3.0, ell: float = 2 * np.pi) -> AnalyticCase:
    """Focusing plane wave ``q0 exp(i mu x)``.

    Main spectrum ``-mu/2 +- i sqrt(q0^2 - n^2 pi^2 / ell^2)``, n >= 0; the
    n = 0 pair is simple, every other point is a double eigenvalue.
    """
    _check_period(mu, ell, "plane wave")

    def signal(D: int, x0: float = 0.0) -> Signal:
        x = _grid(D, ell, x0)
        return Signal(q0 * np.exp(1j * mu * x), ell, x0, kappa=1)

    def zeta(n):
        return -mu / 2 + np.array([1, -1]) * 1j * np.sqrt(complex(q0 * q0 - (n * np.pi / ell) ** 2))

    def exact_main(rect=None, n_max: Optional[int] = None):
        if n_max is None:
            if rect is None:
                raise ValueError("give either rect or n_max")
            lo, hi = complex(rect[0]), complex(rect[1])
            reach = max(abs(lo.real + mu / 2), abs(hi.real + mu / 2))
            n = 0
            # past the real-axis transition points move outward by ~pi/ell per n
            while (n * np.pi / ell) ** 2 <= q0 * q0 or np.abs(zeta(n).real + mu / 2).min() <= reach:
                n += 1
            n_max = n + 1
        pts, mult = [], []
        for n in range(n_max + 1):
            for p in zeta(n):
                pts.append(p)
                mult.append(1 if n == 0 else 2)
        pts = np.array(pts)
        mult = np.array(mult)
        if rect is not None:
            lo, hi = complex(rect[0]), complex(rect[1])
            keep = ((pts.real >= min(lo.real, hi.real)) & (pts.real <= max(lo.real, hi.real))
                    & (pts.imag >= min(lo.imag, hi.imag)) & (pts.imag <= max(lo.imag, hi.imag)))
            pts, mult = pts[keep], mult[keep]
        return pts, mult

    return AnalyticCase("plane_wave_focusing", signal, exact_main,
                        plane_wave_discriminant(q0, mu, ell, 1),
                        note="points with n >= 1 are double eigenvalues")


def one_band_defocusing(lam1: float = -3.0, lam2: float = 0.0, ell: float = 2 * np.pi) -> AnalyticCase:
    """Defocusing one-band signal ``|lam1 - lam2|/2 exp(-i (lam1 + lam2) x)``.

    Its only simple main eigenvalues are ``lam1`` and ``lam2``. The remaining
    main spectrum consists of double points, available via
    ``degenerate_points``.
    """
    mu = -(lam1 + lam2)
    _check_period(mu, ell, "one-band signal")
    amp = abs(lam1 - lam2) / 2
    centre = (lam1 + lam2) / 2

    def signal(D: int, x0: float = 0.0) -> Signal:
        x = _grid(D, ell, x0)
        return Signal(amp * np.exp(1j * mu * x), ell, x0, kappa=-1)

    def exact_main(rect=None):
        pts = np.array(sorted((lam1, lam2)), dtype=complex)
        return pts, np.ones(2, dtype=int)

    def degenerate_points(n_max: int):
        n = np.arange(1, n_max + 1)
        off = np.sqrt((n * np.pi / ell) ** 2 + amp * amp)
        return np.sort(np.concatenate([centre - off, centre + off])).astype(complex)

    return AnalyticCase("one_band_defocusing", signal, exact_main,
                        plane_wave_discriminant(amp, mu, ell, -1), degenerate_points,
                        note="double points are degenerate and not part of the band edges")


def gaussian_wavepacket(q0: float = 1.9, mu: float = 1.0, sigma: float = 2.0,
                        ell: float = 10.0) -> AnalyticCase:
    """Defocusing ``q0 exp(i mu x) exp(-x^2 / sigma)`` on ``[-ell/2, ell/2)``.

    No closed-form spectrum; used for convergence and cross-pipeline checks.
    """
    x0 = -ell / 2

    def signal(D: int) -> Signal:
        x = _grid(D, ell, x0)
        return Signal(q0 * np.exp(1j * mu * x) * np.exp(-x * x / sigma), ell, x0, kappa=-1)

    return AnalyticCase("gaussian_wavepacket", signal, note="reference-free")
