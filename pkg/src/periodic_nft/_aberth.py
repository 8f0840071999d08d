"""Compiled kernel for Aberth-Ehrlich simultaneous root iteration."""

import numpy as np
from numba import njit

EPS = np.finfo(float).eps


@njit(cache=True)
def _eval_ratio(c, z):
    """Return (p(z)/p'(z), |p(z)|, sum_k |c_k||z|^k) with overflow-safe scaling.

    For |z| > 1 the reversed polynomial is evaluated at 1/z; the returned
    magnitudes are then both scaled by |z|^-n, which leaves their ratio intact.
    """
    n = c.shape[0] - 1
    az = abs(z)
    if az <= 1.0:
        p = c[n]
        dp = 0j
        bound = abs(c[n])
        for k in range(n - 1, -1, -1):
            dp = dp * z + p
            p = p * z + c[k]
            bound = bound * az + abs(c[k])
        if dp == 0:
            return np.inf + 0j, abs(p), bound
        return p / dp, abs(p), bound
    u = 1.0 / z
    au = 1.0 / az
    r = c[0]
    dr = 0j
    bound = abs(c[0])
    for k in range(1, n + 1):
        dr = dr * u + r
        r = r * u + c[k]
        bound = bound * au + abs(c[k])
    denom = n * r - u * dr
    if denom == 0:
        return np.inf + 0j, abs(r), bound
    return z * r / denom, abs(r), bound


@njit(cache=True)
def _sweep(c, z, done, resid, tol, freeze):
    """One Gauss-Seidel pass over the roots not yet frozen; returns how many moved."""
    n = z.shape[0]
    active = 0
    for i in range(n):
        if done[i]:
            continue
        zi = z[i]
        ratio, ap, bound = _eval_ratio(c, zi)
        resid[i] = ap / bound if bound > 0 else 0.0
        # EPS * bound: p(z) is indistinguishable from rounding noise
        if freeze and ap <= EPS * bound:
            done[i] = True
            continue
        s = 0j
        for j in range(n):
            if j != i:
                dz = zi - z[j]
                if dz == 0:
                    dz = 1e-300 + 0j
                s += 1.0 / dz
        if not np.isfinite(ratio.real) or not np.isfinite(ratio.imag):
            if freeze:
                z[i] = zi * (1.0 + 1e-3j) + 1e-6
                active += 1
            continue
        step = ratio / (1.0 - ratio * s)
        z[i] = zi - step
        if freeze and abs(step) <= tol * max(abs(z[i]), 1e-300):
            done[i] = True
        else:
            active += 1
    return active


@njit(cache=True)
def aberth_iterate(c, z, tol, max_sweeps, polish=3):
    """Gauss-Seidel Aberth sweeps, in place on ``z``.

    A root is frozen once its correction is below ``tol * max(|z|, tiny)`` or
    its residual drops to the rounding level of Horner's rule. Afterwards
    ``polish`` extra sweeps move every root once more, which pulls
    ill-conditioned roots to their attainable accuracy. A root counts as
    converged if it froze or its residual passes the backward-stability bound
    ``4 (n+1) eps sum |c_k||z|^k``. Returns (converged mask, sweeps used,
    relative residuals).
    """
    n = z.shape[0]
    done = np.zeros(n, dtype=np.bool_)
    resid = np.zeros(n)
    sweeps = 0
    for sweep in range(max_sweeps):
        sweeps = sweep + 1
        if _sweep(c, z, done, resid, tol, True) == 0:
            break
    moving = np.zeros(n, dtype=np.bool_)
    for _ in range(polish):
        _sweep(c, z, moving, resid, tol, False)
    for i in range(n):
        _, ap, bound = _eval_ratio(c, z[i])
        resid[i] = ap / bound if bound > 0 else 0.0
        if resid[i] <= 4.0 * (n + 1) * EPS:
            done[i] = True
    return done, sweeps, resid
