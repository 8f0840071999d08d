"""Acceptance criteria, one test per criterion.

Every test records a PASS/FAIL line with the measured numbers; the lines are
printed in the pytest terminal summary (see conftest.py) and when the module
is run as a script.
"""

import time

import numpy as np
import pytest

from periodic_nft.bench import eigen_main, loglog_slope, time_min
from periodic_nft.discretize import (
    ABLOWITZ_LADIK,
    CRANK_NICOLSON,
    build_monodromy,
    eval_monodromy_direct,
)
from periodic_nft.nft import (
    SpectrumFilter,
    count_band_crossings,
    defocusing_spectra_sampling,
    discriminant_on_grid,
    eigen_nft,
    floquet_diagram,
    main_spectrum_eigen,
    spectrum_error,
)
from periodic_nft.oracles import gaussian_wavepacket, one_band_defocusing, plane_wave_focusing
from periodic_nft.poly import (
    MatrixPolynomial,
    ScaledPolynomial,
    eval_unit_circle_batch,
    evaluate,
    largest_coefficient,
    matmul,
    product_tree,
)
from periodic_nft.rootfind import newton_refine, poly_roots
from planted import coeffs_from_roots, match, near_circle_roots, rounding_floor, square_roots

RESULTS = []
TWO_PI = 2 * np.pi
REAL_BOX = (-10 - 0.5j, 10 + 0.5j)
FOCUS_RECT = (-5 + 1j, 5 + 5j)


def record(name, ok, detail):
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, detail


def warm_up():
    # compile the numba kernels outside any timed region
    s = one_band_defocusing().signal(64)
    eigen_nft(s, spectrum_filter=SpectrumFilter(REAL_BOX, 1e-2, True))
    defocusing_spectra_sampling(s, -10, 10)


def test_one_band_recovery():
    warm_up()
    sig = one_band_defocusing(-3, 0, TWO_PI).signal(1024)
    t0 = time.perf_counter()
    res = eigen_nft(sig, spectrum_filter=SpectrumFilter(REAL_BOX, 1e-2, True))
    t_eig = time.perf_counter() - t0
    t0 = time.perf_counter()
    smp = defocusing_spectra_sampling(sig, -10, 10, G=1, L=5)
    t_smp = time.perf_counter() - t0
    e_eig = spectrum_error([-3, 0], res.main, REAL_BOX)
    e_smp = spectrum_error([-3, 0], smp.main, REAL_BOX)
    ok = e_eig <= 0.02 and e_smp <= 0.02 and t_eig <= 5 and t_smp <= 5
    record("one-band recovery D=1024", ok,
           f"eigen e={e_eig:.2e} ({t_eig:.2f}s), sampling e={e_smp:.2e} ({t_smp:.3f}s); "
           "need e<=0.02, t<=5s")


def test_focusing_plane_wave_convergence():
    case = plane_wave_focusing(3, 3, TWO_PI)
    truth, _ = case.exact_main(FOCUS_RECT)
    parts, ok = [], True
    for scheme in (ABLOWITZ_LADIK, CRANK_NICOLSON):
        e = {D: spectrum_error(truth, main_spectrum_eigen(build_monodromy(case.signal(D), scheme)),
                               FOCUS_RECT) for D in (64, 128, 256, 512)}
        ratios = [e[2 * D] / e[D] for D in (64, 128, 256)]
        ok &= all(r <= 0.7 for r in ratios)
        parts.append(f"{scheme.name} e(2D)/e(D)=" + ",".join(f"{r:.3f}" for r in ratios))
    record("focusing plane wave e(2D)<=0.7e(D)", ok, "; ".join(parts))


def test_fast_equals_naive():
    signals = {"one-band": one_band_defocusing().signal(1024),
               "gaussian": gaussian_wavepacket().signal(1024),
               "plane-wave": plane_wave_focusing().signal(1024)}
    parts, ok = [], True
    for name, sig in signals.items():
        z = -10 + np.arange(sig.D) * 20 / (sig.D - 1)
        fast = discriminant_on_grid(build_monodromy(sig), z)
        M = eval_monodromy_direct(sig, ABLOWITZ_LADIK, z)
        naive = 0.5 * (M[:, 0, 0] + M[:, 1, 1])
        rel = np.max(np.abs(fast - naive) / np.maximum(1, np.abs(naive)))
        ok &= rel <= 1e-8
        parts.append(f"{name} {rel:.1e}")
    record("fast grid values equal direct iteration (1e-8)", ok, ", ".join(parts))


def test_complexity_slopes():
    warm_up()
    Ds = [256, 512, 1024, 2048, 4096, 8192]
    focus = plane_wave_focusing()
    band = one_band_defocusing()
    t_eig, t_smp = [], []
    for D in Ds:
        sig = focus.signal(D)
        t_eig.append(time_min(lambda: eigen_main(sig), 3)[0])
        sig = band.signal(D)
        t_smp.append(time_min(lambda: defocusing_spectra_sampling(sig, -10, 10, 1, 5), 3)[0])
    s_eig = loglog_slope(Ds, t_eig)
    s_per = loglog_slope(Ds, np.array(t_eig) / Ds)
    s_smp = loglog_slope(Ds, t_smp)
    ok = s_eig <= 2.3 and 0.8 <= s_per <= 1.3 and s_smp <= 1.4
    record("complexity slopes D=256..8192", ok,
           f"eigen {s_eig:.2f} (<=2.3), eigen per-sample {s_per:.2f} (0.8-1.3), "
           f"sampling {s_smp:.2f} (<=1.4); eigen at 8192 {t_eig[-1]:.1f}s")


def test_invariant_suite():
    rng = np.random.default_rng(7)
    cases = {"one-band": one_band_defocusing().signal(256),
             "gaussian": gaussian_wavepacket().signal(256),
             "plane-wave": plane_wave_focusing().signal(256)}
    worst_det = 0.0
    for sig in cases.values():
        for scheme in (CRANK_NICOLSON, ABLOWITZ_LADIK):
            rm = build_monodromy(sig, scheme)
            for z in rng.uniform(-5, 5, 20) + 1j * rng.uniform(-1, 1, 20):
                M = rm(z)
                worst_det = max(worst_det, abs(np.linalg.det(M) - 1) / max(1, np.abs(M).max() ** 2))
    worst_real = 0.0
    for name in ("one-band", "gaussian"):
        z = rng.uniform(-8, 8, 20)
        delta = discriminant_on_grid(build_monodromy(cases[name]), z, method="direct")
        worst_real = max(worst_real, np.max(np.abs(delta.imag) / np.maximum(1, np.abs(delta))))
    box = (-6 - 6j, 6 + 6j)
    f = SpectrumFilter(box, 1e-3)
    conj_err = 0.0
    for scheme in (ABLOWITZ_LADIK, CRANK_NICOLSON):
        pts = eigen_nft(cases["plane-wave"], scheme, spectrum_filter=f, aux=False).main
        conj_err = max(conj_err, spectrum_error(pts, np.conj(pts), box))
    max_imag = 0.0
    for name in ("one-band", "gaussian"):
        sig = (one_band_defocusing() if name == "one-band" else gaussian_wavepacket()).signal(1024)
        res = eigen_nft(sig, spectrum_filter=SpectrumFilter((-10 - 10j, 10 + 10j)))
        for pts in (res.main, res.aux_ma_rho, res.aux_ma_xi):
            max_imag = max(max_imag, np.abs(pts.imag).max(initial=0))
    ok = worst_det <= 1e-9 and worst_real <= 1e-10 and conj_err <= 1e-3 and max_imag <= 0.05
    record("invariant suite", ok,
           f"det-1 {worst_det:.1e} (scaled, <=1e-9), Im Delta on R {worst_real:.1e} (<=1e-10), "
           f"conjugation {conj_err:.1e} (<=1e-3), defocusing |Im| {max_imag:.1e} (<=0.05)")


def sequential(factors):
    acc = factors[0]
    for f in factors[1:]:
        acc = matmul(f, acc)
        W = int(np.floor(np.log2(largest_coefficient(acc))))
        acc = MatrixPolynomial(np.ldexp(acc.coeffs.real, -W) + 1j * np.ldexp(acc.coeffs.imag, -W),
                               acc.scale_exp + W)
    return acc


def test_oracle_equivalences():
    rng = np.random.default_rng(11)
    crandn = lambda *s: rng.standard_normal(s) + 1j * rng.standard_normal(s)
    tree_err = 0.0
    for N in (2, 16, 256):
        fs = [MatrixPolynomial(crandn(2, 2, 3) / np.sqrt(2)) for _ in range(N)]
        t, s = product_tree(fs), sequential(fs)
        tc = t.coeffs * 2.0 ** (t.scale_exp - s.scale_exp)
        sc = s.coeffs[..., :tc.shape[-1]]
        tree_err = max(tree_err, np.abs(tc - sc).max() / np.abs(sc).max())
    root_err = 0.0
    for _ in range(10):
        planted = near_circle_roots(rng, 100)
        found, planted = match(poly_roots(coeffs_from_roots(planted)).roots, planted)
        root_err = max(root_err, np.abs(found - planted).max())
    # random sets: 1e-7 is not attainable once coefficients are rounded,
    # report the error relative to that rounding floor instead
    floor_ratio = 0.0
    for _ in range(10):
        planted = square_roots(rng, 100)
        c = coeffs_from_roots(planted)
        found, planted = match(poly_roots(c).roots, planted)
        floor_ratio = max(floor_ratio, np.max(np.abs(found - planted)
                                              / (rounding_floor(c, planted) + 1e-16)))
    c = crandn(1024)
    theta = rng.uniform(-np.pi, np.pi, 2000)
    w = np.exp(1j * theta)
    ref = np.zeros_like(w)
    for ck in c[::-1]:
        ref = ref * w + ck
    got = eval_unit_circle_batch(ScaledPolynomial(c), theta)
    eval_err = np.abs(got - ref).max() / np.abs(ref).max()
    r = newton_refine(-1.5 + 3.1j, -1, plane_wave_focusing().signal(1024))
    newton_err = abs(r.z - (-1.5 + 3j))
    ok = tree_err <= 1e-10 and root_err <= 1e-7 and floor_ratio <= 10 and eval_err <= 1e-9 \
        and newton_err <= 0.05
    record("oracle equivalences", ok,
           f"product tree {tree_err:.1e} (<=1e-10), planted roots {root_err:.1e} (<=1e-7), "
           f"random planted roots {floor_ratio:.1f}x rounding floor (<=10), "
           f"unit circle deg 1023 {eval_err:.1e} (<=1e-9), Newton to zeta_0+ {newton_err:.1e} (<=0.05)")


def test_coefficient_underflow_regression():
    vals = {}
    for D in (128, 256, 512):
        c = np.array([0] + [10.0 ** -d / D for d in range(1, D + 1)], complex)
        vals[D] = evaluate(ScaledPolynomial(c), 10).real
    u = evaluate(ScaledPolynomial(np.array([0] + [1 / 512] * 512, complex)), 1.0).real
    ok = abs(vals[128] - 1) <= 1e-12 and abs(vals[256] - 1) <= 1e-12 and vals[512] < 0.7 \
        and abs(u - 1) <= 1e-12
    record("coefficient underflow regression", ok,
           f"D=128 {vals[128]:.15f}, D=256 {vals[256]:.15f}, D=512 {vals[512]:.5f} "
           f"(pathology recorded), transformed D=512 {u:.15f}")


def test_gaussian_band_structure():
    case = gaussian_wavepacket()
    sig = case.signal(1024)
    res = eigen_nft(sig, spectrum_filter=SpectrumFilter((-10 - 10j, 10 + 10j)))
    smp = defocusing_spectra_sampling(sig, -5, 5, 2, 20)
    counts = {D: count_band_crossings(floquet_diagram(case.signal(D), -5, 5, 20001))
              for D in (512, 1024, 2048)}
    ok = res.diagnostics["all_converged"] and smp.main.size > 0 and len(set(counts.values())) == 1
    record("Gaussian band structure stable", ok,
           f"D=1024 eigen {res.main.size} points, sampling {smp.main.size} points; "
           f"crossings in [-5,5] " + ", ".join(f"D={D}: {n}" for D, n in counts.items()))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
