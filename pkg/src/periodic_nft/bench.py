"""Runtime/accuracy benchmark over the analytic test signals.

Each cell (suite, method, scheme, D) is timed ``repeats`` times and the
minimum wall time is kept. Cells run one after another so timings do not
compete for cores.
"""

from __future__ import annotations

import json
import platform
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .discretize import ABLOWITZ_LADIK, CRANK_NICOLSON, Scheme, build_monodromy
from .nft import (
    SpectrumFilter,
    defocusing_spectra_sampling,
    filter_spectrum,
    main_spectrum_eigen,
    spectrum_error,
)
from .oracles import one_band_defocusing, plane_wave_focusing

__all__ = [
    "BENCH_SCHEMA_VERSION",
    "FOCUSING_RECT",
    "FOCUSING_FULL_RECT",
    "DEFOCUSING_RECT",
    "BenchCell",
    "loglog_slope",
    "time_min",
    "eigen_main",
    "run_bench",
    "write_report",
]

BENCH_SCHEMA_VERSION = 1
FOCUSING_RECT = (-5 + 1j, 5 + 5j)
# also covers the real axis and the lower half plane
FOCUSING_FULL_RECT = (-5 - 5j, 5 + 5j)
DEFOCUSING_RECT = (-10 - 0.5j, 10 + 0.5j)
DEFOCUSING_FILTER = SpectrumFilter(DEFOCUSING_RECT, dedup_tol=1e-2, drop_double_roots=True)


@dataclass
class BenchCell:
    suite: str
    method: str
    scheme: str
    D: int
    seconds: Optional[float] = None
    per_sample: Optional[float] = None
    error: Optional[float] = None
    error_full: Optional[float] = None
    n_points: Optional[int] = None
    failure: Optional[str] = None


def time_min(fn, repeats: int = 3):
    """Minimum wall time over ``repeats`` calls, plus the last return value."""
    best, out = np.inf, None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def loglog_slope(Ds: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of log(values) against log(Ds)."""
    x = np.log(np.asarray(Ds, dtype=float))
    y = np.log(np.asarray(values, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


def eigen_main(signal, scheme: Scheme = ABLOWITZ_LADIK):
    """Timed unit of the eigenmethod: monodromy build plus main-spectrum roots."""
    return main_spectrum_eigen(build_monodromy(signal, scheme))


def _focusing_cells(Ds, schemes, repeats) -> List[BenchCell]:
    case = plane_wave_focusing(3.0, 3.0, 2 * np.pi)
    truth, _ = case.exact_main(FOCUSING_RECT)
    truth_full, _ = case.exact_main(FOCUSING_FULL_RECT)
    cells = []
    for scheme in schemes:
        for D in Ds:
            cell = BenchCell("focusing", "eigen", scheme.name, D)
            try:
                sig = case.signal(D)
                sec, pts = time_min(lambda: eigen_main(sig, scheme), repeats)
                cell.seconds, cell.per_sample = sec, sec / D
                cell.error = spectrum_error(truth, pts, FOCUSING_RECT)
                cell.error_full = spectrum_error(truth_full, pts, FOCUSING_FULL_RECT)
                cell.n_points = int(pts.size)
            except Exception as exc:  # recorded per cell
                cell.failure = f"{type(exc).__name__}: {exc}"
            cells.append(cell)
    return cells


def _defocusing_cells(Ds, repeats, methods=("eigen", "sample")) -> List[BenchCell]:
    case = one_band_defocusing(-3.0, 0.0, 2 * np.pi)
    truth, _ = case.exact_main()
    cells = []
    for method in methods:
        for D in Ds:
            cell = BenchCell("defocusing", method, "al", D)
            try:
                sig = case.signal(D)
                if method == "eigen":
                    sec, pts = time_min(lambda: eigen_main(sig), repeats)
                    pts = filter_spectrum(pts, DEFOCUSING_FILTER)
                else:
                    sec, res = time_min(
                        lambda: defocusing_spectra_sampling(sig, -10.0, 10.0, 1, 5), repeats)
                    pts = res.main
                cell.seconds, cell.per_sample = sec, sec / D
                cell.error = spectrum_error(truth, pts, DEFOCUSING_RECT)
                cell.n_points = int(len(pts))
            except Exception as exc:
                cell.failure = f"{type(exc).__name__}: {exc}"
            cells.append(cell)
    return cells


def _slopes(cells: List[BenchCell]) -> dict:
    groups = {}
    for c in cells:
        if c.seconds is not None:
            groups.setdefault(f"{c.suite}/{c.method}/{c.scheme}", []).append(c)
    out = {}
    for key, cs in groups.items():
        if len(cs) < 2:
            continue
        Ds = [c.D for c in cs]
        out[key] = {"total": loglog_slope(Ds, [c.seconds for c in cs]),
                    "per_sample": loglog_slope(Ds, [c.per_sample for c in cs])}
    return out


def _warm_up() -> None:
    # compile the numba kernels so the first timed cell does not pay for it
    sig = one_band_defocusing(-3.0, 0.0, 2 * np.pi).signal(32)
    eigen_main(sig)
    defocusing_spectra_sampling(sig, -10.0, 10.0)


def run_bench(suite: str = "all", Ds: Sequence[int] = (256, 512, 1024),
              repeats: int = 3, schemes: Sequence[Scheme] = (ABLOWITZ_LADIK, CRANK_NICOLSON)) -> dict:
    if suite not in ("focusing", "defocusing", "all"):
        raise ValueError("suite must be focusing, defocusing or all")
    _warm_up()
    cells: List[BenchCell] = []
    if suite in ("focusing", "all"):
        cells += _focusing_cells(Ds, schemes, repeats)
    if suite in ("defocusing", "all"):
        cells += _defocusing_cells(Ds, repeats)
    return {
        "schema_version": BENCH_SCHEMA_VERSION,
        "suite": suite,
        "Ds": [int(d) for d in Ds],
        "repeats": repeats,
        "timing": "minimum wall time over repeats",
        "rects": {"focusing": [list(map(_pair, FOCUSING_RECT))],
                  "focusing_full": [list(map(_pair, FOCUSING_FULL_RECT))],
                  "defocusing": [list(map(_pair, DEFOCUSING_RECT))]},
        "platform": platform.platform(),
        "cells": [asdict(c) for c in cells],
        "slopes": _slopes(cells),
    }


def _pair(z: complex):
    return [z.real, z.imag]


def _json_safe(obj):
    if isinstance(obj, float) and not np.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_json_safe(v) for v in obj]
    return obj


TSV_COLUMNS = ["suite", "method", "scheme", "D", "seconds", "per_sample",
               "error", "error_full", "n_points", "failure"]


def write_report(report: dict, stem) -> tuple:
    """Write ``<stem>.json`` and ``<stem>.tsv``; returns both paths."""
    stem = Path(stem)
    if stem.suffix in (".json", ".tsv"):
        stem = stem.with_suffix("")
    jpath, tpath = stem.with_suffix(".json"), stem.with_suffix(".tsv")
    jpath.write_text(json.dumps(_json_safe(report), indent=1) + "\n")
    rows = ["\t".join(TSV_COLUMNS)]
    for c in report["cells"]:
        rows.append("\t".join("" if c[k] is None else str(c[k]) for k in TSV_COLUMNS))
    tpath.write_text("\n".join(rows) + "\n")
    return jpath, tpath
