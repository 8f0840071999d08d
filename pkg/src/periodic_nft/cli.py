"""Command line entry point ``nft``."""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .bench import run_bench, write_report
from .discretize import (
    ABLOWITZ_LADIK,
    CRANK_NICOLSON,
    FORWARD_EULER,
    FeasibilityError,
    Identity,
    Moebius,
    default_transform,
)
from .io import SignalFormatError, read_signal, write_floquet, write_spectrum
from .nft import (
    DefocusingOnlyError,
    SpectrumFilter,
    defocusing_spectra_sampling,
    eigen_nft,
    filter_spectrum,
    floquet_diagram,
    newton_search,
)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FEASIBILITY = 3
EXIT_DEFOCUSING_ONLY = 4

SCHEMES = {"euler": FORWARD_EULER, "cn": CRANK_NICOLSON, "al": ABLOWITZ_LADIK}

EPILOG = """\
exit codes:
  0  success
  2  malformed input (unreadable/invalid signal file, bad options)
  3  discretization infeasible for the signal (message names the sample index)
  4  method restricted to defocusing signals (kappa = -1) got another signal

environment:
  NFT_THREADS  upper bound on worker threads used by compiled kernels
"""


class UsageError(Exception):
    pass


def _apply_thread_cap() -> None:
    cap = os.environ.get("NFT_THREADS")
    if not cap:
        return
    try:
        n = int(cap)
    except ValueError:
        raise UsageError(f"NFT_THREADS must be an integer, got {cap!r}") from None
    if n < 1:
        raise UsageError("NFT_THREADS must be positive")
    import numba

    numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))


def _parse_transform(text: str, scheme, eps: float):
    if text == "default":
        return default_transform(scheme, eps)
    if text == "none":
        return Identity()
    if text.startswith("moebius:"):
        try:
            a, b, c, d = (complex(v.strip().replace(" ", "")) for v in text[8:].split(","))
        except ValueError:
            raise UsageError("--transform moebius:a,b,c,d needs four complex numbers") from None
        try:
            return Moebius(a, b, c, d)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    raise UsageError(f"unknown transform {text!r} (default|none|moebius:a,b,c,d)")


def _filter_from(args) -> SpectrumFilter:
    box = None
    if args.filter_box is not None:
        try:
            box = tuple(complex(v.replace(" ", "")) for v in args.filter_box)
        except ValueError:
            raise UsageError("--filter-box expects two complex numbers like -5+1j 5+5j") from None
    try:
        return SpectrumFilter(box, args.dedup_tol, args.drop_doubles)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout
    return open(path, "w")


def _cmd_eigen(args) -> int:
    signal = read_signal(args.signal)
    scheme = SCHEMES[args.scheme]
    filt = _filter_from(args)
    if args.method == "sample":
        return _cmd_sample(args)
    if args.method == "newton":
        if filt.box is None:
            if args.bounds is None:
                raise UsageError("--method newton needs --filter-box or --bounds for seeding")
            lo, hi = complex(args.bounds[0], -1), complex(args.bounds[1], 1)
        else:
            lo, hi = filt.box
        gx = np.linspace(lo.real, hi.real, 24)
        gy = np.linspace(lo.imag, hi.imag, 12)
        seeds = (gx[None, :] + 1j * gy[:, None]).ravel()
        res = newton_search(signal, seeds)
        res.main, res.main_multiplicity = filter_spectrum(res.main, filt, return_counts=True)
    else:
        transform = _parse_transform(args.transform, scheme, signal.eps)
        res = eigen_nft(signal, scheme, transform, filt)
    out = _open_out(args.out)
    try:
        write_spectrum(out, res)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_sample(args) -> int:
    signal = read_signal(args.signal)
    if args.bounds is None:
        raise UsageError("sample needs --bounds A B")
    A, B = args.bounds
    scheme = SCHEMES[args.scheme]
    transform = None if args.transform == "default" else _parse_transform(
        args.transform, scheme, signal.eps)
    res = defocusing_spectra_sampling(signal, A, B, args.grid_factor, args.bisect,
                                      scheme=scheme, transform=transform)
    filt = _filter_from(args)
    if filt.box is not None or filt.dedup_tol > 0:
        res.main, res.main_multiplicity = filter_spectrum(res.main, filt, return_counts=True)
        res.main = res.main.real
    out = _open_out(args.out)
    try:
        write_spectrum(out, res, include_ki=False)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_floquet(args) -> int:
    signal = read_signal(args.signal)
    if args.bounds is None:
        raise UsageError("floquet needs --bounds A B")
    diagram = floquet_diagram(signal, args.bounds[0], args.bounds[1], args.points,
                              SCHEMES[args.scheme])
    out = _open_out(args.out)
    try:
        write_floquet(out, diagram)
    finally:
        if out is not sys.stdout:
            out.close()
    return EXIT_OK


def _cmd_bench(args) -> int:
    schemes = [SCHEMES[s] for s in args.schemes]
    report = run_bench(args.suite, args.Ds, args.repeats, schemes)
    if args.out:
        jpath, tpath = write_report(report, args.out)
        print(f"wrote {jpath} and {tpath}")
    for c in report["cells"]:
        err = "" if c["error"] is None else f"{c['error']:.3e}"
        sec = "failed" if c["seconds"] is None else f"{c['seconds']:.4f}s"
        print(f"{c['suite']:<11}{c['method']:<7}{c['scheme']:<6}D={c['D']:<6}{sec:>12}  e={err}")
    for key, s in report["slopes"].items():
        print(f"slope {key}: total {s['total']:.2f}, per-sample {s['per_sample']:.2f}")
    return EXIT_OK


def _add_common(p: argparse.ArgumentParser, method_choices=("eigen", "sample", "newton")):
    p.add_argument("signal", help="signal file (.csv with #META header, or .json)")
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="al")
    p.add_argument("--transform", default="default",
                   help="default | none | moebius:a,b,c,d (default: scheme default)")
    p.add_argument("--method", choices=method_choices, default=method_choices[0])
    p.add_argument("--bounds", nargs=2, type=float, metavar=("A", "B"))
    p.add_argument("--grid-factor", type=int, default=1, metavar="G")
    p.add_argument("--bisect", type=int, default=5, metavar="L")
    p.add_argument("--filter-box", nargs=2, metavar=("X", "Y"),
                   help="lower-left and upper-right corners, e.g. -5+1j 5+5j")
    p.add_argument("--dedup-tol", type=float, default=0.0)
    p.add_argument("--drop-doubles", action="store_true")
    p.add_argument("--out", metavar="PATH", help="output file (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nft", description="Nonlinear Fourier transform of periodic signals.",
        epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eigen", help="main and auxiliary spectra by polynomial roots",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(p)
    p.set_defaults(func=_cmd_eigen)

    p = sub.add_parser("sample", help="real spectra of defocusing signals by sampling",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    _add_common(p, ("sample",))
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("floquet", help="Floquet discriminant on a real grid (TSV)",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("signal")
    p.add_argument("--bounds", nargs=2, type=float, metavar=("A", "B"), required=True)
    p.add_argument("--points", "-M", type=int, default=2001)
    p.add_argument("--scheme", choices=sorted(SCHEMES), default="al")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=_cmd_floquet)

    p = sub.add_parser("bench", help="runtime and accuracy benchmark (JSON + TSV)",
                       epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--suite", choices=("focusing", "defocusing", "all"), default="all")
    p.add_argument("--Ds", nargs="+", type=int, default=[256, 512, 1024])
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--schemes", nargs="+", choices=sorted(SCHEMES), default=["al", "cn"])
    p.add_argument("--out", metavar="STEM", help="write STEM.json and STEM.tsv")
    p.set_defaults(func=_cmd_bench)
    return parser


def _protect_complex(argv):
    # argparse takes "-5+1j" for an option; a leading space keeps it positional
    argv = list(sys.argv[1:] if argv is None else argv)
    out = []
    for i, tok in enumerate(argv):
        if i >= 1 and argv[i - 1] == "--filter-box" or i >= 2 and argv[i - 2] == "--filter-box":
            if tok.startswith("-"):
                tok = " " + tok
        out.append(tok)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_protect_complex(argv))
    try:
        _apply_thread_cap()
        return args.func(args)
    except (SignalFormatError, UsageError) as exc:
        print(f"nft: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except FeasibilityError as exc:
        print(f"nft: infeasible: {exc}", file=sys.stderr)
        return EXIT_FEASIBILITY
    except DefocusingOnlyError as exc:
        print(f"nft: {exc}", file=sys.stderr)
        return EXIT_DEFOCUSING_ONLY
    except ValueError as exc:
        print(f"nft: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
