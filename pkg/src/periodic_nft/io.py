"""Signal, spectrum and Floquet-diagram file formats.

Signal CSV::

    #META {"ell": 6.283185307179586, "x0": 0.0, "kappa": -1, "akns": false, "D": 512}
    index,re_q,im_q
    0,1.5,0.0
    1,1.4997,0.0276
    ...

``D`` is optional; when present the row count must match it. AKNS signals add ``re_r,im_r`` columns. Floats are written with ``repr`` so a
round trip is bit-exact. A ``.json`` file holding the same metadata keys plus
``"q": [[re, im], ...]`` (and optionally ``"r"``) is accepted as well.
"""

from __future__ import annotations

import csv
import io as _io
import json
import math
from pathlib import Path
from typing import Union

import numpy as np

from .discretize import Signal

__all__ = [
    "SignalFormatError",
    "read_signal",
    "write_signal",
    "encode_complex",
    "spectrum_document",
    "write_spectrum",
    "read_spectrum",
    "write_floquet",
    "SPECTRUM_SCHEMA_VERSION",
    "SPECTRUM_SCHEMA",
]

SPECTRUM_SCHEMA_VERSION = 1
META_PREFIX = "#META "

_PAIR = {"type": "array", "minItems": 2, "maxItems": 2,
         "items": {"type": ["number", "null"]}}
_POINTS = {"type": "array", "items": _PAIR}

# JSON Schema of the spectrum document written by write_spectrum
SPECTRUM_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "main", "main_multiplicity", "aux_ma_rho", "aux_ma_xi",
                 "diagnostics"],
    "properties": {
        "schema_version": {"const": SPECTRUM_SCHEMA_VERSION},
        "main": _POINTS,
        "main_multiplicity": {"type": "array", "items": {"type": "integer", "minimum": 1}},
        "aux_ki": _POINTS,
        "aux_ma_rho": _POINTS,
        "aux_ma_xi": _POINTS,
        "aux_eta": _POINTS,
        "diagnostics": {"type": "object"},
    },
    "additionalProperties": False,
}


class SignalFormatError(ValueError):
    pass


def _meta(signal: Signal) -> dict:
    return {"ell": signal.ell, "x0": signal.x0, "kappa": signal.kappa, "akns": signal.akns,
            "D": signal.D}


def write_signal(path: Union[str, Path], signal: Signal) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        doc = _meta(signal)
        doc["q"] = encode_complex(signal.q_samples)
        if signal.akns:
            doc["r"] = encode_complex(signal.r)
        path.write_text(json.dumps(doc, indent=1))
        return
    buf = _io.StringIO()
    buf.write(META_PREFIX + json.dumps(_meta(signal)) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    header = ["index", "re_q", "im_q"] + (["re_r", "im_r"] if signal.akns else [])
    w.writerow(header)
    q = signal.q_samples
    r = signal.r if signal.akns else None
    for n in range(signal.D):
        row = [n, repr(float(q[n].real)), repr(float(q[n].imag))]
        if r is not None:
            row += [repr(float(r[n].real)), repr(float(r[n].imag))]
        w.writerow(row)
    path.write_text(buf.getvalue())


def _parse_meta(meta) -> dict:
    if not isinstance(meta, dict):
        raise SignalFormatError("metadata must be a JSON object")
    try:
        ell = float(meta["ell"])
        x0 = float(meta.get("x0", 0.0))
        kappa = int(meta.get("kappa", 1))
        akns = bool(meta.get("akns", False))
        D = None if meta.get("D") is None else int(meta["D"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SignalFormatError(f"bad metadata: {exc}") from None
    return {"ell": ell, "x0": x0, "kappa": kappa, "akns": akns, "D": D}


def _decode_pairs(rows, what: str) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError):
        raise SignalFormatError(f"{what}: expected a list of [re, im] pairs") from None
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise SignalFormatError(f"{what}: expected a list of [re, im] pairs")
    return arr[:, 0] + 1j * arr[:, 1]


def _build(meta: dict, q, r) -> Signal:
    if meta["D"] is not None and len(q) != meta["D"]:
        raise SignalFormatError(f"metadata announces D={meta['D']} samples, found {len(q)}")
    if meta["akns"] and r is None:
        raise SignalFormatError("akns signal without r samples")
    try:
        return Signal(q, meta["ell"], meta["x0"], kappa=meta["kappa"],
                      r_samples=r if meta["akns"] else None)
    except ValueError as exc:
        raise SignalFormatError(str(exc)) from None


def read_signal(path: Union[str, Path]) -> Signal:
    """Read a signal file; raises :class:`SignalFormatError` on malformed input."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise SignalFormatError(f"cannot read {path}: {exc}") from None
    if path.suffix.lower() == ".json":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SignalFormatError(f"invalid JSON: {exc}") from None
        meta = _parse_meta(doc)
        if "q" not in doc:
            raise SignalFormatError("missing q samples")
        q = _decode_pairs(doc["q"], "q")
        r = _decode_pairs(doc["r"], "r") if "r" in doc else None
        return _build(meta, q, r)

    lines = text.splitlines()
    if not lines or not lines[0].startswith(META_PREFIX):
        raise SignalFormatError("first line must be the '#META {json}' header")
    try:
        meta = _parse_meta(json.loads(lines[0][len(META_PREFIX):]))
    except json.JSONDecodeError as exc:
        raise SignalFormatError(f"invalid metadata JSON: {exc}") from None
    reader = csv.reader(l for l in lines[1:] if l.strip())
    header = next(reader, None)
    want = ["index", "re_q", "im_q"] + (["re_r", "im_r"] if meta["akns"] else [])
    if header is None or [h.strip() for h in header] != want:
        raise SignalFormatError(f"expected column header {','.join(want)}")
    q, r = [], []
    for lineno, row in enumerate(reader, start=3):
        if len(row) != len(want):
            raise SignalFormatError(f"line {lineno}: expected {len(want)} fields")
        try:
            idx = int(row[0])
            vals = [float(v) for v in row[1:]]
        except ValueError:
            raise SignalFormatError(f"line {lineno}: non-numeric field") from None
        if idx != len(q):
            raise SignalFormatError(f"line {lineno}: index {idx}, expected {len(q)}")
        q.append(complex(vals[0], vals[1]))
        if meta["akns"]:
            r.append(complex(vals[2], vals[3]))
    if len(q) < 2:
        raise SignalFormatError("need at least 2 samples")
    return _build(meta, np.array(q), np.array(r) if meta["akns"] else None)


def encode_complex(values) -> list:
    """Complex array -> list of [re, im]; non-finite parts become None."""
    out = []
    for v in np.asarray(values, dtype=complex).ravel():
        out.append([float(v.real) if math.isfinite(v.real) else None,
                    float(v.imag) if math.isfinite(v.imag) else None])
    return out


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if math.isfinite(f) else None
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def spectrum_document(result, include_ki: bool = True) -> dict:
    doc = {
        "schema_version": SPECTRUM_SCHEMA_VERSION,
        "main": encode_complex(result.main),
        "main_multiplicity": [int(m) for m in result.main_multiplicity],
    }
    if include_ki:
        doc["aux_ki"] = encode_complex(result.aux_ki)
    doc["aux_ma_rho"] = encode_complex(result.aux_ma_rho)
    doc["aux_ma_xi"] = encode_complex(result.aux_ma_xi)
    if len(result.aux_eta):
        doc["aux_eta"] = encode_complex(result.aux_eta)
    doc["diagnostics"] = _plain(result.diagnostics)
    return doc


def write_spectrum(path_or_file, result, include_ki: bool = True) -> dict:
    doc = spectrum_document(result, include_ki)
    text = json.dumps(doc, indent=1)
    if hasattr(path_or_file, "write"):
        path_or_file.write(text + "\n")
    else:
        Path(path_or_file).write_text(text + "\n")
    return doc


def read_spectrum(path) -> dict:
    """Load a spectrum JSON document, decoding [re, im] lists to complex arrays."""
    doc = json.loads(Path(path).read_text())
    for key in ("main", "aux_ki", "aux_ma_rho", "aux_ma_xi", "aux_eta"):
        if key in doc:
            doc[key] = np.array([complex(a if a is not None else np.nan,
                                         b if b is not None else np.nan)
                                 for a, b in doc[key]], dtype=complex)
    return doc


def write_floquet(path_or_file, diagram) -> None:
    lines = ["z\tdelta\tclipped"]
    for z, d, c in zip(diagram.z, diagram.delta, diagram.clipped):
        lines.append(f"{float(z)!r}\t{float(d)!r}\t{float(c)!r}")
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_file, "write"):
        path_or_file.write(text)
    else:
        Path(path_or_file).write_text(text)
