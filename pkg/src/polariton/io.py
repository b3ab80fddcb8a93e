"""File formats: spectral maps, ridge sets, field maps and JSON reports."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import tempfile

import numpy as np

from .errors import ValidationError
from .fieldmaps import DIELECTRIC, SAMPLE, VACUUM, FieldMap
from .spectroscopy.synth import RidgeSet, SpectralMap

MAP_HEADER = ["b_tesla", "freq_ghz", "s21_db"]
RIDGE_HEADER = ["b_tesla", "branch_id", "freq_ghz", "weight"]
FIELD_HEADER = ["x_m", "y_m", "z_m", "cell_vol_m3", "region", "ex", "ey", "ez", "hx", "hy", "hz"]
SCAN_HEADER = ["b_tesla", "omega_cmp_ghz", "d1", "d2"]


class FormatError(ValidationError):
    """Malformed input file; ``row`` is the 1-based line number when known."""

    def __init__(self, msg, row=None):
        super().__init__(f"line {row}: {msg}" if row is not None else msg)
        self.row = row


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def atomic_write(path, text: str) -> None:
    """Write ``text`` to ``path`` via a temp file in the same directory and rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x) -> str:
    return repr(float(x))


def _csv_text(header, rows, digest=None) -> str:
    buf = io.StringIO()
    if digest:
        buf.write(f"# config_sha256={digest}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _read_rows(path, header):
    """Yield ``(line_no, row)``; comment lines starting with '#' are skipped."""
    with open(path, newline="") as fh:
        lines = list(enumerate(fh, start=1))
    body = [(n, ln) for n, ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not body:
        raise FormatError("file is empty")
    n0, first = body[0]
    got = [h.strip() for h in next(csv.reader([first]))]
    if got != header:
        raise FormatError(f"expected header {','.join(header)}, got {','.join(got)}", n0)
    for n, ln in body[1:]:
        row = next(csv.reader([ln]))
        if len(row) != len(header):
            raise FormatError(f"expected {len(header)} fields, got {len(row)}", n)
        yield n, [c.strip() for c in row]


def _float(v, n):
    try:
        x = float(v)
    except ValueError:
        raise FormatError(f"not a number: {v!r}", n) from None
    if not np.isfinite(x):
        raise FormatError(f"non-finite value: {v!r}", n)
    return x


# --- spectral maps ---------------------------------------------------------


def spectral_map_text(s: SpectralMap, digest=None) -> str:
    rows = (
        (_fmt(b), _fmt(f), _fmt(v))
        for i, b in enumerate(s.b_grid)
        for f, v in zip(s.f_grid, s.magnitude_db[i])
    )
    return _csv_text(MAP_HEADER, rows, digest)


def read_spectral_map(path) -> SpectralMap:
    data = np.array([[_float(v, n) for v in row] for n, row in _read_rows(path, MAP_HEADER)])
    if data.size == 0:
        raise FormatError("no data rows")
    b_grid = np.unique(data[:, 0])
    f_grid = np.unique(data[:, 1])
    if len(data) != b_grid.size * f_grid.size:
        raise FormatError("map is not a complete (b, f) grid")
    ib = np.searchsorted(b_grid, data[:, 0])
    jf = np.searchsorted(f_grid, data[:, 1])
    mag = np.full((b_grid.size, f_grid.size), np.nan)
    mag[ib, jf] = data[:, 2]
    if np.isnan(mag).any():
        raise FormatError("duplicate (b, f) entries")
    return SpectralMap(b_grid, f_grid, mag)


# --- ridges ----------------------------------------------------------------


def ridge_text(r: RidgeSet, digest=None) -> str:
    order = np.lexsort((r.b, r.branch_id))
    rows = ((_fmt(r.b[i]), int(r.branch_id[i]), _fmt(r.f[i]), _fmt(r.weight[i])) for i in order)
    return _csv_text(RIDGE_HEADER, rows, digest)


def read_ridges(path) -> RidgeSet:
    b, ids, f, w = [], [], [], []
    for n, row in _read_rows(path, RIDGE_HEADER):
        b.append(_float(row[0], n))
        try:
            ids.append(int(row[1]))
        except ValueError:
            raise FormatError(f"branch_id must be an integer, got {row[1]!r}", n) from None
        f.append(_float(row[2], n))
        w.append(_float(row[3], n))
    if not b:
        return RidgeSet.empty()
    return RidgeSet(np.array(b), np.array(f), np.array(ids), np.array(w))


# --- field maps ------------------------------------------------------------


def _parse_region(text, n):
    t = text.strip().lower()
    if t in (SAMPLE, VACUUM):
        return t, 1.0
    kind, sep, eps = t.partition(":")
    if sep and kind in (DIELECTRIC, SAMPLE):
        e = _float(eps, n)
        if e <= 0:
            raise FormatError(f"relative permittivity must be > 0, got {eps}", n)
        return kind, e
    raise FormatError(f"unknown region {text!r}", n)


def read_field_map(path, omega_c: float) -> FieldMap:
    pos, vol, reg, eps, E, H = [], [], [], [], [], []
    for n, row in _read_rows(path, FIELD_HEADER):
        vals = [_float(v, n) for i, v in enumerate(row) if i != 4]
        if vals[3] <= 0:
            raise FormatError("cell_vol_m3 must be > 0", n)
        r, e = _parse_region(row[4], n)
        pos.append(vals[0:3])
        vol.append(vals[3])
        reg.append(r)
        eps.append(e)
        E.append(vals[4:7])
        H.append(vals[7:10])
    if not vol:
        raise FormatError("no data rows")
    return FieldMap(np.array(pos), np.array(vol), np.array(reg), np.array(eps),
                    np.array(E), np.array(H), float(omega_c))


def field_map_text(fm: FieldMap) -> str:
    rows = []
    for i in range(len(fm.volumes)):
        reg = fm.region[i]
        if reg == DIELECTRIC or (reg == SAMPLE and fm.eps_r[i] != 1.0):
            reg = f"{reg}:{_fmt(fm.eps_r[i])}"
        rows.append([*map(_fmt, fm.positions[i]), _fmt(fm.volumes[i]), reg,
                     *map(_fmt, fm.E[i]), *map(_fmt, fm.H[i])])
    return _csv_text(FIELD_HEADER, rows)


# --- reports ---------------------------------------------------------------


def json_text(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def scan_text(scan: np.ndarray, digest=None) -> str:
    return _csv_text(SCAN_HEADER, ([_fmt(v) for v in row] for row in scan), digest)
