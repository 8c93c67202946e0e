"""Matrix Market and CSV plumbing.

Supported Matrix Market subset: `matrix coordinate real general` (read into a
DualSparseMatrix; duplicate coordinates sum, 1-based indices on disk) and
`matrix array real general` (read into a dense ndarray, column-major entry
order per the format). `integer` files parse as real. Everything else
(complex, pattern, any symmetry but general) raises UnsupportedFormatError.

Floats are written with 17 significant digits, which round-trips float64
exactly; reading back a file this module wrote reproduces the object bit for
bit. CSV output uses the same float formatting, a header row, commas and LF
line endings, so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .errors import MatrixMarketError, NonFiniteError, UnsupportedFormatError
from .matrices import DualSparseMatrix

_BANNER = "%%MatrixMarket"


def format_float(x):
    """Round-trip-exact decimal form of a float64."""
    return format(float(x), ".17g")


# ----------------------------------------------------------------------
# writing


def write_matrix_market(path, obj, comment=None):
    """Write a DualSparseMatrix (coordinate) or ndarray (array) to `path`."""
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        if isinstance(obj, DualSparseMatrix):
            fh.write("%s matrix coordinate real general\n" % _BANNER)
            if comment:
                fh.write("%% %s\n" % comment)
            fh.write("%d %d %d\n" % (obj.m, obj.n, obj.nnz))
            for i in range(obj.m):
                lo, hi = obj.row_ptr[i], obj.row_ptr[i + 1]
                for j, v in zip(obj.row_cols[lo:hi], obj.row_vals[lo:hi]):
                    fh.write("%d %d %s\n" % (i + 1, j + 1, format_float(v)))
            return
        arr = np.asarray(obj, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise MatrixMarketError("can only write 1-D or 2-D arrays")
        if not np.isfinite(arr).all():
            raise NonFiniteError("refusing to write non-finite entries")
        fh.write("%s matrix array real general\n" % _BANNER)
        if comment:
            fh.write("%% %s\n" % comment)
        fh.write("%d %d\n" % arr.shape)
        # array format lists entries down each column in turn
        for v in arr.T.ravel():
            fh.write("%s\n" % format_float(v))


def write_vector(path, vec, comment=None):
    write_matrix_market(path, np.asarray(vec, dtype=np.float64).reshape(-1, 1), comment)


# ----------------------------------------------------------------------
# reading


def _parse_float(token, lineno):
    try:
        value = float(token)
    except ValueError:
        raise MatrixMarketError("bad numeric value %r" % token, lineno) from None
    if not math.isfinite(value):
        raise MatrixMarketError("non-finite value %r" % token, lineno)
    return value


def _parse_int(token, lineno):
    try:
        return int(token)
    except ValueError:
        raise MatrixMarketError("bad integer %r" % token, lineno) from None


def read_matrix_market(path):
    """Read one Matrix Market file.

    Returns a DualSparseMatrix for coordinate files and a 2-D ndarray for
    array files.
    """
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()

    header_seen = False
    fmt = None
    body = []  # (lineno, tokens)
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not header_seen:
            if not line.startswith(_BANNER):
                raise MatrixMarketError(
                    "expected header starting with %r" % _BANNER, lineno
                )
            parts = line.split()
            if len(parts) != 5:
                raise MatrixMarketError("header needs 5 tokens, got %d" % len(parts), lineno)
            _, obj, fmt, fieldkind, symmetry = (p.lower() for p in parts)
            if obj != "matrix":
                raise UnsupportedFormatError("unsupported object %r" % obj, lineno)
            if fmt not in ("coordinate", "array"):
                raise UnsupportedFormatError("unsupported format %r" % fmt, lineno)
            if fieldkind not in ("real", "integer"):
                raise UnsupportedFormatError("unsupported field %r" % fieldkind, lineno)
            if symmetry != "general":
                raise UnsupportedFormatError("unsupported symmetry %r" % symmetry, lineno)
            header_seen = True
            continue
        if not line or line.startswith("%"):
            continue
        body.append((lineno, line.split()))

    if not header_seen:
        raise MatrixMarketError("empty file", 1)
    if not body:
        raise MatrixMarketError("missing size line", len(lines) + 1)

    size_lineno, size_tokens = body[0]
    entries = body[1:]

    if fmt == "coordinate":
        if len(size_tokens) != 3:
            raise MatrixMarketError("coordinate size line needs 'm n nnz'", size_lineno)
        m, n, nnz = (_parse_int(t, size_lineno) for t in size_tokens)
        if m < 1 or n < 1 or nnz < 0:
            raise MatrixMarketError("bad dimensions %d %d %d" % (m, n, nnz), size_lineno)
        if len(entries) != nnz:
            raise MatrixMarketError(
                "expected %d entries, found %d" % (nnz, len(entries)),
                size_lineno,
            )
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        for k, (lineno, tokens) in enumerate(entries):
            if len(tokens) != 3:
                raise MatrixMarketError("entry needs 'i j value'", lineno)
            i = _parse_int(tokens[0], lineno)
            j = _parse_int(tokens[1], lineno)
            if not (1 <= i <= m and 1 <= j <= n):
                raise MatrixMarketError(
                    "index (%d, %d) outside %dx%d" % (i, j, m, n), lineno
                )
            rows[k] = i - 1
            cols[k] = j - 1
            vals[k] = _parse_float(tokens[2], lineno)
        return DualSparseMatrix.from_triplets(rows, cols, vals, (m, n))

    # array format
    if len(size_tokens) != 2:
        raise MatrixMarketError("array size line needs 'm n'", size_lineno)
    m, n = (_parse_int(t, size_lineno) for t in size_tokens)
    if m < 1 or n < 1:
        raise MatrixMarketError("bad dimensions %d %d" % (m, n), size_lineno)
    if len(entries) != m * n:
        raise MatrixMarketError(
            "expected %d entries, found %d" % (m * n, len(entries)), size_lineno
        )
    out = np.empty(m * n, dtype=np.float64)
    for k, (lineno, tokens) in enumerate(entries):
        if len(tokens) != 1:
            raise MatrixMarketError("array entry must be a single value", lineno)
        out[k] = _parse_float(tokens[0], lineno)
    return out.reshape((n, m)).T  # stored column-major


def read_vector(path):
    """Read an array-format file that must be a single column."""
    arr = read_matrix_market(path)
    if isinstance(arr, DualSparseMatrix) or arr.shape[1] != 1:
        raise MatrixMarketError("expected a single-column array file: %s" % path)
    return arr[:, 0].copy()


# ----------------------------------------------------------------------
# CSV


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv(path, fieldnames, rows):
    """Write dict rows with deterministic formatting (17-digit floats, LF)."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_csv_cell(row[name]) for name in fieldnames])


def read_csv(path):
    """Read back a CSV written by write_csv, as a list of dicts of strings."""
    with open(path, "r", encoding="ascii", newline="") as fh:
        return list(csv.DictReader(fh))
