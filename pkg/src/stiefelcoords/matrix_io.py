"""Reading and writing n-by-p matrices.

Two formats are supported:

* text: whitespace-separated rows, one matrix row per line (``np.savetxt``);
* binary: an 8-byte magic ``b"STIEFEL\\x01"``, then ``n`` and ``p`` as
  little-endian uint64, then ``n * p`` little-endian float64 values in
  column-major order.

The format is chosen from the file suffix (``.bin`` means binary) unless
given explicitly.
"""

import struct
from pathlib import Path

import numpy as np

from .validation import as_float_matrix

MAGIC = b"STIEFEL\x01"
_HEADER = struct.Struct("<8sQQ")
BINARY_SUFFIXES = {".bin", ".stf"}


def _format_for(path, fmt):
    if fmt is not None:
        if fmt not in ("text", "binary"):
            raise ValueError(f"unknown matrix format {fmt!r}")
        return fmt
    return "binary" if Path(path).suffix.lower() in BINARY_SUFFIXES else "text"


def save_matrix(path, X, fmt=None):
    X = as_float_matrix(X)
    if _format_for(path, fmt) == "binary":
        n, p = X.shape
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, n, p))
            fh.write(np.asfortranarray(X).astype("<f8").tobytes(order="F"))
    else:
        np.savetxt(path, X, fmt="%.17g")


def load_matrix(path, fmt=None):
    if _format_for(path, fmt) == "binary":
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise ValueError(f"{path}: truncated header")
        magic, n, p = _HEADER.unpack_from(raw)
        if magic != MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        payload = raw[_HEADER.size:]
        if len(payload) != 8 * n * p:
            raise ValueError(f"{path}: expected {n * p} values, found {len(payload) // 8}")
        X = np.frombuffer(payload, dtype="<f8").reshape((n, p), order="F")
        return np.array(X, dtype=np.float64)
    X = np.loadtxt(path, dtype=np.float64, ndmin=2)
    return as_float_matrix(X)


def load_point(path, fmt=None):
    """Load a Stiefel point and re-orthonormalise it with one QR pass.

    Column signs are fixed so that a point that was already orthonormal
    comes back unchanged up to rounding.
    """
    X = load_matrix(path, fmt)
    if X.shape[1] > X.shape[0]:
        raise ValueError(f"{path}: a point on St(n, p) needs p <= n, got {X.shape}")
    Q, R = np.linalg.qr(X)
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)
