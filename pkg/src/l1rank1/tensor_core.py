"""Dense tensor primitives with Matlab-style (column-major) reshapes.

Tensors are plain ``numpy.ndarray`` objects. Every reshape in this package
uses ``order='F'`` so that the first index varies fastest, which is what the
unfolding chain of the approximation algorithms relies on. Mode indices are
0-based in the Python API; the ``.dten`` file format is 1-based only in the
sense that it lists ``n_1 ... n_d`` in order.
"""

from __future__ import annotations

import struct
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "as_tensor",
    "reshape_to_matrix",
    "mode_unfolding",
    "mat_vec_left",
    "multilinear_value",
    "contract_except",
    "read_dten",
    "write_dten",
    "read_dten_binary",
    "write_dten_binary",
]

_BINARY_MAGIC = b"DTEN\x00\x01\x00\x00"
_BINARY_VERSION = 1


def as_tensor(t, min_order: int = 1) -> np.ndarray:
    """Validate ``t`` and return it as a Fortran-ordered float64 array.

    Fortran memory order makes every column-major reshape a view.
    """
    arr = np.asarray(t, dtype=np.float64)
    if arr.ndim < min_order:
        raise ValueError(f"expected a tensor of order >= {min_order}, got order {arr.ndim}")
    if any(n < 1 for n in arr.shape):
        raise ValueError(f"every dimension must be >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("tensor contains NaN or infinite entries")
    return np.asfortranarray(arr)


def reshape_to_matrix(t: np.ndarray, rows: int, cols: int) -> np.ndarray:
    """Column-major reshape of ``t`` to a ``rows x cols`` matrix.

    No element is reordered: entry ``k`` of the column-major linearisation of
    ``t`` becomes entry ``k`` of the column-major linearisation of the result.
    """
    t = np.asarray(t)
    if rows < 1 or cols < 1 or rows * cols != t.size:
        raise ValueError(f"cannot reshape {t.size} elements into ({rows}, {cols})")
    return np.reshape(t, (rows, cols), order="F")


def mode_unfolding(t: np.ndarray, mode: int) -> np.ndarray:
    """Mode-``mode`` unfolding (0-based) of ``t``.

    Row ``i`` collects all entries whose ``mode``-th index equals ``i``; the
    remaining indices are laid out in column-major order of the remaining
    modes.
    """
    t = np.asarray(t)
    if not 0 <= mode < t.ndim:
        raise ValueError(f"mode {mode} out of range for an order-{t.ndim} tensor")
    moved = np.moveaxis(t, mode, 0)
    return np.reshape(moved, (t.shape[mode], -1), order="F")


def mat_vec_left(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Return ``M.T @ x``."""
    M = np.asarray(M)
    x = np.asarray(x)
    if M.ndim != 2 or x.ndim != 1 or M.shape[0] != x.shape[0]:
        raise ValueError(f"shape mismatch: matrix {M.shape} with vector {x.shape}")
    return M.T @ x


def _check_vectors(shape: Sequence[int], xs: Sequence[np.ndarray]) -> list[np.ndarray]:
    if len(xs) != len(shape):
        raise ValueError(f"expected {len(shape)} vectors, got {len(xs)}")
    out = []
    for j, (n, x) in enumerate(zip(shape, xs)):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (n,):
            raise ValueError(f"vector {j} has shape {x.shape}, expected ({n},)")
        out.append(x)
    return out


def multilinear_value(t: np.ndarray, xs: Sequence[np.ndarray]) -> float:
    """Inner product of ``t`` with the rank-1 tensor ``xs[0] o ... o xs[-1]``.

    Evaluated by the reshape chain: contract mode 1, reshape the result to
    ``n_2 x rest``, contract mode 2, and so on.
    """
    t = np.asarray(t, dtype=np.float64)
    xs = _check_vectors(t.shape, xs)
    v = np.ravel(t, order="F")
    for x in xs[:-1]:
        v = reshape_to_matrix(v, x.shape[0], v.size // x.shape[0]).T @ x
    return float(v @ xs[-1])


def contract_except(t: np.ndarray, xs: Sequence[np.ndarray], mode: int) -> np.ndarray:
    """Contract ``t`` with every ``xs[k]``, ``k != mode``; returns a vector of length ``n_mode``.

    ``xs[mode]`` is ignored and may be ``None``.
    """
    t = np.asarray(t, dtype=np.float64)
    d = t.ndim
    if not 0 <= mode < d or len(xs) != d:
        raise ValueError("mode out of range or wrong number of vectors")
    v = np.ravel(t, order="F")
    # leading modes: first index fastest, so contract from the front
    for k in range(mode):
        n = t.shape[k]
        v = reshape_to_matrix(v, n, v.size // n).T @ np.asarray(xs[k], dtype=np.float64)
    # trailing modes: last index slowest, so contract from the back
    for k in range(d - 1, mode, -1):
        n = t.shape[k]
        v = reshape_to_matrix(v, v.size // n, n) @ np.asarray(xs[k], dtype=np.float64)
    return v


# ---------------------------------------------------------------------------
# .dten I/O
# ---------------------------------------------------------------------------


def write_dten(path, t: np.ndarray) -> None:
    """Write ``t`` in the text ``.dten`` format (17 significant digits)."""
    t = np.asarray(t, dtype=np.float64)
    lines = [str(t.ndim), " ".join(str(n) for n in t.shape)]
    lines.extend(f"{v:.17g}" for v in np.ravel(t, order="F"))
    Path(path).write_text("\n".join(lines) + "\n")


def read_dten(path) -> np.ndarray:
    """Read a text ``.dten`` file; raises ``ValueError`` on malformed content."""
    tokens = Path(path).read_text().split()
    if not tokens:
        raise ValueError(f"{path}: empty file")
    try:
        d = int(tokens[0])
        if d < 1 or len(tokens) < 1 + d:
            raise ValueError
        shape = tuple(int(s) for s in tokens[1 : 1 + d])
        values = np.array([float(s) for s in tokens[1 + d :]], dtype=np.float64)
    except ValueError:
        raise ValueError(f"{path}: malformed .dten header or values") from None
    if any(n < 1 for n in shape):
        raise ValueError(f"{path}: dimensions must be positive, got {shape}")
    if values.size != int(np.prod(shape)):
        raise ValueError(f"{path}: expected {int(np.prod(shape))} values, found {values.size}")
    return np.reshape(values, shape, order="F")


def write_dten_binary(path, t: np.ndarray) -> None:
    """Binary variant: 8-byte magic, u32 version, u32 order, u64 dims, f64 payload (little-endian)."""
    t = np.asarray(t, dtype=np.float64)
    header = _BINARY_MAGIC + struct.pack("<II", _BINARY_VERSION, t.ndim)
    dims = struct.pack(f"<{t.ndim}Q", *t.shape)
    payload = np.ravel(t, order="F").astype("<f8").tobytes()
    Path(path).write_bytes(header + dims + payload)


def read_dten_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:8] != _BINARY_MAGIC:
        raise ValueError(f"{path}: not a binary .dten file")
    version, d = struct.unpack("<II", raw[8:16])
    if version != _BINARY_VERSION:
        raise ValueError(f"{path}: unsupported version {version}")
    end = 16 + 8 * d
    shape = struct.unpack(f"<{d}Q", raw[16:end])
    values = np.frombuffer(raw[end:], dtype="<f8")
    if values.size != int(np.prod(shape)):
        raise ValueError(f"{path}: payload size does not match dimensions")
    return np.reshape(values.astype(np.float64), shape, order="F")
