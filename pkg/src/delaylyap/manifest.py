"""System manifest files.

A manifest is a JSON document with fields ``n``, ``m``, ``delays`` and the
matrices ``A0`` .. ``Am``, ``B``, ``C``. Each matrix is either an inline
dense array (nested rows, or a flat row-major list) or a relative path to
a Matrix Market file (``%%MatrixMarket matrix coordinate real general`` or
the array variant).
"""

import json
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

from .errors import ManifestError
from .model import DelaySystem


def _decode_matrix(value, rows, cols, base_dir, label):
    if isinstance(value, str):
        path = Path(base_dir) / value
        if not path.exists():
            raise ManifestError(f"{label}: matrix file {path} does not exist")
        try:
            M = scipy.io.mmread(path)
        except Exception as exc:
            raise ManifestError(f"{label}: failed to read Matrix Market file {path}: {exc}")
        return M.tocsr() if sp.issparse(M) else np.asarray(M, dtype=float)
    arr = np.asarray(value, dtype=float)
    if arr.ndim == 1:
        if cols is None:
            if rows is None or arr.size % rows:
                raise ManifestError(
                    f"{label}: flat array of length {arr.size} does not tile {rows} rows"
                )
            cols = arr.size // rows
        if rows is None or arr.size != rows * cols:
            raise ManifestError(
                f"{label}: flat array of length {arr.size}, expected {rows} x {cols}"
            )
        return arr.reshape(rows, cols)
    if arr.ndim != 2:
        raise ManifestError(f"{label}: expected a matrix, got ndim = {arr.ndim}")
    return arr


def load_manifest(path):
    """Parse a manifest file into a (not yet validated) DelaySystem."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest {path}: {exc}")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}")
    if not isinstance(doc, dict):
        raise ManifestError(f"{path}: manifest must be a JSON object")
    for key in ("n", "m", "delays", "B", "C"):
        if key not in doc:
            raise ManifestError(f"{path}: missing required field {key!r}")
    try:
        n = int(doc["n"])
        m = int(doc["m"])
    except (TypeError, ValueError):
        raise ManifestError(f"{path}: fields 'n' and 'm' must be integers")
    delays = doc["delays"]
    if not isinstance(delays, (list, tuple)) or len(delays) != m:
        raise ManifestError(f"{path}: 'delays' must be an array of length m = {m}")
    base = path.parent
    A = []
    for i in range(m + 1):
        key = f"A{i}"
        if key not in doc:
            raise ManifestError(f"{path}: missing coefficient matrix {key!r}")
        A.append(_decode_matrix(doc[key], n, n, base, f"{path}: {key}"))
    B = _decode_matrix(doc["B"], n, None, base, f"{path}: B")
    C_raw = doc["C"]
    if isinstance(C_raw, list) and C_raw and not isinstance(C_raw[0], (list, tuple, str)):
        # Flat C is row-major with n columns.
        arr = np.asarray(C_raw, dtype=float)
        if arr.size % n:
            raise ManifestError(f"{path}: C: flat array of length {arr.size} does not tile {n} columns")
        C = arr.reshape(arr.size // n, n)
    else:
        C = _decode_matrix(C_raw, None, n, base, f"{path}: C")
    try:
        return DelaySystem(A=tuple(A), taus=tuple(float(t) for t in delays), B=B, C=C)
    except (TypeError, ValueError) as exc:
        raise ManifestError(f"{path}: {exc}")
