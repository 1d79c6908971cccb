"""Plain-text formats for matrices, designs, ensembles and observations.

All complex numbers are written as ``re im`` pairs, one per line, row-major,
using ``repr`` precision so that save/load round trips are exact.
"""

import math
from pathlib import Path

import numpy as np

from .errors import FormatError
from .linalg import check_hermitian


def _fmt(x):
    return repr(float(x))


def _complex_lines(values):
    return [f"{_fmt(z.real)} {_fmt(z.imag)}" for z in np.asarray(values, dtype=complex).ravel()]


def _parse_complex(line, where):
    parts = line.split()
    if len(parts) != 2:
        raise FormatError(f"{where}: expected 're im', got {line!r}")
    try:
        return complex(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise FormatError(f"{where}: {exc}") from None


def _read_lines(path):
    text = Path(path).read_text()
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def parse_q(token):
    token = token.strip().lower()
    if token in ("inf", "infinity", "max"):
        return math.inf
    q = float(token)
    if q not in (1.0, 2.0):
        raise FormatError(f"noise exponent must be 1, 2 or inf, got {token}")
    return q


def format_q(q):
    return "inf" if math.isinf(q) else str(int(q))


# -- Hermitian matrices ------------------------------------------------------

def format_hmat(Z):
    Z = np.asarray(Z, dtype=complex)
    return "\n".join([f"HMAT {Z.shape[0]}", *_complex_lines(Z)]) + "\n"


def save_hmat(path, Z):
    Path(path).write_text(format_hmat(check_hermitian(Z)))


def load_hmat(path):
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "HMAT":
        raise FormatError(f"{path}: expected header 'HMAT n', got {lines[0]!r}")
    n = int(head[1])
    body = lines[1:]
    if len(body) != n * n:
        raise FormatError(f"{path}: expected {n * n} entries, found {len(body)}")
    Z = np.array([_parse_complex(ln, f"{path}:{i + 2}") for i, ln in enumerate(body)])
    return check_hermitian(Z.reshape(n, n))


# -- weighted vector records (designs and ensembles) ------------------------

def _records(weights, vectors):
    out = []
    for p, w in zip(weights, vectors):
        out.append(_fmt(p))
        out.extend(_complex_lines(w))
    return out


def _parse_records(lines, n, count, where):
    if len(lines) != count * (n + 1):
        raise FormatError(f"{where}: expected {count} records of {n + 1} lines, found {len(lines)} lines")
    weights = np.empty(count)
    vectors = np.empty((count, n), dtype=complex)
    for i in range(count):
        block = lines[i * (n + 1) : (i + 1) * (n + 1)]
        try:
            weights[i] = float(block[0])
        except ValueError:
            raise FormatError(f"{where}: record {i}: bad weight {block[0]!r}") from None
        vectors[i] = [_parse_complex(ln, f"{where}: record {i}") for ln in block[1:]]
    return weights, vectors


def format_design(design):
    head = f"DESIGN {design.dim} {len(design.weights)} {design.normalization}"
    return "\n".join([head, *_records(design.weights, design.vectors)]) + "\n"


def read_design_file(path):
    """Parse a design file into ``(n, weights, vectors, mode)`` without validation."""
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "DESIGN":
        raise FormatError(f"{path}: expected header 'DESIGN n N mode', got {lines[0]!r}")
    n, count, mode = int(head[1]), int(head[2]), head[3]
    weights, vectors = _parse_records(lines[1:], n, count, str(path))
    return n, weights, vectors, mode


def format_ensemble(ens):
    head = f"ENS {ens.dim} {ens.count} {_fmt(ens.scaling)} {ens.seed}"
    weights = np.full(ens.count, 1.0 / ens.count)
    return "\n".join([head, *_records(weights, ens.vectors)]) + "\n"


def read_ensemble_file(path):
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 5 or head[0] != "ENS":
        raise FormatError(f"{path}: expected header 'ENS n m scaling seed', got {lines[0]!r}")
    n, m, scaling = int(head[1]), int(head[2]), float(head[3])
    seed = None if head[4] == "None" else int(head[4])
    _, vectors = _parse_records(lines[1:], n, m, str(path))
    return n, m, scaling, seed, vectors


def format_observations(b, q, eta):
    b = np.asarray(b, dtype=float)
    head = f"OBS {len(b)} {format_q(q)} {_fmt(eta)}"
    return "\n".join([head, *(_fmt(x) for x in b)]) + "\n"


def read_observations_file(path):
    lines = _read_lines(path)
    if not lines:
        raise FormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 4 or head[0] != "OBS":
        raise FormatError(f"{path}: expected header 'OBS m q eta', got {lines[0]!r}")
    m, q, eta = int(head[1]), parse_q(head[2]), float(head[3])
    if len(lines) - 1 != m:
        raise FormatError(f"{path}: expected {m} observations, found {len(lines) - 1}")
    try:
        b = np.array([float(x) for x in lines[1:]])
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return b, q, eta
