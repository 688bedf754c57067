"""Plain-text matrix and vector files.

Matrix: first line ``N`` then ``N`` rows of ``N`` floats.  A header of two
integers ``R C`` declares a rectangular ``R x C`` matrix (membership and
covariate matrices).  Vector: first line ``N`` then ``N`` floats, one per
line.  Lines starting with ``#`` are comments; blank lines are ignored.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import ParseError


def _content_lines(path):
    """Yield ``(lineno, text)`` for non-comment, non-blank lines."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror or exc}", path) from exc
    for i, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s or s.startswith("#"):
            continue
        yield i, s


def _floats(tokens, path, lineno):
    try:
        vals = [float(t) for t in tokens]
    except ValueError:
        raise ParseError(f"expected numbers, got {' '.join(tokens)!r}", path, lineno) from None
    if not all(np.isfinite(vals)):
        raise ParseError("non-finite value", path, lineno)
    return vals


def _header(tokens, path, lineno, max_fields):
    if not 1 <= len(tokens) <= max_fields:
        raise ParseError(f"bad header {' '.join(tokens)!r}", path, lineno)
    try:
        dims = [int(t) for t in tokens]
    except ValueError:
        raise ParseError(f"header must be integer, got {' '.join(tokens)!r}", path, lineno) from None
    if any(d <= 0 for d in dims):
        raise ParseError("dimensions must be positive", path, lineno)
    return dims


def read_matrix(path) -> np.ndarray:
    lines = list(_content_lines(path))
    if not lines:
        raise ParseError("empty file", path)
    lineno, head = lines[0]
    dims = _header(head.split(), path, lineno, 2)
    rows, cols = (dims[0], dims[0]) if len(dims) == 1 else dims
    body = lines[1:]
    if len(body) != rows:
        raise ParseError(f"expected {rows} rows, found {len(body)}", path)
    out = np.empty((rows, cols))
    for r, (lineno, s) in enumerate(body):
        tokens = s.split()
        if len(tokens) != cols:
            raise ParseError(f"row {r + 1} has {len(tokens)} entries, expected {cols}", path, lineno)
        out[r] = _floats(tokens, path, lineno)
    return out


def read_vector(path) -> np.ndarray:
    lines = list(_content_lines(path))
    if not lines:
        raise ParseError("empty file", path)
    lineno, head = lines[0]
    (n,) = _header(head.split(), path, lineno, 1)
    body = lines[1:]
    if len(body) != n:
        raise ParseError(f"expected {n} values, found {len(body)}", path)
    vals = []
    for lineno, s in body:
        tokens = s.split()
        if len(tokens) != 1:
            raise ParseError("expected one value per line", path, lineno)
        vals.extend(_floats(tokens, path, lineno))
    return np.array(vals)


def _fmt(x: float) -> str:
    # shortest repr that round-trips exactly
    return repr(float(x))


def write_matrix(path, A, comment: str | None = None) -> None:
    A = np.asarray(A, dtype=float)
    rows, cols = A.shape
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(str(rows) if rows == cols else f"{rows} {cols}")
    out.extend(" ".join(_fmt(x) for x in row) for row in A)
    Path(path).write_text("\n".join(out) + "\n")


def write_vector(path, v, comment: str | None = None) -> None:
    v = np.asarray(v, dtype=float).reshape(-1)
    out = []
    if comment:
        out.extend(f"# {c}" for c in comment.splitlines())
    out.append(str(v.size))
    out.extend(_fmt(x) for x in v)
    Path(path).write_text("\n".join(out) + "\n")


def write_trajectory(path, states) -> None:
    """States as a ``(T+1) x N`` table: header ``S N`` then one state per row."""
    states = np.asarray(states, dtype=float)
    s, n = states.shape
    out = ["# trajectory: one state per row, row 0 is the initial condition", f"{s} {n}"]
    out.extend(" ".join(_fmt(x) for x in row) for row in states)
    Path(path).write_text("\n".join(out) + "\n")


def read_trajectory(path) -> np.ndarray:
    lines = list(_content_lines(path))
    if not lines:
        raise ParseError("empty file", path)
    lineno, head = lines[0]
    dims = _header(head.split(), path, lineno, 2)
    if len(dims) != 2:
        raise ParseError("trajectory header must be 'S N'", path, lineno)
    return read_matrix(path)
