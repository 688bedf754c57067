"""Dense matrix primitives: validation, spectral estimates and resolvent solves.

Everything here is a pure function of its inputs. Arrays handed back are
fresh; inputs are never modified.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy import linalg as sla

from .errors import ConvergenceError, DataError, DimensionError, SingularSystemError

# Absolute accuracy expected of spectral_radius / max_singular_value.
SPECTRAL_TOL = 1e-8
# Relative residual contract of solve_resolvent: ||(I-A)x - z||_inf <= tol * max(1, ||z||_inf).
RESIDUAL_TOL = 1e-10
# Reciprocal condition numbers below this are treated as singular.
RCOND_FLOOR = np.finfo(float).eps


def as_matrix(A, name: str = "A", square: bool = True) -> np.ndarray:
    """Return ``A`` as a finite 2-D float array (a copy)."""
    M = np.array(A, dtype=float)
    if M.ndim != 2 or M.shape[0] == 0 or M.shape[1] == 0:
        raise DimensionError(f"{name} must be a non-empty 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError(f"{name} has non-finite entries")
    return M


def as_vector(z, name: str = "z", n: int | None = None) -> np.ndarray:
    """Return ``z`` as a finite 1-D float array (a copy), optionally of length ``n``."""
    v = np.array(z, dtype=float)
    if v.ndim == 2 and 1 in v.shape:
        v = v.reshape(-1)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"{name} must be a non-empty vector, got shape {v.shape}")
    if n is not None and v.size != n:
        raise DimensionError(f"{name} has length {v.size}, expected {n}")
    if not np.all(np.isfinite(v)):
        raise DataError(f"{name} has non-finite entries")
    return v


def spectral_radius(A) -> float:
    """Largest eigenvalue modulus of ``A``.

    Uses the general (Hessenberg QR) eigenvalue routine, so complex dominant
    eigenvalues of directed graphs are handled; the modulus is taken last.
    """
    M = as_matrix(A)
    try:
        ev = np.linalg.eigvals(M)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigenvalue iteration did not converge: {exc}") from exc
    return float(np.max(np.abs(ev)))


def max_singular_value(A) -> float:
    """Largest singular value (spectral 2-norm) of ``A``."""
    M = as_matrix(A)
    try:
        s = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"singular value iteration did not converge: {exc}") from exc
    return float(s[0])


def _lu_solve_checked(M: np.ndarray, z: np.ndarray, what: str) -> np.ndarray:
    anorm = np.linalg.norm(M, 1)
    with warnings.catch_warnings():
        # exact singularity is detected below through the condition estimate
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(M, check_finite=False)
    if not np.all(np.isfinite(lu)) or np.any(np.diag(lu) == 0.0):
        raise SingularSystemError(f"{what} is singular", np.inf)
    rcond, info = sla.lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or not np.isfinite(rcond) or rcond < RCOND_FLOOR:
        cond = np.inf if rcond == 0 else 1.0 / rcond
        raise SingularSystemError(f"{what} is numerically singular", cond)
    return sla.lu_solve((lu, piv), z, check_finite=False)


def solve_resolvent(A, z) -> np.ndarray:
    """Solve ``(I - A) x = z`` by LU with partial pivoting.

    Raises ``SingularSystemError`` (carrying the condition estimate) when
    ``I - A`` is singular to working precision.
    """
    M = as_matrix(A)
    v = as_vector(z, n=M.shape[0])
    return _lu_solve_checked(np.eye(M.shape[0]) - M, v, "I - A")


def solve_linear(A, b) -> np.ndarray:
    """Solve ``A x = b`` with the same singularity contract as ``solve_resolvent``."""
    M = as_matrix(A)
    v = as_vector(b, name="b", n=M.shape[0])
    return _lu_solve_checked(M, v, "A")


def neumann_partial_sum(A, z, k: int) -> np.ndarray:
    """``(I + A + ... + A^k) z`` by repeated matrix-vector products."""
    if k < 0:
        raise DataError(f"k must be non-negative, got {k}")
    M = as_matrix(A)
    term = as_vector(z, n=M.shape[0])
    acc = term.copy()
    for _ in range(k):
        term = M @ term
        acc += term
    return acc


def resolvent_residual(A, x, z) -> float:
    """``||(I - A) x - z||_inf``."""
    M = as_matrix(A)
    x = as_vector(x, name="x", n=M.shape[0])
    v = as_vector(z, n=M.shape[0])
    return float(np.max(np.abs(x - M @ x - v)))
