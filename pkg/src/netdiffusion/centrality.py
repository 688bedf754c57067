"""Named special cases of the diffusion recurrence.

Each constructor returns a ``DiffusionModel``; scores are its equilibrium.
Matrices are read row-wise: ``y_i`` draws on ``W[i, j] * y_j``.
"""

from __future__ import annotations

import numpy as np

from .dynamics import DiffusionModel
from .errors import DataError, DimensionError, FJConditionError
from .linalg import as_matrix, as_vector, solve_resolvent

# Float slack allowed when checking the Friedkin-Johnsen conditions.
FJ_TOL = 1e-9


def katz(W, alpha: float) -> DiffusionModel:
    """Katz index: ``y = alpha W y + 1``."""
    if not alpha > 0:
        raise DataError(f"alpha must be positive, got {alpha}")
    W = as_matrix(W, "W")
    return DiffusionModel(alpha * W, np.ones(W.shape[0]))


def bonacich(W, alpha: float, beta: float) -> DiffusionModel:
    """Bonacich power: ``y = beta W y + alpha W 1``; ``beta`` may be negative."""
    if not alpha > 0:
        raise DataError(f"alpha must be positive, got {alpha}")
    W = as_matrix(W, "W")
    return DiffusionModel(beta * W, alpha * W.sum(axis=1))


def salancik(A, M, S) -> DiffusionModel:
    """Salancik power: forcing is ``M S`` (memberships times group importance)."""
    A = as_matrix(A)
    M = as_matrix(M, "M", square=False)
    if M.shape[0] != A.shape[0]:
        raise DimensionError(f"M has {M.shape[0]} rows, A is {A.shape[0]}x{A.shape[0]}")
    S = as_vector(S, "S", M.shape[1])
    return DiffusionModel(A, M @ S)


def row_normalize(adjacency) -> np.ndarray:
    """Divide each row by its sum; all-zero rows stay zero."""
    G = as_matrix(adjacency, "adjacency")
    sums = G.sum(axis=1)
    P = np.zeros_like(G)
    nz = sums != 0
    P[nz] = G[nz] / sums[nz, None]
    return P


def pagerank(adjacency, delta: float) -> DiffusionModel:
    """PageRank-style recurrence ``y = delta P y + (1 - delta) 1``.

    ``P`` is the row-normalized adjacency matrix.  Dangling vertices (zero
    out-rows) keep a zero row instead of being spread uniformly, unlike the
    search-engine convention, so ``delta P`` stays strictly contractive and
    a dangling vertex scores exactly ``1 - delta``.
    """
    if not 0 < delta < 1:
        raise DataError(f"delta must lie in (0, 1), got {delta}")
    P = row_normalize(adjacency)
    return DiffusionModel(delta * P, np.full(P.shape[0], 1.0 - delta))


def check_fj_conditions(G, S_diag, tol: float = FJ_TOL) -> dict[str, str]:
    """Return the violated Friedkin-Johnsen conditions (empty when all hold)."""
    G = as_matrix(G, "G")
    s = as_vector(S_diag, "S_diag", G.shape[0])
    bad = {}
    if np.any(s < -tol) or np.any(s > 1 + tol):
        bad["susceptibility"] = f"S_diag outside [0, 1] at {np.flatnonzero((s < -tol) | (s > 1 + tol)).tolist()}"
    out = (G < -tol) | (G > 1 + tol)
    if np.any(out):
        bad["range"] = f"{int(out.sum())} entries of G outside [0, 1]"
    rows = np.abs(G.sum(axis=1) - 1.0) > tol
    if np.any(rows):
        bad["convexity"] = f"rows {np.flatnonzero(rows).tolist()} of G do not sum to 1"
    selfi = np.abs(np.diag(G) - (1.0 - s)) > tol
    if np.any(selfi):
        bad["self_influence"] = f"G[i,i] != 1 - S[i] at {np.flatnonzero(selfi).tolist()}"
    return bad


def friedkin_johnsen(G, S_diag, y_exo, validate: bool = True) -> DiffusionModel:
    """Friedkin-Johnsen influence: ``A = S G``, ``z = (I - S) y_exo``.

    All violated conditions are collected into one ``FJConditionError``.
    """
    G = as_matrix(G, "G")
    n = G.shape[0]
    s = as_vector(S_diag, "S_diag", n)
    y_exo = as_vector(y_exo, "y_exo", n)
    if validate:
        bad = check_fj_conditions(G, s)
        if bad:
            raise FJConditionError(bad)
    return DiffusionModel(s[:, None] * G, (1.0 - s) * y_exo)


def _nar_parts(W, rho, X, beta):
    W = as_matrix(W, "W")
    X = as_matrix(X, "X", square=False)
    if X.shape[0] != W.shape[0]:
        raise DimensionError(f"X has {X.shape[0]} rows, W is {W.shape[0]}x{W.shape[0]}")
    xb = X @ as_vector(beta, "beta", X.shape[1])
    return rho * W, xb


def nar_correction(W, rho: float, X, beta, D) -> np.ndarray:
    """Drift term ``rho W D X beta`` omitted by the fixed-network NAR mean."""
    A, xb = _nar_parts(W, rho, X, beta)
    D = as_matrix(D, "D")
    if D.shape != A.shape:
        raise DimensionError(f"D is {D.shape}, W is {A.shape}")
    return A @ (D @ xb)


def nar_mean(W, rho: float, X, beta, D=None) -> np.ndarray:
    """Mean of the network autoregressive model, optionally drift-corrected.

    Without ``D``: ``(I - rho W)^{-1} X beta``.  With ``D``, the term
    ``rho W D X beta`` is added.
    """
    A, xb = _nar_parts(W, rho, X, beta)
    base = solve_resolvent(A, xb)
    if D is None:
        return base
    return base + nar_correction(W, rho, X, beta, D)
