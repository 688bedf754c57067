"""Forced linear diffusion ``y_t = A_t y_{t-1} + z`` on fixed and changing networks.

Three ways of getting at the state are provided:

* direct iteration (``run_fixed``, ``run_dynamic``), the ground truth;
* closed forms (``unroll_fixed``, ``unroll_dynamic``) written as memory and
  forcing terms;
* approximations that need no history: the fixed-network ``equilibrium``
  and the first-order ``perturbative`` correction for slow drift.

Two choices differ from how the formulas are sometimes printed.  The
equilibrium factor in the perturbative solution is ``(I - A_t)^{-1}``, which
is what the underlying power series ``I + A_t + A_t^2 + ...`` sums to.  The
forcing term of the k-step unrolling stops at a product of ``k - 1``
matrices, ``F = I + A_t + A_t A_{t-1} + ... + A_t...A_{t-k+2}``, which is
what iterating the recurrence produces.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError, DimensionError, NonConvergentModelError, StabilityWarning, RegimeWarning
from .linalg import SPECTRAL_TOL, as_matrix, as_vector, max_singular_value, solve_linear, solve_resolvent, spectral_radius

# Fixed-point residual that equilibrium() results are expected to meet.
FIXED_POINT_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiffusionModel:
    """A weight matrix ``A`` and forcing vector ``z``."""

    A: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        A = as_matrix(self.A)
        z = as_vector(self.z, n=A.shape[0])
        object.__setattr__(self, "A", _frozen(A))
        object.__setattr__(self, "z", _frozen(z))

    @property
    def n(self) -> int:
        return self.A.shape[0]


@dataclass(frozen=True)
class Trajectory:
    """States ``y_0 .. y_T`` stacked row-wise; row 0 is the initial condition."""

    states: np.ndarray = field(repr=False)

    def __post_init__(self):
        s = np.array(self.states, dtype=float)
        if s.ndim != 2 or s.shape[0] < 1:
            raise DimensionError(f"trajectory states must be 2-D, got shape {s.shape}")
        object.__setattr__(self, "states", _frozen(s))

    @property
    def step_count(self) -> int:
        return self.states.shape[0] - 1

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def __len__(self) -> int:
        return self.states.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.states[i]


def step(A, y, z) -> np.ndarray:
    """One update: ``A y + z``."""
    A = as_matrix(A)
    n = A.shape[0]
    return A @ as_vector(y, "y", n) + as_vector(z, "z", n)


def run_fixed(model: DiffusionModel, y0, t: int) -> Trajectory:
    """Iterate ``y <- A y + z`` for ``t`` steps from ``y0``."""
    if t < 1:
        raise DataError(f"t must be >= 1, got {t}")
    A, z = model.A, model.z
    y = as_vector(y0, "y0", model.n)
    states = np.empty((t + 1, model.n))
    states[0] = y
    for i in range(1, t + 1):
        y = A @ y + z
        states[i] = y
    return Trajectory(states)


def unroll_fixed(model: DiffusionModel, y0, t: int) -> np.ndarray:
    """Closed form ``A^t y0 + (I + A + ... + A^{t-1}) z``."""
    if t < 1:
        raise DataError(f"t must be >= 1, got {t}")
    A = model.A
    memory = as_vector(y0, "y0", model.n)
    for _ in range(t):
        memory = A @ memory
    # Horner: z + A(z + A(z + ...)) with t - 1 nestings
    forcing = model.z.copy()
    for _ in range(t - 1):
        forcing = model.z + A @ forcing
    return memory + forcing


def _as_sequence(seq, n: int | None = None) -> list[np.ndarray]:
    mats = [as_matrix(A, name=f"A[{i}]") for i, A in enumerate(seq)]
    if not mats:
        raise DataError("weight sequence is empty")
    n = mats[0].shape[0] if n is None else n
    for i, A in enumerate(mats):
        if A.shape[0] != n:
            raise DimensionError(f"A[{i}] is {A.shape[0]}x{A.shape[0]}, expected {n}x{n}")
    return mats


def run_dynamic(seq: Sequence, z, y0) -> Trajectory:
    """Iterate ``y_i = A_i y_{i-1} + z`` over the matrices of ``seq`` in order."""
    mats = _as_sequence(seq)
    n = mats[0].shape[0]
    z = as_vector(z, "z", n)
    y = as_vector(y0, "y0", n)
    states = np.empty((len(mats) + 1, n))
    states[0] = y
    for i, A in enumerate(mats, start=1):
        y = A @ y + z
        states[i] = y
    return Trajectory(states)


def unroll_dynamic(seq: Sequence, z, y_past) -> np.ndarray:
    """Closed form of ``y_t`` from ``y_{t-k}`` and the weights ``A_{t-k+1} .. A_t``.

    ``seq`` is ordered oldest first.  Returns ``M y_past + F z`` with
    ``M = A_t ... A_{t-k+1}`` and ``F = I + A_t + A_t A_{t-1} + ... +
    A_t ... A_{t-k+2}``; both are applied as matrix-vector products.
    """
    mats = _as_sequence(seq)
    n = mats[0].shape[0]
    z = as_vector(z, "z", n)
    memory = as_vector(y_past, "y_past", n)
    for A in mats:
        memory = A @ memory
    # F z = z + A_t (z + A_{t-1} (z + ... (z + A_{t-k+2} z)))
    forcing = z.copy()
    for A in mats[1:]:
        forcing = z + A @ forcing
    return memory + forcing


def equilibrium(model: DiffusionModel, allow_nonconvergent: bool = False) -> np.ndarray:
    """Fixed point ``(I - A)^{-1} z`` of the static recurrence.

    Refuses with ``NonConvergentModelError`` when ``rho(A) >= 1``: the
    algebraic solution may exist but is not where the iteration goes.  Pass
    ``allow_nonconvergent=True`` to get the algebraic solve anyway.
    """
    if not allow_nonconvergent:
        rho = spectral_radius(model.A)
        # rho is only known to SPECTRAL_TOL; a borderline value is not convergent
        if rho >= 1.0 - SPECTRAL_TOL:
            raise NonConvergentModelError(rho)
    return solve_resolvent(model.A, model.z)


def estimate_drift(A_prev, A_now) -> np.ndarray:
    """One-step backward difference ``A_prev - A_now``."""
    P = as_matrix(A_prev, "A_prev")
    N = as_matrix(A_now, "A_now")
    if P.shape != N.shape:
        raise DimensionError(f"A_prev is {P.shape}, A_now is {N.shape}")
    return P - N


def perturbative(A_t, D, z, warn: bool = True) -> np.ndarray:
    """Near-equilibrium state under slow drift: ``(I - A_t)^{-1} z + A_t D z``.

    ``D`` is the backward drift ``A_{t-1} - A_t``.  Only the single
    ``A_t D z`` correction is kept.  A ``RegimeWarning`` is issued when
    ``sigma_max(D) >= sigma_max(A_t)``, i.e. the drift is not small.
    """
    A = as_matrix(A_t, "A_t")
    n = A.shape[0]
    D = as_matrix(D, "D")
    if D.shape != A.shape:
        raise DimensionError(f"D is {D.shape}, A_t is {A.shape}")
    z = as_vector(z, "z", n)
    if warn and np.any(D):
        sd, sa = max_singular_value(D), max_singular_value(A)
        if sd >= sa:
            warnings.warn(
                f"drift is not small: sigma_max(D)={sd:.4g} >= sigma_max(A_t)={sa:.4g}",
                RegimeWarning,
                stacklevel=2,
            )
    return solve_resolvent(A, z) + A @ (D @ z)


@dataclass(frozen=True)
class RegimeReport:
    sigma_A: float
    sigma_D: float
    first_order_norm: float  # ||A_t D z||_2, the applied correction
    second_order_norm: float  # ||A_t^2 D z||_2, dropped
    slow: bool  # sigma_D < sigma_A < 1


def regime_diagnostics(A_t, D, z) -> RegimeReport:
    """Magnitudes used to judge whether the perturbative solution is in regime.

    The ``A_t^2 D z`` term is reported only; it is never added to the
    perturbative state.
    """
    A = as_matrix(A_t, "A_t")
    D = as_matrix(D, "D")
    if D.shape != A.shape:
        raise DimensionError(f"D is {D.shape}, A_t is {A.shape}")
    z = as_vector(z, "z", A.shape[0])
    sa, sd = max_singular_value(A), max_singular_value(D)
    first = A @ (D @ z)
    second = A @ first
    return RegimeReport(
        sigma_A=sa,
        sigma_D=sd,
        first_order_norm=float(np.linalg.norm(first)),
        second_order_norm=float(np.linalg.norm(second)),
        slow=bool(sd < sa < 1.0),
    )


def is_hurwitz(A) -> bool:
    """True when every eigenvalue of ``A`` has negative real part."""
    return bool(np.all(np.linalg.eigvals(as_matrix(A)).real < 0))


def ode_equilibrium(model: DiffusionModel) -> np.ndarray:
    """Fixed point ``-A^{-1} z`` of ``dy/dt = A y + z``.

    Stability is checked but not enforced: a ``StabilityWarning`` is issued
    when ``A`` has an eigenvalue with non-negative real part.
    """
    if not is_hurwitz(model.A):
        warnings.warn(
            "A has an eigenvalue with non-negative real part; the fixed point is not attracting",
            StabilityWarning,
            stacklevel=2,
        )
    return solve_linear(model.A, -model.z)
