"""Exact numerics on the full master equation.

Steady states, time evolution, reduced cavity states, photon distributions,
expectation values, and Wigner functions.  These provide the independent
check against the closed-form theory in :mod:`heatlaser.photonstats`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .core import HilbertSpace, build_liouvillian
from .models import FOUR_LEVEL, EngineModel
from .photonstats import PhotonDistribution

__all__ = [
    "SteadyStateResult",
    "SteadyStateError",
    "WignerField",
    "steady_state",
    "evolve",
    "partial_trace_atom",
    "photon_distribution",
    "expectation",
    "wigner",
    "solve_model",
    "DEFAULT_N_MAX",
]

# default Fock truncations; the tail is validated post hoc with retry
DEFAULT_N_MAX = {False: 40, True: 60}


class SteadyStateError(RuntimeError):
    """Raised when no steady state reaches the requested residual."""

    def __init__(self, message, best_residual=None):
        super().__init__(message)
        self.best_residual = best_residual


@dataclass(frozen=True)
class SteadyStateResult:
    """A steady state with its defect |L[rho]|_inf and the producing method."""

    state: np.ndarray
    residual: float
    method: str


@dataclass(frozen=True)
class WignerField:
    """Wigner quasi-probability sampled on a rectangular phase-space grid."""

    re_axis: np.ndarray
    im_axis: np.ndarray
    values: np.ndarray


def _system_dim(liouv):
    n2 = liouv.shape[0]
    d = math.isqrt(n2)
    if d * d != n2 or liouv.shape[0] != liouv.shape[1]:
        raise ValueError(f"Liouvillian shape {liouv.shape} is not a squared square")
    return d


def _residual(liouv, rho):
    return float(np.abs(liouv @ rho.reshape(-1)).max())


def _nullspace_solve(liouv, d):
    """Solve L x = 0 with the first row replaced by the trace constraint."""
    coo = liouv.tocoo()
    keep = coo.row != 0
    rows = np.concatenate([coo.row[keep], np.zeros(d, dtype=coo.row.dtype)])
    cols = np.concatenate([coo.col[keep], np.arange(0, d * d, d + 1)])
    data = np.concatenate([coo.data[keep], np.ones(d, dtype=complex)])
    mat = sp.csc_matrix((data, (rows, cols)), shape=liouv.shape)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    x = splu(mat).solve(rhs)
    rho = x.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def _default_dt(liouv):
    rate = float(np.abs(liouv.diagonal()).max())
    return 0.09 / rate if rate > 0 else 0.1


def _rk4_step(liouv, vec, dt):
    k1 = liouv @ vec
    k2 = liouv @ (vec + 0.5 * dt * k1)
    k3 = liouv @ (vec + 0.5 * dt * k2)
    k4 = liouv @ (vec + dt * k3)
    return vec + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _evolution_solve(liouv, d, tol, rho0=None, max_steps=2_000_000, check_every=250):
    if rho0 is None:
        rho0 = np.zeros((d, d), dtype=complex)
        rho0[0, 0] = 1.0
    vec = rho0.reshape(-1).astype(complex)
    dt = _default_dt(liouv)
    best = float(np.abs(liouv @ vec).max())
    steps = 0
    while steps < max_steps:
        for _ in range(check_every):
            vec = _rk4_step(liouv, vec, dt)
        steps += check_every
        res = float(np.abs(liouv @ vec).max())
        best = min(best, res)
        if res < tol:
            break
    rho = vec.reshape(d, d)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / np.trace(rho).real
    return rho, best


def steady_state(
    liouv: sp.spmatrix,
    method: str = "auto",
    tol: float = 1e-9,
    evolution_tol: float = 1e-10,
    rho0: np.ndarray | None = None,
) -> SteadyStateResult:
    """Stationary density matrix of a Liouvillian.

    ``method`` selects the route: ``"nullspace"`` solves the sparse linear
    system with one row replaced by the trace constraint (LU factorization),
    ``"evolution"`` integrates drho/dt = L[rho] until the derivative norm
    falls below ``evolution_tol``, and ``"auto"`` tries the null-space route
    first and falls back to evolution.  Raises :class:`SteadyStateError` with
    the best residual when neither route reaches ``tol``.
    """
    if method not in ("auto", "nullspace", "evolution"):
        raise ValueError(f"unknown method {method!r}")
    d = _system_dim(liouv)
    if method in ("auto", "nullspace"):
        rho = None
        try:
            rho = _nullspace_solve(liouv, d)
        except RuntimeError as exc:  # singular factorization
            if method == "nullspace":
                raise SteadyStateError(f"null-space solve failed: {exc}") from exc
        if rho is not None:
            res = _residual(liouv, rho)
            if res < tol:
                return SteadyStateResult(rho, res, "nullspace")
            if method == "nullspace":
                raise SteadyStateError(
                    f"null-space solve stalled at residual {res:.3e}", res
                )
    rho, res = _evolution_solve(liouv, d, evolution_tol, rho0=rho0)
    if res >= tol:
        raise SteadyStateError(
            f"time evolution stalled at residual {res:.3e} (tol {tol:.1e})", res
        )
    return SteadyStateResult(rho, res, "evolution")


def evolve(
    liouv: sp.spmatrix, rho0: np.ndarray, t_final: float, dt: float
) -> np.ndarray:
    """Propagate rho0 for t_final with fixed-step 4th-order Runge-Kutta.

    The step must resolve the stiffest rate: dt * max|diag L| < 0.1 is
    enforced.  Warns if the trace drifts by more than 1e-8 over the run.
    """
    d = _system_dim(liouv)
    if rho0.shape != (d, d):
        raise ValueError(f"state shape {rho0.shape} does not match dimension {d}")
    if dt <= 0 or t_final < 0:
        raise ValueError("dt must be positive and t_final non-negative")
    stiffest = float(np.abs(liouv.diagonal()).max())
    if dt * stiffest >= 0.1:
        raise ValueError(
            f"dt {dt} too large for stiffest rate {stiffest:.3g} "
            f"(need dt * rate < 0.1)"
        )
    steps = int(round(t_final / dt))
    vec = rho0.reshape(-1).astype(complex)
    trace0 = complex(np.trace(rho0)).real
    for _ in range(steps):
        vec = _rk4_step(liouv, vec, dt)
    rho = vec.reshape(d, d)
    drift = abs(np.trace(rho).real - trace0)
    if drift > 1e-8:
        warnings.warn(f"trace drifted by {drift:.3e} during evolution", stacklevel=2)
    return rho


def partial_trace_atom(rho: np.ndarray, space: HilbertSpace) -> np.ndarray:
    """Reduced cavity state, tracing out the atom factor."""
    d = space.total_dim
    if rho.shape != (d, d):
        raise ValueError(f"state shape {rho.shape} does not match space dim {d}")
    blocks = rho.reshape(space.atom_dim, space.fock_dim, space.atom_dim, space.fock_dim)
    return np.einsum("aman->mn", blocks)


def photon_distribution(
    rho: np.ndarray, space: HilbertSpace, tail_tol: float = 1e-6
) -> PhotonDistribution:
    """Photon-number distribution of the cavity, P_n = <n| tr_atom rho |n>.

    Tiny negative diagonal entries from round-off are clipped; the vector is
    renormalized.  Warns when the truncation rung still carries more than
    ``tail_tol`` probability.
    """
    reduced = partial_trace_atom(rho, space)
    p = np.clip(np.real(np.diag(reduced)), 0.0, None)
    total = p.sum()
    if total <= 0:
        raise ValueError("state carries no photon-number probability")
    p = p / total
    if p[-1] >= tail_tol:
        warnings.warn(
            f"truncation rung holds P[{space.n_max}] = {p[-1]:.3e}; "
            "increase the Fock cutoff",
            stacklevel=2,
        )
    return PhotonDistribution(p)


def expectation(rho: np.ndarray, operator: np.ndarray) -> complex:
    """tr(rho O); real up to round-off for Hermitian O."""
    if rho.shape != operator.shape:
        raise ValueError(f"shape mismatch {rho.shape} vs {operator.shape}")
    return complex(np.einsum("ij,ji->", rho, operator))


def wigner(
    cavity_rho: np.ndarray,
    re_axis: np.ndarray | None = None,
    im_axis: np.ndarray | None = None,
) -> WignerField:
    """Wigner function by displaced parity, W(a) = (2/pi) tr[rho D(a) P D+(a)].

    D(a) is the displacement operator and P the photon-number parity.  The
    state is first embedded in a padded Fock space so that displacements up
    to the grid radius do not wrap around the truncation.  Real displacements
    come from one eigendecomposition of -i(a+ - a); a phase-space rotation
    (exact, the number operator is diagonal) supplies the complex ones, so
    each grid point costs two small matrix products.  Default grid:
    101 x 101 over [-4, 4]^2.
    """
    fock = cavity_rho.shape[0]
    if cavity_rho.shape != (fock, fock):
        raise ValueError("cavity state must be a square matrix")
    if re_axis is None:
        re_axis = np.linspace(-4.0, 4.0, 101)
    if im_axis is None:
        im_axis = np.linspace(-4.0, 4.0, 101)
    re_axis = np.asarray(re_axis, dtype=float)
    im_axis = np.asarray(im_axis, dtype=float)

    mean_n = float(np.real(np.arange(fock) @ np.diag(cavity_rho)))
    radius = float(max(np.abs(re_axis).max(), np.abs(im_axis).max()))
    if radius < 1.2 * math.sqrt(mean_n + 1.0):
        warnings.warn(
            f"grid radius {radius:.2f} small for a state with <n> = {mean_n:.2f}",
            stacklevel=2,
        )

    # displacing by r pushes support up by ~r^2 + 2 r sqrt(n); pad the space
    # so the displaced state still fits
    dim = max(fock, math.ceil(1.3 * (radius**2 + fock)) + 8)
    state = np.zeros((dim, dim), dtype=complex)
    state[:fock, :fock] = cavity_rho
    levels = np.arange(dim)
    lowering = np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)
    generator = -1j * (lowering.conj().T - lowering)  # Hermitian
    eigvals, eigvecs = np.linalg.eigh(generator)
    parity = (-1.0) ** levels

    values = np.empty((im_axis.size, re_axis.size))
    for iy, y in enumerate(im_axis):
        for ix, x in enumerate(re_axis):
            r = math.hypot(x, y)
            theta = math.atan2(y, x)
            # D(r e^{i theta}) = R(theta) D(r) R(theta)+ with R diagonal, so
            # only the state needs rotating
            phases = np.exp(1j * theta * levels)
            rho_rot = state * np.outer(phases.conj(), phases)
            disp = (eigvecs * np.exp(1j * r * eigvals)) @ eigvecs.conj().T
            diag = np.einsum("ik,ik->k", disp.conj(), rho_rot @ disp)
            values[iy, ix] = (2.0 / math.pi) * float(np.real(parity @ diag))
    return WignerField(re_axis, im_axis, values)


def solve_model(
    model: EngineModel,
    n_max: int | None = None,
    method: str = "auto",
    tol: float = 1e-9,
    tail_tol: float = 1e-8,
    retry_on_tail: bool = True,
) -> tuple[HilbertSpace, SteadyStateResult]:
    """Steady state of an engine with the Fock-truncation policy applied.

    Defaults to N_max = 40 (three-level) or 60 (four-level).  After solving,
    the photon-number tail is checked against ``tail_tol``; on violation the
    cutoff grows by 1.5x and the solve repeats (up to three times) unless
    ``retry_on_tail`` is disabled.
    """
    if n_max is None:
        n_max = DEFAULT_N_MAX[model.kind == FOUR_LEVEL]
    attempts = 4 if retry_on_tail else 1
    for attempt in range(attempts):
        space = HilbertSpace.for_model(model, n_max)
        liouv = build_liouvillian(model, space)
        result = steady_state(liouv, method=method, tol=tol)
        reduced = partial_trace_atom(result.state, space)
        tail = float(np.clip(np.real(reduced[-1, -1]), 0.0, None))
        if tail < tail_tol or attempt == attempts - 1:
            if tail >= tail_tol:
                warnings.warn(
                    f"tail P[{n_max}] = {tail:.3e} still above {tail_tol:.1e}",
                    stacklevel=2,
                )
            return space, result
        n_max = math.ceil(1.5 * n_max)
    raise AssertionError("unreachable")
