"""Fully quantum photon statistics of the heat-engine laser.

The cavity diagonal P_n obeys a birth-death chain with stimulated emission
rate A, stimulated absorption rate A_b, saturation nonlinearity B, and cavity
loss kappa:

    dP_n/dt =   n [A P_{n-1} - A_b P_n] / (1 + n B/A)
            - (n+1) [A P_n - A_b P_{n+1}] / (1 + (n+1) B/A)
            + kappa [(n+1) P_{n+1} - n P_n].

This module evaluates the coefficients from the engine parameters, the exact
steady distribution of the chain, its closed-form moments, and the output
power.  ``elimination_flow`` re-derives the coherent flow by solving the full
atomic-sector linear system, giving an independent numerical route against
the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import FOUR_LEVEL, THREE_LEVEL, EngineModel
from .semiclassical import structure_constants

__all__ = [
    "LaserCoefficients",
    "PhotonDistribution",
    "Moments",
    "TruncationError",
    "scully_lamb_coefficients",
    "steady_distribution",
    "pn_derivative",
    "distribution_moments",
    "coefficient_flow",
    "elimination_flow",
    "output_power",
    "saturated_power",
    "rough_estimate_mean",
]


class TruncationError(RuntimeError):
    """Raised when a photon distribution does not fit the requested cutoff."""


@dataclass(frozen=True)
class LaserCoefficients:
    """Rates of the photon-number birth-death chain.

    ``A`` is the stimulated emission rate, ``A_b`` the stimulated absorption
    rate, ``B`` the saturation nonlinearity, and ``kappa`` the cavity loss.
    The net linear gain A - A_b equals the semi-classical gain G.
    """

    A: float
    A_b: float
    B: float
    kappa: float

    def __post_init__(self):
        for name in ("A", "A_b", "B"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")

    @property
    def saturation_photon_number(self) -> float:
        """Photons per unit saturation, B/A (0 when the pump is off)."""
        return self.B / self.A if self.A > 0 else 0.0


@dataclass(frozen=True)
class PhotonDistribution:
    """Normalized photon-number distribution P_0 .. P_Nmax."""

    probabilities: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probabilities, dtype=float)
        if p.ndim != 1 or p.size < 1:
            raise ValueError("probabilities must be a non-empty 1-d vector")
        if p.min() < -1e-12:
            raise ValueError(f"negative probability {p.min()}")
        total = p.sum()
        if not math.isclose(total, 1.0, rel_tol=1e-9):
            raise ValueError(f"probabilities sum to {total}, expected 1")
        p = np.clip(p, 0.0, None)
        p = p / p.sum()
        p.flags.writeable = False
        object.__setattr__(self, "probabilities", p)

    @property
    def n_max(self) -> int:
        return self.probabilities.size - 1

    @property
    def mean(self) -> float:
        return float(np.arange(self.probabilities.size) @ self.probabilities)

    @property
    def variance(self) -> float:
        n = np.arange(self.probabilities.size)
        return float((n * n) @ self.probabilities - self.mean**2)

    @property
    def peak_index(self) -> int:
        return int(np.argmax(self.probabilities))

    @property
    def fano(self) -> float:
        m = self.mean
        return self.variance / m if m > 0 else math.nan


@dataclass(frozen=True)
class Moments:
    """Closed-form moments of the steady photon distribution."""

    mean: float
    variance: float
    peak: float
    fano: float


def scully_lamb_coefficients(model: EngineModel) -> LaserCoefficients:
    """Birth-death coefficients (A, A_b, B) of the engine.

    Three-level: A = 4 g^2 nh (nc+1) / (Gamma Phi) and
    A_b = 4 g^2 nc (nh+1) / (Gamma Phi).  Four-level: the primed variants
    A' = 4 g^2 nh (nc+1) (na+1) / (Gamma' Phi') and
    A_b' = 4 g^2 nc na (nh+1) / (Gamma' Phi').  In both cases
    B = A * 4 g^2 Psi / (Gamma Phi).
    """
    sc = structure_constants(model)
    scale = 4.0 * model.g**2 / (sc.Gamma * sc.Phi)
    if model.kind == THREE_LEVEL:
        emission = scale * model.n_h * (model.n_c + 1.0)
        absorption = scale * model.n_c * (model.n_h + 1.0)
    else:
        emission = scale * model.n_h * (model.n_c + 1.0) * (model.n_a + 1.0)
        absorption = scale * model.n_c * model.n_a * (model.n_h + 1.0)
    nonlinearity = emission * scale * sc.Psi
    return LaserCoefficients(emission, absorption, nonlinearity, model.kappa)


def _log_ratios(coeffs: LaserCoefficients, n_max: int) -> np.ndarray:
    n = np.arange(1, n_max + 1, dtype=float)
    denom = coeffs.A_b + coeffs.kappa * (1.0 + n * coeffs.B / coeffs.A)
    return np.log(coeffs.A) - np.log(denom)


def _normalized(coeffs: LaserCoefficients, n_max: int) -> np.ndarray:
    logp = np.concatenate([[0.0], np.cumsum(_log_ratios(coeffs, n_max))])
    logp -= logp.max()
    p = np.exp(logp)
    return p / p.sum()


def steady_distribution(
    coeffs: LaserCoefficients, n_max: int | None = None, tail_tol: float = 1e-8
) -> PhotonDistribution:
    """Stationary distribution of the birth-death chain.

    Built from the detailed-balance recursion
    P_n / P_{n-1} = A / [A_b + kappa (1 + n B/A)], accumulated in log space
    so that far-above-threshold distributions never overflow.  With
    ``n_max=None`` the cutoff grows automatically until the ratio falls below
    1/2 and the geometric tail bound drops under 1e-12; an explicit ``n_max``
    raises :class:`TruncationError` when P_Nmax >= ``tail_tol``.
    """
    if coeffs.A == 0.0:
        size = 2 if n_max is None else n_max + 1
        p = np.zeros(size)
        p[0] = 1.0
        return PhotonDistribution(p)
    if n_max is not None:
        if n_max < 1:
            raise ValueError(f"n_max must be >= 1, got {n_max}")
        p = _normalized(coeffs, n_max)
        if p[-1] >= tail_tol:
            raise TruncationError(
                f"P[{n_max}] = {p[-1]:.3e} >= {tail_tol:.1e}; increase n_max"
            )
        return PhotonDistribution(p)
    # support estimate: the ratio drops below 1/2 near A (2A - A_b - kappa) / (kappa B)
    estimate = coeffs.A * (2.0 * coeffs.A - coeffs.A_b - coeffs.kappa) / (
        coeffs.kappa * coeffs.B
    ) if coeffs.B > 0 else 0.0
    cutoff = max(16, int(estimate) + 16)
    while True:
        p = _normalized(coeffs, cutoff)
        ratio = coeffs.A / (
            coeffs.A_b + coeffs.kappa * (1.0 + cutoff * coeffs.B / coeffs.A)
        )
        if ratio < 0.5 and p[-1] * ratio / (1.0 - ratio) < 1e-12:
            return PhotonDistribution(p)
        if cutoff >= 1_000_000:
            raise TruncationError("distribution support exceeds 1e6 photons")
        cutoff *= 2


def _upward_flow(coeffs, n, p_nm1, p_n):
    # net coherent flow across the (n-1, n) edge; the A = 0 limit keeps the
    # unsaturated absorption term since B/A -> finite only through the pump
    if coeffs.A == 0.0:
        return -n * coeffs.A_b * p_n
    return n * (coeffs.A * p_nm1 - coeffs.A_b * p_n) / (1.0 + n * coeffs.B / coeffs.A)


def coefficient_flow(coeffs: LaserCoefficients, n: int, p_nm1: float, p_n: float) -> float:
    """Closed-form net coherent photon flow across the (n-1, n) edge.

    Equals n [A P_{n-1} - A_b P_n] / (1 + n B/A), the gain side of the
    birth-death chain; :func:`elimination_flow` recomputes the same quantity
    from the atomic linear system.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return float(_upward_flow(coeffs, n, p_nm1, p_n))


def pn_derivative(coeffs: LaserCoefficients, probabilities: np.ndarray) -> np.ndarray:
    """Time derivative of the photon-number distribution.

    Written as flows across rung edges so the total probability is conserved
    identically, including at the truncation edge.
    """
    p = np.asarray(probabilities, dtype=float)
    top = p.size - 1
    n = np.arange(1, top + 1, dtype=float)
    coherent = _upward_flow(coeffs, n, p[:-1], p[1:])
    decay = coeffs.kappa * n * p[1:]
    net_up = coherent - decay
    deriv = np.zeros_like(p)
    deriv[1:] += net_up
    deriv[:-1] -= net_up
    return deriv


def distribution_moments(
    coeffs: LaserCoefficients, n_max: int | None = None
) -> Moments:
    """Closed-form mean, variance, peak location, and Fano factor.

    Uses the auxiliary quantities X = A^2 / (kappa B) and
    Y = A (kappa + A_b) / (kappa B):

        mean     = X - Y + Y P_0,
        <n^2>    = (mean + 1) X - mean Y,
        variance = X - Y P_0 mean,
        peak n*  = (A / kappa B)(A - A_b - kappa).

    P_0 is taken from the normalized recursion of
    :func:`steady_distribution`.  The peak is >= 0 exactly when the gain
    A - A_b reaches kappa.
    """
    if coeffs.A == 0.0:
        return Moments(0.0, 0.0, 0.0, math.nan)
    if coeffs.B <= 0.0:
        raise ValueError("saturation B must be positive when A > 0")
    p0 = steady_distribution(coeffs, n_max).probabilities[0]
    kb = coeffs.kappa * coeffs.B
    x = coeffs.A**2 / kb
    y = coeffs.A * (coeffs.kappa + coeffs.A_b) / kb
    mean = x - y + y * p0
    variance = x - y * p0 * mean
    peak = (coeffs.A / kb) * (coeffs.A - coeffs.A_b - coeffs.kappa)
    fano = variance / mean if mean > 0 else math.nan
    return Moments(float(mean), float(variance), float(peak), float(fano))


def output_power(model: EngineModel, mean_n: float) -> float:
    """Radiated power of the cavity, lasing_frequency * kappa * <n>."""
    if mean_n < 0:
        raise ValueError(f"mean photon number must be >= 0, got {mean_n}")
    return model.lasing_frequency * model.kappa * mean_n


def saturated_power(model: EngineModel) -> float:
    """Far-above-threshold power, lasing_frequency * (A/B)(A - A_b - kappa).

    Valid once P_0 is negligible; below threshold the full expression
    ``output_power(model, distribution_moments(...).mean)`` must be used.
    """
    coeffs = scully_lamb_coefficients(model)
    if coeffs.A == 0.0:
        return 0.0
    return model.lasing_frequency * (coeffs.A / coeffs.B) * (
        coeffs.A - coeffs.A_b - coeffs.kappa
    )


def rough_estimate_mean(model: EngineModel) -> float:
    """Order-of-magnitude cavity photon number for a symmetric 3-level engine.

    Assumes gamma_h = gamma_c = gamma and a near-empty cold bath:

        <n> ~ gamma nh / [kappa (3 nh + 2)]
              - (gamma^2 / 4 g^2)(nh + 1)(2 nh + 1) / (3 nh + 2).
    """
    if model.kind != THREE_LEVEL:
        raise ValueError("the rough estimate applies to the three-level model only")
    if not math.isclose(model.gamma_h, model.gamma_c, rel_tol=1e-12):
        raise ValueError("the rough estimate assumes gamma_h = gamma_c")
    gamma, nh = model.gamma_h, model.n_h
    first = gamma * nh / (model.kappa * (3 * nh + 2))
    second = (gamma**2 / (4 * model.g**2)) * (nh + 1) * (2 * nh + 1) / (3 * nh + 2)
    return first - second


# ---------------------------------------------------------------------------
# Independent route: adiabatic-elimination linear system
# ---------------------------------------------------------------------------

def _three_level_system(model, n, p_nm1, p_n):
    """8-variable steady system of the atomic sector at photon rungs (n-1, n).

    Unknowns (complex): populations gg, 11, 22 at rung n; gg, 11, 22 at rung
    n-1; and the two lasing coherences r12 = rho_{12;n,n-1},
    r21 = rho_{21;n-1,n}.
    """
    ghp, ghm = model.gamma_h * model.n_h, model.gamma_h * (model.n_h + 1.0)
    gcp, gcm = model.gamma_c * model.n_c, model.gamma_c * (model.n_c + 1.0)
    ig_s = 1j * model.g * math.sqrt(n)
    half = 0.5 * (ghm + gcm)
    mat = np.zeros((8, 8), dtype=complex)
    rhs = np.zeros(8, dtype=complex)
    # columns: 0 gg_n, 1 11_n, 2 22_n, 3 gg_{n-1}, 4 11_{n-1}, 5 22_{n-1}, 6 r12, 7 r21
    mat[0, 6], mat[0, 7], mat[0, 1], mat[0, 0] = ig_s, -ig_s, -gcm, gcp
    mat[1, 7], mat[1, 6], mat[1, 5], mat[1, 3] = ig_s, -ig_s, -ghm, ghp
    mat[2, 1], mat[2, 5], mat[2, 6] = ig_s, -ig_s, -half
    mat[3, 1], mat[3, 5], mat[3, 7] = -ig_s, ig_s, -half
    mat[4, 1], mat[4, 0], mat[4, 2] = gcm, -(gcp + ghp), ghm
    mat[5, 4], mat[5, 3], mat[5, 5] = gcm, -(gcp + ghp), ghm
    mat[6, 0] = mat[6, 1] = mat[6, 2] = 1.0
    mat[7, 3] = mat[7, 4] = mat[7, 5] = 1.0
    rhs[6], rhs[7] = p_n, p_nm1
    return mat, rhs, (6, 7)


def _four_level_system(model, n, p_nm1, p_n):
    """10-variable analogue for the four-level engine (extra e3 populations)."""
    ghp, ghm = model.gamma_h * model.n_h, model.gamma_h * (model.n_h + 1.0)
    gcp, gcm = model.gamma_c * model.n_c, model.gamma_c * (model.n_c + 1.0)
    gap, gam = model.gamma_a * model.n_a, model.gamma_a * (model.n_a + 1.0)
    ig_s = 1j * model.g * math.sqrt(n)
    half = 0.5 * (gap + gcm)
    mat = np.zeros((10, 10), dtype=complex)
    rhs = np.zeros(10, dtype=complex)
    # columns: 0-3 gg,11,22,33 at rung n; 4-7 the same at rung n-1; 8 r12, 9 r21
    mat[0, 8], mat[0, 9], mat[0, 1], mat[0, 0] = ig_s, -ig_s, -gcm, gcp
    mat[1, 9], mat[1, 8], mat[1, 6], mat[1, 7] = ig_s, -ig_s, -gap, gam
    mat[2, 1], mat[2, 6], mat[2, 8] = ig_s, -ig_s, -half
    mat[3, 1], mat[3, 6], mat[3, 9] = -ig_s, ig_s, -half
    mat[4, 1], mat[4, 0], mat[4, 3] = gcm, -(gcp + ghp), ghm
    mat[5, 2], mat[5, 3], mat[5, 0] = gap, -(gam + ghm), ghp
    mat[6, 5], mat[6, 4], mat[6, 7] = gcm, -(gcp + ghp), ghm
    mat[7, 6], mat[7, 7], mat[7, 4] = gap, -(gam + ghm), ghp
    mat[8, 0] = mat[8, 1] = mat[8, 2] = mat[8, 3] = 1.0
    mat[9, 4] = mat[9, 5] = mat[9, 6] = mat[9, 7] = 1.0
    rhs[8], rhs[9] = p_n, p_nm1
    return mat, rhs, (8, 9)


def elimination_flow(model: EngineModel, n: int, p_nm1: float, p_n: float) -> float:
    """Coherent photon flow at rung n from the atomic steady-state system.

    Solves the closed 8-variable (three-level) or 10-variable (four-level)
    linear system for the atomic populations and lasing coherences at the
    photon rungs (n-1, n), given the rung probabilities, and returns
    i g sqrt(n) (rho_{12;n,n-1} - rho_{21;n-1,n}).  Agrees with
    :func:`coefficient_flow` to rounding; kept as a fully independent check
    of the closed-form coefficients.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    build = _three_level_system if model.kind == THREE_LEVEL else _four_level_system
    mat, rhs, (i12, i21) = build(model, n, p_nm1, p_n)
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"degenerate engine rates: {exc}") from exc
    flow = 1j * model.g * math.sqrt(n) * (sol[i12] - sol[i21])
    scale = max(1.0, abs(flow.real))
    if abs(flow.imag) > 1e-9 * scale:
        raise ValueError(f"elimination flow is not real: {flow}")
    return float(flow.real)
