"""Coupling-constant exchange between oscillator-type and Coulomb-type systems.

A system with a -E~ rho^2 term at fixed energy E maps to a system with a
-E/(2r) Coulomb term at energy E~, through the variable change
r = rho^2/2, phi = 2 theta and the induced canonical momentum map.  The
exchange is exact pointwise: (H~ - E~) = rho^-2 (H - E).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError
from .systems import (
    DC_CHART,
    TTW_CHART,
    DCParams,
    PhasePoint,
    TTWParams,
    hamiltonian,
)


@dataclass(frozen=True)
class SeparableOscillatorSystem:
    """Polar-separable Hamiltonian with an isotropic oscillator term.

    H = p_rho^2 + p_theta^2/rho^2 - coupling * rho^2 + f1(rho) + f2(theta)/rho^2,
    where f1 and f2 take no coupling argument by construction.
    """

    f1: Callable[[float], float]
    f2: Callable[[float], float]
    coupling: float  # E~; the rho^2 coefficient is -E~, so omega^2 = -E~

    def potential(self, rho: float, theta: float) -> float:
        return -self.coupling * rho * rho + self.f1(rho) + self.f2(theta) / (rho * rho)

    def hamiltonian(self, state: PhasePoint) -> float:
        return state.p1 ** 2 + (state.p2 / state.q1) ** 2 + self.potential(state.q1, state.q2)


@dataclass(frozen=True)
class TransformedSystem:
    """Image of a SeparableOscillatorSystem at source energy E."""

    E: float
    f1: Callable[[float], float]
    f2: Callable[[float], float]

    def potential(self, r: float, phi: float) -> float:
        if r <= 0.0:
            raise DomainError("transformed potential needs r > 0")
        return (-self.E + self.f1(math.sqrt(2.0 * r))) / (2.0 * r) + self.f2(0.5 * phi) / (4.0 * r * r)

    def hamiltonian(self, state: PhasePoint) -> float:
        return state.p1 ** 2 + (state.p2 / state.q1) ** 2 + self.potential(state.q1, state.q2)


def transform_hamiltonian(sys: SeparableOscillatorSystem, E: float) -> TransformedSystem:
    """Exchange the oscillator coupling of sys with the fixed energy E."""
    return TransformedSystem(E=E, f1=sys.f1, f2=sys.f2)


def pushforward_phase(pt: PhasePoint) -> PhasePoint:
    """Oscillator chart to Coulomb chart: r = rho^2/2, phi = 2 theta.

    The momentum map is the induced canonical one: p_r = p_rho / rho,
    p_phi = p_theta / 2.
    """
    if pt.chart != TTW_CHART:
        raise DomainError("pushforward expects a TTW-chart point")
    if pt.q1 <= 0.0:
        raise DomainError("pushforward needs rho > 0")
    rho = pt.q1
    return PhasePoint(0.5 * rho * rho, 2.0 * pt.q2, pt.p1 / rho, 0.5 * pt.p2, DC_CHART)


def pullback_phase(pt: PhasePoint) -> PhasePoint:
    """Coulomb chart to oscillator chart, inverse of pushforward_phase."""
    if pt.chart != DC_CHART:
        raise DomainError("pullback expects a DC-chart point")
    if pt.q1 <= 0.0:
        raise DomainError("pullback needs r > 0")
    rho = math.sqrt(2.0 * pt.q1)
    return PhasePoint(rho, 0.5 * pt.q2, rho * pt.p1, 2.0 * pt.p2, TTW_CHART)


def ttw_to_dc(ttw: TTWParams, E_source: float) -> tuple[DCParams, float]:
    """Image parameters of the oscillator system taken at energy E_source.

    Matching the -E/(2r) term of the image against -Q/r forces
    Q = E_source / 2; the image energy is E~ = -omega^2.  E_source <= 0
    yields Q <= 0, which the bounded-motion report flags downstream.
    """
    dc = DCParams(Q=0.5 * E_source, alpha=ttw.alpha, beta=ttw.beta, k=ttw.k)
    return dc, -ttw.omega2


def dc_to_ttw(dc: DCParams, E_tilde: float) -> tuple[TTWParams, float]:
    """Inverse identification: omega^2 = -E~ and E_source = 2Q."""
    ttw = TTWParams(omega2=-E_tilde, alpha=dc.alpha, beta=dc.beta, k=dc.k)
    return ttw, 2.0 * dc.Q


def stackel_identity_residual(pt: PhasePoint, ttw: TTWParams, E: float,
                              dc: DCParams | None = None,
                              E_tilde: float | None = None) -> float:
    """(H~(image point) - E~) - rho^-2 (H(pt) - E); identically zero.

    Passing an inconsistent dc or E_tilde turns this into a negative
    control that measures the violation.
    """
    if dc is None or E_tilde is None:
        dc_auto, et_auto = ttw_to_dc(ttw, E)
        dc = dc if dc is not None else dc_auto
        E_tilde = E_tilde if E_tilde is not None else et_auto
    image = pushforward_phase(pt)
    H_dc = hamiltonian(image, dc)
    H_ttw = hamiltonian(pt, ttw)
    return (H_dc - E_tilde) - (H_ttw - E) / (pt.q1 * pt.q1)


def map_trajectory(traj) -> np.ndarray:
    """Pushforward of every accepted sample of a TTW trajectory.

    Returns an (N, 4) array of DC-chart rows (r, phi, p_r, p_phi); the
    time law is dropped, only the geometric curve survives the map.
    """
    if traj.chart != TTW_CHART:
        raise DomainError("map_trajectory expects a TTW trajectory")
    rho = traj.y[0]
    theta = traj.y[1]
    if np.any(rho <= 0.0):
        raise DomainError("trajectory crosses rho = 0")
    out = np.empty((traj.n_samples, 4))
    out[:, 0] = 0.5 * rho * rho
    out[:, 1] = 2.0 * theta
    out[:, 2] = traj.y[2] / rho
    out[:, 3] = 0.5 * traj.y[3]
    return out


def map_wavefunction(psi: Callable) -> Callable:
    """Compose a function of (rho, theta) with the inverse variable map.

    The result is a function of (r, phi) with r > 0.
    """

    def mapped(r, phi):
        r = np.asarray(r, dtype=float)
        if np.any(r <= 0.0):
            raise DomainError("mapped wavefunction needs r > 0")
        out = psi(np.sqrt(2.0 * r), 0.5 * np.asarray(phi, dtype=float))
        return out if np.ndim(out) else float(out)

    return mapped


def _min_distance_to_dense(points: np.ndarray, dense, t_grid: np.ndarray,
                           scales: np.ndarray) -> float:
    """Largest over points of the distance to a densely sampled curve.

    Each point's nearest dense sample is refined in the curve parameter
    by iterated parabolic interpolation.
    """
    from .dynamics import _refine_maximum

    curve = np.stack([dense(t)[:2] for t in t_grid]) / scales
    worst = 0.0
    for pt in points:
        target = pt / scales
        d2 = np.sum((curve - target) ** 2, axis=1)

        def f(t):
            q = dense(t)[:2] / scales
            return -float(np.sum((q - target) ** 2))

        # every local minimum of the sampled distance marks a candidate
        # arc; the nearest one may not hold the smallest sampled value
        interior = (d2[1:-1] <= d2[:-2]) & (d2[1:-1] <= d2[2:])
        candidates = list(np.nonzero(interior)[0] + 1) or [int(np.argmin(d2))]
        best = float(np.min(d2))
        for j in candidates:
            j = min(max(j, 1), t_grid.size - 2)
            t_star = _refine_maximum(f, t_grid[j - 1], t_grid[j], t_grid[j + 1])
            best = min(best, -f(t_star))
        worst = max(worst, math.sqrt(best))
    return worst


def mapped_orbit_hausdorff(ttw_traj, dc_traj, n_probe: int = 250,
                           n_dense: int = 4000) -> float:
    """Scaled Hausdorff distance between a mapped TTW orbit and a DC orbit.

    Both curves are compared in the (r, phi) configuration plane; each
    probe point on one curve is matched against a dense parametric
    sampling of the other, refined in the curve parameter, so the result
    measures geometric disagreement rather than sampling gaps.
    """
    if ttw_traj.chart != TTW_CHART or dc_traj.chart != DC_CHART:
        raise DomainError("need one TTW trajectory and one DC trajectory")

    def ttw_config(t):
        y = ttw_traj.dense(t)
        return np.array([0.5 * y[0] ** 2, 2.0 * y[1], 0.0, 0.0])

    mapped = map_trajectory(ttw_traj)[:, :2]
    scales = np.array([
        max(np.max(mapped[:, 0]), np.max(np.abs(dc_traj.y[0]))),
        max(np.max(np.abs(mapped[:, 1])), np.max(np.abs(dc_traj.y[1]))),
    ])

    probes_a = np.stack([ttw_config(t)[:2] for t in
                         np.linspace(ttw_traj.t[0], ttw_traj.t[-1], n_probe)])
    probes_b = np.stack([dc_traj.dense(t)[:2] for t in
                         np.linspace(dc_traj.t[0], dc_traj.t[-1], n_probe)])

    grid_b = np.linspace(dc_traj.t[0], dc_traj.t[-1], n_dense)
    d_ab = _min_distance_to_dense(probes_a, dc_traj.dense, grid_b, scales)

    grid_a = np.linspace(ttw_traj.t[0], ttw_traj.t[-1], n_dense)
    d_ba = _min_distance_to_dense(probes_b, ttw_config, grid_a, scales)
    return max(d_ab, d_ba)
