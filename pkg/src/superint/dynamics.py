"""Time integration, period and closure detection, and closed-form orbit residuals.

The integrator is an adaptive 8th-order embedded explicit pair (DOP853)
with PI step control; symplecticity is not needed because runs are short
and energy drift is monitored on every trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from . import specfun
from .errors import BranchError, DegenerateOrbitError, DomainError, IntegrationError
from .systems import (
    DCParams,
    PhasePoint,
    angular_invariant,
    discriminants,
    hamiltonian,
    hamiltonian_gradient,
    radial_turning_points,
    validate_bounded,
)

TOL_MIN, TOL_MAX = 1e-14, 1e-3


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Integrated orbit: accepted steps plus a dense interpolant.

    t is strictly increasing; y has shape (4, len(t)) in chart order
    (q1, q2, p1, p2).  max_energy_drift is the largest relative deviation
    of H from its initial value over the accepted steps.
    """

    params: object
    chart: str
    t: np.ndarray
    y: np.ndarray
    dense: object
    steps: int
    max_energy_drift: float
    tol: float

    @property
    def n_samples(self) -> int:
        return self.t.size

    def point(self, i: int) -> PhasePoint:
        q1, q2, p1, p2 = self.y[:, i]
        return PhasePoint(float(q1), float(q2), float(p1), float(p2), self.chart)

    def at_time(self, t: float) -> PhasePoint:
        q1, q2, p1, p2 = self.dense(t)
        return PhasePoint(float(q1), float(q2), float(p1), float(p2), self.chart)

    def energy_series(self) -> np.ndarray:
        return np.array([hamiltonian(self.point(i), self.params) for i in range(self.n_samples)])


@dataclass(frozen=True)
class OrbitConstants:
    """Separation constants and phases fixing one bounded orbit.

    C satisfies C = -2 sqrt(A) c delta2 + (c + d) pi / 2.
    """

    E: float
    A: float
    delta1: float
    delta2: float
    C: float


@dataclass(frozen=True)
class ClosureReport:
    closed: bool
    n_radial: int
    return_distance: float
    period_total: float


def _rhs(params, chart):
    def rhs(t, y):
        pt = PhasePoint(y[0], y[1], y[2], y[3], chart)
        try:
            g = hamiltonian_gradient(pt, params)
        except (DomainError, FloatingPointError):
            return np.full(4, np.nan)
        return np.array([g[2], g[3], -g[0], -g[1]])

    return rhs


def integrate(params, initial: PhasePoint, t_end: float, tol: float = 1e-10,
              max_step: float = np.inf) -> Trajectory:
    """Integrate Hamilton's equations from an interior point up to t_end."""
    if not (TOL_MIN <= tol <= TOL_MAX):
        raise DomainError(f"integration tolerance {tol} outside [{TOL_MIN}, {TOL_MAX}]")
    hamiltonian(initial, params)  # validates chart and interiorness
    chart = initial.chart
    rtol = max(tol, 3e-14)  # DOP853 floor
    sol = solve_ivp(_rhs(params, chart), (0.0, t_end), initial.as_array(),
                    method="DOP853", rtol=rtol, atol=tol, dense_output=True,
                    max_step=max_step)
    if not sol.success or sol.t[-1] < t_end:
        i_last = sol.t.size - 1
        last = PhasePoint(*sol.y[:, i_last], chart) if i_last >= 0 else None
        raise IntegrationError(
            f"integration stopped at t = {sol.t[-1] if sol.t.size else 0.0}: {sol.message}",
            t_last=float(sol.t[-1]) if sol.t.size else None, state_last=last)

    h = np.array([hamiltonian(PhasePoint(*sol.y[:, i], chart), params)
                  for i in range(sol.t.size)])
    scale = max(abs(h[0]), 1e-12)
    drift = float(np.max(np.abs(h - h[0])) / scale)
    return Trajectory(params=params, chart=chart, t=sol.t, y=sol.y, dense=sol.sol,
                      steps=int(sol.t.size - 1), max_energy_drift=drift, tol=tol)


def radial_period_closed_form(Q: float, E: float) -> float:
    """Q pi / (2 (-E)^(3/2)), the exact radial period of the bounded motion."""
    if E >= 0.0:
        raise DomainError("radial motion is unbounded for E >= 0")
    if Q <= 0.0:
        raise DomainError("need Q > 0 for a bounded well")
    return Q * math.pi / (2.0 * (-E) ** 1.5)


def _refine_maximum(f, t0, t1, t2, iterations=40):
    """Successive three-point parabolic interpolation for a local maximum."""
    ts = [t0, t1, t2]
    fs = [f(t) for t in ts]
    for _ in range(iterations):
        a, b, c = ts
        fa, fb, fc = fs
        denom = (b - a) * (fb - fc) - (b - c) * (fb - fa)
        if denom == 0.0:
            break
        t_new = b - 0.5 * ((b - a) ** 2 * (fb - fc) - (b - c) ** 2 * (fb - fa)) / denom
        lo, hi = min(ts), max(ts)
        if not (lo <= t_new <= hi) or any(abs(t_new - t) < 1e-15 * max(1.0, abs(t_new)) for t in ts):
            break
        f_new = f(t_new)
        # keep the best three bracketing points
        ts.append(t_new)
        fs.append(f_new)
        order = np.argsort(ts)
        ts = [ts[i] for i in order]
        fs = [fs[i] for i in order]
        j = int(np.argmax(fs))
        if j == 0 or j == len(ts) - 1:
            ts = ts[:3] if j == 0 else ts[-3:]
            fs = fs[:3] if j == 0 else fs[-3:]
        else:
            ts = ts[j - 1:j + 2]
            fs = fs[j - 1:j + 2]
    j = int(np.argmax(fs))
    return ts[j]


def radial_maxima_times(traj: Trajectory, samples_per_unit: float = 400.0) -> np.ndarray:
    """Times of the local maxima of q1(t), parabolic-refined on dense output."""
    n = max(int(samples_per_unit * (traj.t[-1] - traj.t[0])), 200)
    tt = np.linspace(traj.t[0], traj.t[-1], n)
    rr = traj.dense(tt)[0]
    rel_span = (rr.max() - rr.min()) / max(abs(rr.max()), 1e-300)
    if rel_span < 1e-6:
        raise DegenerateOrbitError("radial coordinate is constant; no oscillation to measure")
    interior = (rr[1:-1] > rr[:-2]) & (rr[1:-1] >= rr[2:])
    idx = np.nonzero(interior)[0] + 1
    f = lambda t: float(traj.dense(t)[0])
    return np.array([_refine_maximum(f, tt[i - 1], tt[i], tt[i + 1]) for i in idx])


def measure_radial_period(traj: Trajectory) -> float:
    """Mean spacing of successive maxima of q1(t)."""
    peaks = radial_maxima_times(traj)
    if peaks.size < 2:
        raise DegenerateOrbitError("need at least two radial maxima to measure a period")
    return float(np.mean(np.diff(peaks)))


def _wrap(x: float, period: float) -> float:
    return x - period * round(x / period)


def _return_distance(y, y0, period_phi):
    scales = np.where(np.abs(y0) > 1e-9, np.abs(y0), 1.0)
    d = (y - y0) / scales
    d[1] = _wrap(y[1] - y0[1], period_phi) / scales[1]
    return float(np.sqrt(np.sum(d * d)))


def closure_check(params: DCParams, initial: PhasePoint, max_radial_periods: int,
                  tol: float, integrator_tol: float = 1e-12) -> ClosureReport:
    """Search multiples of the radial period for a phase-space return.

    The return metric is the Euclidean distance in (r, phi mod 2 pi/k,
    p_r, p_phi) with each coordinate scaled by its initial magnitude.
    """
    E = hamiltonian(initial, params)
    A = angular_invariant(initial, params)
    report = validate_bounded(params, E, A)
    if not report.all_passed:
        raise DomainError(f"initial point fails bounded-motion rows: {report.failed()}")
    if max_radial_periods < 1:
        return ClosureReport(closed=False, n_radial=0, return_distance=math.inf,
                             period_total=0.0)

    T_r = radial_period_closed_form(params.Q, E)
    period_phi = 2.0 * math.pi / params.k.value
    traj = integrate(params, initial, (max_radial_periods + 0.3) * T_r, tol=integrator_tol)
    y0 = initial.as_array()

    def distance(t):
        return _return_distance(traj.dense(t), y0, period_phi)

    best = (False, 0, math.inf, 0.0)
    for n in range(1, max_radial_periods + 1):
        lo, hi = (n - 0.25) * T_r, (n + 0.25) * T_r
        grid = np.linspace(lo, hi, 160)
        vals = np.array([distance(t) for t in grid])
        j = int(np.argmin(vals))
        j = min(max(j, 1), grid.size - 2)
        t_star = float(_refine_maximum(lambda t: -distance(t), grid[j - 1], grid[j], grid[j + 1]))
        d_star = distance(t_star)
        if d_star < best[2]:
            best = (False, n, d_star, t_star)
        if d_star < tol:
            return ClosureReport(closed=True, n_radial=n, return_distance=d_star,
                                 period_total=t_star)
    return ClosureReport(closed=False, n_radial=best[1], return_distance=best[2],
                         period_total=best[3])


# --- closed-form trajectory equations -------------------------------------

def _arcsin_arguments(params: DCParams, E, A, r, phi):
    """The pair (X_r, X_phi) entering the orbit and phase equations.

    The angular argument carries k^2 (alpha - beta) / 4; turning-point
    algebra forces this sign (X_phi = +-1 exactly at u = u1, u2).
    """
    D1, D2 = discriminants(params, E, A)
    if D1 <= 0.0 or D2 <= 0.0:
        raise DomainError("orbit equations need D1 > 0 and D2 > 0")
    k = params.k.value
    X_r = (2.0 * A - params.Q * r) / (r * math.sqrt(D1))
    s2 = np.sin(0.5 * k * np.asarray(phi, dtype=float)) ** 2
    X_phi = (2.0 * A * s2 - A + k * k * (params.alpha - params.beta) / 4.0) / math.sqrt(D2)
    return X_r, X_phi


def orbit_residual(params: DCParams, consts: OrbitConstants, r, phi,
                   branch: int | None = None, clamp_eps: float = 1e-9) -> float:
    """Residual of the implicit orbit equation linking r and phi.

    The square-root factor in the closed form carries a sign that flips at
    every angular turning point (it tracks sign(p_phi) along the motion).
    branch = +1 or -1 selects a half-oscillation arc explicitly; the
    default resolves the sign to the branch of smaller magnitude, so the
    residual vanishes along the whole orbit fixed by consts.  The function
    is exactly periodic in phi with period 2 pi / k.

    clamp_eps absorbs turning-point excursions of the arguments caused by
    state error; genuinely off-annulus points still raise a domain error.
    """
    c, d = params.k.c, params.k.d
    X_r, X_phi = _arcsin_arguments(params, consts.E, consts.A, r, phi)
    X_phi_c = np.asarray(specfun.clamp_unit(X_phi, eps=clamp_eps))
    base = (-specfun.chebyshev_T(c, specfun.clamp_unit(X_r, eps=clamp_eps))
            + math.cos(consts.C) * specfun.chebyshev_T(d, X_phi_c))
    wing = (math.sin(consts.C) * specfun.chebyshev_U(d - 1, X_phi_c)
            * np.sqrt(1.0 - X_phi_c ** 2))
    if branch is not None:
        out = base + branch * wing
    else:
        plus, minus = base + wing, base - wing
        out = np.where(np.abs(plus) <= np.abs(minus), plus, minus)
    return out if np.ndim(out) else float(out)


def time_equation_residual(params: DCParams, consts: OrbitConstants, t: float,
                           r: float, sign: int) -> float:
    """Residual of the radial time law at (t, r) on the given p_r branch.

    sign is +1 on the p_r > 0 half oscillation and -1 on the other half.
    """
    E, Q = consts.E, params.Q
    D1 = Q * Q + 4.0 * consts.A * E
    if D1 <= 0.0:
        raise DomainError("time equation needs D1 > 0")
    W = E * r * r + Q * r - consts.A
    if W < -1e-9 * max(1.0, abs(consts.A)):
        raise DomainError(f"radius {r} lies outside the radial annulus (W = {W})")
    W = max(W, 0.0)
    nu = (-E) ** 1.5
    phase = 4.0 * nu * (t + consts.delta1) / Q + 2.0 * sign * math.sqrt(-E) * math.sqrt(W) / Q
    return (-2.0 * E * r - Q) / math.sqrt(D1) + math.sin(phase)


def _candidate_C(params: DCParams, E, A, point: PhasePoint):
    X_r, X_phi = _arcsin_arguments(params, E, A, point.q1, point.q2)
    th_r = math.acos(float(specfun.clamp_unit(X_r)))
    th_phi = math.acos(float(specfun.clamp_unit(X_phi)))
    c, d = params.k.c, params.k.d
    return (c * th_r + d * th_phi, -c * th_r + d * th_phi)


def _candidate_delta1(params: DCParams, E, A, point: PhasePoint, t0=0.0):
    Q = params.Q
    D1 = Q * Q + 4.0 * A * E
    X_t = (-2.0 * E * point.q1 - Q) / math.sqrt(D1)
    W = max(E * point.q1 ** 2 + Q * point.q1 - A, 0.0)
    sign = 1.0 if point.p1 >= 0.0 else -1.0
    base = math.asin(float(specfun.clamp_unit(-X_t)))
    nu = (-E) ** 1.5
    out = []
    for target in (base, math.pi - base):
        out.append((target - 2.0 * sign * math.sqrt(-E) * math.sqrt(W) / Q) * Q / (4.0 * nu) - t0)
    return tuple(out)


def orbit_constants_from_point(params: DCParams, point: PhasePoint,
                               validation_fraction: float = 0.06,
                               integrator_tol: float = 1e-12) -> OrbitConstants:
    """Extract (E, A, delta1, delta2, C) from one phase point of a bounded orbit.

    Branches of the inverse trig constants are fixed by a two-candidate
    trial at the point, validated against a second sample a short
    integration step away.
    """
    E = hamiltonian(point, params)
    A = angular_invariant(point, params)
    report = validate_bounded(params, E, A)
    if not report.all_passed:
        raise DomainError(f"point fails bounded-motion rows: {report.failed()}")

    T_r = radial_period_closed_form(params.Q, E)
    tau = validation_fraction * T_r
    probe = integrate(params, point, tau, tol=integrator_tol)
    later = probe.point(probe.n_samples - 1)
    t_later = float(probe.t[-1])

    c, d = params.k.c, params.k.d
    sqrtA = math.sqrt(A)

    branch_later = 1 if later.p2 >= 0.0 else -1
    best_C, best_res = None, math.inf
    for cand in _candidate_C(params, E, A, point):
        consts = OrbitConstants(E=E, A=A, delta1=0.0, delta2=0.0, C=cand)
        res = abs(orbit_residual(params, consts, later.q1, later.q2, branch=branch_later))
        if res < best_res:
            best_C, best_res = cand, res
    if best_res > 1e-4:
        raise BranchError(f"no branch of C fits the orbit (best residual {best_res})")

    sign_later = 1 if later.p1 >= 0.0 else -1
    best_d1, best_res1 = None, math.inf
    for cand in _candidate_delta1(params, E, A, point):
        consts = OrbitConstants(E=E, A=A, delta1=cand, delta2=0.0, C=best_C)
        res = abs(time_equation_residual(params, consts, t_later, later.q1, sign_later))
        if res < best_res1:
            best_d1, best_res1 = cand, res
    if best_res1 > 1e-4:
        raise BranchError(f"no branch of delta1 fits the orbit (best residual {best_res1})")

    delta2 = ((c + d) * math.pi / 2.0 - best_C) / (2.0 * sqrtA * c)
    return OrbitConstants(E=E, A=A, delta1=best_d1, delta2=delta2, C=best_C)


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per accepted step: t, q1, q2, p1, p2, H, A."""
    lines = ["t,q1,q2,p1,p2,H,A"]
    for i in range(traj.n_samples):
        pt = traj.point(i)
        H = float(hamiltonian(pt, traj.params))
        A = float(angular_invariant(pt, traj.params))
        t = float(traj.t[i])
        lines.append(f"{t!r},{pt.q1!r},{pt.q2!r},{pt.p1!r},{pt.p2!r},{H!r},{A!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
