"""The two Hamiltonian families, their parameters, gradients, and bound-motion algebra.

Both systems use the convention H = p^2 + V (no 1/2 on the kinetic term),
so Hamilton's equations carry a factor 2: qdot = 2p etc.  All dynamics are
phrased in polar charts; the angular barrier walls are hard domain
boundaries and are never crossed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, SingularityError, UsageError

DC_CHART = "DC-polar"
TTW_CHART = "TTW-polar"

# below this, a squared wall trig factor counts as "on the wall"
WALL_EPS = 1e-14


@dataclass(frozen=True)
class RationalIndex:
    """Deformation index k = c/d in lowest terms, c, d positive integers."""

    c: int
    d: int = 1

    def __post_init__(self):
        if not (isinstance(self.c, (int, np.integer)) and isinstance(self.d, (int, np.integer))):
            raise DomainError("rational index needs integer numerator and denominator")
        if self.c < 1 or self.d < 1:
            raise DomainError(f"rational index must be positive, got {self.c}/{self.d}")
        g = math.gcd(int(self.c), int(self.d))
        object.__setattr__(self, "c", int(self.c) // g)
        object.__setattr__(self, "d", int(self.d) // g)

    @property
    def value(self) -> float:
        return self.c / self.d

    @classmethod
    def from_string(cls, text: str) -> "RationalIndex":
        """Parse 'c/d' or a bare integer string."""
        parts = text.strip().split("/")
        if len(parts) == 1:
            return cls(int(parts[0]), 1)
        if len(parts) == 2:
            return cls(int(parts[0]), int(parts[1]))
        raise DomainError(f"cannot parse rational index from {text!r}")

    def __str__(self):
        return f"{self.c}/{self.d}" if self.d != 1 else str(self.c)


@dataclass(frozen=True)
class DCParams:
    """Coulomb strength Q plus two angular barrier couplings on a wedge.

    Bounded classical orbits need Q, alpha, beta > 0; the quantum module
    only needs alpha, beta > -1/4.  Neither is enforced here.
    """

    Q: float
    alpha: float
    beta: float
    k: RationalIndex


@dataclass(frozen=True)
class TTWParams:
    """Oscillator coupling omega^2 plus the same two barrier couplings."""

    omega2: float
    alpha: float
    beta: float
    k: RationalIndex


@dataclass(frozen=True)
class PhasePoint:
    """Polar phase-space state (q1, q2, p1, p2) tagged with its chart."""

    q1: float
    q2: float
    p1: float
    p2: float
    chart: str = DC_CHART

    def as_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.p1, self.p2], dtype=float)


def _require_chart(point: PhasePoint, params) -> str:
    family = DC_CHART if isinstance(params, DCParams) else TTW_CHART
    if point.chart != family:
        raise UsageError(f"phase point chart {point.chart!r} does not match {type(params).__name__}")
    return family


def potential_dc(p: DCParams, r, phi):
    """-Q/r plus the two 1/r^2 barrier terms, valid strictly inside the wedge."""
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r <= 0.0):
        raise SingularityError("radial coordinate must be positive")
    k = p.k.value
    c2 = np.cos(0.5 * k * phi) ** 2
    s2 = np.sin(0.5 * k * phi) ** 2
    if p.alpha != 0.0 and np.any(c2 < WALL_EPS):
        raise SingularityError("evaluation on the cos wall of the wedge")
    if p.beta != 0.0 and np.any(s2 < WALL_EPS):
        raise SingularityError("evaluation on the sin wall of the wedge")
    out = -p.Q / r
    if p.alpha != 0.0:
        out = out + p.alpha * k * k / (4.0 * r * r * c2)
    if p.beta != 0.0:
        out = out + p.beta * k * k / (4.0 * r * r * s2)
    return out if np.ndim(out) else float(out)


def potential_ttw(p: TTWParams, rho, theta):
    """omega^2 rho^2 plus the sec^2/csc^2 barrier pair, inside one wedge cell."""
    rho = np.asarray(rho, dtype=float)
    theta = np.asarray(theta, dtype=float)
    if np.any(rho <= 0.0):
        raise SingularityError("radial coordinate must be positive")
    k = p.k.value
    c2 = np.cos(k * theta) ** 2
    s2 = np.sin(k * theta) ** 2
    if p.alpha != 0.0 and np.any(c2 < WALL_EPS):
        raise SingularityError("evaluation on the sec wall of the wedge cell")
    if p.beta != 0.0 and np.any(s2 < WALL_EPS):
        raise SingularityError("evaluation on the csc wall of the wedge cell")
    out = p.omega2 * rho * rho
    if p.alpha != 0.0:
        out = out + p.alpha * k * k / (rho * rho * c2)
    if p.beta != 0.0:
        out = out + p.beta * k * k / (rho * rho * s2)
    return out if np.ndim(out) else float(out)


def hamiltonian(point: PhasePoint, params) -> float:
    """H = p1^2 + p2^2/q1^2 + V(q1, q2) in the matching chart."""
    family = _require_chart(point, params)
    kinetic = point.p1 ** 2 + (point.p2 / point.q1) ** 2
    if family == DC_CHART:
        return kinetic + potential_dc(params, point.q1, point.q2)
    return kinetic + potential_ttw(params, point.q1, point.q2)


def angular_invariant(point: PhasePoint, params) -> float:
    """Separation constant of the angular motion: A for DC, L1 for TTW."""
    family = _require_chart(point, params)
    k = params.k.value
    if family == DC_CHART:
        u = 0.5 * k * point.q2
        scale = k * k / 4.0
    else:
        u = k * point.q2
        scale = k * k
    c2 = math.cos(u) ** 2
    s2 = math.sin(u) ** 2
    if params.alpha != 0.0 and c2 < WALL_EPS:
        raise SingularityError("angular invariant evaluated on a wall")
    if params.beta != 0.0 and s2 < WALL_EPS:
        raise SingularityError("angular invariant evaluated on a wall")
    out = point.p2 ** 2
    if params.alpha != 0.0:
        out += params.alpha * scale / c2
    if params.beta != 0.0:
        out += params.beta * scale / s2
    return out


def _gradient_dc(p: DCParams, r, phi, pr, pphi):
    k = p.k.value
    u = 0.5 * k * phi
    cu, su = math.cos(u), math.sin(u)
    ac = p.alpha * k * k / 4.0
    bc = p.beta * k * k / 4.0
    if (p.alpha != 0.0 and cu * cu < WALL_EPS) or (p.beta != 0.0 and su * su < WALL_EPS):
        raise SingularityError("gradient requested on a wedge wall")
    if r <= 0.0:
        raise SingularityError("gradient requested at r <= 0")
    barrier = 0.0
    dv_dphi = 0.0
    if p.alpha != 0.0:
        sec2 = 1.0 / (cu * cu)
        barrier += ac * sec2
        dv_dphi += ac * k * sec2 * (su / cu)
    if p.beta != 0.0:
        csc2 = 1.0 / (su * su)
        barrier += bc * csc2
        dv_dphi -= bc * k * csc2 * (cu / su)
    dH_dr = -2.0 * pphi * pphi / r ** 3 + p.Q / r ** 2 - 2.0 * barrier / r ** 3
    dH_dphi = dv_dphi / r ** 2
    return np.array([dH_dr, dH_dphi, 2.0 * pr, 2.0 * pphi / r ** 2])


def _gradient_ttw(p: TTWParams, rho, theta, prho, ptheta):
    k = p.k.value
    u = k * theta
    cu, su = math.cos(u), math.sin(u)
    at = p.alpha * k * k
    bt = p.beta * k * k
    if (p.alpha != 0.0 and cu * cu < WALL_EPS) or (p.beta != 0.0 and su * su < WALL_EPS):
        raise SingularityError("gradient requested on a wedge wall")
    if rho <= 0.0:
        raise SingularityError("gradient requested at rho <= 0")
    barrier = 0.0
    dv_dtheta = 0.0
    if p.alpha != 0.0:
        sec2 = 1.0 / (cu * cu)
        barrier += at * sec2
        dv_dtheta += at * 2.0 * k * sec2 * (su / cu)
    if p.beta != 0.0:
        csc2 = 1.0 / (su * su)
        barrier += bt * csc2
        dv_dtheta -= bt * 2.0 * k * csc2 * (cu / su)
    dH_drho = -2.0 * ptheta * ptheta / rho ** 3 + 2.0 * p.omega2 * rho - 2.0 * barrier / rho ** 3
    dH_dtheta = dv_dtheta / rho ** 2
    return np.array([dH_drho, dH_dtheta, 2.0 * prho, 2.0 * ptheta / rho ** 2])


def hamiltonian_gradient(point: PhasePoint, params) -> np.ndarray:
    """Analytic (dH/dq1, dH/dq2, dH/dp1, dH/dp2) at an interior point."""
    family = _require_chart(point, params)
    if family == DC_CHART:
        return _gradient_dc(params, point.q1, point.q2, point.p1, point.p2)
    return _gradient_ttw(params, point.q1, point.q2, point.p1, point.p2)


@dataclass(frozen=True)
class BoundednessReport:
    """Pass/fail per bounded-motion restriction plus the derived quantities."""

    rows: dict
    D1: float
    D2: float
    r1: float | None
    r2: float | None
    u1: float | None
    u2: float | None

    @property
    def all_passed(self) -> bool:
        return all(self.rows.values())

    def failed(self):
        return [name for name, ok in self.rows.items() if not ok]


def discriminants(p: DCParams, E: float, A: float) -> tuple[float, float]:
    """D1 = Q^2 + 4AE (radial) and D2 (angular) for the given constants."""
    k2 = p.k.value ** 2
    D1 = p.Q ** 2 + 4.0 * A * E
    D2 = (A - k2 * (p.beta + p.alpha) / 4.0) ** 2 - p.alpha * p.beta * k2 * k2 / 4.0
    return D1, D2


def radial_turning_points(Q: float, E: float, A: float) -> tuple[float, float]:
    """The two roots of E r^2 + Q r - A = 0, ordered r1 <= r2."""
    D1 = Q * Q + 4.0 * A * E
    if D1 <= 0.0:
        raise DomainError(f"no real radial turning points (D1 = {D1})")
    if E >= 0.0:
        raise DomainError("unbounded radial motion (E >= 0)")
    root = math.sqrt(D1)
    r1 = (Q - root) / (-2.0 * E)
    r2 = (Q + root) / (-2.0 * E)
    return (r1, r2) if r1 <= r2 else (r2, r1)


def angular_turning_points(p: DCParams, A: float) -> tuple[float, float]:
    """Roots u1 <= u2 of the quadratic bounding cos^2(k phi / 2)."""
    _, D2 = discriminants(p, 0.0, A)
    if D2 <= 0.0:
        raise DomainError(f"no real angular turning points (D2 = {D2})")
    if A == 0.0:
        raise DomainError("angular quadratic degenerates at A = 0")
    k2 = p.k.value ** 2
    b = A + (p.alpha - p.beta) * k2 / 4.0
    cterm = p.alpha * k2 / 4.0
    root = math.sqrt(D2)
    # stable quadratic roots of A u^2 - b u + cterm = 0
    q = 0.5 * (b + root) if b >= 0.0 else 0.5 * (b - root)
    u_big = q / A
    u_small = cterm / q if q != 0.0 else (b - root) / (2.0 * A)
    return (u_small, u_big) if u_small <= u_big else (u_big, u_small)


def validate_bounded(p: DCParams, E: float, A: float) -> BoundednessReport:
    """Evaluate every bounded-trajectory restriction and report each row."""
    D1, D2 = discriminants(p, E, A)
    k2 = p.k.value ** 2
    rows = {
        "D1_positive": D1 > 0.0,
        "Q_positive": p.Q > 0.0,
        "A_positive": A > 0.0,
        "E_negative": E < 0.0,
        "D2_positive": D2 > 0.0,
        "angular_gap": A - k2 * abs(p.beta - p.alpha) / 4.0 > 0.0,
        "beta_positive": p.beta > 0.0,
        "alpha_positive": p.alpha > 0.0,
    }
    r1 = r2 = u1 = u2 = None
    if rows["D1_positive"] and rows["E_negative"]:
        r1, r2 = radial_turning_points(p.Q, E, A)
    if rows["D2_positive"] and A != 0.0:
        u1, u2 = angular_turning_points(p, A)
    return BoundednessReport(rows=rows, D1=D1, D2=D2, r1=r1, r2=r2, u1=u1, u2=u2)


def bounded_dc_state(p: DCParams, E: float, A: float, r_frac: float = 0.5,
                     u_frac: float = 0.5, sign_r: int = 1, sign_phi: int = 1) -> PhasePoint:
    """Construct a phase point on the (E, A) shell of a bounded orbit.

    r_frac and u_frac place the point inside the radial annulus and the
    angular band; the signs pick the momentum branch.
    """
    report = validate_bounded(p, E, A)
    if not report.all_passed:
        raise DomainError(f"constants fail bounded-motion rows: {report.failed()}")
    r = report.r1 + r_frac * (report.r2 - report.r1)
    u = report.u1 + u_frac * (report.u2 - report.u1)
    k = p.k.value
    phi = 2.0 * math.acos(math.sqrt(u)) / k
    pphi2 = A - angular_invariant(PhasePoint(r, phi, 0.0, 0.0, DC_CHART), p)
    pr2 = (E * r * r + p.Q * r - A) / (r * r)
    if pphi2 < -1e-12 or pr2 < -1e-12:
        raise DomainError("shell construction produced a negative momentum square")
    return PhasePoint(r, phi, sign_r * math.sqrt(max(pr2, 0.0)),
                      sign_phi * math.sqrt(max(pphi2, 0.0)), DC_CHART)


def random_ttw_state(rng: np.random.Generator, p: TTWParams,
                     rho_range=(0.6, 1.8), p_max: float = 1.4,
                     margin: float = 0.08) -> PhasePoint:
    """Draw an interior TTW phase point with moderate magnitudes."""
    k = p.k.value
    cell = 0.5 * math.pi / k
    rho = rng.uniform(*rho_range)
    theta = rng.uniform(margin * cell, (1.0 - margin) * cell)
    prho = rng.uniform(-p_max, p_max)
    ptheta = rng.uniform(-p_max, p_max)
    return PhasePoint(rho, theta, prho, ptheta, TTW_CHART)


def random_dc_state(rng: np.random.Generator, p: DCParams,
                    r_range=(0.7, 2.2), p_max: float = 0.8,
                    margin: float = 0.08) -> PhasePoint:
    """Draw an interior DC phase point inside one wedge cell."""
    k = p.k.value
    cell = math.pi / k
    r = rng.uniform(*r_range)
    phi = rng.uniform(margin * cell, (1.0 - margin) * cell)
    pr = rng.uniform(-p_max, p_max)
    pphi = rng.uniform(-p_max, p_max)
    return PhasePoint(r, phi, pr, pphi, DC_CHART)


def params_to_text(params) -> str:
    """Serialize parameters to a flat key-value document."""
    if isinstance(params, DCParams):
        lines = ["family=dc", f"Q={params.Q!r}"]
    elif isinstance(params, TTWParams):
        lines = ["family=ttw", f"omega2={params.omega2!r}"]
    else:
        raise UsageError(f"cannot serialize {type(params).__name__}")
    lines += [
        f"alpha={params.alpha!r}",
        f"beta={params.beta!r}",
        f"k_num={params.k.c}",
        f"k_den={params.k.d}",
    ]
    return "\n".join(lines) + "\n"


def params_from_text(text: str):
    """Parse the flat key-value document written by params_to_text."""
    fields = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"malformed parameter line {line!r}")
        key, value = line.split("=", 1)
        fields[key.strip()] = value.strip()
    try:
        family = fields["family"].lower()
        k = RationalIndex(int(fields["k_num"]), int(fields["k_den"]))
        alpha = float(fields["alpha"])
        beta = float(fields["beta"])
        if family == "dc":
            return DCParams(Q=float(fields["Q"]), alpha=alpha, beta=beta, k=k)
        if family == "ttw":
            return TTWParams(omega2=float(fields["omega2"]), alpha=alpha, beta=beta, k=k)
    except KeyError as missing:
        raise DomainError(f"parameter document missing key {missing}") from None
    raise DomainError(f"unknown family {fields['family']!r}")
