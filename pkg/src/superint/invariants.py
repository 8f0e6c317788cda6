"""Conserved quantities beyond the energy: the angular integral, the
higher-order polynomial integrals of the oscillator family, their pullback
to the Coulomb family, and a numerical Poisson bracket estimator.

The polynomial form of the higher-order integral is assembled directly
from four explicit binomial sums; the trigonometric form (phase angles
recovered atan2-style from the auxiliary pairs) serves as an independent
oracle for it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError
from .systems import (
    DC_CHART,
    TTW_CHART,
    DCParams,
    PhasePoint,
    TTWParams,
    angular_invariant,
    hamiltonian,
)


@dataclass(frozen=True)
class ABQuad:
    """Auxiliary quadruple feeding the higher-order integrals.

    (A_x, A_y) depends on the angular motion only, (B_x, B_y) on the
    radial motion; both squared norms are functions of H, L1 and the
    couplings alone.
    """

    A_x: float
    A_y: float
    B_x: float
    B_y: float

    @property
    def norm_A(self) -> float:
        return math.hypot(self.A_x, self.A_y)

    @property
    def norm_B(self) -> float:
        return math.hypot(self.B_x, self.B_y)


@dataclass(frozen=True)
class BracketEstimate:
    value: float
    step: float
    richardson_error: float


def l1_ttw(p: TTWParams, theta: float, p_theta: float) -> float:
    """Angular integral p_theta^2 + alpha k^2 sec^2(k theta) + beta k^2 csc^2(k theta)."""
    return angular_invariant(PhasePoint(1.0, theta, 0.0, p_theta, TTW_CHART), p)


def ab_quantities(p: TTWParams, state: PhasePoint) -> ABQuad:
    """The four auxiliary quantities at a state with L1 > 0."""
    if state.chart != TTW_CHART:
        raise DomainError("ab_quantities needs a TTW-chart state")
    L1 = l1_ttw(p, state.q2, state.p2)
    if L1 <= 0.0:
        raise DomainError(f"auxiliary quantities need L1 > 0, got {L1}")
    k = p.k.value
    rho, theta = state.q1, state.q2
    H = hamiltonian(state, p)
    sqrtL1 = math.sqrt(L1)
    two_kt = 2.0 * k * theta
    # exponential radial variable: exp(-2R) = rho^-2, p_R = rho p_rho
    inv_rho2 = 1.0 / (rho * rho)
    p_R = rho * state.p1
    return ABQuad(
        A_x=sqrtL1 * math.sin(two_kt) * state.p2,
        A_y=L1 * math.cos(two_kt) - p.alpha * k * k + p.beta * k * k,
        B_x=2.0 * sqrtL1 * inv_rho2 * p_R,
        B_y=2.0 * L1 * inv_rho2 - H,
    )


def _parity(i: int) -> int:
    """1 for odd i, 0 for even i (the prefactor exponent selector)."""
    return i % 2


def _binomial_re_im(x: float, y: float, n: int) -> tuple[float, float]:
    """Real and imaginary binomial sums of (x + i y)^n by explicit loops."""
    re = 0.0
    for m in range(n // 2 + 1):
        re += math.comb(n, 2 * m) * (-1.0) ** m * x ** (n - 2 * m) * y ** (2 * m)
    im = 0.0
    for m in range((n - 1) // 2 + 1):
        im += math.comb(n, 2 * m + 1) * (-1.0) ** m * x ** (n - 2 * m - 1) * y ** (2 * m + 1)
    return re, im


def _phase_difference(p: TTWParams, ab: ABQuad, L1: float) -> float:
    """4 c sqrt(L1) (M - N): the combined phase entering both trig forms.

    M and N are arccos phases of the B and A pairs; the quadrant lost by
    arccos is recovered from the second component of each pair.
    """
    c, d = p.k.c, p.k.d
    sqrtL1 = math.sqrt(L1)
    M = math.atan2(ab.B_y, ab.B_x) / (4.0 * sqrtL1)
    N = math.atan2(ab.A_y, ab.A_x) / (4.0 * p.k.value * sqrtL1)
    return 4.0 * c * sqrtL1 * (M - N)


def _l1_of(p: TTWParams, state: PhasePoint) -> float:
    L1 = l1_ttw(p, state.q2, state.p2)
    if L1 <= 0.0:
        raise DomainError(f"higher integral needs L1 > 0, got {L1}")
    return L1


def l2_trig(p: TTWParams, state: PhasePoint) -> float:
    """Sine-variant higher integral in its trigonometric form."""
    L1 = _l1_of(p, state)
    ab = ab_quantities(p, state)
    c, d = p.k.c, p.k.d
    angle = _phase_difference(p, ab, L1)
    return (ab.norm_B ** c * ab.norm_A ** d * math.sin(angle)
            / math.sqrt(L1) ** _parity(c + d - 1))


def l2_cos_trig(p: TTWParams, state: PhasePoint) -> float:
    """Cosine-variant higher integral in its trigonometric form."""
    L1 = _l1_of(p, state)
    ab = ab_quantities(p, state)
    c, d = p.k.c, p.k.d
    angle = _phase_difference(p, ab, L1)
    return (ab.norm_B ** c * ab.norm_A ** d * math.cos(angle)
            / math.sqrt(L1) ** _parity(c + d))


def l2_poly(p: TTWParams, state: PhasePoint) -> float:
    """Sine-variant higher integral assembled from the binomial sums."""
    L1 = _l1_of(p, state)
    ab = ab_quantities(p, state)
    c, d = p.k.c, p.k.d
    re_B, im_B = _binomial_re_im(ab.B_x, ab.B_y, c)
    re_A, im_A = _binomial_re_im(ab.A_x, ab.A_y, d)
    return (im_B * re_A - im_A * re_B) / math.sqrt(L1) ** _parity(c + d - 1)


def l2_cos(p: TTWParams, state: PhasePoint) -> float:
    """Cosine-variant higher integral assembled from the binomial sums."""
    L1 = _l1_of(p, state)
    ab = ab_quantities(p, state)
    c, d = p.k.c, p.k.d
    re_B, im_B = _binomial_re_im(ab.B_x, ab.B_y, c)
    re_A, im_A = _binomial_re_im(ab.A_x, ab.A_y, d)
    return (re_B * re_A + im_B * im_A) / math.sqrt(L1) ** _parity(c + d)


def minimal_integral_degree(k) -> int:
    """Lowest momentum degree over the two variants: 2(c + d) - 1."""
    return 2 * (k.c + k.d) - 1


def lower_degree_variant(k) -> str:
    """Which variant attains the minimal degree ('sin' or 'cos')."""
    return "sin" if (k.c + k.d) % 2 == 0 else "cos"


_FIELDS = ("q1", "q2", "p1", "p2")


def _partials(F, state: PhasePoint, h: float) -> np.ndarray:
    out = np.empty(4)
    for i, name in enumerate(_FIELDS):
        x = getattr(state, name)
        plus = F(replace(state, **{name: x + h}))
        minus = F(replace(state, **{name: x - h}))
        out[i] = (plus - minus) / (2.0 * h)
    return out


def _bracket_once(F, G, state: PhasePoint, h: float) -> float:
    dF = _partials(F, state, h)
    dG = _partials(G, state, h)
    return float(dF[0] * dG[2] - dF[2] * dG[0] + dF[1] * dG[3] - dF[3] * dG[1])


def poisson_bracket_numeric(F, G, state: PhasePoint, h: float | None = None) -> BracketEstimate:
    """Central-difference {F, G} at steps h and h/2 with Richardson extrapolation.

    F and G take a PhasePoint.  The default step scales with the state
    magnitude to balance truncation against roundoff.
    """
    if h is None:
        h = 1e-5 * (1.0 + float(np.linalg.norm(state.as_array())))
    coarse = _bracket_once(F, G, state, h)
    fine = _bracket_once(F, G, state, 0.5 * h)
    value = (4.0 * fine - coarse) / 3.0
    return BracketEstimate(value=value, step=h, richardson_error=abs(fine - coarse) / 3.0)


def dc_integral(p_dc: DCParams, state_dc: PhasePoint, variant: str = "sin") -> float:
    """Higher-order integral of the Coulomb family at a DC phase point.

    The state is carried to the oscillator chart through the inverse
    variable map, the oscillator coupling is set to minus the local DC
    energy, and the polynomial-form integral is evaluated there.
    """
    from .stackel import pullback_phase  # local import keeps the module DAG acyclic

    if state_dc.chart != DC_CHART:
        raise DomainError("dc_integral needs a DC-chart state")
    if variant not in ("sin", "cos"):
        raise DomainError(f"unknown variant {variant!r}")
    H_dc = hamiltonian(state_dc, p_dc)
    ttw = TTWParams(omega2=-H_dc, alpha=p_dc.alpha, beta=p_dc.beta, k=p_dc.k)
    mapped = pullback_phase(state_dc)
    return l2_poly(ttw, mapped) if variant == "sin" else l2_cos(ttw, mapped)


def conservation_rows(traj, n_samples: int = 400):
    """Sample t, H, L1, L2sin, L2cos and their running relative drifts."""
    p = traj.params
    tt = np.linspace(traj.t[0], traj.t[-1], n_samples)
    rows = []
    first = None
    for t in tt:
        s = traj.at_time(t)
        vals = (hamiltonian(s, p), l1_ttw(p, s.q2, s.p2), l2_poly(p, s), l2_cos(p, s))
        if first is None:
            first = vals
        drifts = tuple(abs(v - v0) / max(abs(v0), 1e-12) for v, v0 in zip(vals, first))
        rows.append((float(t),) + vals + drifts)
    return rows


def write_conservation_csv(traj, path, n_samples: int = 400) -> None:
    """Conservation report: t, H, L1, L2sin, L2cos, and per-quantity drifts."""
    header = "t,H,L1,L2sin,L2cos,drift_H,drift_L1,drift_L2sin,drift_L2cos"
    lines = [header]
    for row in conservation_rows(traj, n_samples):
        lines.append(",".join(repr(v) for v in row))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
