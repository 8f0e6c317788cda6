"""Exact spectrum, degeneracies, bound-state wavefunctions, and grid residuals.

The radial gauge uses the decaying exponent exp(-sqrt(-E) r): together
with the Laguerre argument 2 r sqrt(-E) it is the combination under which
the separated radial equation has polynomial solutions at the quantized
energies (the grid residual check is decisive on this point, and the
growing-exponent alternative fails it by construction).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import specfun
from .errors import AccuracyError, DomainError
from .systems import DCParams, RationalIndex, TTWParams, potential_dc


def exponents_from_couplings(alpha: float, beta: float) -> tuple[float, float]:
    """Solve alpha = a(a-1), beta = b(b-1) on the normalizable branch a, b >= 1/2."""
    if alpha <= -0.25 or beta <= -0.25:
        raise DomainError("couplings must exceed -1/4 for normalizable states")
    a = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * alpha))
    b = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * beta))
    return a, b


def separation_constant(k: RationalIndex, a: float, b: float, m: int) -> float:
    """Quantized angular constant A = k^2 (2m + a + b)^2 / 4."""
    if m < 0:
        raise DomainError("angular index must be non-negative")
    return k.value ** 2 * (2 * m + a + b) ** 2 / 4.0


def energy_level(Q: float, k: RationalIndex, a: float, b: float, n: int, m: int) -> float:
    """Bound-state energy -Q^2 / (2(n + k m) + 1 + k a + k b)^2."""
    if Q <= 0.0:
        raise DomainError("bound spectrum needs Q > 0")
    if n < 0 or m < 0:
        raise DomainError("quantum numbers must be non-negative")
    kv = k.value
    denom = 2.0 * (n + kv * m) + 1.0 + kv * a + kv * b
    return -(Q * Q) / (denom * denom)


def energy_level_from_A(Q: float, n: int, A: float) -> float:
    """Equivalent form -Q^2 / (2n + 1 + 2 sqrt(A))^2 of the same level."""
    denom = 2.0 * n + 1.0 + 2.0 * math.sqrt(A)
    return -(Q * Q) / (denom * denom)


@dataclass(frozen=True)
class QuantumNumbers:
    n: int
    m: int

    def __post_init__(self):
        if self.n < 0 or self.m < 0:
            raise DomainError("quantum numbers must be non-negative")


@dataclass(frozen=True)
class WavefunctionSpec:
    """Everything fixing one bound state of the Coulomb-family system."""

    params: DCParams
    qn: QuantumNumbers
    a: float
    b: float
    A: float
    E: float


def bound_state(params: DCParams, n: int, m: int) -> WavefunctionSpec:
    """Assemble the spec of the (n, m) bound state from the couplings."""
    a, b = exponents_from_couplings(params.alpha, params.beta)
    A = separation_constant(params.k, a, b, m)
    E = energy_level(params.Q, params.k, a, b, n, m)
    return WavefunctionSpec(params=params, qn=QuantumNumbers(n, m), a=a, b=b, A=A, E=E)


def degeneracy_bruteforce(k: RationalIndex, N: int) -> tuple[int, list[tuple[int, int]]]:
    """All (n, m) >= 0 with d n + c m = N, by lattice enumeration."""
    if N < 0:
        raise DomainError("level index must be non-negative")
    c, d = k.c, k.d
    states = []
    m = 0
    while c * m <= N:
        rem = N - c * m
        if rem % d == 0:
            states.append((rem // d, m))
        m += 1
    return len(states), states


def degeneracy_formula(k: RationalIndex, N: int) -> int:
    """The printed count floor(d N / c) + 1 (matches enumeration for d = 1)."""
    if N < 0:
        raise DomainError("level index must be non-negative")
    return (k.d * N) // k.c + 1


@dataclass(frozen=True)
class SpectralLine:
    N: int
    E: float
    states: tuple


def spectral_line(params: DCParams, N: int) -> SpectralLine:
    """The level with index N = d n + c m; all member states share one energy."""
    a, b = exponents_from_couplings(params.alpha, params.beta)
    _, states = degeneracy_bruteforce(params.k, N)
    if not states:
        raise DomainError(f"no states on level N = {N} for k = {params.k}")
    energies = [energy_level(params.Q, params.k, a, b, n, m) for n, m in states]
    E0 = energies[0]
    spread = max(abs(e - E0) for e in energies) / abs(E0)
    if spread > 1e-13:
        raise AccuracyError(f"states on level N = {N} disagree in energy by {spread}")
    return SpectralLine(N=N, E=E0, states=tuple(states))


def degeneracy_report(k: RationalIndex, N_max: int):
    """Formula-vs-enumeration table; mismatches are collected, never hidden."""
    rows = []
    mismatches = []
    for N in range(N_max + 1):
        count, states = degeneracy_bruteforce(k, N)
        formula = degeneracy_formula(k, N)
        rows.append({"N": N, "formula": formula, "bruteforce": count, "states": states})
        if formula != count:
            mismatches.append(N)
    return rows, mismatches


def wavefunction(spec: WavefunctionSpec, r, phi):
    """Gauge factors times the Laguerre-Jacobi polynomial pair.

    Real-valued on r > 0, 0 < phi < pi/k (the cell where both gauge
    factors are positive).
    """
    r = np.asarray(r, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if np.any(r <= 0.0):
        raise DomainError("wavefunction needs r > 0")
    k = spec.params.k.value
    half = 0.5 * k * phi
    cosw = np.cos(half)
    sinw = np.sin(half)
    if np.any(cosw <= 0.0) or np.any(sinw <= 0.0):
        raise DomainError("wavefunction evaluated on or beyond a wedge wall")
    kappa = math.sqrt(-spec.E)
    sqrtA = math.sqrt(spec.A)
    g1 = r ** sqrtA * np.exp(-kappa * r)
    g2 = cosw ** spec.a * sinw ** spec.b
    radial = specfun.laguerre(spec.qn.n, 2.0 * sqrtA, 2.0 * kappa * r)
    angular = specfun.jacobi(spec.qn.m, spec.a - 0.5, spec.b - 0.5, -np.cos(k * phi))
    out = g1 * g2 * radial * angular
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class GridSpec:
    """Rectangular evaluation window with spacings (h_r, h_phi)."""

    r_range: tuple[float, float]
    phi_range: tuple[float, float]
    spacing: tuple[float, float]

    def axes(self):
        (r0, r1), (f0, f1) = self.r_range, self.phi_range
        hr, hf = self.spacing
        nr = max(int(round((r1 - r0) / hr)) + 1, 5)
        nf = max(int(round((f1 - f0) / hf)) + 1, 5)
        return np.linspace(r0, r1, nr), np.linspace(f0, f1, nf)

    def refined(self, factor: float = 2.0) -> "GridSpec":
        hr, hf = self.spacing
        return GridSpec(self.r_range, self.phi_range, (hr / factor, hf / factor))


def dc_operator_residual(params: DCParams, E: float, psi, grid: GridSpec) -> float:
    """Max of |(-Laplacian + V - E) psi| / (|E| max|psi|) over the grid interior.

    The polar Laplacian (including the (1/r) d_r term) is applied by
    second-order central differences, so the result converges as O(h^2).
    """
    rr, ff = grid.axes()
    k = params.k.value
    if rr[0] <= 0.0 or ff[0] <= 0.0 or ff[-1] >= math.pi / k:
        raise DomainError("grid touches r = 0 or a wedge wall")
    hr = rr[1] - rr[0]
    hf = ff[1] - ff[0]
    R, F = np.meshgrid(rr, ff, indexing="ij")
    psi_grid = psi(R, F)
    interior = psi_grid[1:-1, 1:-1]
    d2r = (psi_grid[2:, 1:-1] - 2.0 * interior + psi_grid[:-2, 1:-1]) / hr ** 2
    d1r = (psi_grid[2:, 1:-1] - psi_grid[:-2, 1:-1]) / (2.0 * hr)
    d2f = (psi_grid[1:-1, 2:] - 2.0 * interior + psi_grid[1:-1, :-2]) / hf ** 2
    Ri = R[1:-1, 1:-1]
    Fi = F[1:-1, 1:-1]
    V = potential_dc(params, Ri, Fi)
    residual = -(d2r + d1r / Ri + d2f / Ri ** 2) + (V - E) * interior
    scale = abs(E) * float(np.max(np.abs(psi_grid)))
    if scale == 0.0:
        raise DomainError("wavefunction vanishes identically on the grid")
    return float(np.max(np.abs(residual))) / scale


def schrodinger_residual(spec: WavefunctionSpec, grid: GridSpec) -> float:
    """Grid residual of the separated bound state under its own Hamiltonian."""
    return dc_operator_residual(spec.params, spec.E,
                                lambda r, phi: wavefunction(spec, r, phi), grid)


def default_grid(spec: WavefunctionSpec, n_r: int = 380, n_phi: int = 260) -> GridSpec:
    """A window holding the bulk of the state, clear of walls and origin."""
    kappa = math.sqrt(-spec.E)
    sqrtA = math.sqrt(spec.A)
    r_peak = (sqrtA + 2.0 * spec.qn.n + 1.0) / kappa
    r_lo = 0.25 * r_peak / (1.0 + spec.qn.n)
    r_hi = r_peak + (3.0 + 2.0 * spec.qn.n) / kappa
    cell = math.pi / spec.params.k.value
    f_lo, f_hi = 0.12 * cell, 0.88 * cell
    return GridSpec((r_lo, r_hi), (f_lo, f_hi),
                    ((r_hi - r_lo) / n_r, (f_hi - f_lo) / n_phi))


def residual_with_refinement(params: DCParams, E: float, psi, grid: GridSpec,
                             target: float = 1e-5, max_refinements: int = 3):
    """Halve the spacings until the residual meets the target.

    Returns (residual, convergence_ratio, grid) from the finest level
    reached; the ratio between consecutive levels certifies the O(h^2)
    behavior (it approaches 4 under halving).
    """
    res_prev = dc_operator_residual(params, E, psi, grid)
    ratio = math.nan
    res = res_prev
    for _ in range(max_refinements):
        grid = grid.refined()
        res = dc_operator_residual(params, E, psi, grid)
        ratio = res_prev / res if res > 0.0 else math.inf
        if res <= target:
            break
        res_prev = res
    return res, ratio, grid


def _radial_cutoff(spec1: WavefunctionSpec, spec2: WavefunctionSpec,
                   relative: float = 1e-12) -> float:
    """Radius beyond which the slower envelope is below relative * peak."""
    s = max(math.sqrt(spec1.A) + spec1.qn.n, math.sqrt(spec2.A) + spec2.qn.n)
    kappa = min(math.sqrt(-spec1.E), math.sqrt(-spec2.E))
    log_env = lambda r: s * math.log(r) - kappa * r
    r_peak = max(s / kappa, 1.0 / kappa)
    target = log_env(r_peak) + math.log(relative)
    hi = r_peak
    while log_env(hi) > target:
        hi *= 2.0
    lo = r_peak
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if log_env(mid) > target:
            lo = mid
        else:
            hi = mid
    return hi


def orthogonality_check(spec1: WavefunctionSpec, spec2: WavefunctionSpec,
                        n_radial: int = 140, n_angular: int = 120) -> float:
    """Normalized overlap of two states of the same system under r dr dphi.

    Quadrature runs over the wedge cell with the radial range truncated
    where the envelope falls twelve decades below its peak; convergence is
    confirmed against a finer rule.
    """
    if spec1.params != spec2.params:
        raise DomainError("overlap needs two states of the same system")
    r_cut = _radial_cutoff(spec1, spec2)
    cell = math.pi / spec1.params.k.value
    eps_f = 1e-9 * cell

    def inner(nr, nf):
        # split each axis at its midpoint: the integrand has limited
        # smoothness at the r = 0 and wall endpoints
        overlap = norm1 = norm2 = 0.0
        r_mid = min(max(math.sqrt(spec1.A) / math.sqrt(-spec1.E), 0.2 * r_cut), 0.8 * r_cut)
        for r_pan in ((1e-12, r_mid), (r_mid, r_cut)):
            r_nodes = specfun.quadrature_nodes(nr, *r_pan)
            for f_pan in ((eps_f, 0.5 * cell), (0.5 * cell, cell - eps_f)):
                f_nodes = specfun.quadrature_nodes(nf, *f_pan)
                rv = np.array([x for x, _ in r_nodes])
                rw = np.array([w for _, w in r_nodes])
                fv = np.array([x for x, _ in f_nodes])
                fw = np.array([w for _, w in f_nodes])
                R, F = np.meshgrid(rv, fv, indexing="ij")
                W = np.outer(rw * rv, fw)
                p1 = wavefunction(spec1, R, F)
                p2 = wavefunction(spec2, R, F)
                overlap += float(np.sum(W * p1 * p2))
                norm1 += float(np.sum(W * p1 * p1))
                norm2 += float(np.sum(W * p2 * p2))
        return overlap / math.sqrt(norm1 * norm2)

    coarse = inner(n_radial, n_angular)
    fine = inner(int(1.4 * n_radial), int(1.4 * n_angular))
    if abs(fine - coarse) > 1e-8 + 1e-8 * abs(fine):
        raise AccuracyError(f"overlap quadrature not converged: {coarse} vs {fine}")
    return fine


def ttw_bound_state(params: TTWParams, n: int, m: int):
    """Closed-form separable bound state of the oscillator family.

    Returns (psi, E) with psi a callable of (rho, theta); needs
    omega^2 > 0.
    """
    if params.omega2 <= 0.0:
        raise DomainError("oscillator bound states need omega^2 > 0")
    omega = math.sqrt(params.omega2)
    a, b = exponents_from_couplings(params.alpha, params.beta)
    k = params.k.value
    sigma = k * (2 * m + a + b)
    E = 2.0 * omega * (2 * n + 1 + sigma)

    def psi(rho, theta):
        rho = np.asarray(rho, dtype=float)
        theta = np.asarray(theta, dtype=float)
        if np.any(rho <= 0.0):
            raise DomainError("oscillator state needs rho > 0")
        cosw = np.cos(k * theta)
        sinw = np.sin(k * theta)
        if np.any(cosw <= 0.0) or np.any(sinw <= 0.0):
            raise DomainError("oscillator state evaluated on or beyond a wall")
        gauge = rho ** sigma * np.exp(-0.5 * omega * rho ** 2) * cosw ** a * sinw ** b
        poly = (specfun.laguerre(n, sigma, omega * rho ** 2)
                * specfun.jacobi(m, a - 0.5, b - 0.5, -np.cos(2.0 * k * theta)))
        out = gauge * poly
        return out if np.ndim(out) else float(out)

    return psi, E


def write_spectrum_csv(params: DCParams, N_max: int, path) -> None:
    """Levels with index, energy, both degeneracy counts, and member states."""
    lines = ["N,E,degeneracy_formula,degeneracy_bruteforce,states"]
    for N in range(N_max + 1):
        count, states = degeneracy_bruteforce(params.k, N)
        if not states:
            continue
        line = spectral_line(params, N)
        formula = degeneracy_formula(params.k, N)
        state_str = ";".join(f"{n}:{m}" for n, m in states)
        lines.append(f"{N},{line.E!r},{formula},{count},{state_str}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def write_wavefunction_csv(spec: WavefunctionSpec, grid: GridSpec, path) -> None:
    """Grid dump of the state: r, phi, psi."""
    rr, ff = grid.axes()
    R, F = np.meshgrid(rr, ff, indexing="ij")
    psi = wavefunction(spec, R, F)
    lines = ["r,phi,psi"]
    for i in range(R.shape[0]):
        for j in range(R.shape[1]):
            lines.append(f"{float(R[i, j])!r},{float(F[i, j])!r},{float(psi[i, j])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
