"""Uniqueness machinery: solution-set bijections and the period map.

For a fixed background field v, three solution sets are linked by
explicit constructive maps:

    S1: w with T(w) = -(v w)_x                       (Dirichlet field)
    S2: (W, K) with W_t - mu W_xx + (W_x)^2/2 = -v W_x + K
        (Neumann field modulo additive constants)
    S3: (phi, K) with phi_t - mu phi_xx + v phi_x + K phi = 0
        (positive Neumann field modulo positive scaling)

The substitution phi = exp(-W/(2 mu)) converts the quadratic potential
equation into linear advection-diffusion; the monodromy of that linear
flow over one period has leading eigenvalue one with constant
eigenfunction, the numerical face of uniqueness.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .fields import (
    Basis,
    BasisMismatchError,
    SQRT2,
    SpectralField,
    space_eval_matrix,
    space_nodes,
    time_eval_matrix,
    product_cosine,
    zeros,
)
from .operators import apply_T, d_t, d_x, d_xx
from .norms import dual_norm
from .solver import SolverConfig, SolveReport, newton_solve, solve_linear


class NotInS1Error(ValueError):
    """The x-dependent part of the potential residual is too large."""


class ProjectionAccuracyError(ValueError):
    """Re-projected exponential field fails its own equation residual."""


class NonpositivePhiError(ValueError):
    """S3 representative is not strictly positive on the grid."""


class StepCountError(ValueError):
    """Period-map step count too small: halving test drifted."""


class PowerIterationError(RuntimeError):
    """Power iteration on the period map did not converge."""


class Kind(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"


@dataclass(frozen=True)
class ColeHopfElement:
    kind: Kind
    v: SpectralField
    w: SpectralField | None = None      # S1 representative
    W: SpectralField | None = None      # S2 representative, zero mean
    phi: SpectralField | None = None    # S3 representative, max = 1
    K: float | None = None              # S2/S3 eigenvalue


def antiderivative_x(w: SpectralField) -> SpectralField:
    """Modal antiderivative int_0^x w(t, y) dy with value 0 at x = 0.

    Lands in the cosine family; d_x of the result reproduces w."""
    if w.basis is not Basis.DIRICHLET_SINE:
        raise BasisMismatchError("antiderivative_x expects a Dirichlet-sine field")
    m = np.arange(1, w.n_x + 1).astype(float)
    cols = np.zeros((w.coeffs.shape[0], w.n_x + 1), dtype=complex)
    # int_0^x sqrt(2) sin(m pi y) dy = sqrt(2)/(m pi) - (1/(m pi)) sqrt(2) cos(m pi x)
    cols[:, 1:] = -w.coeffs / (m * np.pi)[None, :]
    cols[:, 0] = (w.coeffs * (SQRT2 / (m * np.pi))[None, :]).sum(axis=1)
    return SpectralField(cols, w.n_t, w.n_x, Basis.NEUMANN_COSINE)


def _potential_residual(
    wbar: SpectralField, w: SpectralField, v: SpectralField, mu: float
) -> SpectralField:
    """Cosine-family residual Wbar_t - mu Wbar_xx + w^2/2 + v w of the
    potential equation (Wbar_x = w by construction)."""
    n_t, n_x = w.n_t, w.n_x
    quad = product_cosine(w, w, n_t, 2 * n_x)
    adv = product_cosine(v, w, n_t, 2 * n_x)
    lin = d_t(wbar) - mu * d_xx(wbar)
    res = 0.5 * quad.coeffs + adv.coeffs
    res[:, : n_x + 1] += lin.coeffs
    return SpectralField(res, n_t, 2 * n_x, Basis.NEUMANN_COSINE)


def lift_s1_to_s2(
    w: SpectralField, v: SpectralField, mu: float, tol: float = 1e-6
) -> ColeHopfElement:
    """Map an S1 element to its S2 potential (W, K).

    The x-antiderivative satisfies the potential equation up to a purely
    time-dependent residual g(t); K is its time mean and the periodic
    antiderivative of g - K is subtracted to land in S2.  If the residual
    has x-dependent content above tol (relative), w was not in S1."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    wbar = antiderivative_x(w)
    res = _potential_residual(wbar, w, v, mu)
    scale = max(1.0, w.l2() * (1.0 + v.l2()), w.l2() ** 2)
    xdep = float(np.abs(res.coeffs[:, 1:]).max())
    if xdep > tol * scale:
        raise NotInS1Error(
            f"x-dependent potential residual {xdep:.3e} exceeds {tol * scale:.3e}"
        )
    g = res.coeffs[:, 0]  # time series of the spatially constant residual
    n_t = w.n_t
    k = float(g[n_t].real)
    n = np.arange(-n_t, n_t + 1).astype(float)
    h = np.zeros_like(g)
    nz = n != 0
    h[nz] = g[nz] / (2j * np.pi * n[nz])
    coeffs = wbar.coeffs.copy()
    coeffs[:, 0] -= h
    coeffs[n_t, 0] -= coeffs[n_t, 0].real  # zero space-time mean
    W = SpectralField(coeffs, w.n_t, w.n_x, Basis.NEUMANN_COSINE)
    return ColeHopfElement(kind=Kind.S2, v=v, W=W, K=k)


def project_s2_to_s1(e: ColeHopfElement) -> ColeHopfElement:
    """w = W_x; independent of the representative (constants drop out)."""
    if e.kind is not Kind.S2:
        raise ValueError("expected an S2 element")
    return ColeHopfElement(kind=Kind.S1, v=e.v, w=d_x(e.W))


def _pointwise_map(
    u: SpectralField, fn, n_t_out: int, n_x_out: int, pad: int = 2
) -> SpectralField:
    """Apply fn pointwise on an oversampled grid and re-project.

    The result is only as accurate as the target truncation allows; the
    caller monitors the equation residual of the projection."""
    m_t = pad * (2 * n_t_out + 1)
    m_x = pad * (n_x_out + 1)
    x = space_nodes(m_x, Basis.NEUMANN_COSINE)
    b_in = space_eval_matrix(u.n_x, x, u.basis)
    e_in = time_eval_matrix(u.n_t, m_t)
    vals = fn(((e_in @ u.coeffs) @ b_in.T).real)
    b_out = space_eval_matrix(n_x_out, x, Basis.NEUMANN_COSINE)
    e_out = time_eval_matrix(n_t_out, m_t)
    coeffs = (e_out.conj().T @ vals @ b_out) / (m_t * m_x)
    return SpectralField(coeffs, n_t_out, n_x_out, Basis.NEUMANN_COSINE)


def s2_residual(W: SpectralField, v: SpectralField, k: float, mu: float) -> float:
    """L2 norm of W_t - mu W_xx + (W_x)^2/2 + v W_x - K, zero on S2."""
    res = _potential_residual(W, d_x(W), v, mu)
    coeffs = res.coeffs.copy()
    coeffs[res.n_t, 0] -= k
    return res.with_coeffs(coeffs).l2()


def _eval_grid(u: SpectralField, e: np.ndarray, x: np.ndarray) -> np.ndarray:
    b = space_eval_matrix(u.n_x, x, u.basis)
    return ((e @ u.coeffs) @ b.T).real


def chain_rule_defect(
    W: SpectralField, v: SpectralField, k: float, mu: float, pad: int = 4
) -> float:
    """Sup-norm defect of the substitution identity for phi = exp(-W/(2 mu)):

        phi_t - mu phi_xx + v phi_x + (K/(2 mu)) phi = -(1/(2 mu)) r phi

    where r = W_t - mu W_xx + (W_x)^2/2 + v W_x - K is the S2 equation
    residual of (W, K).  Exact for arbitrary smooth (W, v, K); the defect
    only measures the truncation of the projected exponential."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    n_t_p = pad * W.n_t
    n_x_p = pad * W.n_x
    phi = _pointwise_map(W, lambda g: np.exp(-g / (2.0 * mu)), n_t_p, n_x_p, pad=2)
    lin = d_t(phi) - mu * d_xx(phi) + (k / (2.0 * mu)) * phi
    phix = d_x(phi)
    m_t = 2 * (2 * n_t_p + 1)
    m_x = 2 * (n_x_p + 2)
    x = space_nodes(m_x, Basis.NEUMANN_COSINE)

    def ev(u):
        et = time_eval_matrix(u.n_t, m_t)
        return _eval_grid(u, et, x)

    w = d_x(W)
    vg = ev(v)
    wg = ev(w)
    rg = ev(d_t(W)) - mu * ev(d_xx(W)) + 0.5 * wg**2 + vg * wg - k
    lhs = ev(lin) + vg * ev(phix)
    rhs = -(1.0 / (2.0 * mu)) * rg * ev(phi)
    return float(np.abs(lhs - rhs).max()) / max(1.0, float(np.abs(rhs).max()))


def grid_min(u: SpectralField, pad: int = 4) -> float:
    m_t = max(pad * (2 * u.n_t + 1), 8)
    m_x = max(pad * (u.n_x + 1), 8)
    x = space_nodes(m_x, u.basis)
    b = space_eval_matrix(u.n_x, x, u.basis)
    e = time_eval_matrix(u.n_t, m_t)
    return float(((e @ u.coeffs) @ b.T).real.min())


def grid_max(u: SpectralField, pad: int = 4) -> float:
    return -grid_min(-1.0 * u, pad)


def s3_residual(
    phi: SpectralField, v: SpectralField, k: float, mu: float
) -> SpectralField:
    """Cosine-family residual of phi_t - mu phi_xx + v phi_x + K phi."""
    phix = d_x(phi)  # Dirichlet-sine field
    if phix.n_x != v.n_x or phix.n_t != v.n_t:
        raise BasisMismatchError("phi and v truncations must match")
    adv = product_cosine(v, phix, phi.n_t, 2 * phi.n_x)
    out = adv.coeffs.copy()
    lin = d_t(phi) - mu * d_xx(phi) + k * phi
    out[:, : phi.n_x + 1] += lin.coeffs
    return SpectralField(out, phi.n_t, 2 * phi.n_x, Basis.NEUMANN_COSINE)


def s2_to_s3(
    e: ColeHopfElement, mu: float, resid_tol: float = 1e-6, pad: int = 3
) -> ColeHopfElement:
    """phi = exp(-W/(2 mu)) on a padded grid, re-projected; K' = K/(2 mu).

    Positivity comes from the exponential; the representative is scaled
    to maximum one.  The exponential leaves any fixed truncation, so phi
    is retained with pad times the modes of W; the projection defect is
    measured pointwise against the exact exponential and must stay below
    resid_tol or the truncation was too coarse for W."""
    if e.kind is not Kind.S2:
        raise ValueError("expected an S2 element")
    if mu <= 0:
        raise ValueError("mu must be positive")
    W = e.W
    phi = _pointwise_map(
        W, lambda g: np.exp(-g / (2.0 * mu)), pad * W.n_t, pad * W.n_x
    )
    top = grid_max(phi)
    phi = (1.0 / top) * phi
    kp = e.K / (2.0 * mu)
    m_t = 4 * (2 * phi.n_t + 1)
    m_x = 4 * (phi.n_x + 2)
    x = space_nodes(m_x, Basis.NEUMANN_COSINE)
    e_w = time_eval_matrix(W.n_t, m_t)
    e_p = time_eval_matrix(phi.n_t, m_t)
    exact = np.exp(-_eval_grid(W, e_w, x) / (2.0 * mu)) / top
    defect = float(np.abs(_eval_grid(phi, e_p, x) - exact).max())
    if defect > resid_tol:
        raise ProjectionAccuracyError(
            f"projected exponential misses its pointwise values by {defect:.3e} "
            f"(> {resid_tol:g}); refine the truncation of W"
        )
    return ColeHopfElement(kind=Kind.S3, v=e.v, phi=phi, K=kp)


def s3_to_s2(e: ColeHopfElement, mu: float) -> ColeHopfElement:
    """Inverse map W = -2 mu log(phi), mean-normalized; K = 2 mu K'.

    This is the true inverse of phi = exp(-W/(2 mu)); the quotient
    normalizations make the round trip an identity."""
    if e.kind is not Kind.S3:
        raise ValueError("expected an S3 element")
    if mu <= 0:
        raise ValueError("mu must be positive")
    phi = e.phi
    if grid_min(phi) <= 0.0:
        raise NonpositivePhiError("phi is not strictly positive on the grid")
    W = _pointwise_map(phi, lambda g: -2.0 * mu * np.log(g), phi.n_t, phi.n_x)
    coeffs = W.coeffs.copy()
    coeffs[W.n_t, 0] -= coeffs[W.n_t, 0].real
    W = W.with_coeffs(coeffs)
    return ColeHopfElement(kind=Kind.S2, v=e.v, W=W, K=2.0 * mu * e.K)


# ---------------------------------------------------------------------------
# Period (monodromy) map of the linear advection-diffusion flow


class PeriodMap:
    """One-period evolution psi(0) -> psi(1) of
    psi_t - mu psi_xx + v psi_x = 0 with Neumann conditions.

    Space is the cosine modal basis (profiles are real coefficient
    vectors of length n_x+1); time stepping is trapezoidal in both the
    diffusion and the frozen-coefficient advection term, second order in
    1/steps and unconditionally stable.  Step matrices are factorized
    once so repeated application (power iteration) is cheap.
    """

    def __init__(self, v: SpectralField, mu: float, steps: int, n_x: int | None = None):
        if steps < 1:
            raise ValueError("steps must be at least 1")
        if mu <= 0:
            raise ValueError("mu must be positive")
        self.mu = mu
        self.steps = steps
        self.n_x = v.n_x if n_x is None else n_x
        n_x = self.n_x
        m_x = 2 * (n_x + 1)
        x = space_nodes(m_x, Basis.NEUMANN_COSINE)
        bs = space_eval_matrix(n_x, x, Basis.DIRICHLET_SINE)      # sine eval
        bc = space_eval_matrix(n_x, x, Basis.NEUMANN_COSINE)      # cosine eval
        bv = space_eval_matrix(v.n_x, x, Basis.DIRICHLET_SINE)    # v eval
        analysis = bc.T / m_x
        m = np.arange(0, n_x + 1).astype(float)
        lap = -((m * np.pi) ** 2)
        # cosine mode m differentiates to -m*pi times sine mode m
        deriv = np.zeros((n_x, n_x + 1))
        for mm in range(1, n_x + 1):
            deriv[mm - 1, mm] = -mm * np.pi
        dt = 1.0 / steps
        times = np.arange(steps + 1) * dt
        e = np.exp(
            2j * np.pi * np.arange(-v.n_t, v.n_t + 1)[None, :] * times[:, None]
        )
        vgrid = ((e @ v.coeffs) @ bv.T).real  # (steps+1, m_x)
        eye = np.eye(n_x + 1)
        self._lu = []
        self._rhs = []
        mats = []
        for k in range(steps + 1):
            adv = analysis @ (vgrid[k][:, None] * (bs @ deriv))
            mats.append(np.diag(self.mu * lap) - adv)
        for k in range(steps):
            left = eye - 0.5 * dt * mats[k + 1]
            right = eye + 0.5 * dt * mats[k]
            self._lu.append(lu_factor(left))
            self._rhs.append(right)

    def apply(self, psi0: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi0, dtype=float)
        if psi.shape != (self.n_x + 1,):
            raise ValueError(f"profile must have {self.n_x + 1} cosine modes")
        for lu, right in zip(self._lu, self._rhs):
            psi = lu_solve(lu, right @ psi)
        return psi


def profile_values(psi: np.ndarray, m_x: int | None = None) -> np.ndarray:
    """Evaluate a cosine-coefficient profile on midpoint nodes."""
    n_x = len(psi) - 1
    if m_x is None:
        m_x = max(4 * (n_x + 1), 16)
    b = space_eval_matrix(n_x, space_nodes(m_x, Basis.NEUMANN_COSINE), Basis.NEUMANN_COSINE)
    return b @ np.asarray(psi, dtype=float)


def profile_from_function(fn, n_x: int, m_x: int | None = None) -> np.ndarray:
    """Cosine coefficients of a smooth function of x (projection on an
    oversampled midpoint grid)."""
    if m_x is None:
        m_x = 4 * (n_x + 1)
    x = space_nodes(m_x, Basis.NEUMANN_COSINE)
    b = space_eval_matrix(n_x, x, Basis.NEUMANN_COSINE)
    return (b.T @ fn(x)) / m_x


def evolve_period_map(
    v: SpectralField,
    psi0: np.ndarray,
    mu: float,
    steps: int,
    check_steps: bool = True,
    drift_tol: float = 1e-4,
) -> np.ndarray:
    """Evolve a Neumann profile through one period of advection-diffusion.

    With check_steps the evolution is repeated at half the step count and
    a drift above drift_tol (relative, sup over modes) raises
    StepCountError."""
    out = PeriodMap(v, mu, steps, n_x=len(np.asarray(psi0)) - 1).apply(psi0)
    if check_steps and steps >= 2:
        half = PeriodMap(v, mu, steps // 2, n_x=len(np.asarray(psi0)) - 1).apply(psi0)
        scale = max(1.0, float(np.abs(out).max()))
        drift = float(np.abs(out - half).max()) / scale
        if drift > drift_tol:
            raise StepCountError(
                f"halving test drifted by {drift:.3e} (> {drift_tol:g}); "
                "increase the step count"
            )
    return out


def monodromy_leading_pair(
    v: SpectralField,
    mu: float,
    steps: int = 512,
    power_iters: int = 200,
    tol: float = 1e-9,
    n_x: int | None = None,
):
    """Leading eigenpair of the period map by power iteration.

    Uniqueness of the time-periodic problem predicts eigenvalue one with
    constant eigenfunction.  Returns (rho, cosine-coefficient profile
    normalized to maximum one)."""
    pmap = PeriodMap(v, mu, steps, n_x=n_x)
    n = pmap.n_x + 1
    psi = np.zeros(n)
    psi[0] = 1.0
    if n > 1:
        psi[1] = 0.1  # symmetry-breaking perturbation
    rho = 1.0
    for _ in range(power_iters):
        nxt = pmap.apply(psi)
        norm_prev = float(np.linalg.norm(psi))
        rho = float(nxt @ psi) / norm_prev ** 2
        defect = float(np.linalg.norm(nxt - rho * psi)) / norm_prev
        psi = nxt / float(np.linalg.norm(nxt))
        if defect <= tol:
            vals = profile_values(psi)
            top = vals[np.argmax(np.abs(vals))]
            return rho, psi / top
    raise PowerIterationError(
        f"power iteration did not converge within {power_iters} iterations "
        f"(defect {defect:.3e})"
    )


# ---------------------------------------------------------------------------
# Multi-start uniqueness verification


@dataclass
class UniquenessReport:
    solutions: list
    max_pairwise_l2: float
    max_s1_residual: float
    unique: bool
    reports: list = field(default_factory=list)


def s1_residual(w: SpectralField, v: SpectralField, mu: float) -> float:
    """Dual norm of T(w) + (v w)_x, zero exactly on S1."""
    vw = product_cosine(v, w, w.n_t, w.n_x)
    return dual_norm(apply_T(w, mu) + d_x(vw))


def verify_uniqueness(
    f: SpectralField,
    cfg: SolverConfig,
    n_starts: int = 3,
    seed: int = 0,
    distance_tol: float = 1e-6,
) -> UniquenessReport:
    """Solve T(u) = f from several starts and check all runs agree.

    Differences of solutions are S1 elements for v = one of the
    solutions; their residual and smallness are reported.  Distances
    above tolerance flag a solver defect, not a counterexample."""
    if n_starts < 2:
        raise ValueError("need at least 2 starts")
    from .fields import random_field

    starts = [zeros(f.n_t, f.n_x, f.basis), solve_linear(f, cfg)]
    i = 0
    while len(starts) < n_starts:
        starts.append(0.1 * random_field(seed + i, f.n_t, f.n_x, 2.0))
        i += 1
    reports = [newton_solve(f, s, cfg) for s in starts[:n_starts]]
    for r in reports:
        if not r.success:
            raise RuntimeError(f"start failed to converge: {r.message}")
    sols = [r.u for r in reports]
    max_d = 0.0
    max_res = 0.0
    for i in range(len(sols)):
        for j in range(i + 1, len(sols)):
            w = sols[i] - sols[j]
            max_d = max(max_d, w.l2())
            max_res = max(max_res, s1_residual(w, sols[j], cfg.mu))
    return UniquenessReport(
        solutions=sols,
        max_pairwise_l2=max_d,
        max_s1_residual=max_res,
        unique=max_d <= distance_tol,
        reports=reports,
    )
