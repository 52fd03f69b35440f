"""Newton / homotopy solution of the time-periodic Burgers problem T(u) = f.

The linearized equations T'(m) w = r are solved in the preconditioned
fixed-point form w + L^{-1}(m w)_x = L^{-1} r, which is identity plus a
compact perturbation, the regime where Krylov iterations converge mesh
independently.  Small systems fall back to a densely assembled modal
matrix so oracle comparisons stay available.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from .fields import SpectralField, zeros
from .norms import aniso_norm, apriori_bound, dual_norm, energy_gap
from .operators import apply_L, apply_T, apply_T_prime, d_x, invert_L
from .fields import product_cosine


class LinearSolveError(RuntimeError):
    """Krylov iteration failed to reach the requested residual."""

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class ContinuationError(RuntimeError):
    """Homotopy continuation failed at a specific lambda step."""

    def __init__(self, message: str, lam: float):
        super().__init__(message)
        self.lam = lam


@dataclass(frozen=True)
class SolverConfig:
    mu: float
    newton_tol: float = 1e-10
    max_newton: int = 30
    homotopy_steps: tuple = (0.0, 0.25, 0.5, 0.75, 1.0)
    krylov_tol: float = 1e-12
    max_krylov: int = 500
    dense_threshold: int = 2000
    max_damping: int = 40
    max_recoveries: int = 6

    def __post_init__(self):
        if self.mu <= 0:
            raise ValueError("mu must be positive")
        steps = tuple(float(s) for s in self.homotopy_steps)
        if steps[0] != 0.0 or steps[-1] != 1.0 or any(
            b <= a for a, b in zip(steps, steps[1:])
        ):
            raise ValueError("homotopy_steps must increase strictly from 0 to 1")
        object.__setattr__(self, "homotopy_steps", steps)


@dataclass
class SolveReport:
    u: SpectralField
    residual_dual: float
    newton_iters: int
    lambda_path: list = field(default_factory=list)
    energy_gap: float = 0.0
    apriori_margin: float | None = None
    success: bool = True
    message: str = ""


def solve_linear(f: SpectralField, cfg: SolverConfig) -> SpectralField:
    """The lambda = 0 entry point: exact diagonal inverse of L."""
    return invert_L(f, cfg.mu)


def _symmetrize(u: SpectralField) -> SpectralField:
    c = u.coeffs
    return u.with_coeffs(0.5 * (c + c[::-1].conj()))


def _linearized_matvec(m: SpectralField, cfg: SolverConfig):
    """Preconditioned operator w -> w + L^{-1} (m w)_x on flat coefficients."""
    shape = m.coeffs.shape

    def mv(x):
        w = m.with_coeffs(x.reshape(shape))
        pert = invert_L(d_x(product_cosine(m, w, m.n_t, m.n_x)), cfg.mu)
        return (w.coeffs + pert.coeffs).ravel()

    n = m.coeffs.size
    return LinearOperator((n, n), matvec=mv, dtype=complex)


def solve_linearized(
    m: SpectralField, r: SpectralField, cfg: SolverConfig
) -> SpectralField:
    """Solve T'(m) w = r to dual residual krylov_tol * dual_norm(r)."""
    rn = dual_norm(r)
    if rn == 0.0:
        return zeros(r.n_t, r.n_x, r.basis)
    total = r.coeffs.size
    if total <= cfg.dense_threshold:
        w = _dense_solve(m, r, cfg)
    else:
        w = _krylov_solve(m, r, cfg)
    w = _symmetrize(w)
    res = dual_norm(apply_T_prime(m, w, cfg.mu) - r)
    if res > 10.0 * _residual_target(m, w, rn, cfg):
        raise LinearSolveError(
            f"linearized solve stalled at dual residual {res:.3e} "
            f"(target {cfg.krylov_tol * rn:.3e})",
            residual=res,
        )
    return w


def _dense_solve(m: SpectralField, r: SpectralField, cfg: SolverConfig) -> SpectralField:
    shape = m.coeffs.shape
    n = r.coeffs.size
    a = np.empty((n, n), dtype=complex)
    e = np.zeros(n, dtype=complex)
    for k in range(n):
        e[k] = 1.0
        w = SpectralField(e.reshape(shape), m.n_t, m.n_x, m.basis)
        col = apply_T_prime(m, w, cfg.mu).coeffs
        a[:, k] = col.ravel()
        e[k] = 0.0
    x = np.linalg.solve(a, np.asarray(r.coeffs).ravel())
    return r.with_coeffs(x.reshape(shape))


def _residual_target(m, w, rn, cfg) -> float:
    # relative target plus the roundoff floor of evaluating T'(m) w
    floor = 5e-15 * (1.0 + m.l2()) * (1.0 + w.l2())
    return max(cfg.krylov_tol * rn, floor)


def _krylov_solve(m: SpectralField, r: SpectralField, cfg: SolverConfig) -> SpectralField:
    op = _linearized_matvec(m, cfg)
    rhs = invert_L(r, cfg.mu).coeffs.ravel()
    rn = dual_norm(r)
    rtol = cfg.krylov_tol
    x = None
    for _ in range(3):
        x, _info = gmres(
            op,
            rhs,
            x0=x,
            rtol=rtol,
            atol=0.0,
            maxiter=cfg.max_krylov,
            restart=min(cfg.max_krylov, rhs.size),
        )
        w = r.with_coeffs(x.reshape(m.coeffs.shape))
        res = dual_norm(apply_T_prime(m, _symmetrize(w), cfg.mu) - r)
        if res <= _residual_target(m, w, rn, cfg):
            return w
        rtol *= 1e-2
    raise LinearSolveError(
        f"GMRES did not converge (dual residual {res:.3e})", residual=res
    )


def _newton(
    f: SpectralField,
    u0: SpectralField,
    cfg: SolverConfig,
    lam: float = 1.0,
) -> SolveReport:
    u = u0
    res = apply_T(u, cfg.mu, lam) - f
    rd = dual_norm(res)
    history = [(lam, rd)]
    recoveries = cfg.max_recoveries
    for it in range(1, cfg.max_newton + 1):
        if rd <= cfg.newton_tol:
            return _finalize(f, u, cfg, rd, it - 1, history)
        try:
            # T'(u) for the homotopy operator L + lam*S has advection
            # field lam*u
            w = solve_linearized(lam * u, res, cfg)
        except LinearSolveError as exc:
            return SolveReport(
                u=u, residual_dual=rd, newton_iters=it - 1,
                lambda_path=history, success=False,
                message=f"linearized solve failed: {exc}",
            )
        step = 1.0
        stalled = True
        for _ in range(cfg.max_damping):
            u_try = u - step * w
            res_try = apply_T(u_try, cfg.mu, lam) - f
            rd_try = dual_norm(res_try)
            # demand a nonvanishing relative decrease: an accepted crawl
            # along a fold is a stall in slow motion
            if rd_try < 0.999 * rd:
                stalled = False
                break
            step *= 0.5
        if stalled:
            # the damped iteration ran into a fold of the residual
            # landscape (near-singular Jacobian); contract the iterate
            # toward the zero start and continue from the better basin
            if recoveries > 0:
                recoveries -= 1
                u = 0.5 * u
                res = apply_T(u, cfg.mu, lam) - f
                rd = dual_norm(res)
                history.append((lam, rd))
                continue
            return SolveReport(
                u=u, residual_dual=rd, newton_iters=it,
                lambda_path=history, success=False,
                message="damped Newton step could not reduce the residual",
            )
        u, res, rd = u_try, res_try, rd_try
        history.append((lam, rd))
    if rd <= cfg.newton_tol:
        return _finalize(f, u, cfg, rd, cfg.max_newton, history)
    return SolveReport(
        u=u, residual_dual=rd, newton_iters=cfg.max_newton,
        lambda_path=history, success=False,
        message=f"no convergence after {cfg.max_newton} Newton iterations",
    )


def _finalize(f, u, cfg, rd, iters, history) -> SolveReport:
    return SolveReport(
        u=u,
        residual_dual=rd,
        newton_iters=iters,
        lambda_path=history,
        energy_gap=energy_gap(f, u, cfg.mu),
        success=True,
    )


def newton_solve(
    f: SpectralField,
    u0: SpectralField | None = None,
    cfg: SolverConfig | None = None,
    c_gn: float | None = None,
) -> SolveReport:
    """Damped Newton iteration on T(u) = f from the given start."""
    if cfg is None:
        raise ValueError("a SolverConfig is required")
    if u0 is None:
        u0 = zeros(f.n_t, f.n_x, f.basis)
    report = _newton(f, u0, cfg, lam=1.0)
    if report.success and c_gn is not None:
        bound = apriori_bound(f, cfg.mu, c_gn)
        report.apriori_margin = bound - aniso_norm(report.u)
    return report


def homotopy_solve(
    f: SpectralField,
    cfg: SolverConfig,
    c_gn: float | None = None,
    max_bisections: int = 12,
) -> SolveReport:
    """Continuation in lambda from the linear solve to the Burgers solve.

    Each lambda step warm-starts from the previous solution; a failed
    step is bisected (the solution path is smooth in lambda, so midpoint
    insertion recovers).  Every accepted iterate is recorded with its
    anisotropic norm for comparison against the a priori bound."""
    bound = apriori_bound(f, cfg.mu, c_gn) if c_gn is not None else None
    path = []
    u = solve_linear(f, cfg)
    path.append((0.0, dual_norm(apply_T(u, cfg.mu, 0.0) - f), aniso_norm(u)))
    pending = list(cfg.homotopy_steps[1:])
    prev_lam = 0.0
    bisections = 0
    last = None
    while pending:
        lam = pending[0]
        report = _newton(f, u, cfg, lam=lam)
        if not report.success:
            if bisections >= max_bisections or lam - prev_lam < 1e-6:
                raise ContinuationError(
                    f"continuation failed at lambda = {lam:.6g}: {report.message}",
                    lam=lam,
                )
            pending.insert(0, 0.5 * (prev_lam + lam))
            bisections += 1
            continue
        u = report.u
        last = report
        path.append((lam, report.residual_dual, aniso_norm(u)))
        prev_lam = lam
        pending.pop(0)
    last.lambda_path = [(lam, rd) for lam, rd, _ in path]
    if bound is not None:
        last.apriori_margin = min(bound - nrm for _, _, nrm in path)
    last.energy_gap = energy_gap(f, u, cfg.mu)
    return last
