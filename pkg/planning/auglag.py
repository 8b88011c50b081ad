"""
Augmented Lagrangian Solver
Bound-constrained augmented Lagrangian method for the collocation program.

Inequalities c_I(x) >= 0 become equalities c_I(x) - s = 0 with bounded slacks
s >= 0. The subproblem

    Phi(w) = f(x) - y^T c(w) + mu/2 ||c(w)||^2,   lb <= w <= ub

is minimized by projected Levenberg-Marquardt steps on the Gauss-Newton
model H = hess f + mu J^T J. Multipliers and penalty follow the tolerance
schedule of Conn, Gould and Toint (algorithm 14.4.2) with mu used as the
penalty rather than its inverse.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import linalg
from scipy.optimize import OptimizeResult

logger = logging.getLogger(__name__)

STATUS_MESSAGES = {
    'success': "Constraint violation and stationarity are within tolerance",
    'maxiter': "Maximum number of iterations reached",
    'penalty': "Penalty parameter exceeded its upper limit",
}


class PlannerConvergenceError(RuntimeError):
    """Raised when the planner fails to converge; carries the best iterate found."""

    def __init__(self, message: str, best_iterate: Optional[np.ndarray] = None,
                 diagnostics: Optional[dict] = None):
        super().__init__(message)
        self.best_iterate = best_iterate
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class AugLagOptions:
    """
    Solver settings.

    Attributes:
        ctol: Infinity-norm tolerance on the constraint residual
        gtol: Infinity-norm tolerance on the projected Lagrangian gradient
        maxiter: Total subproblem iterations
        initial_penalty: Starting penalty mu
        tau: Penalty growth factor when the residual does not shrink enough
        max_penalty: Upper limit on mu
        omega, eta: Initial subproblem gradient and residual tolerances
        alpha_omega, beta_omega, alpha_eta, beta_eta: Tolerance schedule exponents
        initial_damping: Starting Levenberg-Marquardt damping
    """
    ctol: float = 1e-8
    gtol: float = 1e-6
    maxiter: int = 3000
    initial_penalty: float = 10.0
    tau: float = 10.0
    max_penalty: float = 1e12
    omega: float = 1.0
    eta: float = 1.0
    alpha_omega: float = 1.0
    beta_omega: float = 1.0
    alpha_eta: float = 0.1
    beta_eta: float = 0.9
    initial_damping: float = 1e-3

    def __post_init__(self):
        if self.ctol <= 0 or self.gtol <= 0:
            raise ValueError("Tolerances must be positive")
        if self.maxiter < 1:
            raise ValueError("maxiter must be at least 1")
        if self.tau <= 1:
            raise ValueError("Penalty growth factor must exceed 1")


def projected_gradient(w: np.ndarray, g: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> np.ndarray:
    """Stationarity measure w - P(w - g) of a bound-constrained problem."""
    return w - np.clip(w - g, lb, ub)


def minimize_auglag(
    fun: Callable,
    grad: Callable,
    constraints: Callable,
    jacobian: Callable,
    n_eq: int,
    x0: np.ndarray,
    lb: np.ndarray,
    ub: np.ndarray,
    hess: Optional[Callable] = None,
    options: AugLagOptions = AugLagOptions(),
) -> OptimizeResult:
    """
    Minimize f(x) subject to c_E(x) = 0, c_I(x) >= 0 and lb <= x <= ub.

    Args:
        fun: Objective f(x)
        grad: Objective gradient
        constraints: Stacked constraints [c_E; c_I]
        jacobian: Jacobian of the stacked constraints, shape (m, n)
        n_eq: Number of equality rows at the top of the stack
        x0: Starting point (clipped into the bounds)
        lb, ub: Variable bounds; lb == ub fixes a variable
        hess: Objective Hessian (zero when omitted)
        options: Solver settings

    Returns:
        OptimizeResult with x, s (slacks), y (multipliers), penalty_param,
        success, status message, fun, optimality, constr_violation, nit,
        nfev and best_x (iterate with the smallest constraint violation)
    """
    x0 = np.asarray(x0, dtype=float)
    lb = np.asarray(lb, dtype=float)
    ub = np.asarray(ub, dtype=float)
    n = len(x0)
    c0 = np.asarray(constraints(np.clip(x0, lb, ub)), dtype=float)
    m = len(c0)
    n_in = m - n_eq
    if n_in < 0:
        raise ValueError("n_eq exceeds the number of constraints")

    lb_w = np.concatenate([lb, np.zeros(n_in)])
    ub_w = np.concatenate([ub, np.full(n_in, np.inf)])
    fixed = lb_w == ub_w
    w = np.clip(np.concatenate([x0, np.maximum(c0[n_eq:], 0.0)]), lb_w, ub_w)

    def residual(c, w):
        r = c.copy()
        r[n_eq:] -= w[n:]
        return r

    def residual_jacobian(Jc):
        Jr = np.zeros((m, n + n_in))
        Jr[:, :n] = Jc
        Jr[n_eq:, n:] = -np.eye(n_in)
        return Jr

    def objective_hessian(x):
        H = np.zeros((n + n_in, n + n_in))
        if hess is not None:
            H[:n, :n] = hess(x)
        return H

    def merit(f, r, y, mu):
        return f - y @ r + 0.5 * mu * (r @ r)

    def merit_gradient(x, Jr, r, y, mu):
        g = np.zeros(n + n_in)
        g[:n] = grad(x)
        return g - Jr.T @ (y - mu * r)

    y = np.zeros(m)
    mu = options.initial_penalty
    omega_k = max(options.omega / mu ** options.alpha_omega, options.gtol)
    eta_k = max(options.eta / mu ** options.alpha_eta, options.ctol)
    damping = options.initial_damping

    x = w[:n]
    f = float(fun(x))
    c = np.asarray(constraints(x), dtype=float)
    r = residual(c, w)
    Jr = residual_jacobian(np.asarray(jacobian(x), dtype=float))
    L = merit(f, r, y, mu)
    g = merit_gradient(x, Jr, r, y, mu)
    H = objective_hessian(x) + mu * Jr.T @ Jr
    nfev = 1

    best_w, best_violation = w.copy(), float(np.max(np.abs(r))) if m else 0.0
    success, message = False, STATUS_MESSAGES['maxiter']
    iteration = 0

    while iteration < options.maxiter:
        iteration += 1
        violation = float(np.max(np.abs(r))) if m else 0.0
        optimality = float(np.max(np.abs(projected_gradient(w, g, lb_w, ub_w)[~fixed]), initial=0.0))

        if violation <= options.ctol and optimality <= options.gtol:
            success, message = True, STATUS_MESSAGES['success']
            break

        if optimality <= omega_k or damping > 1e12:
            # Subproblem solved (or stalled): update multipliers or penalty
            if violation <= eta_k:
                y = y - mu * r
                eta_k = max(eta_k / mu ** options.beta_eta, options.ctol)
                omega_k = max(omega_k / mu ** options.beta_omega, options.gtol)
            else:
                mu *= options.tau
                if mu > options.max_penalty:
                    message = STATUS_MESSAGES['penalty']
                    break
                eta_k = max(options.eta / mu ** options.alpha_eta, options.ctol)
                omega_k = max(options.omega / mu ** options.alpha_omega, options.gtol)
            damping = options.initial_damping
            L = merit(f, r, y, mu)
            g = merit_gradient(x, Jr, r, y, mu)
            H = objective_hessian(x) + mu * Jr.T @ Jr
            logger.debug(f"AL outer update at iteration {iteration}: |c|={violation:.3e}, "
                         f"mu={mu:.1e}, |y|={np.max(np.abs(y), initial=0.0):.3e}")
            continue

        free = ~fixed & ~((w <= lb_w) & (g > 0)) & ~((w >= ub_w) & (g < 0))
        if not np.any(free):
            damping = np.inf
            continue

        H_free = H[np.ix_(free, free)]
        try:
            step_free = linalg.solve(
                H_free + damping * np.eye(int(free.sum())), -g[free], assume_a='pos'
            )
        except (linalg.LinAlgError, ValueError):
            damping *= 4.0
            continue

        step = np.zeros_like(w)
        step[free] = step_free
        w_trial = np.clip(w + step, lb_w, ub_w)
        step = w_trial - w
        predicted = -(g @ step + 0.5 * step @ H @ step)
        if predicted <= 0 or not np.all(np.isfinite(w_trial)):
            damping *= 4.0
            continue

        x_trial = w_trial[:n]
        f_trial = float(fun(x_trial))
        c_trial = np.asarray(constraints(x_trial), dtype=float)
        nfev += 1
        r_trial = residual(c_trial, w_trial)
        L_trial = merit(f_trial, r_trial, y, mu)
        ratio = (L - L_trial) / predicted if np.isfinite(L_trial) else -np.inf

        if ratio > 0.75:
            damping = max(damping / 3.0, 1e-12)
        elif ratio < 0.25:
            damping *= 4.0

        if ratio > 1e-4:
            w, x, f, c, r, L = w_trial, x_trial, f_trial, c_trial, r_trial, L_trial
            Jr = residual_jacobian(np.asarray(jacobian(x), dtype=float))
            g = merit_gradient(x, Jr, r, y, mu)
            H = objective_hessian(x) + mu * Jr.T @ Jr
            new_violation = float(np.max(np.abs(r))) if m else 0.0
            if new_violation < best_violation:
                best_w, best_violation = w.copy(), new_violation

    violation = float(np.max(np.abs(r))) if m else 0.0
    optimality = float(np.max(np.abs(projected_gradient(w, g, lb_w, ub_w)[~fixed]), initial=0.0))
    if not success and violation <= options.ctol and optimality <= options.gtol:
        success, message = True, STATUS_MESSAGES['success']

    logger.debug(f"AL finished after {iteration} iterations: {message}")
    return OptimizeResult(
        x=w[:n].copy(),
        s=w[n:].copy(),
        y=y,
        penalty_param=mu,
        success=success,
        message=message,
        fun=f,
        grad=g[:n].copy(),
        optimality=optimality,
        constr_violation=violation,
        nit=iteration,
        nfev=nfev,
        best_x=best_w[:n].copy(),
        best_violation=best_violation,
    )
