"""Weighted nonlinear least squares.

A Levenberg-Marquardt loop with finite-difference Jacobians, a Nelder-Mead
fallback for starts that stall, and a multi-start wrapper.  Residual functions
must already be divided by the measurement sigmas, so the returned covariance
is the absolute one, ``(J^T J)^-1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import FitFailure


@dataclass
class FitResult:
    params: np.ndarray
    cov: np.ndarray
    chi2: float
    dof: int
    nfev: int
    success: bool
    message: str = ""

    @property
    def errors(self) -> np.ndarray:
        return np.sqrt(np.clip(np.diag(self.cov), 0, None))

    @property
    def reduced_chi2(self) -> float:
        return self.chi2 / max(self.dof, 1)


def numeric_jacobian(fun: Callable, p: np.ndarray, f0: np.ndarray | None = None, steps=None, central: bool = True):
    p = np.asarray(p, dtype=float)
    if steps is None:
        steps = 1e-6 * np.maximum(np.abs(p), 1e-3)
    cols = []
    for i, h in enumerate(np.broadcast_to(steps, p.shape)):
        dp = np.zeros_like(p)
        dp[i] = h
        if central:
            cols.append((fun(p + dp) - fun(p - dp)) / (2 * h))
        else:
            cols.append((fun(p + dp) - f0) / h)
    return np.stack(cols, axis=-1)


def covariance(jac: np.ndarray) -> np.ndarray:
    # pinv keeps parameters with a flat direction finite instead of blowing up
    return np.linalg.pinv(jac.T @ jac, rcond=1e-13)


def levenberg_marquardt(
    residual: Callable,
    p0: Sequence[float],
    jac: Callable | None = None,
    steps=None,
    max_iter: int = 200,
    xtol: float = 1e-10,
    ftol: float = 1e-12,
) -> FitResult:
    p = np.array(p0, dtype=float)
    r = residual(p)
    cost = float(r @ r)
    nfev = 1
    if not np.isfinite(cost):
        return FitResult(p, np.full((len(p), len(p)), np.nan), np.inf, max(len(r) - len(p), 0), nfev, False,
                         "non-finite residual at start")
    lam = 1e-3
    jacobian = jac or (lambda q: numeric_jacobian(residual, q, steps=steps))
    converged = False
    for _ in range(max_iter):
        J = jacobian(p)
        nfev += 0 if jac else 2 * len(p)
        A = J.T @ J
        g = J.T @ r
        diag = np.maximum(np.diag(A), 1e-30)
        while True:
            try:
                step = np.linalg.solve(A + lam * np.diag(diag), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                if lam > 1e16:
                    break
                continue
            trial = p + step
            r_new = residual(trial)
            nfev += 1
            cost_new = float(r_new @ r_new) if np.all(np.isfinite(r_new)) else np.inf
            if cost_new <= cost:
                break
            lam *= 10
            if lam > 1e16:
                break
        if lam > 1e16:
            # no downhill step exists at this damping level: stationary point
            converged = np.linalg.norm(g) < 1e-6 * max(1.0, np.sqrt(cost))
            break
        small_step = np.all(np.abs(step) <= xtol * (np.abs(p) + xtol))
        small_gain = cost - cost_new <= ftol * max(cost, 1e-300)
        p, r, cost = trial, r_new, cost_new
        lam = max(lam / 10, 1e-12)
        if small_step or small_gain:
            converged = True
            break
    J = jacobian(p)
    return FitResult(p, covariance(J), cost, max(len(r) - len(p), 0), nfev, converged, "" if converged else "max_iter or stalled")


def fit(
    residual: Callable,
    starts: Sequence[Sequence[float]],
    steps=None,
    fallback: bool = True,
    jac: Callable | None = None,
    **lm_options,
) -> FitResult:
    """Best LM fit over ``starts``; Nelder-Mead polishes starts where LM stalls.

    ``lm_options`` go to :func:`levenberg_marquardt` (``max_iter``, ``xtol``, ``ftol``).
    """
    best = None
    for p0 in starts:
        res = levenberg_marquardt(residual, p0, jac=jac, steps=steps, **lm_options)
        if not res.success and fallback:
            nm = minimize(lambda q: float(np.sum(residual(q) ** 2)), res.params, method="Nelder-Mead",
                          options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 20000})
            res = levenberg_marquardt(residual, nm.x, jac=jac, steps=steps, **lm_options)
            res.nfev += nm.nfev
            res.success = res.success or nm.success
        if not np.all(np.isfinite(res.params)):
            continue
        if best is None or (res.success, -res.chi2) > (best.success, -best.chi2):
            best = res
    if best is None or not best.success:
        raise FitFailure("least-squares fit did not converge from any start")
    return best


def weighted_line(x, y, sigma):
    """Weighted straight-line fit.  Returns ``(intercept, slope, cov)``."""
    x, y, sigma = (np.asarray(v, dtype=float) for v in (x, y, sigma))
    w = 1.0 / sigma**2
    A = np.stack([np.ones_like(x), x], axis=1)
    cov = np.linalg.inv(A.T @ (A * w[:, None]))
    b, m = cov @ (A.T @ (w * y))
    return float(b), float(m), cov


def fit_sinusoid(theta, y, sigma):
    """Linear fit of ``c + a cos(theta - theta0)``.

    Returns ``(c, a, theta0, cov)`` with ``a >= 0`` and ``cov`` over
    ``(c, a, theta0)`` from first-order propagation.
    """
    theta, y, sigma = (np.asarray(v, dtype=float) for v in (theta, y, sigma))
    w = 1.0 / sigma**2
    A = np.stack([np.ones_like(theta), np.cos(theta), np.sin(theta)], axis=1)
    cov_lin = np.linalg.inv(A.T @ (A * w[:, None]))
    c, p, q = cov_lin @ (A.T @ (w * y))
    a = float(np.hypot(p, q))
    theta0 = float(np.arctan2(q, p))
    if a > 0:
        T = np.array([[1, 0, 0], [0, p / a, q / a], [0, -q / a**2, p / a**2]])
    else:
        T = np.array([[1, 0, 0], [0, 1, 0], [0, 0, 0]])
    return float(c), a, theta0, T @ cov_lin @ T.T
