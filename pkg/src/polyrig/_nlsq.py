"""Internal nonlinear least-squares helpers.

Two solvers, both deterministic:

* lm_solve: Levenberg-Marquardt for square-to-overdetermined *or*
  underdetermined zero-residual systems. Used by restart-based witness
  searches, where targets sit on rank-deficient constraint varieties and
  convergence near them is linear rather than quadratic, hence the
  generous default iteration budget.
* gauss_newton_project: minimum-norm Gauss-Newton iteration x -= pinv(J) r,
  used to project a perturbed point back onto a constraint manifold while
  moving as little as possible.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

Residual = Callable[[np.ndarray], np.ndarray]
Jacobian = Callable[[np.ndarray], np.ndarray]


def lm_solve(
    residual: Residual,
    jacobian: Jacobian,
    x0: np.ndarray,
    max_iter: int = 250,
    target: float = 1e-12,
) -> tuple[np.ndarray, np.ndarray]:
    """Drive max|residual| below `target`; returns (x, residual(x)).

    Classic multiplicative damping on J^T J + lam I. Gives up early when no
    damping value in a sweep improves the cost; the caller decides whether
    the final residual is acceptable.
    """
    x = np.array(x0, dtype=float)
    r = residual(x)
    cost = float(r @ r)
    lam = 1e-3
    for _ in range(max_iter):
        if np.abs(r).max() <= target:
            break
        J = jacobian(x)
        A = J.T @ J
        g = J.T @ r
        n = A.shape[0]
        improved = False
        for _ in range(40):
            try:
                dx = np.linalg.solve(A + lam * np.eye(n), -g)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            xn = x + dx
            rn = residual(xn)
            cn = float(rn @ rn)
            if cn < cost:
                x, r, cost = xn, rn, cn
                lam = max(lam * 0.25, 1e-14)
                improved = True
                break
            lam *= 4.0
        if not improved:
            break
    return x, r


def gauss_newton_project(
    residual: Residual,
    jacobian: Jacobian,
    x0: np.ndarray,
    max_iter: int = 100,
    target: float = 1e-10,
    max_travel: float | None = None,
) -> tuple[np.ndarray, bool]:
    """Minimum-norm Newton steps toward residual = 0; (x, reached_target).

    Underdetermined systems get the least-squares min-norm step, so the
    iterate stays close to x0 instead of drifting along the manifold.
    """
    x = np.array(x0, dtype=float)
    for _ in range(max_iter):
        r = residual(x)
        if np.abs(r).max() <= target:
            return x, True
        J = jacobian(x)
        dx, *_ = np.linalg.lstsq(J, r, rcond=None)
        x = x - dx
        if max_travel is not None and np.linalg.norm(x - x0) > max_travel:
            return x, False
    return x, bool(np.abs(residual(x)).max() <= target)
