"""Scaled conjugate gradient minimization (Moller, 1993).

Full-batch conjugate directions with a scalar Levenberg-Marquardt style
regulator lambda instead of a line search.  Hessian-vector products are
approximated by a forward difference of gradients with step sigma/|p|.
Only steps that do not increase the objective are accepted, so the
recorded loss trace is non-increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

Objective = Callable[[np.ndarray], tuple[float, np.ndarray]]


class TrainingDivergedError(RuntimeError):
    def __init__(self, message: str, trace: list[float]):
        super().__init__(message)
        self.trace = trace


@dataclass
class ScgResult:
    w: np.ndarray
    trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def scg_minimize(
    fun: Objective,
    w0: np.ndarray,
    max_iterations: int = 500,
    grad_tol: float = 1e-6,
    sigma: float = 1e-5,
    lambda0: float = 1e-7,
) -> ScgResult:
    """Minimize ``fun`` (returning loss and gradient) from ``w0``."""
    w = np.array(w0, dtype=np.float64)
    loss, grad = fun(w)
    if not np.isfinite(loss):
        raise TrainingDivergedError("initial loss is not finite", [])
    r = -grad
    p = r.copy()
    lam = lambda0
    lam_bar = 0.0
    success = True
    delta = 0.0
    trace = [loss]

    for k in range(1, max_iterations + 1):
        r_norm = np.linalg.norm(r)
        if r_norm < grad_tol:
            return ScgResult(w, trace, k - 1, True)

        p_sq = float(p @ p)
        if success:
            # second-order information along p by a gradient difference
            sigma_k = sigma / np.sqrt(p_sq)
            _, grad_s = fun(w + sigma_k * p)
            s = (grad_s - (-r)) / sigma_k
            delta = float(p @ s)

        delta = delta + (lam - lam_bar) * p_sq
        if delta <= 0:
            lam_bar = 2.0 * (lam - delta / p_sq)
            delta = -delta + lam * p_sq
            lam = lam_bar

        mu = float(p @ r)
        alpha = mu / delta
        loss_new, grad_new = fun(w + alpha * p)
        if not np.isfinite(loss_new):
            raise TrainingDivergedError(
                f"non-finite loss at iteration {k}", trace
            )
        # When the predicted decrease mu^2/(2 delta) falls below the floating
        # point resolution of the loss, the comparison parameter is pure
        # cancellation noise; treat such steps as plain successful CG steps.
        predicted = 0.5 * mu * alpha
        resolution = 8.0 * np.finfo(np.float64).eps * (abs(loss) + abs(loss_new))
        if predicted <= resolution:
            comparison = 1.0
        else:
            comparison = 2.0 * delta * (loss - loss_new) / (mu * mu)

        if comparison >= 0:
            w = w + alpha * p
            loss = loss_new
            r_new = -grad_new
            lam_bar = 0.0
            success = True
            # Powell's criterion: restart with steepest descent once the
            # successive gradients lose orthogonality (stale conjugacy).
            # Unlike a fixed every-n restart it keeps the finite-termination
            # behavior on quadratics.
            if abs(float(r_new @ r)) >= 0.2 * float(r_new @ r_new):
                p = r_new.copy()
            else:
                beta = float((r_new @ r_new - r_new @ r) / mu)
                p = r_new + beta * p
            r = r_new
            trace.append(loss)
            if comparison >= 0.75:
                lam = 0.25 * lam
        else:
            lam_bar = lam
            success = False

        if comparison < 0.25:
            lam = lam + delta * (1.0 - comparison) / p_sq

    converged = bool(np.linalg.norm(r) < grad_tol)
    return ScgResult(w, trace, max_iterations, converged)
