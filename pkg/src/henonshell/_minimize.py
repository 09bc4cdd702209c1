"""Shared engine for minimizing the Dirichlet-to-weighted-norm quotient.

The discrete objective is Q(u) = (u.K.u) / C(u)**(2/(p+1)) with K the
assembled stiffness matrix and C(u) = sum_q gw_q |(P u)_q|**(p+1) the weighted
norm evaluated by per-cell Gauss quadrature of the nodal interpolant (P maps
nodal values to quadrature points).  With the energy exact for the interpolant
and the weighted norm exact up to Gauss error, the discrete problem is a true
Galerkin restriction: its infimum can only decrease under nested refinement,
which the property tests rely on.

The minimizer runs projected gradient descent in the energy inner product:
with the iterate normalized to unit constraint value, the descent direction
is G = u - Q * K^{-1} grad C / (p+1), so a unit step is one damped inverse
iteration, and a Barzilai-Borwein steplength accelerates the tail.  Iterates
are kept nonnegative (taking |u| does not increase the quotient) and
renormalized after every step; K is factorized once per solve.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import splu

__all__ = [
    "DegenerateWeightError",
    "NonConvergenceError",
    "SolveOptions",
    "minimize_quotient",
    "quotient_value",
]


class NonConvergenceError(RuntimeError):
    """Solver hit the iteration cap; carries the final gradient norm."""

    def __init__(self, message, grad_norm=None, iterations=None):
        super().__init__(message)
        self.grad_norm = grad_norm
        self.iterations = iterations


class DegenerateWeightError(ValueError):
    """The weighted constraint integral underflows to zero on this grid."""


@dataclass
class SolveOptions:
    """Iteration controls shared by the radial and axisymmetric solvers."""

    max_iter: int = 200_000
    quotient_tol: float = 1e-10
    grad_tol: float = 1e-9
    patience: int = 10
    extra_random_starts: int = 0
    seed: int = 0


def _constraint(P, gw, p, u):
    return float(gw @ np.abs(P @ u) ** (p + 1.0))


def _constraint_dvec(P, gw, p, u):
    """d with grad C = (p+1) d, for nonnegative iterates."""
    q = P @ u
    return P.T @ (gw * np.abs(q) ** (p - 1.0) * q)


def quotient_value(A, P, gw, p, u):
    """Quotient at an arbitrary candidate (no normalization assumed)."""
    u = np.abs(np.asarray(u, dtype=float))
    denom = _constraint(P, gw, p, u)
    if denom <= 0.0:
        raise DegenerateWeightError("candidate has zero weighted norm")
    energy = float(u @ (A @ u))
    return energy / denom ** (2.0 / (p + 1.0))


def _normalize(P, gw, p, u):
    c = _constraint(P, gw, p, u)
    if not np.isfinite(c) or c <= 0.0:
        raise DegenerateWeightError(
            "weighted norm of the iterate vanished; the weight underflows on this grid"
        )
    return u / c ** (1.0 / (p + 1.0))


def minimize_quotient(A, P, gw, p, u0, opts=None):
    """Minimize the discrete quotient; returns (u, value, info).

    The returned u is nonnegative with unit constraint (C(u) = 1), so the
    quotient value equals the discrete energy u.K.u.  Raises
    NonConvergenceError when neither the gradient criterion nor quotient
    stagnation is met within ``opts.max_iter`` iterations.
    """
    opts = opts or SolveOptions()
    if float(np.sum(gw)) <= 0.0:
        raise DegenerateWeightError("weighted quadrature vector is identically zero")
    lu = splu(A.tocsc())

    u = np.abs(np.asarray(u0, dtype=float))
    u = _normalize(P, gw, p, u)
    Ku = A @ u
    E = float(u @ Ku)

    history = deque(maxlen=opts.patience + 1)
    u_prev = resid_prev = None
    grad_rel = np.inf

    for k in range(opts.max_iter):
        d = _constraint_dvec(P, gw, p, u)
        resid = Ku - E * d
        G = lu.solve(resid)
        gnorm2 = float(resid @ G)
        grad_rel = np.sqrt(max(gnorm2, 0.0) / E) if E > 0 else 0.0

        history.append(E)
        stalled = (
            len(history) > opts.patience
            and abs(history[0] - E) < opts.quotient_tol * abs(E)
        )
        if grad_rel < opts.grad_tol or stalled:
            return u, E, {"iterations": k, "grad_rel": grad_rel, "converged": True}

        tau = 1.0
        if u_prev is not None:
            s = u - u_prev
            y = resid - resid_prev
            num = float(s @ (A @ s))
            den = float(s @ y)
            if den > 0.0 and np.isfinite(num) and num > 0.0:
                tau = min(max(num / den, 0.15), 2.0)
        u_prev, resid_prev = u, resid

        ceiling = max(history) * (1.0 + 1e-12)
        best = None
        for t in dict.fromkeys((tau, 1.0, 0.5)):
            cand = np.abs(u - t * G)
            try:
                cand = _normalize(P, gw, p, cand)
            except DegenerateWeightError:
                continue
            Kc = A @ cand
            Ec = float(cand @ Kc)
            if best is None or Ec < best[1]:
                best = (cand, Ec, Kc)
            if Ec <= ceiling:
                break
        if best is None:
            raise DegenerateWeightError(
                "every candidate step lost the weighted norm; weight too degenerate"
            )
        u, E, Ku = best[0], best[1], best[2]

    raise NonConvergenceError(
        f"no convergence in {opts.max_iter} iterations; "
        f"final relative projected-gradient norm {grad_rel:.3e}",
        grad_norm=grad_rel,
        iterations=opts.max_iter,
    )
