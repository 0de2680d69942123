"""Multi-start Nelder-Mead maximisation with a finite-difference stationarity check."""

from __future__ import annotations

import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy import optimize

GRAD_TOL = 1e-3
FD_STEP = 1e-5


@dataclass
class OptimResult:
    x: NDArray[np.float64]
    fun: float
    n_evals: int
    converged: bool
    grad: NDArray[np.float64]
    message: str


def fd_gradient(f: Callable[[NDArray], float], x, h: float = FD_STEP) -> NDArray[np.float64]:
    """Central differences with step ``h`` in every coordinate."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _simplex(x0, step):
    x0 = np.asarray(x0, dtype=float)
    pts = [x0]
    for i in range(len(x0)):
        v = x0.copy()
        v[i] += step
        pts.append(v)
    return np.array(pts)


def maximize(
    f: Callable[[NDArray], float],
    starts: Sequence[Sequence[float]],
    *,
    xatol: float = 1e-8,
    fatol: float = 1e-9,
    max_evals: int = 20000,
    step: float = 0.25,
    restarts: int = 8,
) -> OptimResult:
    """
    Maximise ``f`` from each start, then restart the simplex at the incumbent
    until a restart gains less than ``fatol``.  ``f`` may return ``-inf``.

    ``converged`` requires every simplex run to stop on tolerance and the
    central-difference gradient at the optimum to have max-norm below
    ``GRAD_TOL``.
    """
    n_evals = 0

    def neg(x):
        v = f(x)
        return -v if math.isfinite(v) else math.inf

    best = None
    ok = True
    for s in starts:
        res = optimize.minimize(
            neg, np.asarray(s, dtype=float), method="Nelder-Mead",
            options=dict(xatol=xatol, fatol=fatol, maxfev=max_evals, initial_simplex=_simplex(s, step)),
        )
        n_evals += res.nfev
        if best is None or res.fun < best.fun:
            best, ok = res, bool(res.success)
    if best is None or not math.isfinite(best.fun):
        return OptimResult(np.asarray(starts[0], float), -math.inf, n_evals, False,
                           np.full(len(starts[0]), np.nan), "no finite objective value found")

    x, fx = best.x, best.fun
    msg = str(best.message)
    for _ in range(restarts):
        res = optimize.minimize(
            neg, x, method="Nelder-Mead",
            options=dict(xatol=xatol, fatol=fatol, maxfev=max_evals, initial_simplex=_simplex(x, step / 10)),
        )
        n_evals += res.nfev
        gain = fx - res.fun
        if res.fun < fx:
            x, fx, ok, msg = res.x, res.fun, bool(res.success), str(res.message)
        if gain <= fatol:
            break

    grad = fd_gradient(lambda t: -neg(t), x)
    n_evals += 2 * len(x)
    gmax = float(np.max(np.abs(grad)))
    converged = ok and bool(np.all(np.isfinite(grad))) and gmax < GRAD_TOL
    if not converged:
        msg = f"{msg}; gradient max-norm {gmax:.3g} (tolerance {GRAD_TOL:g})"
    return OptimResult(np.asarray(x), -fx, n_evals, converged, grad, msg)
