"""Poisson and negative binomial comparison models."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special, stats

from .errors import DomainError
from .gof import CountData, FitReport, build_report
from .optim import maximize


@dataclass(frozen=True)
class PoissonParams:
    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise DomainError(f"Poisson rate must be finite and > 0, got {self.lam!r}")


@dataclass(frozen=True)
class NbParams:
    """``P(X = x) = C(r + x - 1, x) p^r (1 - p)^x``."""

    r: float
    p: float

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"NB size r must be finite and > 0, got {self.r!r}")
        if not 0.0 < self.p < 1.0:
            raise DomainError(f"NB probability p must lie in (0, 1), got {self.p!r}")


def poisson_logpmf(x, lam: float):
    x = np.asarray(x, dtype=float)
    return x * math.log(lam) - lam - special.gammaln(x + 1.0)


def poisson_pmf(x, lam: float):
    return np.exp(poisson_logpmf(x, lam))


def nb_logpmf(x, r: float, p: float):
    x = np.asarray(x, dtype=float)
    return (special.gammaln(r + x) - special.gammaln(r) - special.gammaln(x + 1.0)
            + r * math.log(p) + x * math.log1p(-p))


def nb_pmf(x, r: float, p: float):
    return np.exp(nb_logpmf(x, r, p))


def nb_mean(q: NbParams) -> float:
    return q.r * (1.0 - q.p) / q.p


def nb_variance(q: NbParams) -> float:
    return q.r * (1.0 - q.p) / (q.p * q.p)


def fit_poisson(data: CountData) -> FitReport:
    """Closed-form MLE: the rate is the sample mean."""
    lam = data.mean()
    if lam <= 0:
        raise DomainError("all observations are zero; the Poisson MLE lam = 0 lies outside the open parameter space")
    ll = float(np.dot(data.freqs, poisson_logpmf(data.counts, lam)))
    return build_report(
        "Poisson", {"lambda": lam}, ll, data,
        pmf=lambda xs: poisson_pmf(xs, lam),
        sf=lambda x: float(stats.poisson.sf(x, lam)),
    )


def _nb_unpack(theta):
    # (log r, logit p)
    return math.exp(theta[0]), special.expit(theta[1])


def nb_log_likelihood(q: NbParams, data: CountData) -> float:
    return float(np.dot(data.freqs, nb_logpmf(data.counts, q.r, q.p)))


def fit_nb(data: CountData, *, xatol: float = 1e-8, fatol: float = 1e-9, max_evals: int = 20000) -> FitReport:
    """
    MLE of ``(r, p)`` over ``(log r, logit p)`` with multi-start Nelder-Mead.

    Starts include the method-of-moments point when the sample is
    overdispersed and a near-Poisson point with very large ``r``.
    """
    mu, var = data.mean(), data.variance()
    if mu <= 0:
        raise DomainError("all observations are zero; the NB likelihood has no interior maximum")
    counts, freqs = data.counts, data.freqs

    def ll(theta):
        r, p = _nb_unpack(theta)
        if not (r > 0 and 0 < p < 1):
            return -math.inf
        return float(np.dot(freqs, nb_logpmf(counts, r, p)))

    starts = []
    for r0 in (0.5, 1.0, 5.0, 1e6):
        p0 = r0 / (r0 + mu)
        starts.append([math.log(r0), special.logit(p0)])
    if var > mu:
        r0 = mu * mu / (var - mu)
        starts.append([math.log(r0), special.logit(r0 / (r0 + mu))])
    starts.sort(key=ll, reverse=True)
    res = maximize(ll, starts[:3], xatol=xatol, fatol=fatol, max_evals=max_evals)
    r, p = _nb_unpack(res.x)
    return build_report(
        "NB", {"r": r, "p": p}, res.fun, data,
        pmf=lambda xs: nb_pmf(xs, r, p),
        sf=lambda x: float(stats.nbinom.sf(x, r, p)),
        converged=res.converged, n_evals=res.n_evals,
        diagnostics={"gradient": res.grad.tolist(), "message": res.message},
    )
