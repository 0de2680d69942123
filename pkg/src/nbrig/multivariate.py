"""
d-dimensional NBRIG: ``X_i | lam ~ NB(r_i, exp(-lam))`` independent given a
shared ``lam ~ RIG(alpha, m)``.

With ``r~ = sum r_i`` and ``x~ = sum x_i`` the joint PMF factors as

    prod_i C(r_i + x_i - 1, x_i) / C(r~ + x~ - 1, x~) * P(Y = x~),
    Y ~ NBRIG(r~, alpha, m),

which is the default evaluation path; the explicit alternating sum is kept
as a cross-check.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .dist import NbrigParams, _check_count, direct_value, log_binom, log_pmf, log_pmf_many, mixing_variance
from .errors import DomainError, PrecisionLossError
from .rig import RigParams, rig_log_mgf


@dataclass(frozen=True)
class MvNbrigParams:
    rs: tuple[float, ...]
    mix: RigParams

    def __post_init__(self):
        rs = tuple(float(r) for r in self.rs)
        if not rs:
            raise DomainError("need at least one component")
        if not all(math.isfinite(r) and r > 0 for r in rs):
            raise DomainError(f"every r_i must be finite and > 0, got {rs!r}")
        object.__setattr__(self, "rs", rs)

    @property
    def d(self) -> int:
        return len(self.rs)

    @property
    def r_total(self) -> float:
        return math.fsum(self.rs)

    def pooled(self) -> NbrigParams:
        """Distribution of the component sum."""
        return NbrigParams(self.r_total, self.mix)

    def marginal(self, i: int) -> NbrigParams:
        return NbrigParams(self.rs[i], self.mix)

    def drop(self, i: int) -> "MvNbrigParams":
        return MvNbrigParams(self.rs[:i] + self.rs[i + 1:], self.mix)


def _counts(xs: Sequence[int], p: MvNbrigParams) -> list[int]:
    if len(xs) != p.d:
        raise DomainError(f"expected {p.d} counts, got {len(xs)}")
    return [_check_count(x) for x in xs]


def joint_pmf(xs: Sequence[int], p: MvNbrigParams, *, rtol: float = 1e-6) -> float:
    """
    ``prod_i C(r_i + x_i - 1, x_i) * sum_j (-1)^j C(x~, j) M(-(r~ + j))``.

    Shares the cancellation guard of ``dist.pmf_direct``; a
    ``PrecisionLossError`` points callers at ``joint_pmf_via_univariate``.
    """
    xs = _counts(xs, p)
    log_coef = math.fsum(log_binom(r, x) for r, x in zip(p.rs, xs))
    try:
        return direct_value(sum(xs), p.r_total, p.mix, log_coef, rtol)
    except PrecisionLossError as exc:
        raise PrecisionLossError(f"{exc}; use joint_pmf_via_univariate") from exc


def joint_pmf_via_univariate(xs: Sequence[int], p: MvNbrigParams) -> float:
    """Joint PMF through the pooled univariate law (the default, stable path)."""
    xs = _counts(xs, p)
    xt = sum(xs)
    log_ratio = math.fsum(log_binom(r, x) for r, x in zip(p.rs, xs)) - log_binom(p.r_total, xt)
    return math.exp(log_ratio + log_pmf(xt, p.pooled()))


def joint_pmf_many(points: Sequence[Sequence[int]], p: MvNbrigParams) -> NDArray[np.float64]:
    """``joint_pmf_via_univariate`` over many points with one pooled PMF evaluation."""
    pts = [_counts(xs, p) for xs in points]
    if not pts:
        return np.zeros(0)
    totals = [sum(xs) for xs in pts]
    uniq = sorted(set(totals))
    lp = dict(zip(uniq, log_pmf_many(uniq, p.pooled())))
    rt = p.r_total
    out = [
        math.fsum(log_binom(r, x) for r, x in zip(p.rs, xs)) - log_binom(rt, xt) + lp[xt]
        for xs, xt in zip(pts, totals)
    ]
    return np.exp(np.array(out))


@dataclass(frozen=True)
class MvMoments:
    means: NDArray[np.float64]
    variances: NDArray[np.float64]
    cov: NDArray[np.float64]
    corr: NDArray[np.float64]


def mv_moments(p: MvNbrigParams) -> MvMoments:
    """
    Means ``r_i (M(1) - 1)``, variances as in the univariate case and
    covariances ``r_i r_j (M(2) - M(1)^2)`` off the diagonal.  Every pairwise
    correlation is positive; a non-positive one raises.
    """
    if not p.mix.alpha > 4.0:
        raise DomainError(f"covariances need alpha > 4 (M(2) must exist); got alpha = {p.mix.alpha!r}")
    rs = np.array(p.rs)
    l1, l2 = rig_log_mgf(1.0, p.mix), rig_log_mgf(2.0, p.mix)
    v_mix = mixing_variance(NbrigParams(1.0, p.mix))
    means = rs * math.expm1(l1)
    variances = rs * math.exp(l1) * math.expm1(l2 - l1) + rs * rs * v_mix
    cov = np.outer(rs, rs) * v_mix
    np.fill_diagonal(cov, variances)
    sd = np.sqrt(variances)
    corr = cov / np.outer(sd, sd)
    np.fill_diagonal(corr, 1.0)
    off = corr[~np.eye(p.d, dtype=bool)]
    if off.size and not np.all(off > 0):
        raise PrecisionLossError("non-positive correlation computed; mixing variance underflowed")
    return MvMoments(means, variances, cov, corr)
