"""
Univariate negative binomial-reciprocal inverse Gaussian (NBRIG) distribution.

``X | lam ~ NB(r, p = exp(-lam))`` with ``lam ~ RIG(alpha, m)``.  The PMF is

.. math::
    p(x) = \\binom{r + x - 1}{x} \\sum_{j=0}^{x} \\binom{x}{j} (-1)^j M(-(r + j))

with ``M`` the RIG mgf, and it obeys the shift recursion

.. math::
    p(k; r) = \\frac{r + k - 1}{k} p(k - 1; r) - \\frac{r}{k} p(k - 1; r + 1).

Both forms cancel heavily once ``x`` exceeds a handful; see ``_exact``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import integrate, optimize, special

from . import _exact
from .errors import DomainError, PrecisionLossError
from .rig import RigParams, rig_log_mgf, rig_mgf, rig_sample

# float-path results are accepted when the cancellation bound is below this
FLOAT_RTOL = 1e-13
_FLOAT_MAX_X = 60
# above this count the log-PMF comes from quadrature instead of the O(x^2) recursion
QUAD_MIN_X = 150
_EPS = np.finfo(float).eps
_UNIT_SEVERITY = (0.0, 1.0)


@dataclass(frozen=True)
class NbrigParams:
    """NB size ``r`` together with the RIG mixing parameters."""

    r: float
    mix: RigParams

    def __post_init__(self):
        if not (math.isfinite(self.r) and self.r > 0):
            raise DomainError(f"r must be finite and > 0, got {self.r!r}")
        object.__setattr__(self, "r", float(self.r))

    @classmethod
    def of(cls, r: float, alpha: float, m: float) -> "NbrigParams":
        return cls(r, RigParams(alpha, m))

    @property
    def alpha(self) -> float:
        return self.mix.alpha

    @property
    def m(self) -> float:
        return self.mix.m

    def max_moment_order(self) -> int:
        """Largest ``k`` with a finite factorial moment (needs ``alpha > 2k``)."""
        return math.ceil(self.alpha / 2.0) - 1

    def as_dict(self) -> dict[str, float]:
        return {"r": self.r, "alpha": self.alpha, "m": self.m}


def log_binom(r: float, x: int) -> float:
    """``log C(r + x - 1, x)`` for real ``r > 0``."""
    return special.gammaln(r + x) - special.gammaln(r) - special.gammaln(x + 1.0)


def _check_count(x) -> int:
    if isinstance(x, (bool, np.bool_)) or int(x) != x or x < 0:
        raise DomainError(f"count must be a nonnegative integer, got {x!r}")
    return int(x)


def _float_sums(x_max: int, r: float, mix: RigParams) -> list[tuple[float, float]]:
    """Alternating sums for ``x = 0..x_max`` in double precision with error bounds."""
    logs = [rig_log_mgf(-(r + j), mix) for j in range(x_max + 1)]
    ms = [math.exp(v) for v in logs]
    weights = [6.0 + 2.0 * abs(v) for v in logs]
    out = []
    for x in range(x_max + 1):
        terms, mag = [], 0.0
        for j in range(x + 1):
            t = math.comb(x, j) * ms[j]
            mag += t * weights[j]
            terms.append(-t if j & 1 else t)
        s = math.fsum(terms)
        rel = 4.0 * _EPS * mag / s + _EPS if s > 0 else math.inf
        out.append((s, rel))
    return out


def _log_alt_sum(x: int, r: float, mix: RigParams, rtol: float, max_precision: int) -> float:
    if x <= _FLOAT_MAX_X:
        s, rel = _float_sums(x, r, mix)[x]
        if rel <= FLOAT_RTOL or (max_precision <= 53 and rel <= rtol):
            return math.log(s)
        if max_precision <= 53:
            raise PrecisionLossError(
                f"alternating sum at x={x} has estimated relative error {rel:.3g} > {rtol:g} in double precision"
            )
    log_s, rel = _exact.alternating_sum(x, r, mix.alpha, mix.m, max_precision)
    if not rel <= rtol:
        raise PrecisionLossError(
            f"alternating sum at x={x} has estimated relative error {rel:.3g} > {rtol:g} "
            f"even at {max_precision} bits; use pmf_recursive"
        )
    return log_s


def direct_value(x: int, r: float, mix: RigParams, log_coef: float, rtol: float = 1e-6,
                 max_precision: int = _exact.MAX_PRECISION) -> float:
    """``exp(log_coef) * sum_j C(x, j) (-1)^j M(-(r + j))``; shared by the joint PMF."""
    if x == 0:
        return math.exp(log_coef) * math.exp(rig_log_mgf(-r, mix))
    return math.exp(log_coef + _log_alt_sum(x, r, mix, rtol, max_precision))


def pmf_direct(x: int, p: NbrigParams, *, rtol: float = 1e-6, max_precision: int = _exact.MAX_PRECISION) -> float:
    """
    PMF from the closed-form alternating sum.

    The sum is taken with ``math.fsum`` in double precision when the
    cancellation estimate allows, otherwise in extended precision up to
    ``max_precision`` bits.  Raises ``PrecisionLossError`` when the estimated
    relative error still exceeds ``rtol``.
    """
    x = _check_count(x)
    return direct_value(x, p.r, p.mix, log_binom(p.r, x), rtol, max_precision)


def pmf_recursive_table(x_max: int, p: NbrigParams) -> NDArray[np.float64]:
    """``p(k; r)`` for ``k = 0..x_max`` from the shift recursion."""
    x_max = _check_count(x_max)
    vals, _ = _exact.shifted_recursion(p.r, p.alpha, p.m, _UNIT_SEVERITY, x_max)
    out = np.array([float(v) for v in vals])
    out[0] = math.exp(rig_log_mgf(-p.r, p.mix))
    return out


def pmf_recursive(k: int, p: NbrigParams) -> float:
    """PMF at ``k`` via the shift recursion, seeded by ``p(0; r + j) = M(-(r + j))``."""
    return float(pmf_recursive_table(k, p)[k])


def log_pmf(x: int, p: NbrigParams) -> float:
    """
    Log-PMF.  Uses the double-precision closed form when its cancellation
    bound is below ``FLOAT_RTOL``, the extended-precision recursion up to
    ``QUAD_MIN_X`` and log-scale quadrature beyond, so the result never
    underflows to ``-inf``.
    """
    return float(log_pmf_many([x], p)[0])


def log_pmf_many(xs, p: NbrigParams) -> NDArray[np.float64]:
    """Vectorised ``log_pmf`` sharing the mgf evaluations across counts."""
    xs = [_check_count(x) for x in xs]
    if not xs:
        return np.zeros(0)
    top = max(xs)
    out: dict[int, float] = {}
    if top <= _FLOAT_MAX_X:
        for x, (s, rel) in enumerate(_float_sums(top, p.r, p.mix)):
            if rel <= FLOAT_RTOL:
                out[x] = log_binom(p.r, x) + math.log(s)
    for x in set(xs) - out.keys():
        if x > QUAD_MIN_X:
            out[x] = log_pmf_quad(x, p)
    missing = sorted(set(xs) - out.keys())
    if missing:
        import gmpy2

        vals, prec = _exact.shifted_recursion(p.r, p.alpha, p.m, _UNIT_SEVERITY, missing[-1])
        with gmpy2.context(precision=prec):
            for x in missing:
                out[x] = float(gmpy2.log(vals[x]))
    return np.array([out[x] for x in xs])


def _log_mixture_integrand(x: int, p: NbrigParams):
    """``u -> log(p(x | lam) f(lam) lam)`` with ``lam = exp(u)``."""
    a, m, r = p.alpha, p.m, p.r
    lc = log_binom(r, x) + 0.5 * math.log(a / (2.0 * math.pi))

    def g(u: float) -> float:
        lam = math.exp(u) if u < 700.0 else math.inf
        zm = lam * m
        if not 0.0 < zm < math.inf:
            return -math.inf
        logd = -0.5 * u - (a / (2.0 * m)) * (zm - 1.0) ** 2 / zm
        tail = x * math.log(-math.expm1(-lam)) if x else 0.0
        return lc - r * lam + tail + logd + u

    return g


def log_pmf_quad(x: int, p: NbrigParams) -> float:
    """
    Log-PMF by integrating the NB likelihood against the RIG density.

    The integrand is positive, so quadrature keeps its relative accuracy at
    any magnitude; it is evaluated on ``u = log(lam)`` relative to its peak.
    """
    x = _check_count(x)
    g = _log_mixture_integrand(x, p)
    grid = np.linspace(-40.0, 12.0, 105)
    vals = np.array([g(u) for u in grid])
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    res = optimize.minimize_scalar(lambda u: -g(u), bounds=(lo, hi), method="bounded",
                                   options={"xatol": 1e-10})
    u0, g0 = float(res.x), -float(res.fun)
    if not math.isfinite(g0):
        raise PrecisionLossError(f"mixture integrand for x={x} has no finite peak")

    def h(u):
        return math.exp(g(u) - g0)

    edges = [-math.inf, u0 - 8.0, u0 - 2.0, u0, u0 + 2.0, u0 + 8.0, math.inf]
    total = 0.0
    for a_, b_ in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(h, a_, b_, epsabs=0.0, epsrel=1e-13, limit=200)
        total += val
    return g0 + math.log(total)


def pmf(x: int, p: NbrigParams) -> float:
    return math.exp(log_pmf(x, p))


# ---------------------------------------------------------------------------
# tail, cdf and truncated tables


def _mixture_quad(fn, mix: RigParams) -> float:
    """``E[fn(lam)]`` under RIG mixing by adaptive quadrature."""

    def integrand(lam):
        if lam <= 0:
            return 0.0
        a, m = mix.alpha, mix.m
        zm = lam * m
        logd = 0.5 * math.log(a / (2.0 * math.pi * lam)) - (a / (2.0 * m)) * (zm - 1.0) ** 2 / zm
        return fn(lam) * math.exp(logd)

    c = 1.0 / mix.m + 1.0 / mix.alpha
    edges = [0.0, c / 8.0, c, 8.0 * c, math.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=200)
        total += val
    return total


def survival_quad(x: int, p: NbrigParams) -> float:
    """``P(X > x)`` as the RIG average of the conditional NB upper tail."""
    x = int(x)
    if x < 0:
        return 1.0
    r = p.r

    def nb_sf(lam):
        # P(NB(r, e^-lam) > x) = I_{1 - e^-lam}(x + 1, r)
        return special.betainc(x + 1.0, r, -math.expm1(-lam))

    return min(1.0, max(0.0, _mixture_quad(nb_sf, p.mix)))


def cdf(x: int, p: NbrigParams) -> float:
    """``P(X <= x)`` as a compensated cumulative sum of recursive PMF values."""
    if x < 0:
        return 0.0
    return min(1.0, math.fsum(pmf_recursive_table(int(x), p)))


def survival(x: int, p: NbrigParams) -> float:
    """
    ``P(X > x)``.  The complement ``1 - cdf`` is used while it is the larger
    side; past the median the upper tail is integrated directly so tiny
    tails keep their relative accuracy.
    """
    if x < 0:
        return 1.0
    c = cdf(x, p)
    if c < 0.5:
        return 1.0 - c
    return survival_quad(x, p)


def truncation_point(p: NbrigParams, tail_tol: float = 1e-10, x_cap: int = 1_000_000) -> int:
    """Smallest ``x`` with ``P(X > x) <= tail_tol``, found by doubling and bisection."""
    hi = 8
    while survival_quad(hi, p) > tail_tol:
        if hi >= x_cap:
            raise DomainError(
                f"tail mass above {x_cap} exceeds {tail_tol:g}; the distribution is too heavy-tailed to truncate"
            )
        hi = min(2 * hi, x_cap)
    lo = -1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if survival_quad(mid, p) > tail_tol:
            lo = mid
        else:
            hi = mid
    return hi


@dataclass(frozen=True)
class PmfTable:
    """PMF values on ``0..x_max`` plus the declared mass above ``x_max``."""

    params: NbrigParams
    probs: NDArray[np.float64] = field(repr=False)
    tail_mass: float

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        if np.any(probs < 0) or np.any(probs > 1) or self.tail_mass < 0:
            raise PrecisionLossError("PMF table has entries outside [0, 1]")
        total = math.fsum(probs) + self.tail_mass
        if abs(total - 1.0) > 1e-9:
            raise PrecisionLossError(f"PMF table mass {total!r} differs from 1 by more than 1e-9")

    @property
    def x_max(self) -> int:
        return len(self.probs) - 1


def pmf_table(p: NbrigParams, x_max: int | None = None, tail_tol: float = 1e-10) -> PmfTable:
    """
    Materialise the PMF on ``0..x_max`` (default: the truncation point for
    ``tail_tol``).  The tail is integrated independently of the table, so
    construction doubles as a normalisation check.  Cost is quadratic in
    ``x_max``.
    """
    if x_max is None:
        x_max = truncation_point(p, tail_tol)
    probs = pmf_recursive_table(x_max, p)
    return PmfTable(p, probs, survival_quad(x_max, p))


# ---------------------------------------------------------------------------
# moments


def _require_alpha(p: NbrigParams, bound: float, what: str):
    if not p.alpha > bound:
        raise DomainError(
            f"{what} requires alpha > {bound:g} (mgf of the mixing law must exist at t = {bound / 2:g}); "
            f"got alpha = {p.alpha!r}"
        )


def factorial_moment(k: int, p: NbrigParams) -> float:
    """
    ``E[X (X-1) ... (X-k+1)] = Gamma(r+k)/Gamma(r) * sum_j C(k,j) (-1)^j M(k - j)``.
    """
    if int(k) != k or k < 1:
        raise DomainError(f"moment order must be a positive integer, got {k!r}")
    k = int(k)
    _require_alpha(p, 2.0 * k, f"factorial moment of order {k}")
    terms = [math.comb(k, j) * (-1) ** j * rig_mgf(k - j, p.mix) for j in range(k + 1)]
    return math.exp(special.gammaln(p.r + k) - special.gammaln(p.r)) * math.fsum(terms)


def _mgf_pair(p: NbrigParams):
    return rig_log_mgf(1.0, p.mix), rig_log_mgf(2.0, p.mix)


def mean(p: NbrigParams) -> float:
    """``r (M(1) - 1)``."""
    _require_alpha(p, 2.0, "the mean")
    return p.r * math.expm1(rig_log_mgf(1.0, p.mix))


def second_moment(p: NbrigParams) -> float:
    """``(r + r^2) M(2) - (r + 2 r^2) M(1) + r^2``."""
    _require_alpha(p, 4.0, "the second moment")
    r = p.r
    m1, m2 = rig_mgf(1.0, p.mix), rig_mgf(2.0, p.mix)
    return (r + r * r) * m2 - (r + 2 * r * r) * m1 + r * r


def mixing_variance(p: NbrigParams) -> float:
    """``Var(e^lam) = M(2) - M(1)^2`` without subtracting nearly equal numbers."""
    _require_alpha(p, 4.0, "Var(exp(lambda))")
    l1, l2 = _mgf_pair(p)
    return math.exp(2 * l1) * math.expm1(l2 - 2 * l1)


def variance(p: NbrigParams) -> float:
    """
    ``Var X = r (M(2) - M(1)) + r^2 (M(2) - M(1)^2)``, algebraically equal to
    ``E X^2 - (E X)^2``.
    """
    _require_alpha(p, 4.0, "the variance")
    r = p.r
    l1, l2 = _mgf_pair(p)
    return r * math.exp(l1) * math.expm1(l2 - l1) + r * r * mixing_variance(p)


def matched_nb(p: NbrigParams):
    """The NB(r, 1/M(1)) law with the same mean as ``p``."""
    from .baselines import NbParams

    _require_alpha(p, 2.0, "the matched-mean negative binomial")
    return NbParams(p.r, math.exp(-rig_log_mgf(1.0, p.mix)))


@dataclass(frozen=True)
class DispersionReport:
    mean: float
    variance: float
    ratio: float
    nb_matched_variance: float

    @property
    def excess_over_nb(self) -> float:
        return self.variance - self.nb_matched_variance


def dispersion_report(p: NbrigParams) -> DispersionReport:
    """
    Mean, variance and dispersion ratio, plus the variance of the
    mean-matched negative binomial.  Raises if either overdispersion
    inequality fails numerically.
    """
    from .baselines import nb_variance

    _require_alpha(p, 4.0, "the dispersion report")
    mu, var = mean(p), variance(p)
    nb_var = nb_variance(matched_nb(p))
    rep = DispersionReport(mu, var, var / mu, nb_var)
    if not (rep.ratio > 1.0 and var > nb_var):
        raise PrecisionLossError(
            f"overdispersion inequalities failed numerically: ratio={rep.ratio!r}, "
            f"variance={var!r}, matched NB variance={nb_var!r}"
        )
    return rep


# ---------------------------------------------------------------------------
# sampling


def sample(n: int, p: NbrigParams, seed: int | np.random.Generator | None) -> NDArray[np.int64]:
    """
    ``n`` draws via the mixture: ``lam ~ RIG``, then ``NB(r, exp(-lam))``.

    The NB success probability is floored at the smallest normal double;
    such draws only arise when ``lam > 708``.
    """
    rng = np.random.default_rng(seed)
    lam = rig_sample(n, p.mix, rng)
    prob = np.maximum(np.exp(-lam), np.finfo(float).tiny)
    return rng.negative_binomial(p.r, prob)
