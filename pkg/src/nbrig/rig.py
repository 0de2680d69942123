"""
Reciprocal inverse Gaussian (RIG) mixing distribution.

If ``W`` is inverse Gaussian with mean ``m`` and shape ``alpha`` then
``Z = 1/W`` is RIG(alpha, m) with density

.. math::
    f(z) = \\sqrt{\\frac{\\alpha}{2\\pi z}}
           \\exp\\left(-\\frac{\\alpha}{2m}\\left(zm - 2 + \\frac{1}{zm}\\right)\\right),
    \\quad z > 0

and moment generating function

.. math::
    M(t) = \\sqrt{\\frac{\\alpha}{\\alpha - 2t}}
           \\exp\\left(\\frac{\\alpha - \\sqrt{\\alpha(\\alpha - 2t)}}{m}\\right),
    \\quad t < \\alpha / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import gmpy2
import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError


@dataclass(frozen=True)
class RigParams:
    """Shape ``alpha`` and location-like ``m`` of a RIG distribution."""

    alpha: float
    m: float

    def __post_init__(self):
        for name in ("alpha", "m"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float, np.floating, np.integer)) and math.isfinite(v) and v > 0):
                raise DomainError(f"RIG parameter {name} must be finite and > 0, got {v!r}")
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "m", float(self.m))

    @property
    def mgf_bound(self) -> float:
        """Supremum of the mgf domain, ``alpha / 2``."""
        return self.alpha / 2.0


def rig_pdf(z: ArrayLike, p: RigParams) -> float | NDArray[np.float64]:
    """Density of RIG(alpha, m) at ``z > 0``; accepts scalars or arrays."""
    z_arr = np.asarray(z, dtype=float)
    if np.any(~(z_arr > 0)) or np.any(~np.isfinite(z_arr)):
        raise DomainError("rig_pdf is defined for finite z > 0 only")
    a, m = p.alpha, p.m
    zm = z_arr * m
    # zm - 2 + 1/zm == (zm - 1)^2 / zm, which keeps full accuracy near zm = 1
    expo = -(a / (2.0 * m)) * (zm - 1.0) ** 2 / zm
    out = np.sqrt(a / (2.0 * np.pi * z_arr)) * np.exp(expo)
    return float(out) if out.ndim == 0 else out


def _check_t(t: float, p: RigParams) -> None:
    if not (t < p.mgf_bound):
        raise DomainError(
            f"mgf argument t={t!r} outside the domain t < alpha/2 = {p.mgf_bound!r}; "
            "the RIG mgf diverges there"
        )


def rig_log_mgf(t: float, p: RigParams) -> float:
    """
    Log of the RIG mgf, evaluated without forming ``M(t)``.

    Uses ``alpha - sqrt(alpha (alpha - 2t)) = 2 alpha t / (alpha + sqrt(alpha (alpha - 2t)))``
    so small ``|t|`` keeps full relative accuracy.
    """
    _check_t(t, p)
    a, m = p.alpha, p.m
    s = math.sqrt(a * (a - 2.0 * t))
    return -0.5 * math.log1p(-2.0 * t / a) + 2.0 * a * t / (m * (a + s))


def rig_mgf(t: float, p: RigParams) -> float:
    """RIG moment generating function; ``+inf`` only on float overflow."""
    lm = rig_log_mgf(t, p)
    return math.exp(lm) if lm < 709.0 else math.inf


def rig_log_mgf_mpfr(t, alpha, m):
    """
    ``rig_log_mgf`` evaluated in the active gmpy2 context.

    All arguments must already be ``mpfr`` (or exactly representable) values;
    no domain check is made because callers only pass ``t < 0``.
    """
    s = gmpy2.sqrt(alpha * (alpha - 2 * t))
    return -gmpy2.log1p(-2 * t / alpha) / 2 + 2 * alpha * t / (m * (alpha + s))


def rig_sample(n: int, p: RigParams, seed: int | np.random.Generator | None) -> NDArray[np.float64]:
    """
    Draw ``n`` i.i.d. RIG variates as reciprocals of inverse Gaussian draws.

    ``W ~ IG(mean=m, shape=alpha)`` gives ``1/W ~ RIG(alpha, m)``.  A
    ``Generator`` may be passed in place of an integer seed so that callers
    can keep drawing from one stream.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"sample size must be a positive integer, got {n!r}")
    rng = np.random.default_rng(seed)
    return 1.0 / rng.wald(p.m, p.alpha, size=int(n))
