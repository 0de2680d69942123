"""
Aggregate loss ``S = X_1 + ... + X_N`` with NBRIG claim counts ``N`` and
i.i.d. integer claim sizes on ``{1, 2, ...}``.

``aggregate_pmf`` runs the shift recursion

    g(x; r) = sum_{y=1..x} ((r y + x - y) / x) f(y) g(x - y; r)
            - sum_{y=1..x} (r y / x) f(y) g(x - y; r + 1),    x >= 1,

with ``g(0; r) = p(0; r)``.  ``aggregate_bruteforce`` evaluates the defining
sum ``sum_n p(n) f^{*n}(x)`` by repeated convolution and serves as its oracle.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _exact
from .dist import NbrigParams, pmf_recursive_table, survival_quad
from .errors import DomainError, PrecisionLossError
from .rig import rig_log_mgf


@dataclass(frozen=True)
class SeverityPmf:
    """Claim-size probabilities ``probs[y]`` for ``y = 0..max_y`` with ``probs[0] == 0``."""

    probs: NDArray[np.float64] = field(repr=False)

    def __post_init__(self):
        f = np.array(self.probs, dtype=float)
        if f.ndim != 1 or len(f) < 2:
            raise DomainError("severity needs at least one positive support point")
        if np.any(~np.isfinite(f)) or np.any(f < 0):
            raise DomainError("severity probabilities must be finite and nonnegative")
        if f[0] > 0:
            raise DomainError(
                "severity has mass f(0) > 0 but the recursion needs support on y >= 1; "
                "remove the zero mass analytically (severity f(y) / (1 - f(0)) for y >= 1, "
                "claim counts thinned with retention 1 - f(0)) and pass the result"
            )
        total = math.fsum(f)
        if abs(total - 1.0) > 1e-12:
            raise DomainError(f"severity probabilities sum to {total!r}, not 1")
        f.setflags(write=False)
        object.__setattr__(self, "probs", f)

    @classmethod
    def from_mapping(cls, mass: Mapping[int, float]) -> "SeverityPmf":
        if not mass:
            raise DomainError("empty severity")
        top = max(int(y) for y in mass)
        f = np.zeros(top + 1)
        for y, v in mass.items():
            if int(y) != y or y < 0:
                raise DomainError(f"severity support must be nonnegative integers, got {y!r}")
            f[int(y)] += v
        return cls(f)

    @property
    def max_y(self) -> int:
        return len(self.probs) - 1

    def mean(self) -> float:
        return float(np.dot(np.arange(len(self.probs)), self.probs))


@dataclass(frozen=True)
class AggregateDist:
    """``P(S = 0)`` plus ``P(S = x)`` for ``x = 1..x_max`` and the mass above ``x_max``."""

    atom0: float
    probs: NDArray[np.float64] = field(repr=False)
    params: NbrigParams
    tail: float
    method: str = "recursion"

    @property
    def x_max(self) -> int:
        return len(self.probs)

    def masses(self) -> NDArray[np.float64]:
        """Probabilities for ``x = 0..x_max`` including the atom."""
        return np.concatenate([[self.atom0], self.probs])

    def survival(self) -> NDArray[np.float64]:
        """``P(S > x)`` for ``x = 0..x_max``."""
        g = self.masses()
        return np.array([math.fsum(g[x + 1:]) + self.tail for x in range(len(g))])


def convolve(a, b, x_max: int) -> tuple[NDArray[np.float64], float]:
    """
    Discrete convolution of two mass vectors on ``0, 1, ...``, truncated to
    ``0..x_max``; the mass that lands above ``x_max`` is returned separately.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    full = np.convolve(a, b)
    head = np.zeros(x_max + 1)
    k = min(len(full), x_max + 1)
    head[:k] = full[:k]
    tail = math.fsum(full[x_max + 1:]) if len(full) > x_max + 1 else 0.0
    return head, tail


def aggregate_pmf(p: NbrigParams, f: SeverityPmf, x_max: int, *, fallback: bool = True) -> AggregateDist:
    """
    Aggregate-loss distribution on ``0..x_max`` by the shift recursion.

    The triangle ``g(x; r + j), x + j <= x_max`` is evaluated in extended
    precision.  If the recursion cannot certify its digits (or produces a
    value below ``-1e-10``) and ``fallback`` is set, the convolution oracle is
    used instead with a warning; otherwise ``PrecisionLossError`` propagates.
    """
    if int(x_max) != x_max or x_max < 0:
        raise DomainError(f"x_max must be a nonnegative integer, got {x_max!r}")
    x_max = int(x_max)
    try:
        vals, _ = _exact.shifted_recursion(p.r, p.alpha, p.m, f.probs, x_max)
        g = np.array([float(v) for v in vals])
        if np.any(g < -1e-10):
            raise PrecisionLossError("aggregate recursion produced negative probabilities")
    except PrecisionLossError as exc:
        if not fallback:
            raise
        warnings.warn(f"{exc}; falling back to explicit convolutions", stacklevel=2)
        return aggregate_bruteforce(p, f, x_max)
    atom0 = math.exp(rig_log_mgf(-p.r, p.mix))
    probs = np.maximum(g[1:], 0.0)  # clears -0.0 and sub-1e-10 rounding only
    tail = max(0.0, 1.0 - atom0 - math.fsum(probs))
    return AggregateDist(atom0, probs, p, tail, "recursion")


def aggregate_bruteforce(p: NbrigParams, f: SeverityPmf, x_max: int, n_max: int | None = None) -> AggregateDist:
    """
    ``sum_{n <= n_max} p(n) f^{*n}(x)`` by repeated convolution.

    Claim sizes are at least 1, so ``n > x_max`` cannot reach ``x <= x_max``
    and the default ``n_max = x_max`` is exact on ``0..x_max``.  The declared
    tail adds the convolution overflow and ``P(N > n_max)``.
    """
    x_max = int(x_max)
    n_max = x_max if n_max is None else int(n_max)
    counts = pmf_recursive_table(n_max, p)
    total = np.zeros(x_max + 1)
    total[0] = counts[0]
    tail = 0.0
    conv = np.zeros(x_max + 1)
    conv[0] = 1.0
    conv_tail = 0.0
    for n in range(1, n_max + 1):
        conv, spill = convolve(conv, f.probs, x_max)
        conv_tail += spill
        total += counts[n] * conv
        tail += counts[n] * conv_tail
    tail += survival_quad(n_max, p)
    return AggregateDist(float(total[0]), total[1:], p, tail, "convolution")
