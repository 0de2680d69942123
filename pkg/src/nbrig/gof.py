"""Count-data container, fit reports and the grouped chi-square test."""

from __future__ import annotations

import math
import warnings
from collections import Counter
from collections.abc import Callable, Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray
from scipy import stats

from .errors import DomainError

MIN_EXPECTED = 5.0
# reports list counts 0..MAX_CLASSES-1 individually and pool the rest
MAX_CLASSES = 60


def _as_int(v, what: str) -> int:
    try:
        iv = int(v)
    except (TypeError, ValueError, OverflowError):
        raise DomainError(f"{what} must be an integer, got {v!r}") from None
    if iv != v:
        raise DomainError(f"{what} must be an integer, got {v!r}")
    return iv


@dataclass(frozen=True)
class CountData:
    """Observed ``(count, frequency)`` cells with strictly increasing counts."""

    cells: tuple[tuple[int, int], ...]

    def __post_init__(self):
        cells = tuple((_as_int(x, "count"), _as_int(n, "frequency")) for x, n in self.cells)
        prev = -1
        for x, n in cells:
            if x < 0 or n < 0:
                raise DomainError(f"counts and frequencies must be nonnegative, got ({x}, {n})")
            if x <= prev:
                raise DomainError("counts must be strictly increasing")
            prev = x
        if sum(n for _, n in cells) <= 0:
            raise DomainError("count data must have a positive total frequency")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]]) -> "CountData":
        """Build from unordered pairs; repeated counts have their frequencies added."""
        acc: Counter[int] = Counter()
        for x, n in pairs:
            acc[_as_int(x, "count")] += _as_int(n, "frequency")
        return cls(tuple(sorted(acc.items())))

    @classmethod
    def from_frequencies(cls, freqs: Sequence[int]) -> "CountData":
        """Frequencies for counts ``0, 1, 2, ...``."""
        return cls(tuple(enumerate(freqs)))

    @classmethod
    def from_sample(cls, xs: Iterable[int]) -> "CountData":
        return cls.from_pairs((x, 1) for x in xs)

    @property
    def counts(self) -> NDArray[np.int64]:
        return np.array([x for x, _ in self.cells], dtype=np.int64)

    @property
    def freqs(self) -> NDArray[np.int64]:
        return np.array([n for _, n in self.cells], dtype=np.int64)

    @property
    def total(self) -> int:
        return sum(n for _, n in self.cells)

    @property
    def max_count(self) -> int:
        return max(x for x, n in self.cells)

    @property
    def n_distinct(self) -> int:
        return sum(1 for _, n in self.cells if n > 0)

    def mean(self) -> float:
        return float(np.dot(self.counts, self.freqs)) / self.total

    def variance(self) -> float:
        mu = self.mean()
        return float(np.dot((self.counts - mu) ** 2, self.freqs)) / self.total

    def observed_table(self, n_classes: int | None = None) -> NDArray[np.int64]:
        """Frequencies for ``0..n_classes-1``; the last class collects everything above."""
        k = self.max_count + 1 if n_classes is None else n_classes
        out = np.zeros(k, dtype=np.int64)
        for x, n in self.cells:
            out[min(x, k - 1)] += n
        return out


@dataclass(frozen=True)
class GofResult:
    chi2: float
    df: int
    p_value: float | None
    grouping: tuple[tuple[int, int | None], ...]
    observed: tuple[float, ...]
    expected: tuple[float, ...]


def group_classes(expected: Sequence[float], min_expected: float = MIN_EXPECTED) -> list[list[int]]:
    """
    Merge adjacent classes from the top count downward until each group's
    expected frequency reaches ``min_expected``.  A short leftover group at the
    bottom is folded into its upper neighbour.
    """
    groups: list[list[int]] = []
    cur: list[int] = []
    acc = 0.0
    for i in range(len(expected) - 1, -1, -1):
        cur.insert(0, i)
        acc += expected[i]
        if acc >= min_expected:
            groups.insert(0, cur)
            cur, acc = [], 0.0
    if cur:
        if groups and acc < min_expected:
            groups[0] = cur + groups[0]
        else:
            groups.insert(0, cur)
    return groups


def chi_square_gof(observed, expected: Sequence[float], n_params: int,
                   min_expected: float = MIN_EXPECTED) -> GofResult:
    """
    Pearson chi-square on grouped classes.

    ``expected[i]`` is the expected frequency of count ``i``; the last entry
    is the open class ``>= len(expected) - 1``.  ``observed`` is a
    ``CountData`` or a frequency sequence aligned with ``expected``.
    ``min_expected=0`` disables grouping.
    """
    exp_arr = np.asarray(expected, dtype=float)
    if isinstance(observed, CountData):
        obs_arr = observed.observed_table(len(exp_arr)).astype(float)
    else:
        obs_arr = np.asarray(observed, dtype=float)
    if obs_arr.shape != exp_arr.shape:
        raise DomainError("observed and expected must have the same number of classes")
    last = len(exp_arr) - 1
    groups = group_classes(exp_arr, min_expected)
    o = np.array([obs_arr[g].sum() for g in groups])
    e = np.array([exp_arr[g].sum() for g in groups])
    chi2 = float(np.sum((o - e) ** 2 / e))
    df = len(groups) - n_params - 1
    p_value: float | None
    if df < 1:
        warnings.warn(
            f"only {len(groups)} grouped classes for {n_params} parameters; df floored at 1 and p-value omitted",
            stacklevel=2,
        )
        df, p_value = 1, None
    else:
        p_value = float(stats.chi2.sf(chi2, df))
    grouping = tuple((g[0], None if g[-1] == last else g[-1]) for g in groups)
    return GofResult(chi2, df, p_value, grouping, tuple(o.tolist()), tuple(e.tolist()))


@dataclass
class FitReport:
    """Outcome of fitting one model to a ``CountData`` sample."""

    model: str
    params: dict[str, float]
    log_likelihood: float
    chi2: float
    df: int
    p_value: float | None
    aic: float
    expected: list[float]
    converged: bool = True
    n_evals: int = 0
    grouping: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def n_params(self) -> int:
        return len(self.params)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "params": dict(self.params),
            "log_likelihood": self.log_likelihood,
            "chi2": self.chi2,
            "df": self.df,
            "p_value": self.p_value,
            "aic": self.aic,
            "expected": list(self.expected),
            "converged": self.converged,
            "n_evals": self.n_evals,
        }


def aic(log_likelihood: float, n_params: int) -> float:
    return 2 * n_params - 2 * log_likelihood


def build_report(
    model: str,
    params: dict[str, float],
    log_likelihood: float,
    data: CountData,
    pmf: Callable[[NDArray[np.int64]], NDArray[np.float64]],
    sf: Callable[[int], float],
    *,
    converged: bool = True,
    n_evals: int = 0,
    diagnostics: dict | None = None,
) -> FitReport:
    """
    Expected frequencies on ``0..top`` with the last class open, where
    ``top = min(max_count, MAX_CLASSES)``, plus the chi-square summary.
    ``pmf`` is evaluated once on the array of individual classes.
    """
    n, top = data.total, min(data.max_count, MAX_CLASSES)
    expected = [float(v) for v in n * np.asarray(pmf(np.arange(top)), dtype=float)] + [n * float(sf(top - 1))]
    k = len(params)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        g = chi_square_gof(data, expected, k)
    diag = dict(diagnostics or {})
    if caught:
        diag["gof_warning"] = str(caught[0].message)
    return FitReport(
        model=model,
        params=params,
        log_likelihood=log_likelihood,
        chi2=g.chi2,
        df=g.df,
        p_value=g.p_value,
        aic=aic(log_likelihood, k),
        expected=expected,
        converged=converged,
        n_evals=n_evals,
        grouping=g.grouping,
        diagnostics=diag,
    )


