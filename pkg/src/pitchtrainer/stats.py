"""One-way ANOVA with Bonferroni-corrected pooled-variance post-hoc t-tests.

The F tail probability comes from the regularized incomplete beta function,
evaluated with the modified Lentz continued fraction (symmetry switch at
x > (a+1)/(a+b+2)), good to ~1e-10 absolute across the df range in scope.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

_LENTZ_TINY = 1e-300
_LENTZ_EPS = 1e-15
_LENTZ_MAX_ITER = 500


class StatsInputError(ValueError):
    pass


@dataclass(frozen=True)
class GroupedData:
    groups: tuple[tuple[str, tuple[float, ...]], ...]

    def __post_init__(self):
        if len(self.groups) < 2:
            raise StatsInputError("need at least 2 groups")
        for label, values in self.groups:
            if len(values) < 2:
                raise StatsInputError(f"group {label!r} has fewer than 2 values")
            for v in values:
                if not math.isfinite(v):
                    raise StatsInputError(f"non-finite value {v} in group {label!r}")

    @classmethod
    def from_lists(cls, groups: Sequence[tuple[str, Sequence[float]]]) -> "GroupedData":
        return cls(tuple((label, tuple(float(v) for v in vals)) for label, vals in groups))


@dataclass(frozen=True)
class PairwiseComparison:
    label_a: str
    label_b: str
    t_stat: float
    raw_p: float
    adjusted_p: float


@dataclass(frozen=True)
class AnovaResult:
    f_stat: float
    df_between: int
    df_within: int
    p_value: float
    pairwise: tuple[PairwiseComparison, ...]


def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta, modified Lentz method."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _LENTZ_TINY:
        d = _LENTZ_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _LENTZ_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _LENTZ_TINY:
            d = _LENTZ_TINY
        c = 1.0 + aa / c
        if abs(c) < _LENTZ_TINY:
            c = _LENTZ_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _LENTZ_EPS:
            break
    return h


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if not (0.0 <= x <= 1.0):
        raise ValueError(f"x must lie in [0, 1], got {x}")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_survival(f: float, d1: int, d2: int) -> float:
    """P(F_{d1,d2} > f)."""
    if f < 0:
        raise ValueError(f"f must be non-negative, got {f}")
    if d1 < 1 or d2 < 1:
        raise ValueError("degrees of freedom must be >= 1")
    if math.isinf(f):
        return 0.0
    x = d2 / (d2 + d1 * f)
    return regularized_incomplete_beta(d2 / 2.0, d1 / 2.0, x)


def t_survival_two_sided(t: float, df: int) -> float:
    # |T_df| > |t|  <=>  F_{1,df} > t^2
    return f_survival(t * t, 1, df)


def bonferroni(raw_p: Sequence[float], m: int) -> list[float]:
    for p in raw_p:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p-value {p} outside [0, 1]")
    if m < len(raw_p):
        raise ValueError(f"m = {m} smaller than number of tests {len(raw_p)}")
    return [min(1.0, p * m) for p in raw_p]


def one_way_anova(data: GroupedData) -> AnovaResult:
    groups = data.groups
    k = len(groups)
    all_values = [v for _, vals in groups for v in vals]
    n_total = len(all_values)
    grand_mean = math.fsum(all_values) / n_total

    ss_between = math.fsum(
        len(vals) * (math.fsum(vals) / len(vals) - grand_mean) ** 2 for _, vals in groups
    )
    ss_within = math.fsum(
        math.fsum((v - math.fsum(vals) / len(vals)) ** 2 for v in vals)
        for _, vals in groups
    )
    df_between = k - 1
    df_within = n_total - k
    msb = ss_between / df_between
    msw = ss_within / df_within

    if msw == 0.0:
        f_stat = math.inf if msb > 0.0 else 0.0
        p_value = 0.0 if msb > 0.0 else 1.0
    else:
        f_stat = msb / msw
        p_value = f_survival(f_stat, df_between, df_within)

    raw_ps = []
    pairs = []
    for i in range(k):
        for j in range(i + 1, k):
            la, va = groups[i]
            lb, vb = groups[j]
            na, nb = len(va), len(vb)
            ma = math.fsum(va) / na
            mb = math.fsum(vb) / nb
            ssa = math.fsum((v - ma) ** 2 for v in va)
            ssb = math.fsum((v - mb) ** 2 for v in vb)
            df = na + nb - 2
            sp2 = (ssa + ssb) / df
            se = math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
            if se == 0.0:
                t = math.inf if ma != mb else 0.0
                p = 0.0 if ma != mb else 1.0
            else:
                t = (ma - mb) / se
                p = t_survival_two_sided(t, df)
            pairs.append((la, lb, t))
            raw_ps.append(p)

    adjusted = bonferroni(raw_ps, len(raw_ps))
    pairwise = tuple(
        PairwiseComparison(la, lb, t, raw, adj)
        for (la, lb, t), raw, adj in zip(pairs, raw_ps, adjusted)
    )
    return AnovaResult(
        f_stat=f_stat,
        df_between=df_between,
        df_within=df_within,
        p_value=p_value,
        pairwise=pairwise,
    )


def block_average_hbo(
    series: Sequence[tuple[float, Sequence[float]]],
    windows: Sequence[tuple[float, float]],
    channels: Sequence[int] | None = None,
) -> list[float | None]:
    """Mean of the selected channels over each [onset, onset+duration) window.

    `series` is (t_ms, per-channel values), time-sorted. Windows with no
    samples yield None rather than failing the whole batch.
    """
    means: list[float | None] = []
    for onset, duration in windows:
        acc: list[float] = []
        for t, values in series:
            if onset <= t < onset + duration:
                picked = values if channels is None else [values[c] for c in channels]
                acc.extend(picked)
        means.append(math.fsum(acc) / len(acc) if acc else None)
    return means
