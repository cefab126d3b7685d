"""Performance series, Welch/paired t-tests, variance F-test and stability onset.

Student-t and F tail probabilities come from the regularized incomplete beta
function, evaluated with a modified-Lentz continued fraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


class DegenerateTestError(ValueError):
    """A test statistic is undefined because the samples have no variance."""


_BETACF_EPS = 1e-16
_BETACF_TINY = 1e-300
_BETACF_MAX_ITER = 100_000


def _betacf(a: float, b: float, x: float) -> float:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _BETACF_TINY:
        d = _BETACF_TINY
    d = 1.0 / d
    h = d
    for m in range(1, _BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _BETACF_TINY:
            d = _BETACF_TINY
        c = 1.0 + aa / c
        if abs(c) < _BETACF_TINY:
            c = _BETACF_TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _BETACF_EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc needs a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    # the continued fraction converges fast only on this side of the mean
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def student_t_two_sided_p(t_stat: float, df: float) -> float:
    if math.isinf(t_stat):
        return 0.0
    return betainc(0.5 * df, 0.5, df / (df + t_stat * t_stat))


def f_upper_tail(f_stat: float, df_num: float, df_den: float) -> float:
    """P(F > f_stat) for F ~ F(df_num, df_den)."""
    if f_stat <= 0.0:
        return 1.0
    if math.isinf(f_stat):
        return 0.0
    return betainc(0.5 * df_den, 0.5 * df_num, df_den / (df_den + df_num * f_stat))


@dataclass(frozen=True)
class TTestResult:
    t_stat: float
    df: float
    p_value: float
    reject: bool

    def to_dict(self) -> dict:
        return {"t_stat": self.t_stat, "df": self.df, "p_value": self.p_value, "reject": self.reject}


@dataclass(frozen=True)
class FTestResult:
    f_stat: float
    df_pair: tuple[float, float]
    p_value: float
    reject: bool

    def to_dict(self) -> dict:
        return {"f_stat": self.f_stat, "df_pair": list(self.df_pair), "p_value": self.p_value, "reject": self.reject}


def _sample(x: Sequence[float]) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < 2:
        raise ValueError("each sample needs at least 2 values")
    return arr


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float], alpha: float = 0.01) -> TTestResult:
    a, b = _sample(sample_a), _sample(sample_b)
    na, nb = a.size, b.size
    va, vb = a.var(ddof=1), b.var(ddof=1)
    if va == 0.0 and vb == 0.0:
        raise DegenerateTestError("both samples have zero variance")
    qa, qb = va / na, vb / nb
    se2 = qa + qb
    t_stat = float((a.mean() - b.mean()) / math.sqrt(se2))
    df = float(se2 * se2 / (qa * qa / (na - 1) + qb * qb / (nb - 1)))
    p = student_t_two_sided_p(t_stat, df)
    return TTestResult(t_stat, df, p, p < alpha)


def paired_t_test(sample_a: Sequence[float], sample_b: Sequence[float], alpha: float = 0.01) -> TTestResult:
    a, b = _sample(sample_a), _sample(sample_b)
    if a.size != b.size:
        raise ValueError("paired samples must have equal length")
    d = a - b
    vd = d.var(ddof=1)
    n = d.size
    if vd == 0.0:
        if d.mean() == 0.0:
            raise DegenerateTestError("paired differences are constant zero")
        return TTestResult(math.copysign(math.inf, d.mean()), n - 1.0, 0.0, True)
    t_stat = float(d.mean() / math.sqrt(vd / n))
    p = student_t_two_sided_p(t_stat, n - 1.0)
    return TTestResult(t_stat, n - 1.0, p, p < alpha)


def f_test_variance(sample_a: Sequence[float], sample_b: Sequence[float], alpha: float = 0.01) -> FTestResult:
    """Two-sided variance-ratio test, larger sample variance in the numerator."""
    a, b = _sample(sample_a), _sample(sample_b)
    va, vb = float(a.var(ddof=1)), float(b.var(ddof=1))
    if va == 0.0 or vb == 0.0:
        raise DegenerateTestError("F-test needs positive variances")
    if va >= vb:
        f_stat, dfs = va / vb, (a.size - 1.0, b.size - 1.0)
    else:
        f_stat, dfs = vb / va, (b.size - 1.0, a.size - 1.0)
    p = min(1.0, 2.0 * f_upper_tail(f_stat, *dfs))
    return FTestResult(f_stat, dfs, p, p < alpha)


def performance_series(normalized_efforts) -> np.ndarray:
    """Mean normalized effort per period (column means of an R x T matrix)."""
    m = np.asarray(normalized_efforts, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1:
        raise ValueError("expected an R x T matrix with R >= 1")
    return m.mean(axis=0)


TESTS = {"welch": welch_t_test, "paired": paired_t_test}


def stability_onset(normalized_efforts, alpha: float = 0.01, test: str = "welch") -> int | None:
    """Earliest 1-based period from which no consecutive-period test rejects.

    Period t is compared with t - 1 for t = 2..T. Returns None when the last
    comparison still rejects.
    """
    m = np.asarray(normalized_efforts, dtype=float)
    n_periods = m.shape[1]
    if n_periods < 2:
        raise ValueError("stability needs at least 2 periods")
    run = TESTS[test]
    onset = 2
    for t in range(2, n_periods + 1):
        if run(m[:, t - 1], m[:, t - 2], alpha).reject:
            onset = t + 1
    return onset if onset <= n_periods else None


@dataclass
class ScenarioResult:
    label: str
    normalized_efforts: np.ndarray
    phi: np.ndarray
    per_period_sd: np.ndarray
    pooled_sd: float
    mean_period_sd: float
    stability_period: int | None
    benchmark: Any
    stability_error: str | None = None
    stalls: np.ndarray | None = None
    traces: list | None = field(default=None, repr=False)

    @property
    def replications(self) -> int:
        return self.normalized_efforts.shape[0]

    @property
    def periods(self) -> int:
        return self.normalized_efforts.shape[1]

    @property
    def final_phi(self) -> float:
        return float(self.phi[-1])

    def dispersion(self, mode: str = "pooled") -> float:
        """Standard deviation of all efforts ('pooled') or mean per-period sd ('per-period')."""
        if mode == "pooled":
            return self.pooled_sd
        if mode == "per-period":
            return self.mean_period_sd
        raise ValueError(f"unknown dispersion mode {mode!r}")

    @classmethod
    def from_efforts(cls, label, efforts, benchmark, alpha=0.01, test="welch", stalls=None, traces=None):
        return cls.from_matrix(label, np.asarray(efforts) / benchmark.a_star, benchmark, alpha, test, stalls, traces)

    @classmethod
    def from_matrix(cls, label, normalized, benchmark, alpha=0.01, test="welch", stalls=None, traces=None):
        m = np.asarray(normalized, dtype=float)
        ddof = 1 if m.shape[0] > 1 else 0
        sd = m.std(axis=0, ddof=ddof)
        stability, err = None, None
        if m.shape[0] > 1 and m.shape[1] > 1:
            try:
                stability = stability_onset(m, alpha, test)
            except DegenerateTestError as exc:
                err = str(exc)
        return cls(
            label=label,
            normalized_efforts=m,
            phi=performance_series(m),
            per_period_sd=sd,
            pooled_sd=float(m.std(ddof=1 if m.size > 1 else 0)),
            mean_period_sd=float(sd.mean()),
            stability_period=stability,
            benchmark=benchmark,
            stability_error=err,
            stalls=stalls,
            traces=traces,
        )


def compare_scenarios(
    result_a: ScenarioResult,
    result_b: ScenarioResult,
    alpha: float = 0.01,
    dispersion: str = "pooled",
) -> dict:
    """Final-period performance and overall dispersion of two scenarios side by side."""
    if result_a.normalized_efforts.shape != result_b.normalized_efforts.shape:
        raise ValueError("scenarios must share R and T")
    ma, mb = result_a.normalized_efforts, result_b.normalized_efforts
    # the F-test always runs on the flattened R x T samples; ``dispersion`` only picks the reported sd
    f = f_test_variance(ma.ravel(), mb.ravel(), alpha)
    return {
        "a": result_a.label,
        "b": result_b.label,
        "alpha": alpha,
        "final_phi_a": result_a.final_phi,
        "final_phi_b": result_b.final_phi,
        "final_phi_diff": result_a.final_phi - result_b.final_phi,
        "final_period_test": welch_t_test(ma[:, -1], mb[:, -1], alpha).to_dict(),
        "dispersion_mode": dispersion,
        "sd_a": result_a.dispersion(dispersion),
        "sd_b": result_b.dispersion(dispersion),
        "dispersion_test": f.to_dict(),
        "stability_a": result_a.stability_period,
        "stability_b": result_b.stability_period,
    }
