"""Rank-based factorial analysis for the 2x2x2 condition experiment.

Raw scores are aligned for one factorial effect at a time (every other
effect's cell-mean estimate subtracted out), ranked over the whole table with
midranks for ties, and pushed through a classical fixed-effects three-factor
ANOVA; only the aligned-for effect's statistic is kept.  Doing that for all
seven effects gives a normality-free factorial test.

Participant is not modeled as a blocking or random effect, so the error term
is the plain within-cell variation with N - 8 degrees of freedom.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from telekin.canonical import canon_float
from telekin.errors import TraceParseError, UndefinedFError, ValidationError

FACTORS = ("concentration", "strain", "energy")

# effect -> indicator of which factors participate (A=concentration, ...)
EFFECTS: dict[str, tuple[int, ...]] = {
    "concentration": (0,),
    "strain": (1,),
    "energy": (2,),
    "concentration:strain": (0, 1),
    "concentration:energy": (0, 2),
    "strain:energy": (1, 2),
    "concentration:strain:energy": (0, 1, 2),
}


@dataclass(frozen=True, slots=True)
class ObservationTable:
    participants: tuple[str, ...]
    a: np.ndarray          # concentration level per row, 0/1
    b: np.ndarray          # strain
    c: np.ndarray          # energy
    response: np.ndarray

    def __len__(self) -> int:
        return len(self.response)

    @classmethod
    def from_rows(cls, rows) -> "ObservationTable":
        parts, a, b, c, y = [], [], [], [], []
        for row in rows:
            participant, fa, fb, fc, response = row
            parts.append(str(participant))
            a.append(int(bool(fa)))
            b.append(int(bool(fb)))
            c.append(int(bool(fc)))
            y.append(float(response))
        if not parts:
            raise ValidationError("observation table is empty")
        return cls(
            participants=tuple(parts),
            a=np.asarray(a, dtype=np.int64),
            b=np.asarray(b, dtype=np.int64),
            c=np.asarray(c, dtype=np.int64),
            response=np.asarray(y, dtype=np.float64),
        )

    def with_response(self, response: np.ndarray) -> "ObservationTable":
        return ObservationTable(self.participants, self.a, self.b, self.c,
                                np.asarray(response, dtype=np.float64))

    def cell_index(self) -> np.ndarray:
        return self.a * 4 + self.b * 2 + self.c

    def require_balanced(self, min_replicates: int = 1) -> int:
        counts = np.bincount(self.cell_index(), minlength=8)
        if counts.min() == 0:
            raise ValidationError("design is not full factorial: empty cells present")
        if counts.min() != counts.max():
            raise ValidationError(
                f"design is unbalanced: cell counts range {counts.min()}..{counts.max()}"
            )
        r = int(counts[0])
        if r < min_replicates:
            raise ValidationError(
                f"need at least {min_replicates} replicates per cell, got {r}"
            )
        return r


def load_observations(path: str | Path) -> ObservationTable:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["participant", "concentration", "strain", "energy", "response"]
        if header is None or [h.strip().lower() for h in header] != expected:
            raise TraceParseError(f"{path}: line 1: header must be {','.join(expected)}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 5:
                raise TraceParseError(f"{path}: line {line_no}: expected 5 columns, got {len(row)}")
            participant, fa, fb, fc, resp = (cell.strip() for cell in row)
            try:
                levels = [_parse_level(v) for v in (fa, fb, fc)]
                value = float(resp)
            except ValueError as exc:
                raise TraceParseError(f"{path}: line {line_no}: {exc}") from exc
            rows.append((participant, *levels, value))
    return ObservationTable.from_rows(rows)


def _parse_level(text: str) -> int:
    low = text.lower()
    if low in ("yes", "1", "true"):
        return 1
    if low in ("no", "0", "false"):
        return 0
    raise ValueError(f"factor level must be yes/no, got {text!r}")


# --- effect estimates --------------------------------------------------------

def _group_means(values: np.ndarray, index: np.ndarray, size: int) -> np.ndarray:
    sums = np.bincount(index, weights=values, minlength=size)
    counts = np.bincount(index, minlength=size)
    return sums / counts


def _effect_estimates(table: ObservationTable) -> dict[str, np.ndarray]:
    """Per-observation cell-mean estimates of all seven factorial effects."""
    y = table.response
    grand = y.mean()
    a, b, c = table.a, table.b, table.c
    m_a = _group_means(y, a, 2)[a]
    m_b = _group_means(y, b, 2)[b]
    m_c = _group_means(y, c, 2)[c]
    m_ab = _group_means(y, a * 2 + b, 4)[a * 2 + b]
    m_ac = _group_means(y, a * 2 + c, 4)[a * 2 + c]
    m_bc = _group_means(y, b * 2 + c, 4)[b * 2 + c]
    m_abc = _group_means(y, table.cell_index(), 8)[table.cell_index()]
    est = {
        "concentration": m_a - grand,
        "strain": m_b - grand,
        "energy": m_c - grand,
        "concentration:strain": m_ab - m_a - m_b + grand,
        "concentration:energy": m_ac - m_a - m_c + grand,
        "strain:energy": m_bc - m_b - m_c + grand,
        "concentration:strain:energy": (
            m_abc - m_ab - m_ac - m_bc + m_a + m_b + m_c - grand
        ),
    }
    est["_grand"] = np.full_like(y, grand)
    est["_residual"] = y - m_abc
    return est


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """Midranks: ties share the mean of the rank positions they occupy."""
    _, inverse, counts = np.unique(values, return_inverse=True, return_counts=True)
    upper = np.cumsum(counts)
    lower = upper - counts + 1
    return ((lower + upper) / 2.0)[inverse]


def align_rank(table: ObservationTable, effect: str) -> ObservationTable:
    """Strip every other effect's estimate, then rank the whole column."""
    if effect not in EFFECTS:
        raise ValidationError(f"unknown effect {effect!r}")
    if len(table) == 0:
        raise ValidationError("observation table is empty")
    table.require_balanced(min_replicates=1)
    est = _effect_estimates(table)
    aligned = table.response.copy()
    for name in EFFECTS:
        if name != effect:
            aligned -= est[name]
    return table.with_response(_average_ranks(aligned))


# --- classical fixed-effects ANOVA ---------------------------------------------

@dataclass(frozen=True, slots=True)
class EffectResult:
    df1: int
    df2: int
    F: float
    p: float

    def as_dict(self) -> dict:
        return {"df1": self.df1, "df2": self.df2, "F": canon_float(self.F),
                "p": canon_float(self.p)}


@dataclass(frozen=True, slots=True)
class AnovaResult:
    effects: dict[str, EffectResult]

    def as_dict(self) -> dict:
        return {name: self.effects[name].as_dict() for name in EFFECTS}


def anova3(table: ObservationTable) -> AnovaResult:
    """Fixed-effects full-factorial ANOVA on a balanced 2x2x2 table."""
    r = table.require_balanced(min_replicates=2)
    n = len(table)
    est = _effect_estimates(table)
    ss_error = float(np.sum(est["_residual"] ** 2))
    df2 = n - 8
    ms_error = ss_error / df2
    if ms_error == 0.0:
        raise UndefinedFError(
            "within-cell variation is exactly zero; F statistics are undefined"
        )
    effects = {}
    for name in EFFECTS:
        ss = float(np.sum(est[name] ** 2))
        f_stat = (ss / 1.0) / ms_error
        effects[name] = EffectResult(df1=1, df2=df2, F=f_stat,
                                     p=f_upper_tail(f_stat, 1, df2))
    return AnovaResult(effects=effects)


def art_anova(table: ObservationTable) -> AnovaResult:
    """Align-and-rank once per effect; keep that effect's statistic each time."""
    out = {}
    for name in EFFECTS:
        ranked = align_rank(table, name)
        out[name] = anova3(ranked).effects[name]
    return AnovaResult(effects=out)


# --- F distribution upper tail ---------------------------------------------------

def _betacf(a: float, b: float, x: float) -> float:
    """Continued fraction for the incomplete beta (modified Lentz)."""
    max_iter = 300
    eps = 3e-16
    fpmin = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < fpmin:
        d = fpmin
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < fpmin:
            d = fpmin
        c = 1.0 + aa / c
        if abs(c) < fpmin:
            c = fpmin
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            return h
    raise ValidationError("incomplete beta continued fraction did not converge")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b), double-precision accurate."""
    if a <= 0 or b <= 0:
        raise ValidationError("incomplete beta requires positive shape parameters")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def f_upper_tail(f_stat: float, df1: int, df2: int) -> float:
    """P(F(df1, df2) > f_stat)."""
    if df1 < 1 or df2 < 1:
        raise ValidationError("degrees of freedom must be >= 1")
    if f_stat < 0:
        raise ValidationError("F statistic must be >= 0")
    if f_stat == 0.0:
        return 1.0
    x = df2 / (df2 + df1 * f_stat)
    return reg_inc_beta(df2 / 2.0, df1 / 2.0, x)
