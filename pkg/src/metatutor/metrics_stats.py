"""Learning metrics (normalized learning gain on [0,1] scores) and the two
statistical tests the toolkit reports: Pearson chi-square and one-way ANOVA.

Only statistics and degrees of freedom are reported; p-values are left to
external critical-value tables.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np


@dataclass
class ScoreRecord:
    student_id: str
    group: str
    pre: float
    post: float
    iso_post: float

    def __post_init__(self):
        for name in ("pre", "post", "iso_post"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]; scores must be normalized")


def nlg(pre: float, post: float) -> float:
    """Normalized learning gain (post - pre) / sqrt(1 - pre) on [0,1] scores:
    the gain divided by the square root of the remaining headroom."""
    if not 0.0 <= pre <= 1.0 or not 0.0 <= post <= 1.0:
        raise ValueError("scores must be in [0, 1]")
    if pre == 1.0:
        raise ValueError("undefined at maximum pre-score")
    return (post - pre) / math.sqrt(1.0 - pre)


def chi_square(table) -> tuple:
    """Pearson chi-square statistic and df for an r x c count table."""
    obs = np.asarray(table, dtype=np.float64)
    if obs.ndim != 2 or obs.shape[0] < 2 or obs.shape[1] < 2:
        raise ValueError("table must be at least 2x2")
    if (obs < 0).any():
        raise ValueError("counts must be nonnegative")
    row = obs.sum(axis=1)
    col = obs.sum(axis=0)
    if (row == 0).any() or (col == 0).any():
        raise ValueError("zero marginal")
    expected = np.outer(row, col) / obs.sum()
    stat = float(((obs - expected) ** 2 / expected).sum())
    df = (obs.shape[0] - 1) * (obs.shape[1] - 1)
    return stat, df


def one_way_anova(groups) -> tuple:
    """F statistic with (k-1, N-k) degrees of freedom."""
    samples = [np.asarray(g, dtype=np.float64) for g in groups]
    if len(samples) < 2 or any(len(g) < 2 for g in samples):
        raise ValueError("need >= 2 groups with >= 2 values each")
    all_vals = np.concatenate(samples)
    grand = all_vals.mean()
    ssb = sum(len(g) * (g.mean() - grand) ** 2 for g in samples)
    ssw = sum(((g - g.mean()) ** 2).sum() for g in samples)
    df_between = len(samples) - 1
    df_within = len(all_vals) - len(samples)
    if ssw == 0.0:
        raise ValueError("degenerate within-group variance")
    f = (ssb / df_between) / (ssw / df_within)
    return float(f), df_between, df_within


SUMMARY_ROWS = ("Pre", "Iso. Post", "Iso. NLG", "Post", "NLG")


def summary_table(records):
    """Per-group mean/sd of Pre, Iso. Post, Iso. NLG, Post and NLG; the NLG
    rows average per-student gains."""
    if not records:
        raise ValueError("no records")
    groups = {}
    for r in records:
        groups.setdefault(r.group, []).append(r)
    table = {}
    for g, recs in groups.items():
        cols = {
            "Pre": [r.pre for r in recs],
            "Iso. Post": [r.iso_post for r in recs],
            "Iso. NLG": [nlg(r.pre, r.iso_post) for r in recs],
            "Post": [r.post for r in recs],
            "NLG": [nlg(r.pre, r.post) for r in recs],
        }
        table[g] = {
            name: (float(np.mean(vals)), float(np.std(vals)))
            for name, vals in cols.items()
        }
    return table


def render_summary(table) -> str:
    groups = list(table.keys())
    lines = ["".ljust(10) + "".join(g.rjust(18) for g in groups)]
    for row in SUMMARY_ROWS:
        cells = [f"{table[g][row][0]:.3f} ({table[g][row][1]:.3f})".rjust(18) for g in groups]
        lines.append(row.ljust(10) + "".join(cells))
    return "\n".join(lines)


def write_summary_csv(table, path) -> None:
    groups = list(table.keys())
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["metric"] + [f"{g}_{s}" for g in groups for s in ("mean", "sd")])
        for row in SUMMARY_ROWS:
            out = [row]
            for g in groups:
                m, s = table[g][row]
                out.extend([repr(m), repr(s)])
            w.writerow(out)
