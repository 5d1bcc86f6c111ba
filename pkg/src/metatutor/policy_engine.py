"""Greedy deployment of a trained Q-network plus decision-distribution
accounting across curriculum levels and metacognitive groups."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .domain import Action, MetacognitiveGroup, StudentState
from .learner import TrainedModel, forward


@dataclass
class DecisionRecord:
    student_id: str
    level: int
    problem_index: int
    state: StudentState
    action: Action
    q_values: tuple
    group: Optional[MetacognitiveGroup] = None


def decide(model: TrainedModel, state: StudentState):
    """Greedy action for a state: argmax Q, ties to the lowest action index."""
    if model.schema_id and state.schema_id != model.schema_id:
        raise ValueError(f"state schema {state.schema_id!r} != model schema {model.schema_id!r}")
    q = forward(model.network, state)
    return Action(int(np.argmax(q))), tuple(float(v) for v in q)


@dataclass
class DistributionTable:
    actions: tuple
    columns: tuple
    counts: np.ndarray  # shape (3, n_columns)

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def column(self, key):
        return tuple(int(c) for c in self.counts[:, self.columns.index(key)])

    def as_rows(self):
        for i, a in enumerate(self.actions):
            yield (a.short, *[int(c) for c in self.counts[i]])


def decision_distribution(records, key: str = "by-level") -> DistributionTable:
    """Counts of Nud/Prs/No decisions keyed by training level or group."""
    if key == "by-level":
        col_of = lambda r: r.level
    elif key == "by-group":
        col_of = lambda r: r.group
    else:
        raise ValueError(f"unknown key {key!r}")
    columns = tuple(sorted({col_of(r) for r in records},
                           key=lambda c: c.value if hasattr(c, "value") else c))
    counts = np.zeros((3, len(columns)), dtype=int)
    for r in records:
        counts[r.action.value, columns.index(col_of(r))] += 1
    return DistributionTable(tuple(Action), columns, counts)


def no_intervention_rate(records, group: MetacognitiveGroup) -> float:
    sub = [r for r in records if r.group is group]
    if not sub:
        raise ValueError(f"no records for group {group}")
    return sum(r.action is Action.NO_INTERVENTION for r in sub) / len(sub)


def write_decision_csv(records, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["sid", "level", "problem", "action", "q0", "q1", "q2"])
        for r in records:
            w.writerow([r.student_id, r.level, r.problem_index, r.action.short,
                        repr(r.q_values[0]), repr(r.q_values[1]), repr(r.q_values[2])])
