"""Shared vocabulary: interventions, metacognitive groups, logged transitions,
and dataset persistence/splitting."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

STATE_SIZE = 152


class Action(Enum):
    NUDGE = 0
    PRESENT_BC = 1
    NO_INTERVENTION = 2

    @property
    def short(self) -> str:
        return _ACTION_SHORT[self]


_ACTION_SHORT = {
    Action.NUDGE: "Nud",
    Action.PRESENT_BC: "Prs",
    Action.NO_INTERVENTION: "No",
}


class MetacognitiveGroup(Enum):
    DECLARATIVE = 0
    PROCEDURAL = 1
    CONDITIONAL = 2

    @property
    def short(self) -> str:
        return {0: "Decl", 1: "Proc", 2: "CDL"}[self.value]


FEATURE_FAMILIES = ("temporal", "accuracy", "hint")


@dataclass(frozen=True)
class FeatureSchema:
    """Versioned description of the state feature vector: an id plus ordered
    feature names, each tagged with one of the three behavior families."""

    schema_id: str
    feature_names: tuple
    families: tuple

    def __post_init__(self):
        if len(self.feature_names) != len(self.families):
            raise ValueError("feature_names and families must align")
        bad = set(self.families) - set(FEATURE_FAMILIES)
        if bad:
            raise ValueError(f"unknown feature families: {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.feature_names)


@dataclass
class StudentState:
    features: np.ndarray
    schema_id: str

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)


@dataclass
class Transition:
    student_id: str
    problem_index: int
    state: StudentState
    action: Action
    reward: float
    next_state: Optional[StudentState]
    terminal: bool


class Dataset:
    """Immutable-after-construction collection of logged transitions, indexed
    by student and kept in curriculum order."""

    def __init__(self, schema: FeatureSchema, transitions):
        self.schema = schema
        self.transitions = list(transitions)
        self.student_index: dict = {}
        for t in self.transitions:
            self.student_index.setdefault(t.student_id, []).append(t)
        for sid, ts in self.student_index.items():
            if any(a.problem_index >= b.problem_index for a, b in zip(ts, ts[1:])):
                raise ValueError(f"transitions of student {sid} out of curriculum order")

    @property
    def schema_id(self) -> str:
        return self.schema.schema_id

    def students(self):
        return list(self.student_index.keys())

    def __len__(self) -> int:
        return len(self.transitions)


def validate_transition(t: Transition, schema: FeatureSchema):
    """Check one transition against the schema; violations are returned as
    strings, never raised."""
    violations = []
    for label, st in (("state", t.state), ("next_state", t.next_state)):
        if st is None:
            continue
        if st.features.shape != (len(schema),):
            violations.append(f"{label}: feature length {st.features.shape[0]} != {len(schema)}")
        elif not np.all(np.isfinite(st.features)):
            violations.append(f"{label}: non-finite feature value")
        if st.schema_id != schema.schema_id:
            violations.append(f"{label}: schema mismatch ({st.schema_id!r})")
    if not 0.0 <= t.reward <= 100.0:
        violations.append(f"reward range: {t.reward} outside [0, 100]")
    if t.terminal != (t.next_state is None):
        violations.append("terminal flag inconsistent with next_state presence")
    if t.problem_index < 0:
        violations.append(f"problem_index negative: {t.problem_index}")
    return violations


def split_dataset(d: Dataset, train_fraction: float, seed: int):
    """Split at student granularity so no student straddles the boundary.

    The train side gets round(train_fraction * n_students) students chosen by
    a seeded shuffle; both sides keep the original transition order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must be in (0, 1)")
    if len(d) == 0:
        raise ValueError("empty dataset")
    students = d.students()
    n_train = int(math.floor(train_fraction * len(students) + 0.5))
    rng = np.random.default_rng(seed)
    order = list(rng.permutation(len(students)))
    train_ids = {students[i] for i in order[:n_train]}
    train = Dataset(d.schema, [t for t in d.transitions if t.student_id in train_ids])
    test = Dataset(d.schema, [t for t in d.transitions if t.student_id not in train_ids])
    return train, test


class DatasetFormatError(ValueError):
    pass


def store_dataset(d: Dataset, path) -> None:
    """Write JSON-lines: a header object, then one object per transition.

    Floats are written with repr precision, so load(store(d)) is exact for
    finite values.
    """
    with open(path, "w", encoding="utf-8") as fh:
        header = {
            "schema_id": d.schema.schema_id,
            "feature_names": list(d.schema.feature_names),
            "feature_families": list(d.schema.families),
        }
        fh.write(json.dumps(header) + "\n")
        for t in d.transitions:
            rec = {
                "sid": t.student_id,
                "p": t.problem_index,
                "s": t.state.features.tolist(),
                "a": t.action.value,
                "r": t.reward,
                "sp": None if t.next_state is None else t.next_state.features.tolist(),
                "done": t.terminal,
            }
            fh.write(json.dumps(rec) + "\n")


def load_dataset(path) -> Dataset:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise DatasetFormatError("no records")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise DatasetFormatError(f"line 1: malformed header: {exc}") from exc
    for key in ("schema_id", "feature_names"):
        if key not in header:
            raise DatasetFormatError(f"line 1: header missing field {key!r}")
    families = tuple(header.get("feature_families") or ["temporal"] * len(header["feature_names"]))
    schema = FeatureSchema(header["schema_id"], tuple(header["feature_names"]), families)
    transitions = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise DatasetFormatError(f"line {lineno}: malformed record: {exc}") from exc
        transitions.append(_parse_record(rec, lineno, schema))
    if not transitions:
        raise DatasetFormatError("no records")
    return Dataset(schema, transitions)


def _parse_record(rec: dict, lineno: int, schema: FeatureSchema) -> Transition:
    def fail(field_name, why):
        raise DatasetFormatError(f"line {lineno}: field {field_name!r}: {why}")

    for key in ("sid", "p", "s", "a", "r", "sp", "done"):
        if key not in rec:
            fail(key, "missing")
    try:
        action = Action(rec["a"])
    except ValueError:
        fail("a", f"invalid action code {rec['a']!r}")
    if len(rec["s"]) != len(schema):
        fail("s", f"feature length {len(rec['s'])} != {len(schema)}")
    if rec["sp"] is not None and len(rec["sp"]) != len(schema):
        fail("sp", f"feature length {len(rec['sp'])} != {len(schema)}")
    state = StudentState(np.array(rec["s"], dtype=np.float64), schema.schema_id)
    next_state = None
    if rec["sp"] is not None:
        next_state = StudentState(np.array(rec["sp"], dtype=np.float64), schema.schema_id)
    return Transition(
        student_id=str(rec["sid"]),
        problem_index=int(rec["p"]),
        state=state,
        action=action,
        reward=float(rec["r"]),
        next_state=next_state,
        terminal=bool(rec["done"]),
    )
