"""JSON-lines persistence for simulated sessions.

States are not serialized; the downstream consumers (reports, rule mining)
only need scores, strategy behavior, and the decision sequence.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from .domain import Action, MetacognitiveGroup
from .tutor_sim import DecisionPoint, ProblemOutcome, SessionLog, default_profile


def _outcome_to_dict(o: ProblemOutcome) -> dict:
    return {
        "score": o.score,
        "strategy": o.strategy_used,
        "switch_idx": o.switch_action_index,
        "actions": o.action_count,
        "time_s": o.time_s,
        "intervention": o.intervention.value,
        "complied": o.complied,
        "hints": o.hint_count,
        "slot": o.slot,
    }


def _outcome_from_dict(d: dict) -> ProblemOutcome:
    return ProblemOutcome(
        score=d["score"], strategy_used=d["strategy"],
        switch_action_index=d["switch_idx"], action_count=d["actions"],
        time_s=d["time_s"], intervention=Action(d["intervention"]),
        complied=d["complied"], hint_count=d["hints"], slot=d["slot"],
    )


def save_session_logs(logs, path, conditions: Optional[dict] = None) -> None:
    """conditions optionally maps student_id -> cohort label (e.g. DRL/Ctrl)."""
    conditions = conditions or {}
    with open(path, "w", encoding="utf-8") as fh:
        for log in logs:
            rec = {
                "sid": log.student_id,
                "group": log.profile.group.name,
                "condition": conditions.get(log.student_id, ""),
                "pre": [_outcome_to_dict(o) for o in log.pretest_outcomes],
                "train": [_outcome_to_dict(o) for o in log.training],
                "post": [_outcome_to_dict(o) for o in log.posttest_outcomes],
                "decisions": [{"slot": d.slot, "action": d.action.value}
                              for d in log.decisions],
            }
            fh.write(json.dumps(rec) + "\n")


def load_session_logs(path):
    """Returns (logs, conditions). Loaded decision points carry no state."""
    logs, conditions = [], {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            group = MetacognitiveGroup[rec["group"]]
            log = SessionLog(
                student_id=rec["sid"],
                profile=default_profile(group),
                pretest_outcomes=[_outcome_from_dict(d) for d in rec["pre"]],
                training=[_outcome_from_dict(d) for d in rec["train"]],
                posttest_outcomes=[_outcome_from_dict(d) for d in rec["post"]],
                decisions=[DecisionPoint(slot=d["slot"], state=None,
                                         action=Action(d["action"]))
                           for d in rec["decisions"]],
            )
            logs.append(log)
            conditions[log.student_id] = rec.get("condition", "")
    return logs, conditions
