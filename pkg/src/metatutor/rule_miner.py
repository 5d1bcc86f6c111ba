"""Compliance encoding of consecutive policy decisions and support/confidence
mining of the fixed 18-rule family {a_t, c_t} => a_{t+1}."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .domain import Action
from .tutor_sim import ProblemOutcome, SessionLog, SwitchClass, classify_switch


class Compliance(Enum):
    AGREE = "Agree"
    DISAGREE = "Disagree"


def encode_compliance(action: Action, outcome: ProblemOutcome) -> Compliance:
    """A nudge asks for an early switch to BC; presenting in BC asks for BC
    use; no intervention expects staying in FC."""
    switch = classify_switch(outcome.switch_action_index)
    used_bc = outcome.strategy_used == "BC"
    if action is Action.NUDGE:
        agree = switch is SwitchClass.EARLY
    elif action is Action.PRESENT_BC:
        agree = used_bc
    else:
        agree = not used_bc
    return Compliance.AGREE if agree else Compliance.DISAGREE


@dataclass(frozen=True)
class ComplianceTransaction:
    a_t: Action
    c_t: Compliance
    a_next: Action


def build_transactions(log: SessionLog):
    """One transaction per consecutive decision pair, in curriculum order;
    a 13-decision session yields 12 transactions."""
    slot_outcomes = {o.slot: o for o in log.training}
    transactions = []
    for d, d_next in zip(log.decisions, log.decisions[1:]):
        compliance = encode_compliance(d.action, slot_outcomes[d.slot])
        transactions.append(ComplianceTransaction(d.action, compliance, d_next.action))
    return transactions


@dataclass
class MinedRule:
    antecedent: tuple  # (Action, Compliance)
    consequent: Action
    support: float
    confidence: Optional[float]  # None when the antecedent never occurs
    count: int = 0
    antecedent_count: int = 0

    def label(self) -> str:
        a, c = self.antecedent
        return f"{{{a.short}, {c.value}}} => {self.consequent.short}"


RULE_SPACE = tuple(
    ((a, c), nxt)
    for a in Action
    for c in Compliance
    for nxt in Action
)


def mine_rules(transactions, total_override: Optional[int] = None):
    """All 18 rules with support count/Total and confidence count/antecedent
    count, sorted by support desc, then confidence desc (undefined last),
    then enumeration order."""
    triple_counts = {}
    pair_counts = {}
    for t in transactions:
        triple_counts[(t.a_t, t.c_t, t.a_next)] = triple_counts.get((t.a_t, t.c_t, t.a_next), 0) + 1
        pair_counts[(t.a_t, t.c_t)] = pair_counts.get((t.a_t, t.c_t), 0) + 1
    total = total_override if total_override is not None else len(transactions)
    rules = []
    for order, ((a, c), nxt) in enumerate(RULE_SPACE):
        cnt = triple_counts.get((a, c, nxt), 0)
        pair = pair_counts.get((a, c), 0)
        support = cnt / total if total else 0.0
        confidence = cnt / pair if pair else None
        rules.append((order, MinedRule((a, c), nxt, support, confidence, cnt, pair)))
    rules.sort(key=lambda pair_: (
        -pair_[1].support,
        pair_[1].confidence is None,
        -(pair_[1].confidence or 0.0),
        pair_[0],
    ))
    return [r for _, r in rules]


def top_k(rules, k: int):
    if not 1 <= k <= len(rules):
        raise ValueError(f"k must be in [1, {len(rules)}]")
    return rules[:k]


def write_rule_csv(rules, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["antecedent_action", "compliance", "consequent",
                    "support_pct", "confidence_pct", "count"])
        for r in rules:
            w.writerow([
                r.antecedent[0].short, r.antecedent[1].value, r.consequent.short,
                f"{100.0 * r.support:.2f}",
                "undefined" if r.confidence is None else f"{100.0 * r.confidence:.2f}",
                r.count,
            ])
