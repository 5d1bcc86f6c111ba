"""Seedable logic-tutor environment with synthetic student behavior models
for the three metacognitive groups.

A session runs 2 pre-test problems, 20 training problems over five ordered
levels, and 6 post-test problems (the first two isomorphic to the pre-test).
Intervention decisions are made at 13 training slots: the last problem of
each level is evaluation-only and the two worked-example slots are inert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Optional, Sequence

import numpy as np

from .domain import (
    Action,
    Dataset,
    FeatureSchema,
    MetacognitiveGroup,
    StudentState,
    Transition,
)

EARLY_SWITCH_MAX_ACTIONS = 30


class SwitchClass(Enum):
    EARLY = "early"
    LATE = "late"
    NO_SWITCH = "no_switch"


def classify_switch(switch_action_index: Optional[int]) -> SwitchClass:
    """Early = switch to BC within the first 30 problem-solving actions."""
    if switch_action_index is None:
        return SwitchClass.NO_SWITCH
    if switch_action_index < 1:
        raise ValueError(f"switch action index must be >= 1, got {switch_action_index}")
    return SwitchClass.EARLY if switch_action_index <= EARLY_SWITCH_MAX_ACTIONS else SwitchClass.LATE


@dataclass(frozen=True)
class Curriculum:
    pretest_count: int = 2
    levels: int = 5
    problems_per_level: int = 4
    posttest_count: int = 6
    isomorphic_posttest_count: int = 2
    worked_example_slots: tuple = (0, 1)
    posttest_difficulty: float = 1.5

    @property
    def training_count(self) -> int:
        return self.levels * self.problems_per_level

    def level_of_slot(self, slot: int) -> int:
        if not 0 <= slot < self.training_count:
            raise ValueError(f"slot {slot} outside training range")
        return slot // self.problems_per_level + 1

    def evaluation_slots(self) -> tuple:
        # last problem of each level gauges improvement on that level
        return tuple(
            (lvl + 1) * self.problems_per_level - 1 for lvl in range(self.levels)
        )

    def decision_slots(self) -> tuple:
        excluded = set(self.evaluation_slots()) | set(self.worked_example_slots)
        return tuple(s for s in range(self.training_count) if s not in excluded)

    def validate(self) -> None:
        if set(self.worked_example_slots) & set(self.evaluation_slots()):
            raise ValueError("worked-example slots must not be evaluation-only slots")
        for s in self.worked_example_slots:
            if not 0 <= s < self.training_count:
                raise ValueError(f"worked-example slot {s} outside training range")


DEFAULT_CURRICULUM = Curriculum()


@dataclass
class StudentProfile:
    group: MetacognitiveGroup
    p_early_switch_spontaneous: float
    p_late_switch_spontaneous: float
    p_comply_nudge: float
    p_comply_present: float
    skill_fc: float
    skill_bc: float
    learning_rate: float
    noise_sd: float

    def __post_init__(self):
        for name in ("p_early_switch_spontaneous", "p_late_switch_spontaneous",
                     "p_comply_nudge", "p_comply_present", "skill_fc", "skill_bc"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")
        if self.learning_rate < 0 or self.noise_sd < 0:
            raise ValueError("learning_rate and noise_sd must be nonnegative")


_DEFAULT_PROFILES = {
    MetacognitiveGroup.DECLARATIVE: dict(
        p_early_switch_spontaneous=0.02, p_late_switch_spontaneous=0.03,
        p_comply_nudge=0.85, p_comply_present=0.90,
        skill_fc=0.55, skill_bc=0.30, learning_rate=0.020, noise_sd=0.05,
    ),
    MetacognitiveGroup.PROCEDURAL: dict(
        p_early_switch_spontaneous=0.08, p_late_switch_spontaneous=0.55,
        p_comply_nudge=0.80, p_comply_present=0.85,
        skill_fc=0.62, skill_bc=0.45, learning_rate=0.020, noise_sd=0.05,
    ),
    MetacognitiveGroup.CONDITIONAL: dict(
        p_early_switch_spontaneous=0.75, p_late_switch_spontaneous=0.10,
        p_comply_nudge=0.90, p_comply_present=0.90,
        skill_fc=0.65, skill_bc=0.75, learning_rate=0.015, noise_sd=0.05,
    ),
}


def default_profile(group: MetacognitiveGroup, **overrides) -> StudentProfile:
    params = dict(_DEFAULT_PROFILES[group])
    params.update(overrides)
    return StudentProfile(group=group, **params)


@dataclass
class ProblemOutcome:
    score: float
    strategy_used: str  # "FC" | "BC"
    switch_action_index: Optional[int]
    action_count: int
    time_s: float
    intervention: Action
    complied: bool
    hint_count: int = 0
    slot: Optional[int] = None


@dataclass
class DecisionPoint:
    slot: int
    state: StudentState
    action: Action


@dataclass
class SessionLog:
    student_id: str
    profile: StudentProfile
    pretest_outcomes: list
    training: list
    posttest_outcomes: list
    decisions: list

    @property
    def pre_scores(self):
        return [o.score for o in self.pretest_outcomes]

    @property
    def post_scores(self):
        return [o.score for o in self.posttest_outcomes]


# ---------------------------------------------------------------------------
# Problem scoring

SCORE_WEIGHTS = (0.5, 0.25, 0.25)  # accuracy, time, solution length


def score_problem(accuracy, time_s, solution_len, ref_time_s, ref_len):
    """Score in [0, 100] combining accuracy with time and solution-length
    ratios against a reference solution (ratios saturate at 1)."""
    if time_s <= 0 or ref_time_s <= 0:
        raise ValueError("time must be positive")
    if solution_len < 1 or ref_len < 1:
        raise ValueError("solution length must be >= 1")
    if not 0.0 <= accuracy <= 1.0:
        raise ValueError("accuracy must be in [0, 1]")
    w_a, w_t, w_l = SCORE_WEIGHTS
    return 100.0 * (
        w_a * accuracy
        + w_t * min(1.0, ref_time_s / time_s)
        + w_l * min(1.0, ref_len / solution_len)
    )


# ---------------------------------------------------------------------------
# Nudge delay

@dataclass(frozen=True)
class DelayDistribution:
    """Delay before a nudge fires, in seconds.

    kind: "lognormal" (params mu, sigma), "point" (params value), or
    "empirical" (params values, weights).
    """

    kind: str = "lognormal"
    mu: float = math.log(60.0)
    sigma: float = 0.5
    value: float = 60.0
    values: tuple = ()
    weights: tuple = ()

    def validate(self) -> None:
        if self.kind == "lognormal":
            if self.sigma < 0:
                raise ValueError("sigma must be nonnegative")
        elif self.kind == "point":
            if self.value <= 0:
                raise ValueError("point delay must be positive")
        elif self.kind == "empirical":
            if not self.values or len(self.values) != len(self.weights):
                raise ValueError("empirical delay needs matching values and weights")
            if any(v <= 0 for v in self.values):
                raise ValueError("empirical delay values must be positive")
            if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
                raise ValueError("empirical weights must be nonnegative with positive sum")
        else:
            raise ValueError(f"unknown delay distribution kind {self.kind!r}")


DEFAULT_NUDGE_DELAY = DelayDistribution()


def sample_nudge_delay(dist: DelayDistribution, rng: np.random.Generator) -> float:
    dist.validate()
    if dist.kind == "lognormal":
        return float(np.exp(rng.normal(dist.mu, dist.sigma)))
    if dist.kind == "point":
        return float(dist.value)
    w = np.asarray(dist.weights, dtype=np.float64)
    idx = rng.choice(len(dist.values), p=w / w.sum())
    return float(dist.values[idx])


# ---------------------------------------------------------------------------
# Behavior model

EARLY_BC_ACCURACY_BONUS = 0.15
LATE_SWITCH_TIME_FACTOR = 1.3
DISRUPTION_PENALTY = 0.45
FC_PRACTICE_FACTOR = 0.25


def _phase_refs(curriculum: Curriculum, phase: str, index: int):
    """Reference time (s) and solution length for a problem slot."""
    if phase == "pre":
        return 90.0, 8
    if phase == "train":
        level = curriculum.level_of_slot(index)
        return 60.0 + 15.0 * level, 5 + level
    if phase == "post":
        base_t, base_l = 90.0, 8
        f = curriculum.posttest_difficulty
        if index < curriculum.isomorphic_posttest_count:
            return base_t, base_l  # isomorphic to the pre-test problems
        return base_t * f, max(1, int(round(base_l * f)))
    raise ValueError(f"unknown phase {phase!r}")


class StudentSession:
    """Mutable per-student simulation state: evolving skills plus the
    outcome history the feature vector summarizes."""

    def __init__(self, student_id, profile, curriculum=DEFAULT_CURRICULUM,
                 schema=None, rng=None, nudge_delay=DEFAULT_NUDGE_DELAY):
        curriculum.validate()
        self.student_id = student_id
        self.profile = profile
        self.curriculum = curriculum
        self.schema = schema if schema is not None else default_feature_schema()
        self.rng = rng if rng is not None else np.random.default_rng(0)
        self.nudge_delay = nudge_delay
        self.skill_fc = profile.skill_fc
        self.skill_bc = profile.skill_bc
        self.pretest_outcomes = []
        self.training = {}
        self.posttest_outcomes = []
        self.decisions = []

    # -- behavior ----------------------------------------------------------

    def _solve(self, intervention, ref_time, ref_len, training, difficulty=1.0):
        p = self.profile
        rng = self.rng
        spont_early = rng.random() < p.p_early_switch_spontaneous
        spont_late = rng.random() < p.p_late_switch_spontaneous
        comply_draw = rng.random()

        presented_bc = False
        switch_idx = None
        if intervention is Action.NUDGE:
            sample_nudge_delay(self.nudge_delay, rng)  # prompt timing
            if comply_draw < p.p_comply_nudge or spont_early:
                switch_idx = int(rng.integers(1, EARLY_SWITCH_MAX_ACTIONS + 1))
            elif spont_late:
                switch_idx = int(rng.integers(EARLY_SWITCH_MAX_ACTIONS + 1, 81))
        elif intervention is Action.PRESENT_BC:
            if comply_draw < p.p_comply_present:
                presented_bc = True
            elif spont_early:
                switch_idx = int(rng.integers(1, EARLY_SWITCH_MAX_ACTIONS + 1))
            elif spont_late:
                switch_idx = int(rng.integers(EARLY_SWITCH_MAX_ACTIONS + 1, 81))
        else:
            if spont_early:
                switch_idx = int(rng.integers(1, EARLY_SWITCH_MAX_ACTIONS + 1))
            elif spont_late:
                switch_idx = int(rng.integers(EARLY_SWITCH_MAX_ACTIONS + 1, 81))

        switch = classify_switch(switch_idx)
        used_bc = presented_bc or switch is not SwitchClass.NO_SWITCH

        if presented_bc or switch is SwitchClass.EARLY:
            accuracy = self.skill_bc + EARLY_BC_ACCURACY_BONUS
        elif switch is SwitchClass.LATE:
            accuracy = 0.5 * (self.skill_fc + self.skill_bc)
        else:
            accuracy = self.skill_fc
        # interrupting a student who was about to switch on their own
        if intervention is not Action.NO_INTERVENTION and spont_early:
            accuracy -= DISRUPTION_PENALTY
        accuracy -= 0.1 * (difficulty - 1.0)
        accuracy += rng.normal(0.0, p.noise_sd)
        accuracy = float(np.clip(accuracy, 0.0, 1.0))

        time_s = ref_time * (2.0 - accuracy) * float(np.exp(rng.normal(0.0, 0.1)))
        if switch is SwitchClass.LATE:
            time_s *= LATE_SWITCH_TIME_FACTOR
        sol_len = max(1, int(round(ref_len * (2.0 - accuracy))))
        action_count = max(sol_len, switch_idx or 1)
        hint_count = int(rng.poisson(3.0 * (1.0 - accuracy))) if training else 0

        score = score_problem(accuracy, time_s, sol_len, ref_time, ref_len)
        complied = _agrees(intervention, used_bc, switch)
        outcome = ProblemOutcome(
            score=score, strategy_used="BC" if used_bc else "FC",
            switch_action_index=switch_idx, action_count=action_count,
            time_s=time_s, intervention=intervention, complied=complied,
            hint_count=hint_count,
        )

        if used_bc:
            self.skill_bc = min(1.0, self.skill_bc + p.learning_rate)
        self.skill_fc = min(1.0, self.skill_fc + FC_PRACTICE_FACTOR * p.learning_rate)
        return outcome

    def run_pretest(self):
        for i in range(self.curriculum.pretest_count):
            rt, rl = _phase_refs(self.curriculum, "pre", i)
            self.pretest_outcomes.append(
                self._solve(Action.NO_INTERVENTION, rt, rl, training=False))

    def run_posttest(self):
        for i in range(self.curriculum.posttest_count):
            rt, rl = _phase_refs(self.curriculum, "post", i)
            difficulty = (1.0 if i < self.curriculum.isomorphic_posttest_count
                          else self.curriculum.posttest_difficulty)
            self.posttest_outcomes.append(
                self._solve(Action.NO_INTERVENTION, rt, rl, training=False,
                            difficulty=difficulty))

    def step_worked_example(self, slot):
        # step-by-step BC demonstration: no strategy choice, skill bump only
        rt, rl = _phase_refs(self.curriculum, "train", slot)
        accuracy = float(np.clip(0.9 + self.rng.normal(0.0, 0.02), 0.0, 1.0))
        time_s = rt * (2.0 - accuracy)
        score = score_problem(accuracy, time_s, rl, rt, rl)
        outcome = ProblemOutcome(
            score=score, strategy_used="BC", switch_action_index=None,
            action_count=rl, time_s=time_s, intervention=Action.NO_INTERVENTION,
            complied=False, hint_count=0, slot=slot,
        )
        self.skill_bc = min(1.0, self.skill_bc + self.profile.learning_rate)
        self.training[slot] = outcome
        return outcome

    def step_problem(self, slot, intervention: Action):
        cur = self.curriculum
        if not 0 <= slot < cur.training_count:
            raise ValueError(f"slot {slot} outside training range")
        forbidden = slot in cur.evaluation_slots() or slot in cur.worked_example_slots
        if forbidden and intervention is not Action.NO_INTERVENTION:
            raise ValueError(f"slot {slot} does not admit interventions")
        rt, rl = _phase_refs(cur, "train", slot)
        outcome = self._solve(intervention, rt, rl, training=True)
        outcome.slot = slot
        self.training[slot] = outcome
        return outcome

    # -- feature vector ----------------------------------------------------

    def current_state(self) -> StudentState:
        return StudentState(build_features(self), self.schema.schema_id)


def _agrees(intervention: Action, used_bc: bool, switch: SwitchClass) -> bool:
    """Compliance semantics: a nudge asks for an early switch, presenting in
    BC asks for BC use, no intervention expects staying in FC."""
    if intervention is Action.NUDGE:
        return switch is SwitchClass.EARLY
    if intervention is Action.PRESENT_BC:
        return used_bc
    return not used_bc


def step_problem(session: StudentSession, slot: int, intervention: Action,
                 rng: Optional[np.random.Generator] = None) -> ProblemOutcome:
    if rng is not None:
        session.rng = rng
    return session.step_problem(slot, intervention)


# ---------------------------------------------------------------------------
# Feature schema (152 features across temporal / accuracy / hint families)

RECENT_WINDOW = 8
_RECENT_FIELDS = (
    ("score", "accuracy"),
    ("time_ratio", "temporal"),
    ("log_actions", "temporal"),
    ("used_bc", "accuracy"),
    ("switched_early", "temporal"),
    ("switched_late", "temporal"),
    ("hint_frac", "hint"),
    ("got_nudge", "hint"),
    ("got_present", "hint"),
    ("complied", "hint"),
)
_AGG_FIELDS = (
    ("frac_done", "temporal"), ("early_rate", "temporal"), ("late_rate", "temporal"),
    ("noswitch_rate", "temporal"), ("bc_rate", "accuracy"), ("mean_score", "accuracy"),
    ("std_score", "accuracy"), ("min_score", "accuracy"), ("max_score", "accuracy"),
    ("last_score", "accuracy"), ("score_trend", "accuracy"),
    ("mean_time_ratio", "temporal"), ("std_time_ratio", "temporal"),
    ("mean_actions", "temporal"), ("mean_hints", "hint"),
    ("nudge_rate", "hint"), ("present_rate", "hint"), ("nointervention_rate", "hint"),
    ("comply_rate", "hint"), ("comply_nudge_rate", "hint"), ("comply_present_rate", "hint"),
)
_PRE_FIELDS = (
    ("score", "accuracy"), ("time_ratio", "temporal"), ("actions_norm", "temporal"),
    ("switched_early", "temporal"), ("switched_late", "temporal"), ("used_bc", "accuracy"),
)

DEFAULT_SCHEMA_ID = "metatutor-sim-v1"


def default_feature_schema(curriculum: Curriculum = DEFAULT_CURRICULUM) -> FeatureSchema:
    names, families = [], []

    def add(name, fam):
        names.append(name)
        families.append(fam)

    for k in range(RECENT_WINDOW):
        for f, fam in _RECENT_FIELDS:
            add(f"recent{k}_{f}", fam)
    for f, fam in _AGG_FIELDS:
        add(f"agg_{f}", fam)
    for s in range(curriculum.training_count):
        add(f"slot_is_{s}", "temporal")
    for lvl in range(1, curriculum.levels + 1):
        add(f"level_is_{lvl}", "temporal")
    add("slot_frac", "temporal")
    add("decisions_frac", "temporal")
    for i in range(curriculum.pretest_count):
        for f, fam in _PRE_FIELDS:
            add(f"pre{i}_{f}", fam)
    for lvl in range(1, curriculum.levels + 1):
        add(f"level{lvl}_mean_score", "accuracy")
    for lvl in range(1, curriculum.levels + 1):
        add(f"level{lvl}_early_rate", "temporal")
    add("bias_one", "accuracy")
    add("pre_mean_score", "accuracy")
    return FeatureSchema(DEFAULT_SCHEMA_ID, tuple(names), tuple(families))


def _outcome_block(out: ProblemOutcome, curriculum: Curriculum):
    slot = out.slot
    rt, rl = _phase_refs(curriculum, "train", slot) if slot is not None else (90.0, 8)
    switch = classify_switch(out.switch_action_index)
    return [
        out.score / 100.0,
        min(out.time_s / rt, 3.0) / 3.0,
        math.log1p(out.action_count) / 5.0,
        1.0 if out.strategy_used == "BC" else 0.0,
        1.0 if switch is SwitchClass.EARLY else 0.0,
        1.0 if switch is SwitchClass.LATE else 0.0,
        out.hint_count / (out.hint_count + 3.0),
        1.0 if out.intervention is Action.NUDGE else 0.0,
        1.0 if out.intervention is Action.PRESENT_BC else 0.0,
        1.0 if out.complied else 0.0,
    ]


def build_features(session: StudentSession) -> np.ndarray:
    """Feature vector at the upcoming decision slot, summarizing pre-test
    behavior and the training history so far."""
    cur = session.curriculum
    feats: list = []
    done = [session.training[s] for s in sorted(session.training)]

    recent = list(reversed(done))[:RECENT_WINDOW]
    for k in range(RECENT_WINDOW):
        if k < len(recent):
            feats.extend(_outcome_block(recent[k], cur))
        else:
            feats.extend([0.0] * len(_RECENT_FIELDS))

    n = len(done)
    if n:
        scores = np.array([o.score for o in done]) / 100.0
        tr = np.array([
            min(o.time_s / _phase_refs(cur, "train", o.slot)[0], 3.0) / 3.0 for o in done
        ])
        switches = [classify_switch(o.switch_action_index) for o in done]
        early = np.array([s is SwitchClass.EARLY for s in switches], dtype=float)
        late = np.array([s is SwitchClass.LATE for s in switches], dtype=float)
        bc = np.array([o.strategy_used == "BC" for o in done], dtype=float)
        nud = np.array([o.intervention is Action.NUDGE for o in done], dtype=float)
        prs = np.array([o.intervention is Action.PRESENT_BC for o in done], dtype=float)
        comp = np.array([o.complied for o in done], dtype=float)
        trend = float(scores[-1] - scores[0]) if n > 1 else 0.0
        feats.extend([
            n / cur.training_count,
            early.mean(), late.mean(), 1.0 - early.mean() - late.mean(),
            bc.mean(), scores.mean(), scores.std(), scores.min(), scores.max(),
            scores[-1], trend, tr.mean(), tr.std(),
            float(np.mean([math.log1p(o.action_count) / 5.0 for o in done])),
            float(np.mean([o.hint_count / (o.hint_count + 3.0) for o in done])),
            nud.mean(), prs.mean(), 1.0 - nud.mean() - prs.mean(),
            comp.mean(),
            float(comp[nud > 0].mean()) if nud.sum() else 0.0,
            float(comp[prs > 0].mean()) if prs.sum() else 0.0,
        ])
    else:
        feats.extend([0.0] * len(_AGG_FIELDS))

    next_slot = min(set(range(cur.training_count)) - set(session.training), default=cur.training_count - 1)
    slot_onehot = [0.0] * cur.training_count
    slot_onehot[next_slot] = 1.0
    feats.extend(slot_onehot)
    level_onehot = [0.0] * cur.levels
    level_onehot[cur.level_of_slot(next_slot) - 1] = 1.0
    feats.extend(level_onehot)
    feats.append(next_slot / cur.training_count)
    feats.append(len(session.decisions) / max(1, len(cur.decision_slots())))

    for i in range(cur.pretest_count):
        if i < len(session.pretest_outcomes):
            o = session.pretest_outcomes[i]
            rt, rl = _phase_refs(cur, "pre", i)
            sw = classify_switch(o.switch_action_index)
            feats.extend([
                o.score / 100.0,
                min(o.time_s / rt, 3.0) / 3.0,
                math.log1p(o.action_count) / 5.0,
                1.0 if sw is SwitchClass.EARLY else 0.0,
                1.0 if sw is SwitchClass.LATE else 0.0,
                1.0 if o.strategy_used == "BC" else 0.0,
            ])
        else:
            feats.extend([0.0] * len(_PRE_FIELDS))

    for lvl in range(1, cur.levels + 1):
        lvl_out = [o for o in done if cur.level_of_slot(o.slot) == lvl]
        feats.append(float(np.mean([o.score for o in lvl_out])) / 100.0 if lvl_out else 0.0)
    for lvl in range(1, cur.levels + 1):
        lvl_out = [o for o in done if cur.level_of_slot(o.slot) == lvl]
        feats.append(
            float(np.mean([classify_switch(o.switch_action_index) is SwitchClass.EARLY
                           for o in lvl_out])) if lvl_out else 0.0)

    feats.append(1.0)
    feats.append(float(np.mean([o.score for o in session.pretest_outcomes])) / 100.0
                 if session.pretest_outcomes else 0.0)
    return np.asarray(feats, dtype=np.float64)


# ---------------------------------------------------------------------------
# Full-session drivers

DecisionFn = Callable[[StudentState], Action]


def constant_policy(action: Action) -> DecisionFn:
    return lambda state: action


def run_curriculum(profile: StudentProfile, policy: DecisionFn, seed,
                   curriculum: Curriculum = DEFAULT_CURRICULUM,
                   schema: Optional[FeatureSchema] = None,
                   student_id: str = "s0",
                   nudge_delay: DelayDistribution = DEFAULT_NUDGE_DELAY) -> SessionLog:
    """Run one student through pre-test, training, and post-test, consulting
    the policy at the 13 decision slots."""
    rng = np.random.default_rng(seed)
    session = StudentSession(student_id, profile, curriculum, schema, rng, nudge_delay)
    session.run_pretest()
    decision_slots = set(curriculum.decision_slots())
    worked = set(curriculum.worked_example_slots)
    for slot in range(curriculum.training_count):
        if slot in worked:
            session.step_worked_example(slot)
        elif slot in decision_slots:
            state = session.current_state()
            action = policy(state)
            session.step_problem(slot, action)
            session.decisions.append(DecisionPoint(slot=slot, state=state, action=action))
        else:
            session.step_problem(slot, Action.NO_INTERVENTION)
    session.run_posttest()
    return SessionLog(
        student_id=student_id,
        profile=session.profile,
        pretest_outcomes=session.pretest_outcomes,
        training=[session.training[s] for s in sorted(session.training)],
        posttest_outcomes=session.posttest_outcomes,
        decisions=session.decisions,
    )


def assign_groups(mix: Sequence[float], n_students: int):
    """Deterministic largest-remainder apportionment of students to groups."""
    if n_students < 1:
        raise ValueError("empty cohort")
    mix = np.asarray(mix, dtype=np.float64)
    if mix.shape != (3,) or abs(mix.sum() - 1.0) > 1e-9 or (mix < 0).any():
        raise ValueError("mix must be 3 nonnegative proportions summing to 1")
    raw = mix * n_students
    counts = np.floor(raw).astype(int)
    order = np.argsort(-(raw - counts), kind="stable")
    for i in range(n_students - counts.sum()):
        counts[order[i % 3]] += 1
    groups = []
    for g, c in zip(MetacognitiveGroup, counts):
        groups.extend([g] * c)
    return groups


def random_behavior_policy(rng: np.random.Generator) -> DecisionFn:
    """Uniform-random decisions, mirroring exploratory logged data."""
    return lambda state: Action(int(rng.integers(0, 3)))


def generate_synthetic_dataset(mix, n_students, seed,
                               behavior_policy: Optional[DecisionFn] = None,
                               curriculum: Curriculum = DEFAULT_CURRICULUM,
                               profile_overrides: Optional[dict] = None,
                               return_logs: bool = False):
    """Simulate a cohort under a behavior policy and emit one transition per
    decision point (terminal on each student's last decision)."""
    schema = default_feature_schema(curriculum)
    groups = assign_groups(mix, n_students)
    ss = np.random.SeedSequence(seed)
    student_seeds = ss.spawn(n_students)
    if behavior_policy is None:
        behavior_policy = random_behavior_policy(np.random.default_rng(ss.spawn(1)[0]))
    overrides = profile_overrides or {}
    transitions, logs = [], []
    for i, group in enumerate(groups):
        sid = f"s{i:04d}"
        profile = default_profile(group, **overrides.get(group.name.lower(), {}))
        log = run_curriculum(profile, behavior_policy, student_seeds[i],
                             curriculum=curriculum, schema=schema, student_id=sid)
        logs.append(log)
        decisions = log.decisions
        slot_outcomes = {o.slot: o for o in log.training}
        for j, d in enumerate(decisions):
            last = j == len(decisions) - 1
            transitions.append(Transition(
                student_id=sid,
                problem_index=d.slot,
                state=d.state,
                action=d.action,
                reward=slot_outcomes[d.slot].score,
                next_state=None if last else decisions[j + 1].state,
                terminal=last,
            ))
    dataset = Dataset(schema, transitions)
    return (dataset, logs) if return_logs else dataset
