import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metatutor.domain import (
    Action,
    Dataset,
    DatasetFormatError,
    FeatureSchema,
    StudentState,
    Transition,
    load_dataset,
    split_dataset,
    store_dataset,
    validate_transition,
)

SCHEMA = FeatureSchema(
    "test-v1",
    tuple(f"f{i}" for i in range(152)),
    tuple(["temporal"] * 60 + ["accuracy"] * 60 + ["hint"] * 32),
)


def make_transition(sid="s0", p=2, reward=73.4, n_features=152, terminal=True,
                    next_state=None):
    state = StudentState(np.zeros(n_features), SCHEMA.schema_id)
    return Transition(sid, p, state, Action.NUDGE, reward,
                      next_state, terminal)


def make_dataset(n_students=3, decisions=4, seed=0):
    rng = np.random.default_rng(seed)
    transitions = []
    for i in range(n_students):
        for j in range(decisions):
            last = j == decisions - 1
            transitions.append(Transition(
                f"s{i}", j,
                StudentState(rng.normal(size=152), SCHEMA.schema_id),
                Action(int(rng.integers(0, 3))),
                float(rng.uniform(0, 100)),
                None if last else StudentState(rng.normal(size=152), SCHEMA.schema_id),
                last,
            ))
    return Dataset(SCHEMA, transitions)


class TestValidateTransition:
    def test_well_formed(self):
        assert validate_transition(make_transition(), SCHEMA) == []

    def test_feature_length(self):
        violations = validate_transition(make_transition(n_features=151), SCHEMA)
        assert any("feature length" in v for v in violations)

    def test_reward_range(self):
        violations = validate_transition(make_transition(reward=101.0), SCHEMA)
        assert any("reward range" in v for v in violations)

    def test_terminal_next_state_consistency(self):
        t = make_transition(terminal=False)  # non-terminal but no next_state
        assert any("terminal" in v for v in validate_transition(t, SCHEMA))

    def test_non_finite_feature(self):
        t = make_transition()
        t.state.features[0] = np.nan
        assert any("non-finite" in v for v in validate_transition(t, SCHEMA))


class TestSplitDataset:
    def test_study_scale_counts(self):
        d = make_dataset(n_students=867, decisions=1)
        train, test = split_dataset(d, 0.8, seed=7)
        assert len(train.students()) == 694
        assert len(test.students()) == 173

    def test_exact_arithmetic(self):
        d = make_dataset(n_students=10)
        train, test = split_dataset(d, 0.8, seed=0)
        assert len(train.students()) == 8
        assert len(test.students()) == 2
        assert not set(train.students()) & set(test.students())

    def test_deterministic(self):
        d = make_dataset(n_students=20)
        a = split_dataset(d, 0.8, seed=5)
        b = split_dataset(d, 0.8, seed=5)
        assert a[0].students() == b[0].students()
        assert a[1].students() == b[1].students()

    def test_empty_dataset(self):
        with pytest.raises(ValueError, match="empty dataset"):
            split_dataset(Dataset(SCHEMA, []), 0.8, seed=0)

    @given(n=st.integers(2, 30), frac=st.floats(0.1, 0.9), seed=st.integers(0, 10_000))
    @settings(max_examples=40, deadline=None)
    def test_partition_property(self, n, frac, seed):
        d = make_dataset(n_students=n, decisions=2, seed=1)
        train, test = split_dataset(d, frac, seed)
        assert sorted(train.students() + test.students()) == sorted(d.students())
        assert not set(train.students()) & set(test.students())
        assert len(train) + len(test) == len(d)


class TestSerialization:
    def test_round_trip(self, tmp_path):
        d = make_dataset(n_students=3)
        path = tmp_path / "ds.jsonl"
        store_dataset(d, path)
        loaded = load_dataset(path)
        assert loaded.schema_id == d.schema_id
        assert len(loaded) == len(d)
        for a, b in zip(d.transitions, loaded.transitions):
            assert a.student_id == b.student_id
            assert a.problem_index == b.problem_index
            assert a.action is b.action
            assert a.reward == b.reward
            assert a.terminal == b.terminal
            np.testing.assert_array_equal(a.state.features, b.state.features)
            if a.next_state is None:
                assert b.next_state is None
            else:
                np.testing.assert_array_equal(a.next_state.features,
                                              b.next_state.features)

    def test_malformed_action_code(self, tmp_path):
        d = make_dataset(n_students=1, decisions=1)
        path = tmp_path / "ds.jsonl"
        store_dataset(d, path)
        lines = path.read_text().splitlines()
        lines[1] = lines[1].replace('"a": ' + str(d.transitions[0].action.value), '"a": 5')
        path.write_text("\n".join(lines) + "\n")
        with pytest.raises(DatasetFormatError, match=r"line 2.*'a'"):
            load_dataset(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        with pytest.raises(DatasetFormatError, match="no records"):
            load_dataset(path)

    def test_header_only(self, tmp_path):
        d = make_dataset(n_students=1, decisions=1)
        path = tmp_path / "ds.jsonl"
        store_dataset(d, path)
        path.write_text(path.read_text().splitlines()[0] + "\n")
        with pytest.raises(DatasetFormatError, match="no records"):
            load_dataset(path)


def test_canonical_order_enforced():
    t1 = make_transition(p=3, terminal=False,
                         next_state=StudentState(np.zeros(152), SCHEMA.schema_id))
    t2 = make_transition(p=1)
    with pytest.raises(ValueError, match="order"):
        Dataset(SCHEMA, [t1, t2])
