"""Configuration-driven command line wiring the pipeline stages together:
generate a synthetic cohort dataset, train the intervention policy, deploy
it against a fresh cohort, and report metrics and mined rules.

All randomness flows from the single config seed through named sub-seeds,
so each stage reruns byte-identically.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import domain, learner, metrics_stats, policy_engine, rule_miner, session_io, tutor_sim
from .domain import Action, MetacognitiveGroup

DEFAULT_CONFIG = {
    "seed": 7,
    "dataset": {
        "n_students": 867,
        "mix": [0.34, 0.33, 0.33],
        "path": "dataset.jsonl",
    },
    "profiles": {},
    "hyperparams": {
        "learning_rate": 1e-3,
        "gamma": 0.9,
        "batch_size": 32,
        "sync_every": 4,
        "max_epochs": 800,
        "reward_scale": 0.01,
        "patience": 200,
        "tol": 1e-6,
    },
    "train": {
        "train_fraction": 0.8,
        "model_path": "model.json",
        "curve_path": "loss_curve.csv",
    },
    "simulate": {
        "n_experimental": 46,
        "n_control": 44,
        "mix": [0.34, 0.33, 0.33],
        "sessions_path": "sessions.jsonl",
        "decisions_path": "decisions.csv",
    },
    "report": {
        "summary_csv": "summary.csv",
        "distribution_csv": "distribution.csv",
    },
    "mine": {
        "rules_csv": "rules.csv",
    },
}

# fixed offsets keep stage seeds independent of each other
_STAGE_SEEDS = {"dataset": 1, "train": 2, "simulate": 3}


def stage_seed(config, stage: str) -> int:
    return int(config["seed"]) * 1000 + _STAGE_SEEDS[stage]


def load_config(path, seed_override=None) -> dict:
    config = copy.deepcopy(DEFAULT_CONFIG)
    with open(path, "r", encoding="utf-8") as fh:
        user = json.load(fh)
    for key, value in user.items():
        if isinstance(value, dict) and isinstance(config.get(key), dict):
            config[key].update(value)
        else:
            config[key] = value
    if seed_override is not None:
        config["seed"] = seed_override
    if "seed" not in config:
        raise ValueError("config must set a seed")
    return config


def _resolve(out_dir, path) -> Path:
    p = Path(path)
    return p if p.is_absolute() else Path(out_dir) / p


def _profile_overrides(config) -> dict:
    return {k.lower(): v for k, v in config.get("profiles", {}).items()}


def cmd_generate(config, out_dir) -> Path:
    ds_cfg = config["dataset"]
    dataset = tutor_sim.generate_synthetic_dataset(
        mix=ds_cfg["mix"],
        n_students=ds_cfg["n_students"],
        seed=stage_seed(config, "dataset"),
        profile_overrides=_profile_overrides(config),
    )
    path = _resolve(out_dir, ds_cfg["path"])
    path.parent.mkdir(parents=True, exist_ok=True)
    domain.store_dataset(dataset, path)
    print(f"wrote {path}: {len(dataset.students())} students, {len(dataset)} transitions")
    return path


def cmd_train(config, out_dir) -> Path:
    ds_path = _resolve(out_dir, config["dataset"]["path"])
    if not ds_path.exists():
        raise ValueError(f"dataset file not found: {ds_path}")
    dataset = domain.load_dataset(ds_path)
    tr_cfg = config["train"]
    seed = stage_seed(config, "train")
    train_set, test_set = domain.split_dataset(dataset, tr_cfg["train_fraction"], seed)
    hp = learner.Hyperparams(seed=seed, **config["hyperparams"])
    model = learner.train(train_set, test_set, hp)
    model_path = _resolve(out_dir, tr_cfg["model_path"])
    model_path.parent.mkdir(parents=True, exist_ok=True)
    learner.save_model(model, model_path)
    curve_path = _resolve(out_dir, tr_cfg["curve_path"])
    with open(curve_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["epoch", "train_loss", "test_mse"])
        for i, (tl, tm) in enumerate(zip(model.train_loss_curve, model.test_mse_curve)):
            w.writerow([i, repr(tl), repr(tm)])
    print(f"wrote {model_path}: {len(model.train_loss_curve)} epochs, "
          f"test MSE {model.test_mse:.6g}")
    return model_path


def _simulate_cohort(config, model, n_students, mix, seed, sid_prefix, policy):
    schema = tutor_sim.default_feature_schema()
    groups = tutor_sim.assign_groups(mix, n_students)
    seeds = np.random.SeedSequence(seed).spawn(n_students)
    overrides = _profile_overrides(config)
    logs = []
    for i, group in enumerate(groups):
        profile = tutor_sim.default_profile(group, **overrides.get(group.name.lower(), {}))
        logs.append(tutor_sim.run_curriculum(
            profile, policy, seeds[i], schema=schema,
            student_id=f"{sid_prefix}{i:03d}"))
    return logs


def cmd_simulate(config, out_dir):
    model_path = _resolve(out_dir, config["train"]["model_path"])
    if not model_path.exists():
        raise ValueError(f"model file not found: {model_path}")
    model = learner.load_model(model_path)
    if model.schema_id != tutor_sim.DEFAULT_SCHEMA_ID:
        raise ValueError(f"model schema {model.schema_id!r} does not match the simulator")
    sim_cfg = config["simulate"]
    seed = stage_seed(config, "simulate")

    greedy = lambda state: policy_engine.decide(model, state)[0]
    exp_logs = _simulate_cohort(config, model, sim_cfg["n_experimental"],
                                sim_cfg["mix"], seed, "drl", greedy)
    ctrl_logs = _simulate_cohort(config, model, sim_cfg["n_control"],
                                 sim_cfg["mix"], seed + 1, "ctrl",
                                 tutor_sim.constant_policy(Action.NO_INTERVENTION))

    records = []
    for log in exp_logs:
        for d in log.decisions:
            action, q = policy_engine.decide(model, d.state)
            records.append(policy_engine.DecisionRecord(
                student_id=log.student_id,
                level=tutor_sim.DEFAULT_CURRICULUM.level_of_slot(d.slot),
                problem_index=d.slot, state=d.state, action=action,
                q_values=q, group=log.profile.group))

    sessions_path = _resolve(out_dir, sim_cfg["sessions_path"])
    sessions_path.parent.mkdir(parents=True, exist_ok=True)
    conditions = {log.student_id: "DRL" for log in exp_logs}
    conditions.update({log.student_id: "Ctrl" for log in ctrl_logs})
    session_io.save_session_logs(exp_logs + ctrl_logs, sessions_path, conditions)
    decisions_path = _resolve(out_dir, sim_cfg["decisions_path"])
    policy_engine.write_decision_csv(records, decisions_path)
    print(f"wrote {sessions_path}: {len(exp_logs) + len(ctrl_logs)} sessions")
    print(f"wrote {decisions_path}: {len(records)} decision records")
    return sessions_path, decisions_path


def _score_records(logs, conditions):
    records = []
    for log in logs:
        iso = log.post_scores[:tutor_sim.DEFAULT_CURRICULUM.isomorphic_posttest_count]
        records.append(metrics_stats.ScoreRecord(
            student_id=log.student_id,
            group=conditions.get(log.student_id) or log.profile.group.short,
            pre=float(np.mean(log.pre_scores)) / 100.0,
            post=float(np.mean(log.post_scores)) / 100.0,
            iso_post=float(np.mean(iso)) / 100.0,
        ))
    return records


def cmd_report(config, out_dir):
    sessions_path = _resolve(out_dir, config["simulate"]["sessions_path"])
    if not sessions_path.exists():
        raise ValueError(f"sessions file not found: {sessions_path}")
    logs, conditions = session_io.load_session_logs(sessions_path)
    if not logs:
        raise ValueError("empty logs")

    records = _score_records(logs, conditions)
    table = metrics_stats.summary_table(records)
    print(metrics_stats.render_summary(table))
    metrics_stats.write_summary_csv(table, _resolve(out_dir, config["report"]["summary_csv"]))

    drl_logs = [log for log in logs if conditions.get(log.student_id) == "DRL"]
    decisions = [
        policy_engine.DecisionRecord(
            student_id=log.student_id,
            level=tutor_sim.DEFAULT_CURRICULUM.level_of_slot(d.slot),
            problem_index=d.slot, state=d.state, action=d.action,
            q_values=(0.0, 0.0, 0.0), group=log.profile.group)
        for log in drl_logs for d in log.decisions
    ]
    if decisions:
        dist = policy_engine.decision_distribution(decisions, "by-level")
        print("\ndecision distribution by level:")
        header = ["action"] + [f"L{c}" for c in dist.columns]
        print("  " + "  ".join(h.rjust(6) for h in header))
        rows = list(dist.as_rows())
        for row in rows:
            print("  " + "  ".join(str(v).rjust(6) for v in row))
        with open(_resolve(out_dir, config["report"]["distribution_csv"]),
                  "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)

        by_group = policy_engine.decision_distribution(decisions, "by-group")
        if len(by_group.columns) >= 2:
            try:
                stat, df = metrics_stats.chi_square(by_group.counts.T)
                print(f"\nchi-square (decision x group): {stat:.4g}, df={df}, "
                      f"N={by_group.total}")
            except ValueError as exc:
                print(f"\nchi-square skipped: {exc}")

    nlg_groups = {}
    for r in records:
        nlg_groups.setdefault(r.group, []).append(metrics_stats.nlg(r.pre, r.post))
    if len(nlg_groups) >= 2 and all(len(v) >= 2 for v in nlg_groups.values()):
        f, dfb, dfw = metrics_stats.one_way_anova(list(nlg_groups.values()))
        print(f"one-way ANOVA on NLG by group: F={f:.4g}, df=({dfb}, {dfw})")
    else:
        print("one-way ANOVA skipped: fewer than two groups with two students")


def cmd_mine(config, out_dir, k=None, total_override=None):
    sessions_path = _resolve(out_dir, config["simulate"]["sessions_path"])
    if not sessions_path.exists():
        raise ValueError(f"sessions file not found: {sessions_path}")
    logs, conditions = session_io.load_session_logs(sessions_path)
    drl_logs = [log for log in logs
                if conditions.get(log.student_id) in ("DRL", "")] or logs
    transactions = []
    for log in drl_logs:
        transactions.extend(rule_miner.build_transactions(log))
    if not transactions:
        raise ValueError("no transactions (need sessions with >= 2 decisions)")
    rules = rule_miner.mine_rules(transactions, total_override)
    top = rule_miner.top_k(rules, k if k is not None else 6)
    print(f"{'Rank':<5} {'Rule':<28} {'Supp (%)':>9} {'Conf (%)':>9}")
    for i, r in enumerate(top, 1):
        conf = "undef" if r.confidence is None else f"{100 * r.confidence:.1f}"
        print(f"{i:<5} {r.label():<28} {100 * r.support:>9.1f} {conf:>9}")
    rule_miner.write_rule_csv(rules, _resolve(out_dir, config["mine"]["rules_csv"]))
    return rules


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="metatutor",
        description="Simulated tutor cohorts, offline intervention policies, and analysis.")
    parser.add_argument("command",
                        choices=["generate", "train", "simulate", "report", "mine",
                                 "print-default-config"])
    parser.add_argument("--config", help="experiment config JSON")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--k", type=int, help="number of rules to print (mine)")
    parser.add_argument("--total", type=int, help="support denominator override (mine)")
    args = parser.parse_args(argv)

    if args.command == "print-default-config":
        print(json.dumps(DEFAULT_CONFIG, indent=2))
        return 0
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return 2
    try:
        config = load_config(args.config, args.seed)
        Path(args.out).mkdir(parents=True, exist_ok=True)
        if args.command == "generate":
            cmd_generate(config, args.out)
        elif args.command == "train":
            cmd_train(config, args.out)
        elif args.command == "simulate":
            cmd_simulate(config, args.out)
        elif args.command == "report":
            cmd_report(config, args.out)
        elif args.command == "mine":
            cmd_mine(config, args.out, args.k, args.total)
    except (ValueError, OSError, domain.DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
