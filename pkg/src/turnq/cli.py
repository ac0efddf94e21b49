"""Command-line entry points: train, solve, verify, export-csv.

One command is one process.  Every knob comes from the JSON config or a
flag, never from the environment, so identical config plus seed gives
byte-identical outputs.

Exit codes:
    0  success (train: converged; verify: all checks passed)
    1  unexpected error
    2  invalid config
    3  training finished without converging (outputs still written)
    4  game exceeds the oracle state budget
    5  one or more verification checks failed
    6  q-table file corrupt or wrong format
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import PlayerId
from .evalharness import evaluate_against_set, probe_exploitability, write_eval_csv
from .explore import (
    ExitConfig,
    ProtectSets,
    build_slots,
    train,
    visited_from_qtable,
    visited_invariance_check,
    write_train_csv,
)
from .games import heuristic_names, make_game
from .oracle import BudgetExceededError, enumerate_reachable, solve_exact
from .qlearn import ExploitPolicy, LearningRateSchedule, QTable, QTableFormatError

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NONCONVERGED = 3
EXIT_BUDGET = 4
EXIT_CHECK_FAILED = 5
EXIT_FORMAT = 6

DEFAULT_TEMPERATURES = [0.0, 0.5, 2.0, 8.0]
DEFAULT_ORACLE_BUDGET = 1_000_000

TOP_KEYS = {
    "game",
    "protect",
    "exit",
    "schedule",
    "temperatures",
    "seed",
    "output_dir",
    "oracle_budget",
    "eval_games",
}


class ConfigError(ValueError):
    pass


def _reject_unknown(section: dict, allowed: set[str], where: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")


def load_config(path: str) -> dict:
    try:
        raw = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be an object")
    _reject_unknown(cfg, TOP_KEYS, "config")
    if "game" not in cfg:
        raise ConfigError("config is missing the game section")
    return cfg


def build_run(cfg: dict):
    """Validate a config and construct everything a run needs."""
    try:
        game = make_game(cfg["game"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    seed = cfg.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")

    protect_cfg = cfg.get("protect", {})
    if not isinstance(protect_cfg, dict):
        raise ConfigError("protect section must be an object")
    _reject_unknown(protect_cfg, {"p1", "p2"}, "protect")
    known = heuristic_names(game)
    for side in ("p1", "p2"):
        for name in protect_cfg.get(side, []):
            if name not in known:
                raise ConfigError(
                    f"protect.{side}: {name!r} is not a heuristic of {game.name!r} "
                    f"(known: {', '.join(known)})"
                )
    protect = ProtectSets.from_heuristics(
        game, list(protect_cfg.get("p1", [])), list(protect_cfg.get("p2", [])), seed=seed
    )

    exit_cfg_raw = cfg.get("exit", {})
    if not isinstance(exit_cfg_raw, dict):
        raise ConfigError("exit section must be an object")
    _reject_unknown(
        exit_cfg_raw,
        {"window", "q_tolerance", "temper_off_episode", "max_episodes", "closure_budget"},
        "exit",
    )
    try:
        exit_cfg = ExitConfig(
            window=exit_cfg_raw.get("window"),
            q_tolerance=float(exit_cfg_raw.get("q_tolerance", 0.0)),
            temper_off_episode=exit_cfg_raw.get("temper_off_episode"),
            max_episodes=int(exit_cfg_raw.get("max_episodes", 100_000)),
            closure_budget=int(exit_cfg_raw.get("closure_budget", 2_000_000)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"exit section: {exc}") from exc

    sched_raw = cfg.get("schedule", {"mode": "constant", "alpha": 1.0})
    if not isinstance(sched_raw, dict):
        raise ConfigError("schedule section must be an object")
    _reject_unknown(sched_raw, {"mode", "alpha", "c"}, "schedule")
    try:
        schedule = LearningRateSchedule(
            mode=sched_raw.get("mode", "constant"),
            alpha=float(sched_raw.get("alpha", 1.0)),
            c=float(sched_raw.get("c", 10.0)),
        )
    except ValueError as exc:
        raise ConfigError(f"schedule section: {exc}") from exc

    temperatures = cfg.get("temperatures", DEFAULT_TEMPERATURES)
    if not isinstance(temperatures, list) or not all(
        isinstance(t, (int, float)) and t >= 0 for t in temperatures
    ):
        raise ConfigError("temperatures must be a list of reals >= 0")

    window = exit_cfg.window
    if window is not None and window < len(build_slots(protect, [float(t) for t in temperatures])):
        raise ConfigError("exit.window is smaller than the schedule slot count")

    budget = cfg.get("oracle_budget", DEFAULT_ORACLE_BUDGET)
    if not isinstance(budget, int) or budget < 1:
        raise ConfigError("oracle_budget must be a positive integer")

    return game, protect, exit_cfg, schedule, [float(t) for t in temperatures], seed, budget


def _protect_opponents(game, q, protect, perspective: PlayerId):
    """Opponents for one perspective: the protect set plus the greedy policy.

    The greedy policy belongs to the restricted opponent set by
    construction, and it is the matchup where the security bound is tight.
    """
    opponents = list(protect.p2 if perspective is PlayerId.P1 else protect.p1)
    return opponents + [ExploitPolicy(game, q)]


def cmd_train(args) -> int:
    try:
        cfg = load_config(args.config)
        game, protect, exit_cfg, schedule, temperatures, seed, budget = build_run(cfg)
        out_dir = args.output_dir or cfg.get("output_dir")
        if not out_dir:
            raise ConfigError("output_dir missing (set it in the config or pass --output-dir)")
        eval_games = cfg.get("eval_games", 1)
        if not isinstance(eval_games, int) or eval_games < 1:
            raise ConfigError("eval_games must be a positive integer")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    result = train(game, protect, exit_cfg, schedule, temperatures, seed)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_train_csv(result.report, out / "train.csv")
    result.q.save(out / "qtable.bin")
    reports = [
        evaluate_against_set(
            game,
            result.q,
            perspective,
            _protect_opponents(game, result.q, protect, perspective),
            games_per_opponent=eval_games,
            seed=seed,
            converged=result.report.converged,
        )
        for perspective in (PlayerId.P1, PlayerId.P2)
    ]
    write_eval_csv(reports, out / "eval.csv")
    print(
        f"{game.name}: episodes={result.report.episodes} "
        f"updates={result.report.updates} visited_states={len(result.visited.states)} "
        f"converged={result.report.converged} ({result.report.reason})"
    )
    print(f"outputs in {out}: train.csv eval.csv qtable.bin")
    if not result.report.converged:
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        cfg = load_config(args.config)
        game, _, _, _, _, _, budget = build_run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        solution = solve_exact(game, budget=budget)
    except BudgetExceededError as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    root = game.initial_state()
    print(f"game: {game.name}")
    print(f"reachable states: {solution.reachable_count}")
    print(f"root value (mover perspective): {solution.v_star[root]!r}")
    if args.export:
        solution.q_star.save(args.export)
        print(f"solution table written to {args.export}")
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        cfg = load_config(args.config)
        game, protect, _, _, _, seed, budget = build_run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        q = QTable.load(args.qtable)
    except QTableFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"cannot read {args.qtable}: {exc}", file=sys.stderr)
        return EXIT_ERROR

    all_ok = True

    def check(label: str, ok: bool, detail: str = "") -> None:
        nonlocal all_ok
        all_ok &= ok
        suffix = f"  ({detail})" if detail else ""
        print(f"[{'PASS' if ok else 'FAIL'}] {label}{suffix}")

    bad_key = next((s for s, _ in q.entries if not game.is_valid_key(s)), None)
    check(
        "table keys belong to this game",
        bad_key is None,
        "" if bad_key is None else f"key mismatch: {bad_key.hex()}",
    )
    if bad_key is not None:
        return EXIT_CHECK_FAILED

    visited = visited_from_qtable(game, q)
    ok, violation = visited_invariance_check(q, visited, protect, game)
    check(
        "visited set invariant under scheduled policy pairs",
        ok,
        "" if ok else f"state {violation[0].hex()} escapes via {violation[1]}",
    )

    for perspective in (PlayerId.P1, PlayerId.P2):
        report = evaluate_against_set(
            game,
            q,
            perspective,
            _protect_opponents(game, q, protect, perspective),
            seed=seed,
            budget=budget,
        )
        floor_ok = all(r.min >= report.root_q for r in report.rows)
        tight = any(r.min == report.root_q for r in report.rows)
        check(
            f"{perspective.name}: payoff >= root_q for every opponent",
            floor_ok,
            f"root_q={report.root_q!r} min={report.min_payoff!r}",
        )
        check(f"{perspective.name}: security bound attained by some opponent", tight)
        try:
            security = probe_exploitability(game, q, perspective, budget=budget)
            gap = report.root_q - security
            check(
                f"{perspective.name}: exploitability gap >= 0",
                gap >= 0,
                f"gap={gap!r}",
            )
        except BudgetExceededError:
            print(f"[SKIP] {perspective.name}: exploitability probe (over state budget)")
    return EXIT_OK if all_ok else EXIT_CHECK_FAILED


def cmd_export_csv(args) -> int:
    try:
        q = QTable.load(args.qtable)
    except QTableFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"cannot read {args.qtable}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    with open(args.out, "w", newline="") as fh:
        fh.write("state_hex,action,value,visits\n")
        for (s, a), v in q.entries.items():
            fh.write(f"{s.hex()},{a},{v!r},{q.visits.get((s, a), 0)}\n")
    print(f"{len(q.entries)} entries written to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="turnq",
        description="Tabular Q-learning solver toolkit for zero-sum turn games",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a Q-table per the config")
    p_train.add_argument("config", help="path to the JSON run config")
    p_train.add_argument("--output-dir", help="override the config's output_dir")
    p_train.set_defaults(func=cmd_train)

    p_solve = sub.add_parser("solve", help="solve the configured game exactly")
    p_solve.add_argument("config")
    p_solve.add_argument("--export", help="also write the exact table here")
    p_solve.set_defaults(func=cmd_solve)

    p_verify = sub.add_parser("verify", help="verify a trained table's guarantees")
    p_verify.add_argument("config")
    p_verify.add_argument("qtable", help="path to qtable.bin")
    p_verify.set_defaults(func=cmd_verify)

    p_export = sub.add_parser("export-csv", help="dump a q-table to CSV")
    p_export.add_argument("qtable")
    p_export.add_argument("out")
    p_export.set_defaults(func=cmd_export_csv)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
