import argparse
import asyncio
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from phimdp.agent import AgentConfig, LearningCurve, run_learning_curve
from phimdp.config import (
    CHECKPOINTS, COST_ALPHA, COST_BETA, EVAL_ACTIONS, EVAL_WORKERS, NUM_EVAL_RUNS, OUTPUT_DIR, log,
)
from phimdp.context_tree import count_aocts, is_markov, parse_tree, serialize_tree, suffix_label
from phimdp.cost import collect_stats, cost, row_contributions
from phimdp.environments import (
    ENVIRONMENTS, KNOWN_GAPS, TREE_STATE_BAND, check_targets, oracle_value, reference_tree,
)
from phimdp.search import implied_swap_rates
from phimdp.utils.csv_io import (
    curve_to_csv, history_to_csv, load_history, manifest_text, qtable_to_csv, rows_to_csv, write_outputs,
)

# GSΦA 실험 CLI
# run: 학습 + 체크포인트 평가 + 결과 파일 저장
# count-trees: K(d) 출력
# inspect-tree: 저장된 트리 요약 (히스토리를 주면 비용까지)

TRACE_FIELDS = ["iter", "replica", "temp", "cost", "best_cost", "accepted", "move_type", "num_states"]
COST_ROW_FIELDS = ["kind", "state", "action", "next_state", "count", "data_bits", "param_bits"]


# =========================
# Config
# =========================
@dataclass
class ExperimentConfig:
    env_name: str
    agent: AgentConfig = field(default_factory=AgentConfig)
    output_dir: Optional[str] = None
    checkpoints: Tuple[int, ...] = CHECKPOINTS
    num_eval_runs: int = NUM_EVAL_RUNS
    eval_actions: int = EVAL_ACTIONS
    eval_workers: int = EVAL_WORKERS
    dump_cost: bool = False

    def validate(self) -> "ExperimentConfig":
        if self.env_name not in ENVIRONMENTS:
            raise ValueError(f"unknown environment '{self.env_name}' (choose from {', '.join(ENVIRONMENTS)})")
        if any(c <= 0 for c in self.checkpoints):
            raise ValueError(f"checkpoints must be positive: {self.checkpoints}")
        if self.num_eval_runs <= 0 or self.eval_actions <= 0:
            raise ValueError("num_eval_runs and eval_actions must be positive")
        self.agent.validate()
        return self

    @property
    def directory(self) -> Path:
        if self.output_dir:
            return Path(self.output_dir)
        return Path(OUTPUT_DIR) / f"{self.env_name}_seed{self.agent.seed}"


def _parse_checkpoints(text: str) -> Tuple[int, ...]:
    try:
        return tuple(sorted({int(v) for v in text.split(",") if v.strip()}))
    except ValueError:
        raise argparse.ArgumentTypeError(f"checkpoints must be comma-separated integers, got '{text}'")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="phimdp", description="GSΦA feature-RL experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    defaults = AgentConfig()
    run = sub.add_parser("run", help="학습 후 체크포인트마다 평가하고 결과 저장")
    run.add_argument("--env", required=True, help=f"one of: {', '.join(ENVIRONMENTS)}")
    run.add_argument("--seed", type=int, default=defaults.seed)
    run.add_argument("--alpha", type=float, default=defaults.alpha)
    run.add_argument("--beta", type=float, default=defaults.beta)
    run.add_argument("--replicas", type=int, default=defaults.num_replicas)
    run.add_argument("--pt-iters", type=int, default=defaults.stochastic_iterations)
    run.add_argument("--alpha0", type=float, default=defaults.swap_alpha0)
    run.add_argument("--gamma", type=float, default=defaults.gamma)
    run.add_argument("--eta", type=float, default=defaults.eta)
    run.add_argument("--initial-samples", type=int, default=defaults.initial_sample_number)
    run.add_argument("--additional-samples", type=int, default=defaults.additional_sample_number)
    run.add_argument("--loops", type=int, default=defaults.agent_learning_loops)
    run.add_argument("--max-depth", type=int, default=defaults.max_depth)
    run.add_argument("--checkpoints", type=_parse_checkpoints, default=CHECKPOINTS)
    run.add_argument("--eval-runs", type=int, default=NUM_EVAL_RUNS)
    run.add_argument("--eval-actions", type=int, default=EVAL_ACTIONS)
    run.add_argument("--workers", type=int, default=EVAL_WORKERS)
    run.add_argument("--output-dir", default=None)
    run.add_argument("--trace", action="store_true", help="PT trace.csv 저장")
    run.add_argument("--dump-cost", action="store_true", help="행별 code length cost_rows.csv 저장")

    count = sub.add_parser("count-trees", help="깊이 d 이하 AOCT 개수 K(d)")
    count.add_argument("--depth", type=int, required=True)
    count.add_argument("--actions", type=int, default=2)
    count.add_argument("--observations", type=int, default=2)

    inspect = sub.add_parser("inspect-tree", help="저장된 tree.txt 요약")
    inspect.add_argument("path")
    inspect.add_argument("--history", default=None, help="history.csv 위에서 트리 비용 계산")
    inspect.add_argument("--alpha", type=float, default=COST_ALPHA)
    inspect.add_argument("--beta", type=float, default=COST_BETA)
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    agent = AgentConfig(
        initial_sample_number=args.initial_samples,
        agent_learning_loops=args.loops,
        additional_sample_number=args.additional_samples,
        stochastic_iterations=args.pt_iters,
        num_replicas=args.replicas,
        swap_alpha0=args.alpha0,
        alpha=args.alpha,
        beta=args.beta,
        gamma=args.gamma,
        eta=args.eta,
        max_depth=args.max_depth,
        seed=args.seed,
        record_trace=args.trace,
    )
    return ExperimentConfig(
        env_name=args.env,
        agent=agent,
        output_dir=args.output_dir,
        checkpoints=args.checkpoints,
        num_eval_runs=args.eval_runs,
        eval_actions=args.eval_actions,
        eval_workers=args.workers,
        dump_cost=args.dump_cost,
    ).validate()


# =========================
# Commands
# =========================
def build_manifest(config: ExperimentConfig, curve: LearningCurve) -> Dict[str, object]:
    result = curve.result
    entries: Dict[str, object] = {"env": config.env_name}
    entries.update({k: v for k, v in asdict(config.agent).items()})
    entries["checkpoints"] = ",".join(str(c) for c in config.checkpoints)
    entries["num_eval_runs"] = config.num_eval_runs
    entries["eval_actions"] = config.eval_actions
    entries["history_length"] = result.history.length
    entries["tree_states"] = result.tree.num_states
    entries["tree_depth"] = result.tree.depth
    if result.search_results:
        search = result.search_results[-1]
        entries["best_cost_bits"] = f"{search.cost:.6f}"
        entries["pt_iterations_run"] = search.iterations
        entries["pt_acceptances"] = f"{search.acceptances}/{search.proposals}"
        entries["pt_swaps"] = f"{search.swaps_accepted}/{search.swaps_tried}"
        entries["temperatures"] = ";".join(f"{t:.6f}" for t in search.temperatures)
        delta_h = config.agent.beta * math.log2(max(result.history.length, 2))
        entries["implied_swap_rates"] = ";".join(f"{p:.4f}" for p in implied_swap_rates(search.temperatures, delta_h))
    entries["avi_converged"] = result.qtable.converged
    entries["avi_sweeps"] = result.qtable.sweeps
    entries["oracle_reward_per_action"] = f"{oracle_value(config.env_name):.6f}"
    for checkpoint, mean in curve.means().items():
        entries[f"mean_reward@{checkpoint}"] = f"{mean:.6f}"
    entries.update(review_run(config, curve))
    entries["warnings"] = " | ".join(result.warnings) if result.warnings else "none"
    return entries


def review_run(config: ExperimentConfig, curve: LearningCurve) -> Dict[str, object]:
    """목표 보상, 트리 크기 범위, 기준 트리 비용을 확인하고 놓친 것은 경고로 남긴다"""
    result = curve.result
    entries: Dict[str, object] = {}

    def missed(message: str):
        result.warnings.append(message)
        log("review_run", f"warning: {message}", always=True)

    for i, (target, mean, met) in enumerate(check_targets(config.env_name, curve.means())):
        if met is None:
            entries[f"target_{i}"] = f"{target.describe()}: not evaluated"
            continue
        entries[f"target_{i}"] = f"{target.describe()}: {'met' if met else 'missed'} ({mean:.6f})"
        if not met:
            missed(f"target {target.describe()} missed with {mean:.6f}")

    low, high = TREE_STATE_BAND
    in_band = low <= result.tree.num_states <= high
    entries["tree_states_band"] = f"{low}-{high}: {'inside' if in_band else 'outside'}"
    if not in_band:
        missed(f"{result.tree.num_states} states is outside {low}-{high}")

    search_history = result.agent.search_history
    reference = reference_tree(config.env_name, config.agent.max_depth)
    if reference is not None and search_history is not None and result.search_results:
        learned_cost = result.search_results[-1].cost
        reference_cost = cost(reference, search_history, config.agent.alpha, config.agent.beta)
        entries["reference_tree_states"] = reference.num_states
        entries["reference_cost_bits"] = f"{reference_cost:.6f}"
        if reference_cost < learned_cost:
            missed(f"search kept a tree costing {learned_cost:.3f} bits, "
                   f"the reference tree costs {reference_cost:.3f}")
        else:
            log("review_run", f"reference tree {reference_cost:.3f} bits >= learned {learned_cost:.3f}")

    if config.env_name in KNOWN_GAPS:
        entries["known_gap"] = KNOWN_GAPS[config.env_name]
    return entries


def cmd_run(config: ExperimentConfig) -> List[Path]:
    log("cmd_run", f"{config.env_name}: seed={config.agent.seed}, checkpoints={list(config.checkpoints)}",
        always=True)
    curve = run_learning_curve(config.env_name, config.agent, config.checkpoints, config.num_eval_runs,
                               config.eval_actions, config.eval_workers)
    result = curve.result

    files = {
        "curve.csv": curve_to_csv(curve.points),
        "tree.txt": serialize_tree(result.tree),
        "manifest.txt": manifest_text(build_manifest(config, curve)),
        "qtable.csv": qtable_to_csv(result.qtable),
        "history.csv": history_to_csv(result.history),
    }
    if config.agent.record_trace:
        rows = [row for search in result.search_results for row in search.trace]
        files["trace.csv"] = rows_to_csv(rows, TRACE_FIELDS)
    if config.dump_cost:
        stats = collect_stats(result.tree, result.history)
        files["cost_rows.csv"] = rows_to_csv(row_contributions(stats), COST_ROW_FIELDS)
    return asyncio.run(write_outputs(config.directory, files))


def cmd_count_trees(depth: int, num_actions: int, num_observations: int) -> int:
    count = count_aocts(depth, num_actions, num_observations)
    print(count)
    return count


def cmd_inspect_tree(path: str, history_path: Optional[str] = None, alpha: float = COST_ALPHA,
                     beta: float = COST_BETA) -> str:
    tree = parse_tree(Path(path).read_text(encoding="utf-8"))
    markov, violations = is_markov(tree)
    noun = "state" if tree.num_states == 1 else "states"
    lines = [
        f"{tree.num_states} {noun}, depth {tree.depth}, Markov: {'yes' if markov else 'no'}",
    ]
    if not markov:
        lines.append(f"ambiguous transitions: {len(violations)}")
    if history_path:
        history = load_history(history_path, tree.alphabets)
        bits = cost(tree, history, alpha, beta)
        lines.append(f"cost on {history.length} steps: {bits:.6f} bits (alpha={alpha}, beta={beta})")
    for state in tree.states():
        lines.append(f"  s{state.id}: {suffix_label(state.path, tree.alphabets) or '(empty)'}")
    report = "\n".join(lines)
    print(report)
    return report


# =========================
# Entry point
# =========================
def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            cmd_run(config_from_args(args))
        elif args.command == "count-trees":
            cmd_count_trees(args.depth, args.actions, args.observations)
        elif args.command == "inspect-tree":
            cmd_inspect_tree(args.path, args.history, args.alpha, args.beta)
    except ValueError as e:
        print(f"[main] {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"[main] Error: {e}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
