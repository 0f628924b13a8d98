import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from phimdp.config import (
    COST_ALPHA, COST_BETA, DEFAULT_SEED, MAX_DEPTH, PT_ITERATIONS, PT_REPLICAS, PT_SWAP_ALPHA0, log,
)
from phimdp.context_tree import (
    Aoct, ContextIndex, Path, _descend, has_split_permit, markov_merge, markov_split,
    merge_permits, refresh_labels, root_tree, split_permits,
)
from phimdp.cost import cost
from phimdp.history import History

# Parallel tempering (PT) + Markov AOCT 제안 분포
# π_T ∝ exp(-cost·ln2 / T): cost는 bits, T_i = β·i·log2(n) 과 같은 밑을 쓴다

__all__ = [
    "PtConfig", "Replica", "Proposal", "StepResult", "SearchResult",
    "temperature_ladder", "implied_swap_rates", "propose", "mh_step", "swap_step",
    "share_split", "parallel_tempering",
]

LN2 = math.log(2.0)


@dataclass
class PtConfig:
    num_replicas: int = PT_REPLICAS
    iterations: int = PT_ITERATIONS
    swap_alpha0: float = PT_SWAP_ALPHA0
    temperatures: Optional[Tuple[float, ...]] = None  # None 이면 T_i = β·i·log2(n) 사다리를 탐색 시점에 계산
    alpha: float = COST_ALPHA
    beta: float = COST_BETA
    seed: int = DEFAULT_SEED
    max_depth: int = MAX_DEPTH

    def validate(self) -> "PtConfig":
        if self.num_replicas < 1:
            raise ValueError(f"num_replicas must be >= 1, got {self.num_replicas}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if not 0.0 <= self.swap_alpha0 <= 1.0:
            raise ValueError(f"swap_alpha0 must lie in [0, 1], got {self.swap_alpha0}")
        if not 0.0 <= self.alpha <= 1.0 or self.beta <= 0:
            raise ValueError(f"cost parameters out of range: alpha={self.alpha}, beta={self.beta}")
        if self.temperatures is not None:
            temps = list(self.temperatures)
            if len(temps) != self.num_replicas:
                raise ValueError(f"{len(temps)} temperatures for {self.num_replicas} replicas")
            if temps[0] <= 0 or any(b <= a for a, b in zip(temps, temps[1:])):
                raise ValueError(f"temperatures must be positive and strictly increasing: {temps}")
        return self

    def ladder(self, n: int) -> Tuple[float, ...]:
        if self.temperatures is not None:
            return tuple(self.temperatures)
        return temperature_ladder(self.beta, self.num_replicas, n)


def temperature_ladder(beta: float, num_replicas: int, n: int) -> Tuple[float, ...]:
    # T_i = β × i × log(n), n은 탐색 시점의 히스토리 길이
    scale = beta * math.log2(max(n, 2))
    return tuple(scale * i for i in range(1, num_replicas + 1))


def implied_swap_rates(temperatures: Sequence[float], delta_h: float) -> List[float]:
    """(1/T_i - 1/T_{i+1})|ΔH| ≈ -log p_a 로부터 이웃 쌍마다 p_a"""
    return [math.exp(-(1.0 / a - 1.0 / b) * abs(delta_h) * LN2)
            for a, b in zip(temperatures, temperatures[1:])]


@dataclass
class Replica:
    tree: Aoct
    current_cost: float
    temperature: float
    rng: np.random.Generator
    proposed: int = 0
    accepted: int = 0


@dataclass
class Proposal:
    tree: Aoct
    correction_factor: float
    move: str
    node: Path


@dataclass
class StepResult:
    exhausted: bool
    accepted: bool = False
    move: str = ""
    node: Optional[Path] = None
    improved_split: Optional[Path] = None


@dataclass
class SearchResult:
    tree: Aoct
    cost: float
    iterations: int
    exhausted: bool
    temperatures: Tuple[float, ...]
    proposals: int = 0
    acceptances: int = 0
    swaps_tried: int = 0
    swaps_accepted: int = 0
    trace: List[dict] = field(default_factory=list)


def propose(replica: Replica, index: ContextIndex) -> Optional[Proposal]:
    tree = replica.tree
    n_split = split_permits(tree)
    n_merge = merge_permits(tree)
    if not n_split and not n_merge:
        return None  # 탐색 종료 신호

    if n_split and n_merge:
        do_split = replica.rng.random() < 0.5
    else:
        do_split = bool(n_split)

    if do_split:
        node = n_split[int(replica.rng.integers(len(n_split)))]
        candidate = markov_split(tree, node, index)
        factor = len(merge_permits(candidate)) / len(n_split)
        return Proposal(candidate, factor, "split", node)

    node = n_merge[int(replica.rng.integers(len(n_merge)))]
    candidate = markov_merge(tree, node, index)
    factor = len(split_permits(candidate)) / len(n_merge)
    return Proposal(candidate, factor, "merge", node)


def acceptance_probability(old_cost: float, new_cost: float, temperature: float, factor: float) -> float:
    if factor <= 0:
        return 0.0
    log_ratio = (old_cost - new_cost) * LN2 / temperature + math.log(factor)
    return 1.0 if log_ratio >= 0 else math.exp(log_ratio)


def mh_step(replica: Replica, index: ContextIndex, alpha: float, beta: float) -> StepResult:
    proposal = propose(replica, index)
    if proposal is None:
        return StepResult(exhausted=True)

    replica.proposed += 1
    new_cost = cost(proposal.tree, index, alpha, beta)
    r = acceptance_probability(replica.current_cost, new_cost, replica.temperature, proposal.correction_factor)
    u = replica.rng.random()
    if u > r:
        return StepResult(exhausted=False, accepted=False, move=proposal.move, node=proposal.node)

    improved = proposal.move == "split" and new_cost < replica.current_cost
    replica.tree = proposal.tree
    replica.current_cost = new_cost
    replica.accepted += 1
    if improved:
        # 비용을 줄인 분할 노드는 영구히 병합 불가
        replica.tree.nodes[proposal.node].mergeable = False
    return StepResult(exhausted=False, accepted=True, move=proposal.move, node=proposal.node,
                      improved_split=proposal.node if improved else None)


def swap_step(replicas: List[Replica], rng: np.random.Generator) -> bool:
    if len(replicas) < 2:
        return False
    a = int(rng.integers(len(replicas) - 1))
    b = a + 1
    low, high = replicas[a], replicas[b]
    log_ratio = (1.0 / low.temperature - 1.0 / high.temperature) * (low.current_cost - high.current_cost) * LN2
    v = rng.random()
    if log_ratio < 0 and v > math.exp(log_ratio):
        return False
    # 온도는 그대로, 설정(트리와 비용)만 교환
    low.tree, high.tree = high.tree, low.tree
    low.current_cost, high.current_cost = high.current_cost, low.current_cost
    return True


def _replicate_split(tree: Aoct, target: Path, index: ContextIndex) -> Optional[Aoct]:
    candidate = tree
    while True:
        node = _descend(candidate, target)
        if node == target and node in candidate.internal:
            return candidate
        if not has_split_permit(candidate, node):
            return None
        candidate = markov_split(candidate, node, index)


def share_split(replicas: List[Replica], source: int, split_path: Path, index: ContextIndex,
                alpha: float, beta: float) -> List[int]:
    """비용을 줄인 분할을 다른 온도의 트리들에 복제, 막힌 경우는 그대로 둔다"""
    changed = []
    for k, replica in enumerate(replicas):
        if k == source:
            continue
        if split_path in replica.tree.internal:
            replica.tree.nodes[split_path].mergeable = False
            continue
        candidate = _replicate_split(replica.tree, split_path, index)
        if candidate is None:
            continue
        candidate.nodes[split_path].mergeable = False
        replica.tree = candidate
        replica.current_cost = cost(candidate, index, alpha, beta)
        changed.append(k)
    return changed


def parallel_tempering(history: History, config: PtConfig, record_trace: bool = False) -> SearchResult:
    config.validate()
    index = ContextIndex(history, config.max_depth)
    temperatures = config.ladder(history.length)
    streams = np.random.SeedSequence(config.seed).spawn(config.num_replicas + 1)
    swap_rng = np.random.default_rng(streams[-1])

    start = refresh_labels(root_tree(history.alphabets, config.max_depth), index)
    start_cost = cost(start, index, config.alpha, config.beta)
    replicas = [Replica(start.copy(), start_cost, t, np.random.default_rng(s))
                for t, s in zip(temperatures, streams)]

    best_tree, best_cost = start.copy(), start_cost
    result = SearchResult(tree=best_tree, cost=best_cost, iterations=0, exhausted=False,
                          temperatures=temperatures)
    log("parallel_tempering", f"start: n={history.length}, replicas={config.num_replicas}, "
                              f"T=[{temperatures[0]:.3f} .. {temperatures[-1]:.3f}], root cost={start_cost:.3f}")

    for iteration in range(config.iterations):
        all_exhausted = True
        for k, replica in enumerate(replicas):
            step = mh_step(replica, index, config.alpha, config.beta)
            if not step.exhausted:
                all_exhausted = False
                result.proposals += 1
                result.acceptances += int(step.accepted)
            touched = [k]
            if step.improved_split is not None:
                touched += share_split(replicas, k, step.improved_split, index, config.alpha, config.beta)
            for j in touched:
                if replicas[j].current_cost < best_cost:
                    best_tree, best_cost = replicas[j].tree.copy(), replicas[j].current_cost
                    log("parallel_tempering", f"iter {iteration}: new best cost {best_cost:.3f} "
                                              f"({best_tree.num_states} states, replica {j})")
            if record_trace:
                result.trace.append({
                    "iter": iteration, "replica": k, "temp": replica.temperature,
                    "cost": replica.current_cost, "best_cost": best_cost, "accepted": int(step.accepted),
                    "move_type": step.move or "none", "num_states": replica.tree.num_states,
                })
        result.iterations = iteration + 1
        if all_exhausted:
            result.exhausted = True
            log("parallel_tempering", f"search exhausted at iteration {iteration}", always=True)
            break
        if len(replicas) >= 2 and swap_rng.random() >= config.swap_alpha0:
            result.swaps_tried += 1
            result.swaps_accepted += int(swap_step(replicas, swap_rng))

    result.tree, result.cost = best_tree, best_cost
    log("parallel_tempering", f"done: best cost {best_cost:.3f}, {best_tree.num_states} states, "
                              f"accepted {result.acceptances}/{result.proposals}, "
                              f"swaps {result.swaps_accepted}/{result.swaps_tried}", always=True)
    return result
