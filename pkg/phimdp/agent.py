import asyncio
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from phimdp.config import (
    ADDITIONAL_SAMPLE_NUMBER, AGENT_LEARNING_LOOPS, AVI_MAX_SWEEPS, AVI_TOLERANCE, CHECKPOINTS,
    COST_ALPHA, COST_BETA, DEFAULT_SEED, ETA, EVAL_ACTIONS, EVAL_WORKERS, GAMMA, INITIAL_SAMPLE_NUMBER,
    MAX_DEPTH, NUM_EVAL_RUNS, PT_ITERATIONS, PT_REPLICAS, PT_SWAP_ALPHA0, log,
)
from phimdp.context_tree import Aoct, ContextIndex, map_history, root_tree
from phimdp.environments import Environment, make_environment
from phimdp.history import History
from phimdp.mdp_solver import QTable, avi, estimate_model, greedy_action, optimistic_fill, q_learning_step
from phimdp.search import PtConfig, SearchResult, parallel_tempering

# GSΦA: 랜덤 샘플 -> PT 탐색 -> 모델 추정 + AVI -> Q-learning 상호작용

__all__ = [
    "AgentConfig", "GsPhiAgent", "AgentResult", "EvalResult", "LearningCurve",
    "run_gs_phi_a", "evaluate_policy", "evaluate_policy_async", "run_learning_curve",
]

CheckpointHook = Callable[[int, "GsPhiAgent"], None]


@dataclass
class AgentConfig:
    initial_sample_number: int = INITIAL_SAMPLE_NUMBER
    agent_learning_loops: int = AGENT_LEARNING_LOOPS
    additional_sample_number: int = ADDITIONAL_SAMPLE_NUMBER
    stochastic_iterations: int = PT_ITERATIONS
    num_replicas: int = PT_REPLICAS
    swap_alpha0: float = PT_SWAP_ALPHA0
    alpha: float = COST_ALPHA
    beta: float = COST_BETA
    gamma: float = GAMMA
    eta: float = ETA
    max_depth: int = MAX_DEPTH
    avi_tolerance: float = AVI_TOLERANCE
    avi_max_sweeps: int = AVI_MAX_SWEEPS
    seed: int = DEFAULT_SEED
    record_trace: bool = False

    def validate(self) -> "AgentConfig":
        if self.initial_sample_number < 1:
            raise ValueError(f"initial_sample_number must be >= 1, got {self.initial_sample_number}")
        if self.agent_learning_loops < 0 or self.additional_sample_number < 0:
            raise ValueError("agent_learning_loops and additional_sample_number must be >= 0")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if not 0.0 < self.eta <= 1.0:
            raise ValueError(f"eta must lie in (0, 1], got {self.eta}")
        if self.max_depth < 0:
            raise ValueError(f"max_depth must be >= 0, got {self.max_depth}")
        self.pt_config(self.seed).validate()
        return self

    def pt_config(self, seed: int) -> PtConfig:
        return PtConfig(num_replicas=self.num_replicas, iterations=self.stochastic_iterations,
                        swap_alpha0=self.swap_alpha0, alpha=self.alpha, beta=self.beta,
                        seed=seed, max_depth=self.max_depth)


@dataclass
class AgentResult:
    tree: Aoct
    qtable: QTable
    policy: np.ndarray
    history: History
    search_results: List[SearchResult]
    warnings: List[str]
    agent: "GsPhiAgent"


@dataclass
class EvalResult:
    per_run: List[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.per_run))


@dataclass
class LearningCurve:
    env_name: str
    points: Dict[int, List[float]] = field(default_factory=dict)
    result: Optional[AgentResult] = None

    def means(self) -> Dict[int, float]:
        return {c: float(np.mean(v)) for c, v in sorted(self.points.items())}


class GsPhiAgent:
    """학습 루프의 상태(환경, 히스토리, 트리, Q)를 단계 사이에 들고 있는 에이전트"""

    def __init__(self, env: Environment, config: AgentConfig):
        self.env = env
        self.config = config.validate()
        action_seed, self._search_seeds = np.random.SeedSequence(config.seed).spawn(2)
        self.rng = np.random.default_rng(action_seed)
        self.alphabets = env.spec.alphabets
        self.history: Optional[History] = None
        self.tree: Aoct = root_tree(self.alphabets, config.max_depth)
        self.qtable: Optional[QTable] = None
        self.search_results: List[SearchResult] = []
        self.search_history: Optional[History] = None  # 마지막 탐색이 본 히스토리
        self.warnings: List[str] = []
        self.state_stream: List[Tuple[int, int]] = []  # Q-learning에 들어간 (t, 상태 id)
        self._fired: Set[int] = set()

    # =========================
    # Phases
    # =========================
    def random_phase(self) -> History:
        observation = self.env.reset()
        self.history = History(self.alphabets, initial_observation=observation)
        for _ in range(self.config.initial_sample_number):
            action = int(self.rng.integers(self.alphabets.num_actions))
            observation, reward = self.env.step(action)
            self.history.append_step(action, observation, reward)
        log("random_phase", f"{self.env.spec.name}: {self.history.length} random steps")
        return self.history

    def search_and_solve(self, loop: int) -> SearchResult:
        seed = int(self._search_seeds.spawn(1)[0].generate_state(1)[0])
        self.search_history = self.history.snapshot()
        result = parallel_tempering(self.search_history, self.config.pt_config(seed), self.config.record_trace)
        if result.exhausted:
            self.warn("search_and_solve", f"loop {loop}: search exhausted, stopping with the best tree so far")
        self.search_results.append(result)
        self.tree = result.tree
        self.solve()
        return result

    def solve(self) -> QTable:
        index = ContextIndex(self.history, self.tree.max_depth)
        model = estimate_model(self.tree, index)
        qtable = avi(model, self.config.gamma, self.config.avi_tolerance, self.config.avi_max_sweeps,
                     eta=self.config.eta)
        self.warnings.extend(qtable.warnings)
        self.qtable = optimistic_fill(qtable, model)
        log("solve", f"{self.tree.num_states} states, AVI {qtable.sweeps} sweeps, converged={qtable.converged}")
        return self.qtable

    def current_state(self) -> int:
        return map_history(self.tree, self.history, self.history.length).id

    def act(self, state: int) -> int:
        if state < 0 or self.qtable is None:
            return int(self.rng.integers(self.alphabets.num_actions))
        return greedy_action(self.qtable, state)

    def interact(self, steps: int, learn: bool = True):
        s = self.current_state()
        for _ in range(steps):
            a = self.act(s)
            observation, reward = self.env.step(a)
            self.history.append_step(a, observation, reward)
            s_next = self.current_state()
            if learn and s >= 0 and s_next >= 0:
                q_learning_step(self.qtable, s, a, reward, s_next)
                self.state_stream.append((self.history.length - 1, s))
            s = s_next

    def advance(self, steps: int, checkpoints: Sequence[int] = (), hook: Optional[CheckpointHook] = None):
        """steps 만큼 Q-learning, 그 사이 체크포인트마다 hook 호출"""
        target = self.history.length + steps
        for checkpoint in sorted(checkpoints):
            if self.history.length < checkpoint <= target:
                self.interact(checkpoint - self.history.length)
                self.fire(checkpoint, hook)
        self.interact(target - self.history.length)

    def fire(self, checkpoint: int, hook: Optional[CheckpointHook]):
        if hook is None or checkpoint in self._fired:
            return
        self._fired.add(checkpoint)
        hook(checkpoint, self)

    def fire_reached(self, checkpoints: Iterable[int], hook: Optional[CheckpointHook]):
        # 첫 AVI 이전 체크포인트는 첫 정책으로 평가
        for checkpoint in sorted(checkpoints):
            if checkpoint <= self.history.length:
                self.fire(checkpoint, hook)

    def warn(self, tag: str, message: str):
        self.warnings.append(message)
        log(tag, f"warning: {message}", always=True)

    def policy(self) -> np.ndarray:
        return self.qtable.q.argmax(axis=1)


def run_gs_phi_a(env: Environment, config: AgentConfig, checkpoints: Sequence[int] = (),
                 hook: Optional[CheckpointHook] = None) -> AgentResult:
    agent = GsPhiAgent(env, config)
    agent.random_phase()

    if config.agent_learning_loops == 0:
        agent.warn("run_gs_phi_a", "agent_learning_loops = 0, returning the root-only tree")
        agent.solve()

    for loop in range(config.agent_learning_loops):
        search = agent.search_and_solve(loop)
        agent.fire_reached(checkpoints, hook)
        if search.exhausted:
            break
        agent.advance(config.additional_sample_number, checkpoints, hook)
        log("run_gs_phi_a", f"loop {loop}: history {agent.history.length}, {agent.tree.num_states} states",
            always=True)

    return AgentResult(tree=agent.tree, qtable=agent.qtable, policy=agent.policy(), history=agent.history,
                       search_results=agent.search_results, warnings=agent.warnings, agent=agent)


# =========================
# Evaluation
# =========================
def _evaluate_run(env_name: str, tree: Aoct, qtable: QTable, num_actions: int,
                  seed: np.random.SeedSequence) -> float:
    env_seed, action_seed = seed.spawn(2)
    env = make_environment(env_name, env_seed)
    rng = np.random.default_rng(action_seed)
    history = History(env.spec.alphabets, initial_observation=env.reset())
    total = 0.0
    for _ in range(num_actions):
        s = map_history(tree, history, history.length).id
        # 경계 구간(히스토리가 짧은 동안)은 무작위 행동
        a = greedy_action(qtable, s) if s >= 0 else int(rng.integers(env.spec.alphabets.num_actions))
        observation, reward = env.step(a)
        history.append_step(a, observation, reward)
        total += reward
    return total / num_actions


async def evaluate_policy_async(env_name: str, tree: Aoct, qtable: QTable, num_actions: int = EVAL_ACTIONS,
                                num_runs: int = NUM_EVAL_RUNS, seed: int = DEFAULT_SEED,
                                workers: int = EVAL_WORKERS) -> EvalResult:
    if num_actions <= 0:
        raise ValueError(f"num_actions must be positive, got {num_actions}")
    if num_runs <= 0:
        raise ValueError(f"num_runs must be positive, got {num_runs}")
    tree.state_ids()  # 스레드에서 캐시를 만들지 않도록 미리 계산
    seeds = np.random.SeedSequence(seed).spawn(num_runs)
    per_run: List[float] = []
    batch_size = max(1, workers)
    for i in range(0, num_runs, batch_size):
        batch = seeds[i:i + batch_size]
        tasks = [asyncio.to_thread(_evaluate_run, env_name, tree, qtable, num_actions, s) for s in batch]
        per_run.extend(await asyncio.gather(*tasks))
    return EvalResult(per_run=[float(v) for v in per_run])


def evaluate_policy(env_name: str, tree: Aoct, qtable: QTable, num_actions: int = EVAL_ACTIONS,
                    num_runs: int = NUM_EVAL_RUNS, seed: int = DEFAULT_SEED,
                    workers: int = EVAL_WORKERS) -> EvalResult:
    """학습/탐험을 멈춘 greedy 정책의 행동당 평균 보상 (run별 + 전체 평균)"""
    return asyncio.run(evaluate_policy_async(env_name, tree, qtable, num_actions, num_runs, seed, workers))


def run_learning_curve(env_name: str, config: AgentConfig, checkpoints: Sequence[int] = CHECKPOINTS,
                       num_eval_runs: int = NUM_EVAL_RUNS, eval_actions: int = EVAL_ACTIONS,
                       workers: int = EVAL_WORKERS) -> LearningCurve:
    curve = LearningCurve(env_name=env_name)
    eval_seeds = np.random.SeedSequence([config.seed, 1])

    def hook(checkpoint: int, agent: GsPhiAgent):
        seed = int(eval_seeds.spawn(1)[0].generate_state(1)[0])
        evaluation = evaluate_policy(env_name, agent.tree, agent.qtable, eval_actions, num_eval_runs, seed, workers)
        curve.points[checkpoint] = evaluation.per_run
        log("run_learning_curve", f"{env_name} @ {checkpoint}: mean reward {evaluation.mean:.4f}", always=True)

    env = make_environment(env_name, np.random.SeedSequence([config.seed, 0]))
    result = run_gs_phi_a(env, config, checkpoints, hook)
    agent = result.agent
    if config.agent_learning_loops == 0:
        agent.fire_reached(checkpoints, hook)
    if checkpoints and agent.history.length < max(checkpoints):
        # 학습 루프가 끝난 뒤에는 탐색 없이 Q-learning만 이어간다
        agent.advance(max(checkpoints) - agent.history.length, checkpoints, hook)
    result.policy = agent.policy()
    curve.result = result
    return curve
