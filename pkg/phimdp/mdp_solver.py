from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Union

import numpy as np

from phimdp.config import AVI_MAX_SWEEPS, AVI_TOLERANCE, ETA, GAMMA, log
from phimdp.context_tree import Aoct, ContextIndex
from phimdp.cost import collect_stats
from phimdp.history import History

# 트리가 만든 MDP 위에서 낙관적 모델 추정 + AVI + Q-learning

__all__ = [
    "MdpModel", "QTable", "estimate_model", "avi", "optimistic_fill",
    "q_learning_step", "greedy_action", "relative_value_iteration",
]


@dataclass
class MdpModel:
    transitions: np.ndarray  # (s, a, s') T_hat
    rewards: np.ndarray      # (s, a, s') R_hat (낙관적)
    visits: np.ndarray       # (s, a) n^{a+}_{s+}
    r_max: float

    @property
    def num_states(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[1]

    def expected_rewards(self) -> np.ndarray:
        return (self.transitions * self.rewards).sum(axis=2)

    def unseen_states(self) -> np.ndarray:
        return np.flatnonzero(self.visits.sum(axis=1) == 0)


@dataclass
class QTable:
    q: np.ndarray
    gamma: float = GAMMA
    eta: float = ETA
    converged: bool = True
    sweeps: int = 0
    warnings: List[str] = field(default_factory=list)

    @property
    def num_states(self) -> int:
        return self.q.shape[0]

    @property
    def num_actions(self) -> int:
        return self.q.shape[1]

    def copy(self) -> "QTable":
        return QTable(self.q.copy(), self.gamma, self.eta, self.converged, self.sweeps, list(self.warnings))


def estimate_model(tree: Aoct, history: Union[History, ContextIndex], r_max: Optional[float] = None) -> MdpModel:
    index = history if isinstance(history, ContextIndex) else ContextIndex(history, tree.max_depth)
    alphabets = index.history.alphabets
    if r_max is None:
        r_max = alphabets.r_max
    stats = collect_stats(tree, index)
    counts = stats.trans_counts.astype(np.float64)
    visits = counts.sum(axis=2)

    num_states = stats.num_states
    transitions = np.full(counts.shape, 1.0 / num_states)
    seen = visits > 0
    transitions[seen] = counts[seen] / visits[seen][:, None]

    # (R_max + r_1 + ... + r_m) / (m + 1), m = 0 이면 R_max
    reward_sums = stats.reward_counts.astype(np.float64) @ np.asarray(alphabets.reward_values)
    rewards = (r_max + reward_sums) / (counts + 1.0)
    return MdpModel(transitions=transitions, rewards=rewards, visits=visits.astype(np.int64), r_max=float(r_max))


def avi(model: MdpModel, gamma: float = GAMMA, tolerance: float = AVI_TOLERANCE,
        max_sweeps: int = AVI_MAX_SWEEPS, eta: float = ETA) -> QTable:
    """Action-Value Iteration, 0에서 시작하는 동기식 sweep"""
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"gamma must lie in [0, 1), got {gamma}")
    expected = model.expected_rewards()
    q = np.zeros((model.num_states, model.num_actions))
    residual = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        v = q.max(axis=1)
        q_next = expected + gamma * (model.transitions @ v)
        residual = float(np.abs(q_next - q).max())
        q = q_next
        sweeps += 1
        if residual < tolerance:
            break

    table = QTable(q=q, gamma=gamma, eta=eta, converged=residual < tolerance, sweeps=sweeps)
    if not table.converged:
        message = f"not converged after {sweeps} sweeps (residual {residual:.3g})"
        table.warnings.append(message)
        log("avi", message, always=True)
    return table


def optimistic_fill(qtable: QTable, model: MdpModel) -> QTable:
    # AVI 때 한 번도 방문하지 않은 상태: R_max / (1 - γ)
    unseen = model.unseen_states()
    if unseen.size:
        qtable.q[unseen] = model.r_max / (1.0 - qtable.gamma)
    return qtable


def q_learning_step(qtable: QTable, s: int, a: int, r: float, s_next: int) -> QTable:
    err = r + qtable.gamma * qtable.q[s_next].max() - qtable.q[s, a]
    qtable.q[s, a] += qtable.eta * err
    return qtable


def greedy_action(qtable: QTable, s: int) -> int:
    # 동률이면 가장 작은 행동 번호
    return int(np.argmax(qtable.q[s]))


def relative_value_iteration(transitions: np.ndarray, rewards: np.ndarray, tolerance: float = 1e-10,
                             max_iterations: int = 100_000) -> Tuple[float, np.ndarray, np.ndarray]:
    """알려진 MDP의 최적 평균 보상 (gain, bias, policy)

    transitions: (s, a, s'), rewards: (s, a) 기대 보상.
    주기성을 없애려고 P' = (P + I) / 2 로 바꿔 푼다 (gain은 그대로, bias는 2배).
    """
    num_states = transitions.shape[0]
    lazy = 0.5 * (transitions + np.eye(num_states)[:, None, :])
    h = np.zeros(num_states)
    gain = 0.0
    for _ in range(max_iterations):
        q = rewards + lazy @ h
        v = q.max(axis=1)
        diff = v - h
        gain = 0.5 * (diff.max() + diff.min())
        h_next = v - v[0]
        if diff.max() - diff.min() < tolerance:
            h = h_next
            break
        h = h_next
    q = rewards + lazy @ h
    return float(gain), h, q.argmax(axis=1)
