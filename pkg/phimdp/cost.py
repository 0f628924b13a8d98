from dataclasses import dataclass
from typing import List, Union

import numpy as np

from phimdp.context_tree import Aoct, ContextIndex
from phimdp.history import History

# 두 부분 코드(two-part code) 기반 Cost_{α,β}
# CL(x) = CL(x|θ) + β·CL(θ), 로그 밑은 2 (bits)

__all__ = [
    "SufficientStats", "CostBreakdown", "collect_stats", "code_length_parts",
    "state_code_length", "reward_code_length", "cost", "cost_from_stats", "row_contributions",
]


@dataclass
class SufficientStats:
    trans_counts: np.ndarray   # (s, a, s') -> n^{a+}_{ss'}
    reward_counts: np.ndarray  # (s, a, s', r') -> n^{ar'}_{ss'}
    num_states: int
    num_rewards: int

    @property
    def total(self) -> int:
        return int(self.trans_counts.sum())


@dataclass(frozen=True)
class CostBreakdown:
    data_s: float
    param_s: float
    data_r: float
    param_r: float

    def total(self, alpha: float, beta: float) -> float:
        return (alpha * (self.data_s + beta * self.param_s)
                + (1.0 - alpha) * (self.data_r + beta * self.param_r))


def _as_index(tree: Aoct, history: Union[History, ContextIndex]) -> ContextIndex:
    if isinstance(history, ContextIndex):
        return history
    return ContextIndex(history, tree.max_depth)


def collect_stats(tree: Aoct, history: Union[History, ContextIndex]) -> SufficientStats:
    index = _as_index(tree, history)
    h = index.history
    num_states = tree.num_states
    num_actions = h.alphabets.num_actions
    num_rewards = h.alphabets.num_rewards
    shape = (num_states, num_actions, num_states, num_rewards)

    ids = index.assign(tree)
    start = index.boundary
    if start >= h.length:
        # 전부 경계 구간
        return SufficientStats(np.zeros(shape[:3], dtype=np.int64), np.zeros(shape, dtype=np.int64),
                               num_states, num_rewards)

    s = ids[start:h.length]
    s_next = ids[start + 1:h.length + 1]
    a = np.asarray(h.actions[start:], dtype=np.int64)
    r = np.asarray(h.rewards[start:], dtype=np.int64)
    flat = ((s * num_actions + a) * num_states + s_next) * num_rewards + r
    reward_counts = np.bincount(flat, minlength=int(np.prod(shape))).reshape(shape)
    return SufficientStats(
        trans_counts=reward_counts.sum(axis=3),
        reward_counts=reward_counts,
        num_states=num_states,
        num_rewards=num_rewards,
    )


def _xlog2x(counts: np.ndarray) -> np.ndarray:
    counts = counts.astype(np.float64)
    return np.where(counts > 0, counts * np.log2(np.maximum(counts, 1.0)), 0.0)


def _rows_code_length(rows: np.ndarray, num_categories: int):
    # 행마다 n·H(n_•/n) + ((k-1)/2)·log n, 합계가 0인 행은 건너뜀 (0 기여)
    totals = rows.sum(axis=1)
    active = totals > 0
    data = float((_xlog2x(totals) - _xlog2x(rows).sum(axis=1))[active].sum())
    param = float(((num_categories - 1) / 2.0) * np.log2(totals[active].astype(np.float64)).sum())
    return data, param


def code_length_parts(stats: SufficientStats) -> CostBreakdown:
    s, a = stats.trans_counts.shape[:2]
    data_s, param_s = _rows_code_length(stats.trans_counts.reshape(s * a, -1), stats.num_states)
    data_r, param_r = _rows_code_length(stats.reward_counts.reshape(-1, stats.num_rewards), stats.num_rewards)
    return CostBreakdown(data_s=data_s, param_s=param_s, data_r=data_r, param_r=param_r)


def state_code_length(stats: SufficientStats) -> float:
    parts = code_length_parts(stats)
    return parts.data_s + parts.param_s


def reward_code_length(stats: SufficientStats) -> float:
    parts = code_length_parts(stats)
    return parts.data_r + parts.param_r


def cost_from_stats(stats: SufficientStats, alpha: float, beta: float) -> float:
    return code_length_parts(stats).total(alpha, beta)


def cost(tree: Aoct, history: Union[History, ContextIndex], alpha: float, beta: float) -> float:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return cost_from_stats(collect_stats(tree, history), alpha, beta)


def row_contributions(stats: SufficientStats) -> List[dict]:
    """디버그용: 행별 CL 기여 (state 행과 reward 행)"""
    rows = []
    k_s = stats.num_states
    for s in range(stats.trans_counts.shape[0]):
        for a in range(stats.trans_counts.shape[1]):
            row = stats.trans_counts[s, a][None, :]
            n = int(row.sum())
            if n == 0:
                continue
            data, param = _rows_code_length(row, k_s)
            rows.append({"kind": "state", "state": s, "action": a, "next_state": "",
                         "count": n, "data_bits": data, "param_bits": param})
            for s_next in range(stats.trans_counts.shape[2]):
                rrow = stats.reward_counts[s, a, s_next][None, :]
                m = int(rrow.sum())
                if m == 0:
                    continue
                data, param = _rows_code_length(rrow, stats.num_rewards)
                rows.append({"kind": "reward", "state": s, "action": a, "next_state": s_next,
                             "count": m, "data_bits": data, "param_bits": param})
    return rows
