from dataclasses import dataclass
from typing import Tuple

import numpy as np

from phimdp.environments.base import Environment, EnvSpec
from phimdp.history import Alphabets

# 도메인: 4×4 grid, 관측은 정보가 없다 (|O| = 1)
# 오른쪽 아래 칸에 들어가면 보상 1, 나머지 15칸 중 하나로 순간이동

__all__ = ["GridState", "GridWorld", "grid_step", "grid_true_model", "GRID_GOAL"]

SIZE = 4
GRID_GOAL = SIZE * SIZE - 1
LEFT, RIGHT, UP, DOWN = 0, 1, 2, 3
MOVES = {LEFT: (0, -1), RIGHT: (0, 1), UP: (-1, 0), DOWN: (1, 0)}

GRID_SPEC = EnvSpec(name="grid4x4", alphabets=Alphabets(num_actions=4, num_observations=1, reward_values=(0.0, 1.0)))


@dataclass(frozen=True)
class GridState:
    cell: int


def _move(cell: int, action: int) -> int:
    row, col = divmod(cell, SIZE)
    dr, dc = MOVES[action]
    r, c = row + dr, col + dc
    if not (0 <= r < SIZE and 0 <= c < SIZE):
        return cell  # 벽에 부딪히면 제자리
    return r * SIZE + c


def grid_step(state: GridState, action: int, rng: np.random.Generator) -> Tuple[int, float, GridState]:
    target = _move(state.cell, action)
    if target == GRID_GOAL:
        return 0, 1.0, GridState(int(rng.integers(GRID_GOAL)))
    return 0, 0.0, GridState(target)


def grid_true_model():
    """목표 칸을 뺀 15칸 위의 정확한 MDP: (P[s, a, s'], R[s, a])"""
    n = GRID_GOAL
    transitions = np.zeros((n, 4, n))
    rewards = np.zeros((n, 4))
    for cell in range(n):
        for action in MOVES:
            target = _move(cell, action)
            if target == GRID_GOAL:
                transitions[cell, action, :] = 1.0 / n
                rewards[cell, action] = 1.0
            else:
                transitions[cell, action, target] = 1.0
    return transitions, rewards


class GridWorld(Environment):
    spec = GRID_SPEC

    def reset(self) -> int:
        self.state = GridState(int(self.rng.integers(GRID_GOAL)))
        self.episode_done = False
        return 0

    def _transition(self, action: int) -> Tuple[int, float]:
        observation, reward, self.state = grid_step(self.state, action, self.rng)
        self.episode_done = reward > 0
        return observation, reward
