from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from phimdp.config import MAX_DEPTH
from phimdp.context_tree import Aoct, markov_split, root_tree
from phimdp.environments.base import Environment, EnvSpec
from phimdp.history import Alphabets

# 도메인: Cheese maze (5×3, 11칸)
# 맨 윗줄 5칸 + 1, 3, 5번째 열의 아래 두 칸, 치즈는 가운데 열 맨 아래
# 관측 = 벽 비트 (위 8, 왼쪽 4, 아래 2, 오른쪽 1) -> {5, 7, 8, 9, 10, 12}

__all__ = ["MazeState", "CheeseMaze", "maze_step", "maze_true_model", "maze_reference_tree", "wall_code",
           "MAZE_CELLS", "CHEESE", "OBSERVATION_CODES", "OBSERVATION_INDEX"]

WIDTH, HEIGHT = 5, 3
LEFT, RIGHT, UP, DOWN = 0, 1, 2, 3
MOVES = {LEFT: (0, -1), RIGHT: (0, 1), UP: (-1, 0), DOWN: (1, 0)}
OPPOSITE = {LEFT: RIGHT, RIGHT: LEFT, UP: DOWN, DOWN: UP}
WALL_BITS = {UP: 8, LEFT: 4, DOWN: 2, RIGHT: 1}
SHARED_CODES = (5, 10)  # 여러 칸이 같은 관측을 낸다

MAZE_CELLS: List[Tuple[int, int]] = [(0, c) for c in range(WIDTH)] + [
    (r, c) for r in (1, 2) for c in (0, 2, 4)]
CHEESE = (2, 2)
START_CELLS = [cell for cell in MAZE_CELLS if cell != CHEESE]

MOVE_REWARD = -1.0
WALL_REWARD = -10.0
CHEESE_REWARD = 10.0


def wall_code(cell: Tuple[int, int]) -> int:
    code = 0
    for action, (dr, dc) in MOVES.items():
        if (cell[0] + dr, cell[1] + dc) not in MAZE_CELLS:
            code |= WALL_BITS[action]
    return code


OBSERVATION_CODES = sorted({wall_code(cell) for cell in MAZE_CELLS})
OBSERVATION_INDEX: Dict[int, int] = {code: i for i, code in enumerate(OBSERVATION_CODES)}

MAZE_SPEC = EnvSpec(name="cheese-maze", alphabets=Alphabets(
    num_actions=4, num_observations=len(OBSERVATION_CODES),
    reward_values=(WALL_REWARD, MOVE_REWARD, CHEESE_REWARD)))


@dataclass(frozen=True)
class MazeState:
    cell: Tuple[int, int]


def _observe(cell: Tuple[int, int]) -> int:
    return OBSERVATION_INDEX[wall_code(cell)]


def maze_step(state: MazeState, action: int, rng: np.random.Generator) -> Tuple[int, float, MazeState]:
    dr, dc = MOVES[action]
    target = (state.cell[0] + dr, state.cell[1] + dc)
    if target not in MAZE_CELLS:
        return _observe(state.cell), WALL_REWARD, state
    if target == CHEESE:
        # 치즈를 찾으면 치즈가 아닌 10칸 중 하나에서 다시 시작
        restart = START_CELLS[int(rng.integers(len(START_CELLS)))]
        return _observe(restart), CHEESE_REWARD, MazeState(restart)
    return _observe(target), MOVE_REWARD, MazeState(target)


def maze_true_model():
    """치즈 칸을 뺀 10칸 위의 정확한 MDP: (P[s, a, s'], R[s, a])"""
    n = len(START_CELLS)
    index = {cell: i for i, cell in enumerate(START_CELLS)}
    transitions = np.zeros((n, 4, n))
    rewards = np.zeros((n, 4))
    for cell in START_CELLS:
        s = index[cell]
        for action, (dr, dc) in MOVES.items():
            target = (cell[0] + dr, cell[1] + dc)
            if target not in MAZE_CELLS:
                transitions[s, action, s] = 1.0
                rewards[s, action] = WALL_REWARD
            elif target == CHEESE:
                transitions[s, action, :] = 1.0 / n
                rewards[s, action] = CHEESE_REWARD
            else:
                transitions[s, action, index[target]] = 1.0
                rewards[s, action] = MOVE_REWARD
    return transitions, rewards


def maze_reference_tree(max_depth: int = MAX_DEPTH) -> Aoct:
    """공유 관측 5, 10 을 직전 행동과 그 앞 관측으로 가른 32 상태 트리

    벽에 막히지 않은 행동으로 들어온 경우만 앞 관측까지 읽는다. 학습된 트리와
    같은 히스토리에서 비용을 비교하는 기준으로 쓴다.
    """
    tree = markov_split(root_tree(MAZE_SPEC.alphabets, max_depth), ())
    for code in SHARED_CODES:
        o = OBSERVATION_INDEX[code]
        tree = markov_split(tree, (o,))
        for action in MOVES:
            if not code & WALL_BITS[OPPOSITE[action]]:
                tree = markov_split(tree, (o, action))
    return tree


class CheeseMaze(Environment):
    spec = MAZE_SPEC

    def reset(self) -> int:
        cell = START_CELLS[int(self.rng.integers(len(START_CELLS)))]
        self.state = MazeState(cell)
        self.episode_done = False
        return _observe(cell)

    def _transition(self, action: int) -> Tuple[int, float]:
        observation, reward, self.state = maze_step(self.state, action, self.rng)
        self.episode_done = reward == CHEESE_REWARD
        return observation, reward
