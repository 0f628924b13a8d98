from dataclasses import dataclass
from typing import Tuple

import numpy as np

from phimdp.environments.base import Environment, EnvSpec
from phimdp.history import Alphabets

# 도메인: Tiger
# 듣기(-1)는 정확도 0.85, 문을 열면 금(+10) 또는 호랑이(-100), 연 뒤에는 새 에피소드

__all__ = ["TigerState", "Tiger", "tiger_step", "tiger_policy_value", "HEAR_ACCURACY"]

HEAR_LEFT, HEAR_RIGHT, START = 0, 1, 2
LISTEN, OPEN_LEFT, OPEN_RIGHT = 0, 1, 2
LEFT, RIGHT = 0, 1
HEAR_ACCURACY = 0.85

LISTEN_REWARD = -1.0
GOLD_REWARD = 10.0
TIGER_REWARD = -100.0

TIGER_SPEC = EnvSpec(name="tiger", alphabets=Alphabets(
    num_actions=3, num_observations=3, reward_values=(TIGER_REWARD, LISTEN_REWARD, GOLD_REWARD)))


@dataclass(frozen=True)
class TigerState:
    tiger_side: int


def tiger_step(state: TigerState, action: int, rng: np.random.Generator,
               accuracy: float = HEAR_ACCURACY) -> Tuple[int, float, TigerState]:
    if action == LISTEN:
        correct = rng.random() < accuracy
        heard = state.tiger_side if correct else 1 - state.tiger_side
        return (HEAR_LEFT if heard == LEFT else HEAR_RIGHT), LISTEN_REWARD, state
    opened = LEFT if action == OPEN_LEFT else RIGHT
    reward = TIGER_REWARD if opened == state.tiger_side else GOLD_REWARD
    return START, reward, TigerState(int(rng.integers(2)))


def tiger_policy_value(accuracy: float = HEAR_ACCURACY) -> Tuple[float, float, float]:
    """두 번 듣고 같으면 열기, 다르면 한 번 더 듣고 다수결

    (에피소드당 기대 보상, 에피소드당 기대 행동 수, 행동당 평균 보상)
    """
    p, q = accuracy, 1.0 - accuracy
    consistent_right, consistent_wrong, split = p * p, q * q, 2 * p * q
    episode_reward = (
        consistent_right * GOLD_REWARD
        + consistent_wrong * TIGER_REWARD
        + split * (p * GOLD_REWARD + q * TIGER_REWARD)
        + LISTEN_REWARD * (2 + split)
    )
    episode_length = 2 + split + 1
    return episode_reward, episode_length, episode_reward / episode_length


class Tiger(Environment):
    spec = TIGER_SPEC

    def __init__(self, seed=None, accuracy: float = HEAR_ACCURACY):
        super().__init__(seed)
        self.accuracy = accuracy

    def reset(self) -> int:
        self.state = TigerState(int(self.rng.integers(2)))
        self.episode_done = False
        return START

    def _transition(self, action: int) -> Tuple[int, float]:
        observation, reward, self.state = tiger_step(self.state, action, self.rng, self.accuracy)
        self.episode_done = action != LISTEN
        return observation, reward
