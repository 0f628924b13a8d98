from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from phimdp.history import Alphabets

__all__ = ["EnvSpec", "Environment"]


@dataclass(frozen=True)
class EnvSpec:
    name: str
    alphabets: Alphabets

    @property
    def r_max(self) -> float:
        return self.alphabets.r_max


class Environment:
    """모든 도메인 공통 인터페이스: reset() -> o, step(a) -> (o, r)

    에피소드가 끝나도 스트림은 멈추지 않는다. 다음 에피소드 시작은 step 안에서 처리하고
    episode_done 으로만 알려 준다.
    """

    spec: EnvSpec

    def __init__(self, seed: Optional[int] = None):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.state = None
        self.episode_done = False

    def reset(self) -> int:
        raise NotImplementedError

    def _transition(self, action: int) -> Tuple[int, float]:
        raise NotImplementedError

    def step(self, action: int) -> Tuple[int, float]:
        if self.state is None:
            raise ValueError(f"{self.spec.name}: step() called before reset()")
        if not 0 <= action < self.spec.alphabets.num_actions:
            raise ValueError(f"{self.spec.name}: action {action} outside [0, {self.spec.alphabets.num_actions})")
        return self._transition(int(action))
