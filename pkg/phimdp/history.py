from dataclasses import dataclass, field
from typing import List, Optional, Tuple, Sequence

# 소스: 에이전트가 겪은 모든 경험 (행동, 관측, 보상)
# steps[t] = (a_t, o_{t+1}, r_{t+1}), 초기 (o_1, r_1)은 헤더로 따로 저장

__all__ = ["Alphabets", "History", "neutral_reward_index"]


@dataclass(frozen=True)
class Alphabets:
    num_actions: int
    num_observations: int
    reward_values: Tuple[float, ...]

    def __post_init__(self):
        if self.num_actions < 1 or self.num_observations < 1:
            raise ValueError(
                f"alphabet sizes must be positive, got |A|={self.num_actions}, |O|={self.num_observations}")
        values = tuple(float(v) for v in self.reward_values)
        if not values:
            raise ValueError("reward alphabet is empty")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"reward values must be strictly increasing: {values}")
        object.__setattr__(self, "reward_values", values)

    @property
    def num_rewards(self) -> int:
        return len(self.reward_values)

    @property
    def r_max(self) -> float:
        return self.reward_values[-1]

    def reward_index(self, value: float) -> int:
        for i, v in enumerate(self.reward_values):
            if v == float(value):
                return i
        raise ValueError(f"reward {value} is not in the reward alphabet {self.reward_values}")


def neutral_reward_index(alphabets: Alphabets) -> int:
    # r_1: 0이 있으면 0, 없으면 제일 작은 값
    if 0.0 in alphabets.reward_values:
        return alphabets.reward_values.index(0.0)
    return 0


@dataclass
class History:
    alphabets: Alphabets
    initial_observation: int = 0
    initial_reward: Optional[int] = None
    actions: List[int] = field(default_factory=list)
    observations: List[int] = field(default_factory=list)
    rewards: List[int] = field(default_factory=list)

    def __post_init__(self):
        if not 0 <= self.initial_observation < self.alphabets.num_observations:
            raise ValueError(f"initial observation {self.initial_observation} out of range")
        if self.initial_reward is None:
            self.initial_reward = neutral_reward_index(self.alphabets)

    def __len__(self) -> int:
        return len(self.actions)

    @property
    def length(self) -> int:
        return len(self.actions)

    def append_step(self, action: int, observation: int, reward: float) -> "History":
        if not 0 <= action < self.alphabets.num_actions:
            raise ValueError(f"action {action} outside [0, {self.alphabets.num_actions})")
        if not 0 <= observation < self.alphabets.num_observations:
            raise ValueError(f"observation {observation} outside [0, {self.alphabets.num_observations})")
        reward_index = self.alphabets.reward_index(reward)
        self.actions.append(int(action))
        self.observations.append(int(observation))
        self.rewards.append(reward_index)
        return self

    def extend(self, steps: Sequence[Tuple[int, int, float]]) -> "History":
        for action, observation, reward in steps:
            self.append_step(action, observation, reward)
        return self

    def snapshot(self) -> "History":
        return History(
            alphabets=self.alphabets,
            initial_observation=self.initial_observation,
            initial_reward=self.initial_reward,
            actions=list(self.actions),
            observations=list(self.observations),
            rewards=list(self.rewards),
        )

    def observation_at(self, t: int) -> int:
        # o at time t (t=0 이면 헤더 관측)
        return self.initial_observation if t == 0 else self.observations[t - 1]

    def reward_value(self, index: int) -> float:
        return self.alphabets.reward_values[index]

    def context(self, t: int, length: int) -> Tuple[int, ...]:
        """t 시점에서 거꾸로 읽은 심볼: o_t, a_{t-1}, o_{t-1}, ..."""
        if not 0 <= t <= self.length:
            raise ValueError(f"time index {t} outside [0, {self.length}]")
        symbols = []
        k = t
        while len(symbols) < length:
            symbols.append(self.observation_at(k))
            if len(symbols) >= length or k == 0:
                break
            symbols.append(self.actions[k - 1])
            k -= 1
        return tuple(symbols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, History):
            return NotImplemented
        return (self.alphabets == other.alphabets
                and self.initial_observation == other.initial_observation
                and self.initial_reward == other.initial_reward
                and self.actions == other.actions
                and self.observations == other.observations
                and self.rewards == other.rewards)
