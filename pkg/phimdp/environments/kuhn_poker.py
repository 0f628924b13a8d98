from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from phimdp.environments.base import Environment, EnvSpec
from phimdp.history import Alphabets

# 도메인: Kuhn poker (J, Q, K 세 장), 에이전트는 항상 두 번째로 둔다
# 한 판 = 두 스텝: 결정 스텝에서 정산(±1/±2, 정산 관측), 다음 스텝에서 새 카드(보상 0)
# 관측 = 내 카드 × P1의 첫 행동 (0..5), 정산 관측 6

__all__ = ["PokerState", "KuhnPoker", "kuhn_step", "deal", "p1_bet_probability", "p1_call_probability",
           "kuhn_best_response_value", "NASH_ALPHA", "SETTLED"]

JACK, QUEEN, KING = 0, 1, 2
PASS, BET = 0, 1
SETTLED = 6
NASH_ALPHA = 1.0 / 3.0

KUHN_SPEC = EnvSpec(name="kuhn-poker", alphabets=Alphabets(
    num_actions=2, num_observations=7, reward_values=(-2.0, -1.0, 0.0, 1.0, 2.0)))


@dataclass(frozen=True)
class PokerState:
    agent_card: int
    p1_card: int
    p1_action: int
    settled: bool = False

    @property
    def observation(self) -> int:
        return SETTLED if self.settled else self.agent_card * 2 + self.p1_action


def p1_bet_probability(card: int, alpha: float = NASH_ALPHA) -> float:
    # Nash 계열: J는 α로 블러핑, Q는 체크, K는 min(3α, 1)
    return {JACK: alpha, QUEEN: 0.0, KING: min(3.0 * alpha, 1.0)}[card]


def p1_call_probability(card: int, alpha: float = NASH_ALPHA) -> float:
    # 체크 후 에이전트가 베팅했을 때 콜할 확률
    return {JACK: 0.0, QUEEN: alpha + 1.0 / 3.0, KING: 1.0}[card]


def deal(rng: np.random.Generator, alpha: float = NASH_ALPHA) -> PokerState:
    agent_card, p1_card = (int(c) for c in rng.permutation(3)[:2])
    p1_action = BET if rng.random() < p1_bet_probability(p1_card, alpha) else PASS
    return PokerState(agent_card, p1_card, p1_action)


def _showdown(state: PokerState, stake: float) -> float:
    return stake if state.agent_card > state.p1_card else -stake


def kuhn_step(state: PokerState, action: int, rng: np.random.Generator,
              alpha: float = NASH_ALPHA) -> Tuple[int, float, PokerState]:
    if state.settled:
        # 정산 스텝 다음의 행동은 무시하고 새로 카드를 돌린다
        new_state = deal(rng, alpha)
        return new_state.observation, 0.0, new_state

    if state.p1_action == BET:
        reward = -1.0 if action == PASS else _showdown(state, 2.0)
    elif action == PASS:
        reward = _showdown(state, 1.0)
    elif rng.random() < p1_call_probability(state.p1_card, alpha):
        reward = _showdown(state, 2.0)
    else:
        reward = 1.0
    settled = PokerState(state.agent_card, state.p1_card, state.p1_action, settled=True)
    return SETTLED, reward, settled


def kuhn_best_response_value(alpha: float = NASH_ALPHA) -> float:
    """고정된 P1 전략에 대한 최선 응답의 한 판당 기대 보상 (게임 트리 전수 계산)"""
    total = 0.0
    for agent_card in (JACK, QUEEN, KING):
        for p1_action in (PASS, BET):
            values = [0.0, 0.0]
            for p1_card in (JACK, QUEEN, KING):
                if p1_card == agent_card:
                    continue
                bet = p1_bet_probability(p1_card, alpha)
                weight = (bet if p1_action == BET else 1.0 - bet) / 6.0
                if weight == 0:
                    continue
                state = PokerState(agent_card, p1_card, p1_action)
                if p1_action == BET:
                    values[PASS] += weight * -1.0
                    values[BET] += weight * _showdown(state, 2.0)
                else:
                    call = p1_call_probability(p1_card, alpha)
                    values[PASS] += weight * _showdown(state, 1.0)
                    values[BET] += weight * (call * _showdown(state, 2.0) + (1.0 - call) * 1.0)
            total += max(values)
    return total


class KuhnPoker(Environment):
    spec = KUHN_SPEC

    def __init__(self, seed: Optional[int] = None, alpha: float = NASH_ALPHA):
        super().__init__(seed)
        if not 0.0 <= alpha <= 1.0 / 3.0:
            raise ValueError(f"Nash parameter must lie in [0, 1/3], got {alpha}")
        self.alpha = alpha

    def reset(self) -> int:
        self.state = deal(self.rng, self.alpha)
        self.episode_done = False
        return self.state.observation

    def _transition(self, action: int) -> Tuple[int, float]:
        observation, reward, self.state = kuhn_step(self.state, action, self.rng, self.alpha)
        self.episode_done = self.state.settled
        return observation, reward
