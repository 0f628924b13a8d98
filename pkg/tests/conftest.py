import numpy as np
import pytest

from phimdp.context_tree import root_tree, split
from phimdp.history import Alphabets, History


@pytest.fixture
def oct_alphabets():
    # 행동이 하나뿐인 경우 = 관측 컨텍스트 트리
    return Alphabets(num_actions=1, num_observations=2, reward_values=(0.0, 1.0))


@pytest.fixture
def binary_alphabets():
    return Alphabets(num_actions=2, num_observations=2, reward_values=(0.0, 1.0))


@pytest.fixture
def short_history(oct_alphabets):
    # h_5 = 1 1 1 0 1 (o_1 은 헤더)
    history = History(oct_alphabets, initial_observation=1)
    for o in (1, 1, 0, 1):
        history.append_step(0, o, 0.0)
    return history


@pytest.fixture
def full_depth2_tree(oct_alphabets):
    """상태 {00, 01, 10, 11}"""
    tree = split(root_tree(oct_alphabets), ())
    tree = split(tree, (0,))
    return split(tree, (1,))


@pytest.fixture
def non_markov_tree(oct_alphabets):
    """상태 {0, 001, 101, 11}, Markov 가 아닌 트리"""
    tree = split(root_tree(oct_alphabets), ())
    tree = split(tree, (1,))
    return split(tree, (1, 0, 0))


@pytest.fixture
def deep_tree(binary_alphabets):
    """리프 0, 001, 00101 이 있는 |A| = |O| = 2 트리"""
    tree = split(root_tree(binary_alphabets), ())
    tree = split(tree, (1,))
    tree = split(tree, (1, 0))
    tree = split(tree, (1, 0, 1))
    return split(tree, (1, 0, 1, 0))


def random_history(alphabets: Alphabets, length: int, seed: int = 0) -> History:
    rng = np.random.default_rng(seed)
    history = History(alphabets, initial_observation=int(rng.integers(alphabets.num_observations)))
    for _ in range(length):
        history.append_step(
            int(rng.integers(alphabets.num_actions)),
            int(rng.integers(alphabets.num_observations)),
            alphabets.reward_values[int(rng.integers(alphabets.num_rewards))],
        )
    return history


@pytest.fixture
def make_random_history():
    return random_history
