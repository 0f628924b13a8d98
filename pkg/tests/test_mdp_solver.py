import numpy as np
import pytest

from phimdp.context_tree import root_tree, split
from phimdp.environments.grid import grid_true_model
from phimdp.history import Alphabets, History
from phimdp.mdp_solver import (
    MdpModel, QTable, avi, estimate_model, greedy_action, optimistic_fill, q_learning_step,
    relative_value_iteration,
)
from phimdp.utils.csv_io import qtable_to_csv


def single_symbol_history(rewards, reward_values=(0.0, 1.0)):
    alphabets = Alphabets(num_actions=1, num_observations=1, reward_values=reward_values)
    history = History(alphabets)
    for r in rewards:
        history.append_step(0, 0, r)
    return history


def model_from(transitions, rewards, r_max=1.0):
    transitions = np.asarray(transitions, dtype=float)
    rewards = np.asarray(rewards, dtype=float)
    visits = np.ones(transitions.shape[:2], dtype=np.int64)
    return MdpModel(transitions=transitions, rewards=rewards, visits=visits, r_max=r_max)


def test_estimate_model_optimistic_reward():
    history = single_symbol_history([1.0, 1.0, 1.0])
    model = estimate_model(root_tree(history.alphabets), history)
    assert model.transitions[0, 0, 0] == pytest.approx(1.0)
    assert model.rewards[0, 0, 0] == pytest.approx(1.0)
    assert model.visits[0, 0] == 3


def test_estimate_model_r_max_pulls_reward_up():
    history = single_symbol_history([0.0])
    model = estimate_model(root_tree(history.alphabets), history, r_max=10.0)
    assert model.rewards[0, 0, 0] == pytest.approx(5.0)


def test_estimate_model_unvisited_state():
    alphabets = Alphabets(num_actions=1, num_observations=2, reward_values=(0.0, 1.0))
    history = History(alphabets, initial_observation=0)
    history.extend([(0, 0, 0.0)] * 10)
    tree = split(root_tree(alphabets, 2), ())
    model = estimate_model(tree, history)
    # 관측 1 은 한 번도 나오지 않았다
    assert model.unseen_states().tolist() == [1]
    assert model.transitions[1, 0] == pytest.approx([0.5, 0.5])
    assert model.rewards[1, 0] == pytest.approx([1.0, 1.0])
    assert model.transitions[0, 0] == pytest.approx([1.0, 0.0])
    assert model.transitions.sum(axis=2) == pytest.approx(np.ones((2, 1)))


def test_avi_single_state():
    qtable = avi(model_from([[[1.0]]], [[[1.0]]]), gamma=0.5)
    assert qtable.converged
    assert qtable.q[0, 0] == pytest.approx(2.0, abs=1e-5)


def test_avi_two_state_chain():
    # s0 -> s1 (보상 0), s1 -> s1 (보상 1)
    transitions = [[[0.0, 1.0]], [[0.0, 1.0]]]
    rewards = [[[0.0, 0.0]], [[0.0, 1.0]]]
    qtable = avi(model_from(transitions, rewards), gamma=0.9)
    assert qtable.q[1, 0] == pytest.approx(10.0, abs=1e-4)
    assert qtable.q[0, 0] == pytest.approx(9.0, abs=1e-4)


def test_avi_gamma_zero_is_one_step_reward():
    transitions = [[[1.0, 0.0], [0.0, 1.0]], [[0.5, 0.5], [1.0, 0.0]]]
    rewards = [[[2.0, 0.0], [0.0, -1.0]], [[4.0, 0.0], [3.0, 0.0]]]
    model = model_from(transitions, rewards)
    qtable = avi(model, gamma=0.0)
    assert qtable.q == pytest.approx(model.expected_rewards())
    assert qtable.q == pytest.approx(np.array([[2.0, -1.0], [2.0, 3.0]]))


def test_avi_reports_non_convergence():
    qtable = avi(model_from([[[1.0]]], [[[1.0]]]), gamma=0.9, max_sweeps=3)
    assert not qtable.converged
    assert qtable.sweeps == 3
    assert qtable.warnings and "not converged" in qtable.warnings[0]


@pytest.mark.parametrize("gamma", [1.0, -0.1])
def test_avi_rejects_bad_gamma(gamma):
    with pytest.raises(ValueError):
        avi(model_from([[[1.0]]], [[[1.0]]]), gamma=gamma)


def test_optimistic_fill_only_touches_unseen_states():
    model = model_from([[[1.0, 0.0]], [[0.5, 0.5]]], [[[1.0, 0.0]], [[1.0, 1.0]]], r_max=1.0)
    model.visits[1, 0] = 0
    qtable = QTable(q=np.zeros((2, 1)), gamma=0.5)
    optimistic_fill(qtable, model)
    assert qtable.q[0, 0] == 0.0
    assert qtable.q[1, 0] == pytest.approx(2.0)


def test_q_learning_single_update():
    qtable = QTable(q=np.zeros((1, 1)), gamma=0.5, eta=0.01)
    q_learning_step(qtable, 0, 0, 1.0, 0)
    assert qtable.q[0, 0] == pytest.approx(0.01)


def test_q_learning_converges_on_constant_reward():
    qtable = QTable(q=np.zeros((1, 1)), gamma=0.5, eta=0.01)
    for _ in range(5000):
        q_learning_step(qtable, 0, 0, 1.0, 0)
    assert qtable.q[0, 0] == pytest.approx(2.0, abs=1e-6)


def test_greedy_action_and_ties():
    qtable = QTable(q=np.array([[1.0, 3.0, 2.0], [0.5, 0.5, 0.5]]))
    assert greedy_action(qtable, 0) == 1
    assert greedy_action(qtable, 1) == 0


def test_qtable_copy_is_independent():
    qtable = QTable(q=np.zeros((2, 2)))
    clone = qtable.copy()
    q_learning_step(clone, 0, 0, 1.0, 1)
    assert qtable.q[0, 0] == 0.0


def test_relative_value_iteration_grid_gain():
    gain, bias, policy = relative_value_iteration(*grid_true_model())
    # 목표까지 평균 맨해튼 거리 48/15 걸음마다 보상 1
    assert gain == pytest.approx(15.0 / 48.0, abs=1e-6)
    assert bias.shape == (15,)
    assert policy.shape == (15,)


def test_relative_value_iteration_two_state_cycle():
    # 주기 2 인 체인: 0 -> 1 (보상 1), 1 -> 0 (보상 0)
    transitions = np.array([[[0.0, 1.0]], [[1.0, 0.0]]])
    rewards = np.array([[1.0], [0.0]])
    gain, _, _ = relative_value_iteration(transitions, rewards)
    assert gain == pytest.approx(0.5, abs=1e-6)


def test_qtable_csv_rows():
    qtable = QTable(q=np.array([[1.0, 2.0], [3.0, 4.0]]))
    lines = qtable_to_csv(qtable).splitlines()
    assert lines[0] == "state,action,q"
    assert lines[1:] == ["0,0,1.0", "0,1,2.0", "1,0,3.0", "1,1,4.0"]


def test_avi_matches_linear_solve_on_grid():
    transitions, expected = grid_true_model()
    num_states = transitions.shape[0]
    rewards = np.repeat(expected[:, :, None], num_states, axis=2)
    model = model_from(transitions, rewards)
    gamma = 0.9
    qtable = avi(model, gamma=gamma, tolerance=1e-10)
    policy = qtable.q.argmax(axis=1)
    rows = np.arange(num_states)
    p_pi = transitions[rows, policy]
    v = np.linalg.solve(np.eye(num_states) - gamma * p_pi, expected[rows, policy])
    q_exact = expected + gamma * transitions @ v
    assert qtable.q == pytest.approx(q_exact, abs=1e-5)
