import numpy as np
import pytest

from resilient_recovery.model import (AttackScenario, LtiSystem,
                                      ObservationWindow,
                                      UnobservableWindowError,
                                      build_observability, flatten_supports,
                                      random_system, simulate_window)


def test_horizon_one_observability_is_c():
    sys = LtiSystem(a=np.array([[0.5, 1.0], [0.0, 0.5]]), c=np.eye(2))
    assert np.array_equal(build_observability(sys, 1), sys.c)


def test_scalar_observability_stacks_newest_first():
    sys = LtiSystem(a=np.array([[2.0]]), c=np.array([[1.0]]))
    h = build_observability(sys, 3)
    assert h.tolist() == [[4.0], [2.0], [1.0]]


def test_identity_observability_two_blocks():
    sys = LtiSystem(a=np.eye(2), c=np.eye(2))
    h = build_observability(sys, 2)
    assert np.array_equal(h, np.vstack([np.eye(2), np.eye(2)]))


def test_unobservable_window_raises():
    sys = LtiSystem(a=np.eye(2), c=np.array([[1.0, 0.0]]))
    with pytest.raises(UnobservableWindowError):
        build_observability(sys, 1)


def test_flatten_supports():
    assert flatten_supports([frozenset({1}), frozenset({2})], 3) == frozenset({1, 5})
    assert flatten_supports([frozenset({3})], 3) == frozenset({3})
    assert flatten_supports([frozenset(), frozenset()], 4) == frozenset()


def test_flatten_supports_rejects_out_of_range_channel():
    with pytest.raises(ValueError):
        flatten_supports([frozenset({4})], 3)


def _clean_scenario(horizon, m, k=0, eps=1.0):
    supports = tuple(frozenset() for _ in range(horizon))
    return AttackScenario(supports=supports, e=np.zeros(horizon * m), k=k, eps=eps)


def test_simulate_window_without_attack():
    rng = np.random.default_rng(3)
    sys = random_system(4, 2, rng)
    x0 = np.array([1.0, -2.0])
    window = simulate_window(sys, x0, 1, _clean_scenario(1, 4))
    assert np.allclose(window.y, window.h @ x0)
    assert np.array_equal(window.base_state, x0)
    assert window.width == 4 and window.n_channels == 4


def test_simulate_window_scalar_example():
    sys = LtiSystem(a=np.array([[2.0]]), c=np.array([[1.0]]))
    e = np.array([0.0, 0.0, 0.5])
    scenario = AttackScenario(
        supports=(frozenset(), frozenset(), frozenset({1})), e=e, k=1, eps=1.0)
    window = simulate_window(sys, np.array([1.0]), 3, scenario)
    assert window.y.tolist() == [4.0, 2.0, 1.5]


def test_attack_scenario_stacked_support():
    e = np.zeros(6)
    e[0] = 2.0
    e[4] = -1.0
    scenario = AttackScenario(
        supports=(frozenset({1}), frozenset({2})), e=e, k=1, eps=0.5)
    assert scenario.stacked_support == frozenset({1, 5})
    assert scenario.n_channels == 3


def test_attack_scenario_rejects_oversized_support():
    with pytest.raises(ValueError):
        AttackScenario(supports=(frozenset({1, 2}),), e=np.zeros(3), k=1, eps=1.0)


def test_attack_scenario_rejects_offsupport_mass_at_budget():
    e = np.array([0.0, 0.6, 0.6])
    with pytest.raises(ValueError):
        AttackScenario(supports=(frozenset({1}),), e=e, k=1, eps=1.0)


def test_attack_scenario_rejects_nonpositive_budget():
    with pytest.raises(ValueError):
        AttackScenario(supports=(frozenset(),), e=np.zeros(2), k=0, eps=0.0)


def test_observation_window_validation():
    with pytest.raises(ValueError):
        ObservationWindow(horizon=1, h=np.eye(2), y=np.zeros(3))
    with pytest.raises(ValueError):
        ObservationWindow(horizon=2, h=np.ones((3, 1)), y=np.zeros(3))
    with pytest.raises(UnobservableWindowError):
        ObservationWindow(horizon=1, h=np.zeros((2, 2)), y=np.zeros(2))


def test_random_system_deterministic_and_observable():
    first = random_system(10, 5, np.random.default_rng(42))
    second = random_system(10, 5, np.random.default_rng(42))
    assert np.array_equal(first.a, second.a) and np.array_equal(first.c, second.c)
    assert np.linalg.matrix_rank(build_observability(first, 1)) == 5


def test_random_system_square_and_undersized():
    sys = random_system(5, 5, np.random.default_rng(0))
    assert sys.n_channels == 5 and sys.n_states == 5
    with pytest.raises(ValueError):
        random_system(4, 5, np.random.default_rng(0))


def test_random_system_spectral_radius():
    sys = random_system(6, 3, np.random.default_rng(1), spectral_radius=0.9)
    assert np.max(np.abs(np.linalg.eigvals(sys.a))) == pytest.approx(0.9, abs=1e-9)


def test_norm_chain_property():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        x = rng.standard_normal(n) * float(rng.uniform(0.1, 10))
        inf, two, one = (np.linalg.norm(x, np.inf), np.linalg.norm(x),
                         np.linalg.norm(x, 1))
        slack = 1e-12
        assert inf <= two + slack
        assert two <= one + slack
        assert one <= np.sqrt(n) * two + slack
        assert np.sqrt(n) * two <= n * inf + slack
