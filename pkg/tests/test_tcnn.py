"""Chaotic matching network: dynamics invariants, the assignment energy
encoding, both oracle routes, and the nearest-neighbour baseline."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arpps.tcnn import (
    EXHAUSTIVE_LIMIT,
    HopfieldWeights,
    MatchProblem,
    TcnnParams,
    brute_force_match,
    build_matching_network,
    initial_state,
    matching_energy,
    nn_baseline_match,
    row_col_sums_ok,
    run_matching,
    separable_problem,
    tcnn_step,
)


def problem_from_c(c):
    c = np.asarray(c, dtype=np.float64)
    m, n = c.shape
    return MatchProblem(g=np.zeros((m, 1)), s=np.zeros((n, 1)), c=c)


def network_energy(v, weights):
    """Hopfield Lyapunov energy -x'Wx/2 - I'x on a binary state."""
    x = np.asarray(v, dtype=np.float64).reshape(-1)
    return float(-0.5 * x @ weights.w @ x - weights.i_bias @ x)


# ---------------------------------------------------------------------------
# parameters and activation

def test_param_validation():
    with pytest.raises(ValueError):
        TcnnParams(k=1.5)
    with pytest.raises(ValueError):
        TcnnParams(alpha=0.0)
    with pytest.raises(ValueError):
        TcnnParams(beta=1.0)
    with pytest.raises(ValueError):
        TcnnParams(z0=-0.1)
    with pytest.raises(ValueError):
        TcnnParams(binarize_threshold=1.0)


def test_default_parameter_values():
    p = TcnnParams()
    assert (p.k, p.alpha, p.beta, p.i0) == (0.9, 0.015, 0.015, 0.65)
    assert p.epsilon == 1.0 / 250.0
    assert p.z0 == 0.08


def test_sigmoid_midpoint():
    p = TcnnParams()
    assert p.activate(np.array(0.0)) == 0.5


def test_default_activation_is_steep():
    p = TcnnParams()
    assert p.activate(np.array(0.02)) > 0.98
    # the shallow as-printed variant barely moves for the same input
    q = TcnnParams(printed_activation=True)
    assert q.activate(np.array(0.02)) < 0.51


def test_activation_never_touches_bounds():
    p = TcnnParams()
    x = p.activate(np.array([-1e6, -50.0, 0.0, 50.0, 1e6]))
    assert np.all(x > 0.0) and np.all(x < 1.0)


def test_printed_activation_formula():
    q = TcnnParams(printed_activation=True)
    y = np.array([-0.3, 0.2, 1.1])
    want = 1.0 / (1.0 + np.exp(-y * (1.0 + q.epsilon)))
    assert np.allclose(q.activate(y), want, atol=0.0)


# ---------------------------------------------------------------------------
# network construction

def test_single_neuron_network():
    p = problem_from_c([[0.7]])
    w = build_matching_network(p, 1.0, 1.0, 0.5)
    assert w.w.shape == (1, 1) and w.w[0, 0] == 0.0
    # bias absorbs the lost quadratic terms at half weight
    assert w.i_bias[0] == pytest.approx(0.5 * (1.0 + 1.0) + 0.5 * 0.7)


def test_same_row_coupling():
    p = problem_from_c([[0.2, 0.8]])
    w = build_matching_network(p, 1.3, 0.9, 0.5).w
    assert w[0, 1] == -1.3
    assert w[1, 0] == -1.3


def test_same_column_coupling():
    p = problem_from_c([[0.2], [0.8]])
    w = build_matching_network(p, 1.3, 0.9, 0.5).w
    assert w[0, 1] == -0.9


@given(m=st.integers(1, 4), n=st.integers(1, 4), seed=st.integers(0, 1000))
@settings(max_examples=80)
def test_weights_symmetric_zero_diagonal(m, n, seed):
    rng = np.random.default_rng(seed)
    p = problem_from_c(rng.uniform(0.0, 1.0, size=(m, n)))
    w = build_matching_network(p, 1.0, 1.0, 0.5).w
    assert np.array_equal(w, w.T)
    assert np.all(np.diag(w) == 0.0)


def test_non_positive_coefficients_rejected():
    p = problem_from_c([[0.5]])
    for bad in [(0.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, 0.0)]:
        with pytest.raises(ValueError):
            build_matching_network(p, *bad)


def test_network_energy_equals_matching_energy_up_to_constant():
    """The realized Lyapunov energy must track the assignment energy with
    a v-independent offset; checked exhaustively on a 2x2 grid."""
    rng = np.random.default_rng(5)
    p = problem_from_c(rng.uniform(0.0, 1.0, size=(2, 2)))
    weights = build_matching_network(p, 1.1, 0.8, 0.4)
    offsets = set()
    for bits in itertools.product([0, 1], repeat=4):
        v = np.array(bits).reshape(2, 2)
        diff = matching_energy(v, p, 1.1, 0.8, 0.4) - network_energy(v, weights)
        offsets.add(round(diff, 12))
    assert len(offsets) == 1


def test_identity_permutation_is_unique_optimum_3x3():
    p = problem_from_c(np.eye(3))
    e_id = matching_energy(np.eye(3), p, 1.0, 1.0, 0.5)
    for bits in itertools.product([0, 1], repeat=9):
        v = np.array(bits).reshape(3, 3)
        if np.array_equal(v, np.eye(3)):
            continue
        assert matching_energy(v, p, 1.0, 1.0, 0.5) > e_id


# ---------------------------------------------------------------------------
# dynamics

def test_z_first_step():
    p = problem_from_c([[1.0]])
    params = TcnnParams()
    state = tcnn_step(initial_state(p, params), build_matching_network(p, 1, 1, 0.5), params)
    assert state.z == pytest.approx(0.0788, abs=1e-15)


def test_z_decays_geometrically():
    p = problem_from_c([[1.0, 0.2], [0.1, 0.9]])
    params = TcnnParams()
    weights = build_matching_network(p, 1.0, 1.0, 0.5)
    state = initial_state(p, params, seed=1)
    z_prev = state.z
    for t in range(1, 201):
        state = tcnn_step(state, weights, params)
        assert state.z == pytest.approx((1 - params.beta) ** t * params.z0, abs=1e-12)
        assert state.z <= z_prev
        z_prev = state.z


def test_outputs_stay_in_open_unit_interval():
    p = problem_from_c([[1.0, 0.1], [0.2, 0.8]])
    params = TcnnParams()
    weights = build_matching_network(p, 1.0, 1.0, 0.5)
    state = initial_state(p, params, seed=3)
    for _ in range(300):
        state = tcnn_step(state, weights, params)
        assert np.all(state.x > 0.0) and np.all(state.x < 1.0)


def test_plain_hopfield_step_by_hand():
    """z0 = 0 and k = 1 reduce the update to y' = y + alpha*(Wx + I)."""
    p = problem_from_c([[0.6, 0.3]])
    params = TcnnParams(k=1.0, z0=0.0)
    weights = build_matching_network(p, 1.0, 1.0, 0.5)
    y0 = np.array([[0.002, -0.001]])
    state = TcnnState_like(y0, params)
    out = tcnn_step(state, weights, params)
    x0 = params.activate(y0).reshape(-1)
    want = y0.reshape(-1) + params.alpha * (weights.w @ x0 + weights.i_bias)
    assert np.allclose(out.y.reshape(-1), want, atol=0.0)


def TcnnState_like(y, params):
    from arpps.tcnn import TcnnState
    return TcnnState(x=params.activate(y), y=y, z=params.z0, t=0)


def test_step_shape_mismatch_rejected():
    p2 = problem_from_c([[1.0, 0.0]])
    p3 = problem_from_c([[1.0, 0.0, 0.0]])
    params = TcnnParams()
    with pytest.raises(ValueError):
        tcnn_step(initial_state(p3, params), build_matching_network(p2, 1, 1, 0.5), params)


def test_same_seed_identical_trajectory():
    p = separable_problem(2, 3, 3)
    a = run_matching(p, seed=9)
    b = run_matching(p, seed=9)
    assert np.array_equal(a.v, b.v)
    assert a.steps_used == b.steps_used and a.converged == b.converged


# ---------------------------------------------------------------------------
# matching runs

def test_single_pair_matches():
    p = problem_from_c([[1.0]])
    got = run_matching(p)
    assert got.converged
    assert got.v.tolist() == [[1]]
    assert got.pairs() == [(0, 0)]


def test_identity_dominant_three_by_three():
    g = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    p = MatchProblem.from_descriptors(g, g)
    got = run_matching(p)
    assert got.converged
    assert np.array_equal(got.v, np.eye(3, dtype=np.int8))
    oracle = brute_force_match(p, mode="exhaustive")
    assert np.array_equal(oracle.v, np.eye(3, dtype=np.int8))


def test_two_refs_three_scenes_unrelated_column_stays_empty():
    g = np.array([[0.0, 0.0], [1.0, 0.0]])
    s = np.array([[0.0, 0.0], [1.0, 0.0], [40.0, 40.0]])
    p = MatchProblem.from_descriptors(g, s)
    got = run_matching(p)
    assert np.array_equal(got.v, [[1, 0, 0], [0, 1, 0]])
    assert np.all(got.v[:, 2] == 0)
    assert np.all(got.v.sum(axis=1) == 1)
    # the exhaustive oracle agrees that leaving the far column empty wins
    oracle = brute_force_match(p, mode="exhaustive")
    assert np.array_equal(oracle.v, got.v)


def test_converged_outputs_satisfy_sum_bounds():
    for seed in range(8):
        p = separable_problem(seed, 4, 4)
        got = run_matching(p, seed=seed)
        if got.converged:
            assert row_col_sums_ok(got.v)


def test_separable_matches_oracle_small():
    for seed in range(10):
        p = separable_problem(seed, 3, 3)
        got = run_matching(p, seed=seed)
        oracle = brute_force_match(p, mode="exhaustive")
        assert np.array_equal(got.v, oracle.v), f"seed {seed}"


# ---------------------------------------------------------------------------
# oracle routes

def test_identity_two_by_two():
    p = problem_from_c(np.eye(2))
    got = brute_force_match(p, mode="exhaustive")
    assert np.array_equal(got.v, np.eye(2, dtype=np.int8))


def test_exhaustive_agrees_with_permutation_route_square():
    """Two independent searches over different candidate spaces. On square
    instances with rewards below the unit penalties the optimum is a
    permutation, so both routes must return the identical matrix."""
    rng = np.random.default_rng(31)
    for _ in range(40):
        n = int(rng.integers(2, 5))
        c = rng.uniform(0.0, 1.0, size=(n, n))
        p = problem_from_c(c)
        a = brute_force_match(p, mode="exhaustive")
        b = brute_force_match(p, mode="permutations")
        assert np.array_equal(a.v, b.v), c


def test_rectangular_exhaustive_never_above_permutation_route():
    """For M < N the column penalty makes over-assigning a row cheaper
    than leaving a strong column empty, so the unconstrained optimum can
    sit strictly below the best one-to-one assignment. The subset
    relation between the two searches must still hold."""
    rng = np.random.default_rng(107)
    saw_strictly_better = False
    for _ in range(30):
        m = 2
        n = int(rng.integers(3, 5))
        c = rng.uniform(0.5, 1.0, size=(m, n))
        p = problem_from_c(c)
        a = brute_force_match(p, mode="exhaustive")
        b = brute_force_match(p, mode="permutations")
        ea = matching_energy(a.v, p, 1.0, 1.0, 0.5)
        eb = matching_energy(b.v, p, 1.0, 1.0, 0.5)
        assert ea <= eb + 1e-12
        assert b.v.sum() == m and np.all(b.v.sum(axis=1) == 1)
        if ea < eb - 1e-9:
            saw_strictly_better = True
    assert saw_strictly_better


def test_dominant_row_entries_greedy_equals_exhaustive():
    c = np.array([[0.9, 0.1, 0.0], [0.1, 0.95, 0.2], [0.0, 0.1, 0.85]])
    p = problem_from_c(c)
    got = brute_force_match(p, mode="exhaustive")
    greedy = np.zeros_like(c, dtype=np.int8)
    greedy[np.arange(3), c.argmax(axis=1)] = 1
    assert np.array_equal(got.v, greedy)


def test_exhaustive_tie_break_lexicographic():
    # two optimal assignments; the flattened-lexicographically-smaller wins
    p = problem_from_c(np.full((2, 2), 0.9))
    got = brute_force_match(p, mode="exhaustive")
    perm = brute_force_match(p, mode="permutations")
    assert np.array_equal(got.v, [[0, 1], [1, 0]])
    assert np.array_equal(perm.v, got.v)


def test_exhaustive_size_bound():
    p = problem_from_c(np.zeros((2, 13)) + 0.5)
    with pytest.raises(ValueError):
        brute_force_match(p, mode="exhaustive")


def test_permutation_size_bound():
    p = problem_from_c(np.zeros((13, 13)) + 0.5)
    with pytest.raises(ValueError):
        brute_force_match(p, mode="permutations")


def test_unknown_mode_rejected():
    with pytest.raises(ValueError):
        brute_force_match(problem_from_c([[0.5]]), mode="magic")


def test_permutation_route_handles_wide_and_tall():
    rng = np.random.default_rng(77)
    c_wide = rng.uniform(0.5, 1.0, size=(2, 4))
    c_tall = c_wide.T.copy()
    a = brute_force_match(problem_from_c(c_wide), mode="permutations")
    b = brute_force_match(problem_from_c(c_tall), mode="permutations")
    assert np.array_equal(a.v, b.v.T)
    assert a.v.sum() == 2


# ---------------------------------------------------------------------------
# nearest-neighbour baseline

def test_baseline_identity_on_identical_sets():
    g = np.array([[0.0, 0.0], [5.0, 0.0], [0.0, 5.0]])
    got = nn_baseline_match(MatchProblem.from_descriptors(g, g))
    assert np.array_equal(got.v, np.eye(3, dtype=np.int8))


def test_baseline_single_scene_skips_ratio_test():
    g = np.array([[0.0], [10.0]])
    s = np.array([[0.1]])
    got = nn_baseline_match(MatchProblem.from_descriptors(g, s, sigma=5.0))
    assert got.v.tolist() == [[1], [0]]


def test_baseline_ratio_test_drops_ambiguous():
    g = np.array([[0.0]])
    s = np.array([[1.0], [1.05]])
    got = nn_baseline_match(MatchProblem.from_descriptors(g, s, sigma=2.0))
    assert got.v.sum() == 0


def test_baseline_mutual_best_is_one_to_one():
    rng = np.random.default_rng(13)
    for _ in range(20):
        g = rng.uniform(-2, 2, size=(4, 3))
        s = rng.uniform(-2, 2, size=(5, 3))
        got = nn_baseline_match(MatchProblem.from_descriptors(g, s))
        assert row_col_sums_ok(got.v)


# ---------------------------------------------------------------------------
# separable instance builder

def test_separable_margin_holds():
    for seed in [0, 4, 17]:
        p = separable_problem(seed, 5, 5, min_margin=0.5)
        best = p.c.max(axis=1)
        second = np.sort(p.c, axis=1)[:, -2]
        assert np.all(best - second >= 0.5)


def test_problem_validation():
    with pytest.raises(ValueError):
        MatchProblem(g=np.zeros((2, 3)), s=np.zeros((2, 2)), c=np.zeros((2, 2)))
    with pytest.raises(ValueError):
        MatchProblem(g=np.zeros((2, 2)), s=np.zeros((2, 2)), c=np.full((2, 2), 1.5))
    with pytest.raises(ValueError):
        MatchProblem.from_descriptors(np.zeros((1, 1)), np.zeros((1, 1)), sigma=0.0)
