import csv
import io

import numpy as np
import pytest

from szegedy_search.errors import InconsistentBasisError, UnsupportedStructureError
from szegedy_search.graph_core import (
    MarkedSet,
    absorbing_matrix,
    cycle_graph,
    diagonal_marked_set,
    edge_basis,
    torus_grid_graph,
    transition_matrix,
)
from szegedy_search.szegedy_engine import (
    EdgeState,
    SignState,
    detect_period,
    evolve,
    initial_sign_state,
    initial_state,
    measure_x,
    reflect_a,
    reflect_b,
    reflect_projector,
    sign_step,
    sign_table,
    signs_of,
    uniform_initial_state,
    walk_step,
)

from reference_tables import TABLE1

N6_MARKED = MarkedSet((0, 1, 3), 6)


@pytest.fixture
def n6_walk():
    return absorbing_matrix(transition_matrix(cycle_graph(6)), N6_MARKED)


def random_state(basis, rng):
    v = rng.normal(size=len(basis))
    return EdgeState(basis, v / np.linalg.norm(v))


def signs_str(state, pairs):
    return "".join("+" if state.amplitude(x, y) > 0 else "-" for x, y in pairs)


def test_initial_state_amplitudes(n6_walk):
    psi = initial_state(n6_walk)
    basis = psi.basis
    edges = psi.amplitudes[basis.edge_positions]
    np.testing.assert_allclose(edges, 1 / np.sqrt(12), rtol=0, atol=1e-15)
    assert np.all(psi.amplitudes[basis.is_loop] == 0)
    small = transition_matrix(cycle_graph(3))
    np.testing.assert_allclose(initial_state(small).amplitudes, 1 / np.sqrt(6), atol=1e-15)


@pytest.mark.parametrize("n", [3, 6, 11])
def test_initial_state_measures_uniform(n):
    np.testing.assert_allclose(measure_x(initial_state(transition_matrix(cycle_graph(n)))).probs, 1 / n, atol=1e-15)


def test_initial_state_basis_mismatch():
    p = transition_matrix(cycle_graph(6))
    with pytest.raises(InconsistentBasisError):
        uniform_initial_state(p, edge_basis(transition_matrix(cycle_graph(5))))


def test_first_reflection_flips_marked(n6_walk):
    psi = initial_state(n6_walk)
    after = reflect_a(n6_walk, psi)
    for (x, y), a in zip(after.basis.pairs, after.amplitudes):
        if x == y:
            assert a == 0
        elif x in N6_MARKED:
            assert a == pytest.approx(-1 / np.sqrt(12), abs=1e-15)
        else:
            assert a == pytest.approx(1 / np.sqrt(12), abs=1e-15)


def test_unmarked_pair_same_and_opposite_signs():
    p = transition_matrix(cycle_graph(6))
    basis = edge_basis(p)
    same = initial_state(p)
    c = same.amplitude(2, 3)
    assert np.array_equal(reflect_a(p, same).amplitudes, same.amplitudes)
    amps = same.amplitudes.copy()
    amps[basis.index_of((2, 3))] = -c
    flipped = reflect_a(p, EdgeState(basis, amps))
    assert flipped.amplitude(2, 3) == c
    assert flipped.amplitude(2, 1) == -c


def test_first_step_sign_sequence(n6_walk):
    # initial state, after R_a', after one full step
    states = evolve(n6_walk, 2, record_half_steps=True)
    assert [s.stage for s in states] == ["(W')^0", "R_a'(W')^0", "(W')^1", "R_a'(W')^1", "(W')^2"]
    order = [(x, (x + d) % 6) for x in range(6) for d in (-1, 1)]
    assert signs_str(states[1], order) == "----++--++++"
    # R_b' on the flipped state: vertex 3 (1-based) in Y keeps its pair of minuses, 5 and 6 flip
    assert signs_str(reflect_b(n6_walk, states[1]), order) == signs_str(states[2], order)
    assert signs_str(states[2], order) == "+++----+----"


def test_two_steps_table_column(n6_walk):
    state = evolve(n6_walk, 2)[-1]
    assert state.amplitude(0, 5) < 0  # |1,6>
    assert state.amplitude(0, 1) > 0  # |1,2>


def test_six_steps_return(n6_walk):
    traj = evolve(n6_walk, 6)
    assert np.max(np.abs(traj[-1].amplitudes - traj[0].amplitudes)) < 1e-10


def test_evolve_recording(n6_walk):
    assert len(evolve(n6_walk, 0)) == 1
    traj = evolve(n6_walk, 5, record_half_steps=True)
    assert len(traj) == 11
    assert all(abs(s.norm() - 1) < 1e-10 for s in traj)
    order = [(x, (x + d) % 6) for x in range(6) for d in (-1, 1)]
    stages = ["(W')^2", "R_a'(W')^2", "(W')^3", "R_a'(W')^3", "(W')^4", "R_a'(W')^4", "(W')^5"]
    by_stage = {s.stage: s for s in traj}
    for j, stage in enumerate(stages):
        column = "".join(TABLE1[f"|{x + 1},{y + 1}>"][j] for x, y in order)
        assert signs_str(by_stage[stage], order) == column


def test_detect_period(n6_walk):
    assert detect_period(n6_walk, 20, 1e-10) == 6
    assert detect_period(transition_matrix(cycle_graph(7)), 5) == 1
    # regression constant observed from the dense simulator
    single = absorbing_matrix(transition_matrix(cycle_graph(8)), MarkedSet((0,), 8))
    assert detect_period(single, 64) == 8
    assert detect_period(n6_walk, 5) is None


def test_measure_basis_state():
    p = transition_matrix(cycle_graph(5))
    basis = edge_basis(p)
    amps = np.zeros(len(basis))
    amps[basis.index_of((3, 4))] = 1.0
    probs = measure_x(EdgeState(basis, amps)).probs
    assert probs[3] == 1 and probs.sum() == 1


def test_marked_special_case_matches_projector():
    rng = np.random.default_rng(0)
    for pp in (
        absorbing_matrix(transition_matrix(cycle_graph(6)), N6_MARKED),
        absorbing_matrix(transition_matrix(torus_grid_graph(4)), MarkedSet((0, 5, 6, 15), 16)),
    ):
        basis = edge_basis(pp)
        for _ in range(5):
            s = random_state(basis, rng)
            np.testing.assert_allclose(reflect_a(pp, s).amplitudes, reflect_projector(pp, s, 0).amplitudes, atol=1e-14)
            np.testing.assert_allclose(reflect_b(pp, s).amplitudes, reflect_projector(pp, s, 1).amplitudes, atol=1e-14)


@pytest.mark.parametrize(
    "make",
    [
        lambda: absorbing_matrix(transition_matrix(cycle_graph(9)), MarkedSet((1, 2, 7), 9)),
        lambda: absorbing_matrix(transition_matrix(torus_grid_graph(5)), diagonal_marked_set(5)),
        lambda: absorbing_matrix(transition_matrix(torus_grid_graph(4)), MarkedSet((3,), 16)),
        lambda: transition_matrix(cycle_graph(10)),
    ],
)
def test_reflections_are_involutions(make):
    pp = make()
    basis = edge_basis(pp)
    rng = np.random.default_rng(1)
    for _ in range(20):
        s = random_state(basis, rng)
        assert np.max(np.abs(reflect_a(pp, reflect_a(pp, s)).amplitudes - s.amplitudes)) < 1e-12
        assert np.max(np.abs(reflect_b(pp, reflect_b(pp, s)).amplitudes - s.amplitudes)) < 1e-12
        assert abs(walk_step(pp, s).norm() - 1) < 1e-12


def test_reflect_b_fixes_uniform_groups():
    p = transition_matrix(torus_grid_graph(3))
    s = initial_state(p)
    assert np.array_equal(reflect_b(p, s).amplitudes, s.amplitudes)


def test_state_basis_checked(n6_walk):
    with pytest.raises(InconsistentBasisError):
        reflect_a(n6_walk, initial_state(transition_matrix(cycle_graph(6))))


# --- sign tracker -------------------------------------------------------------

def test_sign_step_two_steps_matches_table():
    s = initial_sign_state(6, N6_MARKED)
    for _ in range(2):
        s = sign_step(N6_MARKED, s)
    state = s.to_edge_state()
    order = [(x, (x + d) % 6) for x in range(6) for d in (-1, 1)]
    assert signs_str(state, order) == "".join(TABLE1[f"|{x + 1},{y + 1}>"][0] for x, y in order)


def test_sign_step_no_marked_is_fixed():
    none = MarkedSet((), 8)
    s = initial_sign_state(8, none)
    assert np.array_equal(sign_step(none, s).signs, s.signs)


def test_sign_step_period_six():
    s0 = initial_sign_state(6, N6_MARKED)
    s = s0
    for _ in range(6):
        s = sign_step(N6_MARKED, s)
    assert np.array_equal(s.signs, s0.signs)


def test_sign_state_validation():
    s = initial_sign_state(5, MarkedSet((1,), 5))
    with pytest.raises(ValueError):
        SignState(s.basis, np.zeros_like(s.signs))
    assert abs(s.to_edge_state().norm() - 1) < 1e-15


def test_sign_step_rejects_torus():
    pp = absorbing_matrix(transition_matrix(torus_grid_graph(3)), diagonal_marked_set(3))
    basis = edge_basis(pp)
    s = SignState(basis, np.ones(len(basis.edge_positions), dtype=np.int8))
    with pytest.raises(UnsupportedStructureError):
        sign_step(diagonal_marked_set(3), s)


def test_sign_table_reproduces_reference():
    table = sign_table(6, N6_MARKED, 5, first=2)
    assert table.signs.shape == (12, 8)
    for row, label in enumerate(table.edge_labels):
        assert table.column_values(row) == TABLE1[label]
    assert list(table.edge_labels) == list(TABLE1)


def test_sign_table_initial_column_all_plus():
    table = sign_table(7, MarkedSet((2, 3), 7), 3)
    assert table.column("(W')^0") == "+" * 14


@pytest.mark.parametrize("n,marked", [(5, (0,)), (8, (1, 2, 6)), (10, ()), (4, (0, 1, 2, 3))])
def test_sign_table_matches_dense(n, marked):
    m = MarkedSet(marked, n)
    table = sign_table(n, m, 12)
    pp = absorbing_matrix(transition_matrix(cycle_graph(n)), m)
    traj = {s.stage: s for s in evolve(pp, 13, record_half_steps=True)}
    for j, stage in enumerate(table.stages):
        state = traj[stage]
        dense = "".join("+" if state.amplitude(x, y) > 0 else "-" for x, y in table.edges)
        assert dense == table.column(stage)


def test_sign_table_csv_and_text():
    table = sign_table(6, N6_MARKED, 5, first=2)
    rows = list(csv.reader(io.StringIO(table.to_csv())))
    assert len(rows) == 13
    assert all(len(r) == 9 for r in rows)
    assert rows[1] == ["|1,6>", *TABLE1["|1,6>"]]
    text = table.to_text()
    assert "R_a'(W')^5" in text and text.count("|") == 12


def test_signs_of_helper(n6_walk):
    s = evolve(n6_walk, 1)[-1]
    assert set(np.unique(signs_of(s)).tolist()) <= {-1, 1}
