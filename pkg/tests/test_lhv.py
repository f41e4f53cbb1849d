"""LHV machinery checks: B-vector patterns, quantum probabilities,
weight extraction per the extension theorems, polytope membership."""

import itertools

import numpy as np
import pytest

from lhvcert import extensions as ext
from lhvcert import lhv, states


def test_b_vector_paper_table_pattern():
    # 2 settings / 3 outcomes per party; Alice fixes outcome 1 for setting 1
    # and outcome 3 for setting 2, Bob outcome 1 and outcome 2 (1-based).
    sc = lhv.MeasurementScenario((3, 3), (3, 3))
    b = lhv.b_vector((0, 2), (0, 1), sc)
    expected = np.zeros((6, 6))
    expected[0, 0] = expected[0, 4] = 1.0
    expected[5, 0] = expected[5, 4] = 1.0
    assert np.array_equal(b.table, expected)


def test_b_vector_single_setting():
    sc = lhv.MeasurementScenario((2,), (2,))
    b = lhv.b_vector((1,), (0,), sc)
    assert b.table.sum() == 1.0
    assert b.table[1, 0] == 1.0


def test_b_vector_out_of_range():
    sc = lhv.MeasurementScenario((2, 2), (2,))
    with pytest.raises(ValueError):
        lhv.b_vector((2, 0), (0,), sc)


def test_all_vertices_distinct_2233():
    sc = lhv.MeasurementScenario((3, 3), (3, 3))
    mat = lhv.vertex_matrix(sc)
    assert mat.shape[0] == sc.vertex_count == 81
    assert len({tuple(row) for row in mat}) == 81


def test_vertex_one_per_block():
    sc = lhv.MeasurementScenario((2, 3), (2, 2))
    for m in sc.alice_strategies():
        for n in sc.bob_strategies():
            b = lhv.b_vector(m, n, sc)
            for i in range(sc.s_a):
                for k in range(sc.s_b):
                    assert b.block(i, k).sum() == 1.0


def test_quantum_probabilities_maximally_mixed_uniform():
    rho = states.BipartiteState(np.eye(4, dtype=complex) / 4, (2, 2), "mixed")
    povm = lhv.projective_qubit_povm([0.0, np.pi / 3])
    p = lhv.quantum_probabilities(rho, povm, povm)
    p.validate()
    for i in range(2):
        for k in range(2):
            assert np.max(np.abs(p.block(i, k) - 0.25)) < 1e-12


def test_quantum_probabilities_singlet_anticorrelated():
    singlet = states.werner(2, -1.0)
    povm = lhv.projective_qubit_povm([0.7])
    p = lhv.quantum_probabilities(singlet, povm, povm)
    block = p.block(0, 0)
    assert abs(block[0, 0]) < 1e-12
    assert abs(block[1, 1]) < 1e-12
    assert abs(block[0, 1] - 0.5) < 1e-12


def test_quantum_probabilities_block_sums():
    rng = np.random.Generator(np.random.Philox(60))
    rho = states.random_separable(2, 3, 4, seed=3)
    a = lhv.random_povm_set(2, (2, 4), rng)
    b = lhv.random_povm_set(3, (3, 2), rng)
    p = lhv.quantum_probabilities(rho, a, b)
    p.validate()
    for i in range(2):
        for k in range(2):
            assert abs(p.block(i, k).sum() - 1.0) < 1e-9


def test_povm_validation():
    with pytest.raises(ValueError):
        lhv.PovmSet([[np.eye(2) * 0.5]])                      # does not sum to I
    with pytest.raises(ValueError):
        lhv.PovmSet([[np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])]])  # negative element


def reconstruct_oracle(model):
    """Direct resummation over strategies, independent of reconstruct()."""
    sc = model.scenario
    table = np.zeros(sc.table_shape)
    for u, m in enumerate(sc.alice_strategies()):
        for v, n in enumerate(sc.bob_strategies()):
            table += model.weights[u, v] * lhv.b_vector(m, n, sc).table
    return lhv.ProbabilityVector(sc, table)


def test_reconstruct_single_weight_is_vertex():
    sc = lhv.MeasurementScenario((2, 2), (2, 2))
    weights = np.zeros((4, 4))
    weights[1, 2] = 1.0
    model = lhv.LhvModel(sc, weights)
    rec = lhv.reconstruct(model)
    strategies_a = list(sc.alice_strategies())
    strategies_b = list(sc.bob_strategies())
    expected = lhv.b_vector(strategies_a[1], strategies_b[2], sc)
    assert np.array_equal(rec.table, expected.table)


def test_reconstruct_uniform_weights():
    sc = lhv.MeasurementScenario((2, 2), (2, 2))
    model = lhv.LhvModel(sc, np.full((4, 4), 1.0 / 16.0))
    rec = lhv.reconstruct(model)
    for i in range(2):
        for k in range(2):
            assert np.max(np.abs(rec.block(i, k) - 0.25)) < 1e-12


def test_reconstruct_matches_resummation_oracle():
    rng = np.random.Generator(np.random.Philox(61))
    sc = lhv.MeasurementScenario((2, 3), (2, 2))
    w = rng.random((6, 4))
    w /= w.sum()
    model = lhv.LhvModel(sc, w)
    rec = lhv.reconstruct(model)
    oracle = reconstruct_oracle(model)
    assert rec.max_difference(oracle) < 1e-12


def test_lhv_from_extension_separable_reproduces_quantum():
    ens = states.random_separable_ensemble(3, 3, 5, seed=2)
    rho = ens.state()
    shape = ext.ExtensionShape(3, 3, 2, 2)
    h = ext.product_extension(ens, shape)
    rng = np.random.Generator(np.random.Philox(62))
    a = lhv.random_povm_set(3, (2, 3), rng)
    b = lhv.random_povm_set(3, (2, 2), rng)
    model = lhv.lhv_from_extension(h, a, b)
    model.validate()
    assert model.weights.min() >= -1e-10
    rec = lhv.reconstruct(model)
    quantum = lhv.quantum_probabilities(rho, a, b)
    assert rec.max_difference(quantum) <= 1e-9


def test_lhv_from_extension_product_certificate_trivial_scenario():
    rng = np.random.Generator(np.random.Philox(63))
    ens = states.random_separable_ensemble(2, 2, 1, seed=5)
    rho = ens.state()
    shape = ext.ExtensionShape(2, 2, 1, 1)
    h = ext.product_extension(ens, shape)   # equals rho itself for (1,1)
    a = lhv.random_povm_set(2, (2,), rng)
    b = lhv.random_povm_set(2, (3,), rng)
    model = lhv.lhv_from_extension(h, a, b)
    # a pure product state gives weights = product of outcome probabilities
    pa = [np.vdot(e, np.outer(ens.a_vectors[0], ens.a_vectors[0].conj())).real
          for e in a.settings[0]]
    pb = [np.vdot(e, np.outer(ens.b_vectors[0], ens.b_vectors[0].conj())).real
          for e in b.settings[0]]
    expected = np.outer(pa, pb)
    assert np.max(np.abs(model.weights - expected)) < 1e-10


def test_lhv_from_extension_tiles_two_settings():
    upb = states.tiles_upb()
    h = ext.upb_analytic_extension(upb)
    rho = states.upb_state(upb)
    rng = np.random.Generator(np.random.Philox(64))
    a = lhv.random_povm_set(3, (2, 2), rng)
    b = lhv.random_povm_set(3, (2, 2), rng)
    model = lhv.lhv_from_extension(h, a, b)
    model.validate()
    rec = lhv.reconstruct(model)
    quantum = lhv.quantum_probabilities(rho, a, b)
    assert rec.max_difference(quantum) <= 1e-9


def test_lhv_weights_invariant_under_alice_setting_permutation():
    # certificate symmetry means reassigning settings to copies is harmless
    ens = states.random_separable_ensemble(2, 2, 4, seed=8)
    shape = ext.ExtensionShape(2, 2, 2, 1)
    h = ext.product_extension(ens, shape)
    rng = np.random.Generator(np.random.Philox(65))
    a = lhv.random_povm_set(2, (2, 2), rng)
    b = lhv.random_povm_set(2, (2,), rng)
    model = lhv.lhv_from_extension(h, a, b)
    swapped = lhv.PovmSet([a.settings[1], a.settings[0]])
    model_swapped = lhv.lhv_from_extension(h, swapped, b)
    # swapping settings permutes the strategy axis accordingly
    w = model.weights.reshape(2, 2, 2)
    ws = model_swapped.weights.reshape(2, 2, 2)
    assert np.max(np.abs(w - ws.transpose(1, 0, 2))) < 1e-9


def test_one_sided_exponent_zero_matches_direct_weights():
    ens = states.random_separable_ensemble(2, 3, 4, seed=11)
    shape = ext.ExtensionShape(2, 3, 1, 2)
    h = ext.product_extension(ens, shape)
    rng = np.random.Generator(np.random.Philox(66))
    a = lhv.random_povm_set(2, (2,), rng)
    b = lhv.random_povm_set(3, (2, 2), rng)
    direct = lhv.lhv_from_extension(h, a, b)
    one_sided = lhv.lhv_from_one_sided(h, a, b)
    assert np.max(np.abs(direct.weights - one_sided.weights)) < 1e-10


def test_one_sided_werner_five_alice_settings():
    rho = states.werner(3, -1.0)
    verdict = ext.decide(rho, ext.ExtensionShape(3, 3, 1, 2), "positive")
    assert verdict.decision == ext.DECISION_EXISTS
    rng = np.random.Generator(np.random.Philox(67))
    a = lhv.random_povm_set(3, (2, 2, 2, 2, 2), rng)
    b = lhv.random_povm_set(3, (2, 2), rng)
    model = lhv.lhv_from_one_sided(verdict.certificate, a, b)
    model.validate()
    assert model.weights.min() >= -1e-10
    assert abs(model.weights.sum() - 1.0) <= 1e-8
    rec = lhv.reconstruct(model)
    quantum = lhv.quantum_probabilities(rho, a, b)
    assert rec.max_difference(quantum) <= 1e-8


def test_one_sided_weight_sums_random_povms():
    ens = states.random_separable_ensemble(2, 2, 3, seed=14)
    shape = ext.ExtensionShape(2, 2, 1, 2)
    h = ext.product_extension(ens, shape)
    rng = np.random.Generator(np.random.Philox(68))
    for _ in range(5):
        a = lhv.random_povm_set(2, (2, 3, 2), rng)
        b = lhv.random_povm_set(2, (2, 2), rng)
        model = lhv.lhv_from_one_sided(h, a, b)
        assert abs(model.weights.sum() - 1.0) < 1e-9


def chsh_setup():
    singlet = states.werner(2, -1.0)
    a = lhv.projective_qubit_povm([0.0, np.pi / 2])
    b = lhv.projective_qubit_povm([-3 * np.pi / 4, 3 * np.pi / 4])
    return singlet, a, b


def chsh_value_oracle(p):
    """CHSH functional evaluated directly from correlators."""
    signs = np.array([[1.0, 1.0], [1.0, -1.0]])
    total = 0.0
    for i in range(2):
        for k in range(2):
            blk = p.block(i, k)
            e = blk[0, 0] + blk[1, 1] - blk[0, 1] - blk[1, 0]
            total += signs[i, k] * e
    return total


def test_any_vertex_is_inside():
    sc = lhv.MeasurementScenario((2, 2), (2, 2))
    b = lhv.b_vector((0, 1), (1, 0), sc)
    verdict = lhv.polytope_membership(b)
    assert verdict.inside
    rec = lhv.reconstruct(verdict.weights)
    assert rec.max_difference(b) <= 1e-8


def test_singlet_chsh_outside_with_tight_functional():
    singlet, a, b = chsh_setup()
    p = lhv.quantum_probabilities(singlet, a, b)
    assert abs(chsh_value_oracle(p) - 2 * np.sqrt(2)) < 1e-9
    verdict = lhv.polytope_membership(p)
    assert not verdict.inside
    assert abs(verdict.value - 2 * np.sqrt(2)) < 1e-6
    assert abs(verdict.local_bound - 2.0) < 1e-6
    f = verdict.functional.reshape(-1)
    bmat = lhv.vertex_matrix(p.scenario)
    assert np.max(bmat @ f) <= verdict.local_bound + 1e-9
    assert f @ p.flat > np.max(bmat @ f) + 0.8


def test_werner_04_inside_with_chsh_measurements():
    _, a, b = chsh_setup()
    p = lhv.quantum_probabilities(states.werner(2, -0.4), a, b)
    verdict = lhv.polytope_membership(p)
    assert verdict.inside
    rec = lhv.reconstruct(verdict.weights)
    assert rec.max_difference(p) <= 1e-8
    verdict.weights.validate()


def test_membership_vertex_cap():
    sc = lhv.MeasurementScenario((2, 2), (2, 2))
    p = lhv.b_vector((0, 0), (0, 0), sc)
    with pytest.raises(ValueError):
        lhv.polytope_membership(p, vertex_cap=10)
