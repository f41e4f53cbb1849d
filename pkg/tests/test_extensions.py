"""Extension machinery checks: SDP construction oracles, certificate
verification, analytic constructions, thresholds."""

import itertools

import numpy as np
import pytest

from lhvcert import extensions as ext
from lhvcert import sdp, states, tensor


def test_shape_arithmetic():
    shape = ext.ExtensionShape(2, 2, 1, 2)
    assert shape.n == 8
    assert shape.factor_dims == (2, 2, 2)
    assert shape.kept_factors == (0, 1)
    form = ext.build_extension_sdp(states.werner(2, 0.0), shape)
    assert form.n == 8
    assert form.m == 15


def test_constraint_matrices_are_group_invariant():
    shape = ext.ExtensionShape(2, 2, 2, 2)
    form = ext.build_extension_sdp(states.werner(2, -0.3), shape)
    dims = shape.factor_dims
    for f in form.fs[:6]:
        resym = tensor.sym_average(f, dims, shape.a_factors, shape.b_factors)
        assert np.max(np.abs(resym - f)) < 1e-10


def test_constraints_insensitive_to_identity_shift():
    shape = ext.ExtensionShape(2, 2, 2, 1)
    form = ext.build_extension_sdp(states.werner(2, -0.5), shape)
    rng = np.random.Generator(np.random.Philox(50))
    k = rng.standard_normal((shape.n, shape.n))
    k = (k + k.T) / 2
    mu = 0.37
    for f in form.fs:
        lhs = np.vdot(f, k + mu * np.eye(shape.n)).real
        rhs = np.vdot(f, k).real
        assert abs(lhs - rhs) < 1e-10


def brute_force_partition_classes(shape):
    """Orbit enumeration oracle over all bipartitions of the factors."""
    s = shape.s_a + shape.s_b
    factors = list(range(s))
    group = []
    for ga in itertools.permutations(range(shape.s_a)):
        for gb in itertools.permutations(range(shape.s_b)):
            group.append({**{k: ga[k] for k in range(shape.s_a)},
                          **{shape.s_a + k: shape.s_a + gb[k] for k in range(shape.s_b)}})
    seen = set()
    classes = []
    for r in range(1, s):
        for part in itertools.combinations(factors, r):
            key = frozenset(part)
            if key in seen:
                continue
            orbit = set()
            for g in group:
                image = frozenset(g[f] for f in part)
                orbit.add(image)
                orbit.add(frozenset(factors) - image)   # complementation
            seen |= orbit
            classes.append(key)
    return classes


@pytest.mark.parametrize("s_a,s_b,expected", [(1, 1, 1), (2, 1, 2), (1, 2, 2), (2, 2, 4)])
def test_partition_classes_match_orbit_enumeration(s_a, s_b, expected):
    shape = ext.ExtensionShape(3, 3, s_a, s_b)
    reps = ext.partition_classes(shape)
    brute = brute_force_partition_classes(shape)
    assert len(reps) == len(brute) == expected
    # each representative characterized by its (A-count, B-count) up to complement
    def key(part):
        a = sum(1 for f in part if f < s_a)
        b = len(part) - a
        return min((a, b), (s_a - a, s_b - b))
    assert sorted(key(p) for p in reps) == sorted(key(p) for p in brute)


def test_quasi_optimum_no_larger_than_extension_optimum():
    rho = states.choi_horodecki(4.2)
    shape = ext.ExtensionShape(3, 3, 2, 1)
    pos = ext.decide(rho, shape, "positive")
    quasi = ext.decide(rho, shape, "decomposable")
    assert quasi.optimum <= pos.optimum + 1e-7


def test_max_entangled_monogamy_with_dual_certificate():
    rho = states.max_entangled(2)
    shape = ext.ExtensionShape(2, 2, 2, 1)
    verdict = ext.decide(rho, shape, "positive")
    assert verdict.decision == ext.DECISION_NOT_EXISTS
    x = verdict.dual_certificate
    assert x is not None
    assert np.vdot(x, rho.rho).real <= -1e-3
    g = ext.sym_project(ext.embed_pair_operator(x, shape), shape)
    assert np.linalg.eigvalsh(g)[0] >= -1e-9


def test_tiles_has_21_and_12_extensions():
    rho = states.upb_state(states.tiles_upb())
    for s_a, s_b in ((2, 1), (1, 2)):
        verdict = ext.decide(rho, ext.ExtensionShape(3, 3, s_a, s_b), "positive")
        assert verdict.decision == ext.DECISION_EXISTS
        assert verdict.residuals.passed


def test_choi_horodecki_45_separates_kinds():
    rho = states.choi_horodecki(4.5)
    shape = ext.ExtensionShape(3, 3, 2, 1)
    assert ext.decide(rho, shape, "positive").decision == ext.DECISION_NOT_EXISTS
    quasi = ext.decide(rho, shape, "decomposable")
    assert quasi.decision == ext.DECISION_EXISTS
    assert quasi.decomposition is not None
    assert quasi.residuals.passed


def test_choi_horodecki_2_is_extendible():
    verdict = ext.decide(states.choi_horodecki(2.0), ext.ExtensionShape(3, 3, 2, 1), "positive")
    assert verdict.decision == ext.DECISION_EXISTS


def test_product_extension_verifies_to_machine_precision():
    ens = states.random_separable_ensemble(3, 3, 6, seed=1)
    shape = ext.ExtensionShape(3, 3, 2, 2)
    h = ext.product_extension(ens, shape)
    report = ext.verify_certificate(h, ens.state(), shape, "positive")
    assert report.ptrace_residual <= 1e-10
    assert report.symmetry_residual <= 1e-10
    assert report.min_eigenvalue >= -1e-10
    assert report.passed


def test_decide_certificate_reverifies():
    rho = states.upb_state(states.tiles_upb())
    shape = ext.ExtensionShape(3, 3, 2, 1)
    verdict = ext.decide(rho, shape, "positive")
    report = ext.verify_certificate(verdict.certificate, rho, shape, "positive")
    assert report.passed
    assert abs(np.trace(verdict.certificate).real - 1.0) < 1e-9


def test_verify_detects_fault_injection():
    ens = states.random_separable_ensemble(2, 2, 3, seed=4)
    shape = ext.ExtensionShape(2, 2, 2, 1)
    h = ext.product_extension(ens, shape)
    w, u = np.linalg.eigh(h)
    w[0] -= 1e-3
    bad = (u * w) @ u.conj().T
    report = ext.verify_certificate(bad, ens.state(), shape, "positive")
    assert report.min_eigenvalue < -1e-4
    assert not report.passed


def test_quasi_decomposition_blocks_psd_and_reassemble():
    rho = states.choi_horodecki(4.6)
    shape = ext.ExtensionShape(3, 3, 2, 1)
    verdict = ext.decide(rho, shape, "decomposable")
    assert verdict.decision == ext.DECISION_EXISTS
    decomp = verdict.decomposition
    assert np.linalg.eigvalsh(decomp.p_block)[0] >= -1e-9
    for _, q in decomp.q_blocks:
        assert np.linalg.eigvalsh(q)[0] >= -1e-9
    rebuilt = decomp.reassemble(shape.factor_dims)
    assert np.linalg.norm(rebuilt - verdict.certificate) <= 1e-9


@pytest.mark.parametrize("maker", [states.tiles_upb, states.pyramid_upb])
def test_upb_analytic_extension_defining_checks(maker):
    upb = maker()
    h = ext.upb_analytic_extension(upb)
    rho = states.upb_state(upb)
    # reduction over (A2, B2): with layout A2 A1 B1 B2, keep factors 1, 2
    reduced = tensor.partial_trace(h, (3, 3, 3, 3), (1, 2))
    assert np.linalg.norm(reduced - rho.rho) <= 1e-9
    shape = ext.ExtensionShape(3, 3, 2, 2)
    assert np.linalg.norm(h - ext.sym_project(h, shape)) <= 1e-10
    sample_min = ext.sample_product_expectations(h, shape, real=True)
    assert sample_min >= -1e-8


def test_upb_analytic_extension_is_positive_certificate():
    upb = states.tiles_upb()
    h = ext.upb_analytic_extension(upb)
    shape = ext.ExtensionShape(3, 3, 2, 2)
    report = ext.verify_certificate(h, states.upb_state(upb), shape, "positive")
    assert report.passed


def test_upb_analytic_extension_rejects_complex():
    upb = states.tiles_upb()
    a0, b0 = upb.vectors[0]
    bad = states.UpbSpec(3, 3, ((a0 * 1j, b0),) + upb.vectors[1:], "bad")
    with pytest.raises(ValueError):
        ext.upb_analytic_extension(bad)


def test_trace_down_preserves_certificates():
    upb = states.tiles_upb()
    rho = states.upb_state(upb)
    h22 = ext.upb_analytic_extension(upb)
    shape22 = ext.ExtensionShape(3, 3, 2, 2)
    for s_a, s_b in ((2, 1), (1, 2), (1, 1)):
        small = ext.ExtensionShape(3, 3, s_a, s_b)
        reduced = ext.trace_down(h22, shape22, small)
        report = ext.verify_certificate(reduced, rho, small, "positive")
        assert report.passed, (s_a, s_b, report)


def test_werner_swap_spectrum_flip():
    eigs = ext.werner_swap_spectrum(2, 1, 1)
    assert abs(eigs[0] + 1.0) < 1e-12
    assert abs(eigs[-1] - 1.0) < 1e-12
    lam, phi_min = ext.werner_threshold(2, 1, 1)
    assert abs(lam - 1.0) < 1e-12
    assert abs(phi_min + 1.0) < 1e-12


def test_werner_swap_spectrum_2222():
    eigs = ext.werner_swap_spectrum(2, 2, 2)
    assert abs(eigs[0] + 0.5) < 1e-9


def test_werner_threshold_alternating_rep_cases():
    for d, s_a, s_b in ((3, 1, 2), (3, 2, 1), (4, 1, 3), (4, 2, 2)):
        lam, phi_min = ext.werner_threshold(d, s_a, s_b)
        assert abs(lam - 1.0) < 1e-9, (d, s_a, s_b)
        assert abs(phi_min + 1.0) < 1e-9


def test_werner_threshold_d2_values():
    assert abs(ext.werner_threshold(2, 2, 1)[1] + 0.5) < 1e-9
    assert abs(ext.werner_threshold(2, 1, 2)[1] + 0.5) < 1e-9
    assert abs(ext.werner_threshold(2, 1, 3)[1] + 1.0 / 3.0) < 1e-9


def test_werner_spectrum_cap():
    with pytest.raises(ValueError):
        ext.werner_swap_spectrum(4, 3, 4)


def test_dimension_cap_enforced():
    with pytest.raises(ValueError):
        ext.build_extension_sdp(states.werner(4, 0.0), ext.ExtensionShape(4, 4, 3, 3),
                                max_dim=1024)


def test_decide_agrees_with_analytic_werner_threshold():
    shape = ext.ExtensionShape(2, 2, 1, 2)
    assert ext.decide(states.werner(2, -0.45), shape).decision == ext.DECISION_EXISTS
    assert ext.decide(states.werner(2, -0.55), shape).decision == ext.DECISION_NOT_EXISTS


def test_positive_exists_implies_quasi_not_refuted():
    rho = states.werner(2, -0.3)
    shape = ext.ExtensionShape(2, 2, 2, 1)
    pos = ext.decide(rho, shape, "positive")
    quasi = ext.decide(rho, shape, "decomposable")
    assert pos.decision == ext.DECISION_EXISTS
    assert quasi.decision == ext.DECISION_EXISTS


def test_sweep_werner_12():
    res = ext.sweep_threshold(lambda phi: states.werner(2, phi),
                              ext.ExtensionShape(2, 2, 1, 2), "positive",
                              -1.0, 0.0, resolution=0.02)
    assert res.status == "ok"
    assert res.bracket_lo <= -0.5 + 0.02
    assert res.bracket_hi >= -0.5 - 0.02
    assert abs(res.estimate + 0.5) < 0.02
    decisions = {d for _, _, d in res.evaluations}
    assert decisions == {ext.DECISION_EXISTS, ext.DECISION_NOT_EXISTS}


def test_sweep_rejects_non_monotone_bracket():
    res = ext.sweep_threshold(lambda phi: states.werner(2, phi),
                              ext.ExtensionShape(2, 2, 1, 2), "positive",
                              -0.3, 0.0, resolution=0.05)
    assert res.status == "non-monotone"


def test_dump_sdp_writes_file(tmp_path):
    out = tmp_path / "dump.json"
    ext.decide(states.werner(2, -0.4), ext.ExtensionShape(2, 2, 1, 2), "positive",
               dump_sdp=str(out))
    import json

    data = json.loads(out.read_text())
    assert data["f0"]["rows"] == 8
    assert len(data["fs"]) == 15
    assert data["result"]["status"] == "optimal"
