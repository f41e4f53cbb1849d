"""Local hidden variable machinery for Bell experiments.

A scenario fixes the number of settings and outcomes per party.  The
deterministic strategies (B-vectors) are the vertices of the local
polytope; a probability vector lies inside exactly when some convex
combination of vertices reproduces it.  Certificates on extension spaces
turn into explicit LHV weights: with H a verified (quasi-)extension,
p_{m,n} = Tr(E^A_m ⊗ E^B_n H) reproduces the quantum probabilities for
s_a Alice and s_b Bob settings, and a (1, s_b) certificate handles any
number of Alice settings through a product formula.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import sdp, tensor
from .states import BipartiteState

POVM_TOL = 1e-10
PROB_FLOOR = -1e-10
BLOCK_SUM_TOL = 1e-9
WEIGHT_SUM_TOL = 1e-8

MEMBERSHIP_VERTEX_CAP = 10**6
MEMBERSHIP_EQ_SLACK = 1e-9      # equality constraints as two-sided inequalities
MEMBERSHIP_INSIDE_TOL = 1e-8
FUNCTIONAL_SNAP_TOL = 1e-6


@dataclass(frozen=True)
class MeasurementScenario:
    """Setting/outcome counts: outcomes_a[i] outcomes for Alice's i-th
    setting, outcomes_b[k] for Bob's k-th."""

    outcomes_a: tuple
    outcomes_b: tuple

    def __post_init__(self):
        object.__setattr__(self, "outcomes_a", tuple(int(o) for o in self.outcomes_a))
        object.__setattr__(self, "outcomes_b", tuple(int(o) for o in self.outcomes_b))
        if not self.outcomes_a or not self.outcomes_b:
            raise ValueError("each party needs at least one setting")
        if min(self.outcomes_a + self.outcomes_b) < 1:
            raise ValueError("outcome counts must be >= 1")

    @property
    def s_a(self) -> int:
        return len(self.outcomes_a)

    @property
    def s_b(self) -> int:
        return len(self.outcomes_b)

    @property
    def vertex_count(self) -> int:
        n = 1
        for o in self.outcomes_a + self.outcomes_b:
            n *= o
        return n

    @property
    def table_shape(self) -> tuple[int, int]:
        return (sum(self.outcomes_a), sum(self.outcomes_b))

    def a_offset(self, i: int) -> int:
        return sum(self.outcomes_a[:i])

    def b_offset(self, k: int) -> int:
        return sum(self.outcomes_b[:k])

    def alice_strategies(self):
        return itertools.product(*[range(o) for o in self.outcomes_a])

    def bob_strategies(self):
        return itertools.product(*[range(o) for o in self.outcomes_b])


class ProbabilityVector:
    """Joint outcome probabilities, indexed by (setting, outcome) pairs.

    Stored as a table with one row per Alice (setting, outcome) pair and
    one column per Bob pair, settings in declared order.
    """

    def __init__(self, scenario: MeasurementScenario, table: np.ndarray):
        table = np.asarray(table, dtype=float)
        if table.shape != scenario.table_shape:
            raise ValueError(f"table shape {table.shape} != expected {scenario.table_shape}")
        self.scenario = scenario
        self.table = table

    def block(self, i: int, k: int) -> np.ndarray:
        sc = self.scenario
        return self.table[
            sc.a_offset(i):sc.a_offset(i) + sc.outcomes_a[i],
            sc.b_offset(k):sc.b_offset(k) + sc.outcomes_b[k],
        ]

    @property
    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def validate(self) -> None:
        if float(self.table.min()) < PROB_FLOOR:
            raise ValueError(f"negative probability {self.table.min():.3e}")
        sc = self.scenario
        for i in range(sc.s_a):
            for k in range(sc.s_b):
                total = float(self.block(i, k).sum())
                if abs(total - 1.0) > BLOCK_SUM_TOL:
                    raise ValueError(f"block ({i},{k}) sums to {total}")

    def max_difference(self, other: "ProbabilityVector") -> float:
        return float(np.max(np.abs(self.table - other.table)))


def b_vector(m, n, scenario: MeasurementScenario) -> ProbabilityVector:
    """Deterministic strategy vertex: entry 1 iff the observed outcome is
    the assigned one for both settings, B_{ij,kl} = δ_{j m_i} δ_{l n_k}."""
    m = tuple(int(v) for v in m)
    n = tuple(int(v) for v in n)
    sc = scenario
    if len(m) != sc.s_a or len(n) != sc.s_b:
        raise ValueError("strategy length does not match setting counts")
    for i, v in enumerate(m):
        if not 0 <= v < sc.outcomes_a[i]:
            raise ValueError(f"alice outcome {v} out of range for setting {i}")
    for k, v in enumerate(n):
        if not 0 <= v < sc.outcomes_b[k]:
            raise ValueError(f"bob outcome {v} out of range for setting {k}")
    table = np.zeros(sc.table_shape)
    for i, mi in enumerate(m):
        for k, nk in enumerate(n):
            table[sc.a_offset(i) + mi, sc.b_offset(k) + nk] = 1.0
    return ProbabilityVector(sc, table)


def vertex_matrix(scenario: MeasurementScenario) -> np.ndarray:
    """All B-vectors stacked as rows, strategies in lexicographic order."""
    rows = []
    for m in scenario.alice_strategies():
        for n in scenario.bob_strategies():
            rows.append(b_vector(m, n, scenario).flat)
    return np.array(rows)


class PovmSet:
    """One POVM per setting on a single party's space: PSD elements
    summing to the identity."""

    def __init__(self, settings):
        self.settings = [[tensor.as_matrix(e) for e in elements] for elements in settings]
        if not self.settings:
            raise ValueError("need at least one setting")
        self.dim = self.settings[0][0].shape[0]
        for elements in self.settings:
            total = np.zeros((self.dim, self.dim), dtype=complex)
            for e in elements:
                if e.shape != (self.dim, self.dim):
                    raise ValueError("POVM elements must share one dimension")
                if tensor.min_eigenvalue(e) < -POVM_TOL:
                    raise ValueError("POVM element has a negative eigenvalue")
                total += e
            if np.max(np.abs(total - np.eye(self.dim))) > POVM_TOL:
                raise ValueError("POVM elements do not sum to the identity")

    @property
    def n_settings(self) -> int:
        return len(self.settings)

    @property
    def outcome_counts(self) -> tuple:
        return tuple(len(elements) for elements in self.settings)


def random_povm_set(dim: int, outcome_counts, rng) -> PovmSet:
    """Random POVMs: Wishart-like elements normalized by S^{-1/2} . S^{-1/2}."""
    settings = []
    for n_out in outcome_counts:
        gs = []
        for _ in range(n_out):
            x = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
            gs.append(x @ x.conj().T)
        total = sum(gs)
        w, u = np.linalg.eigh(total)
        inv_sqrt = (u / np.sqrt(w)) @ u.conj().T
        settings.append([inv_sqrt @ g @ inv_sqrt for g in gs])
    return PovmSet(settings)


def projective_qubit_povm(angles) -> PovmSet:
    """Two-outcome projective measurements in the x-z plane, one per angle."""
    settings = []
    for theta in angles:
        ket = np.array([np.cos(theta / 2.0), np.sin(theta / 2.0)], dtype=complex)
        proj = np.outer(ket, ket.conj())
        settings.append([proj, np.eye(2, dtype=complex) - proj])
    return PovmSet(settings)


def quantum_probabilities(state: BipartiteState, a: PovmSet, b: PovmSet) -> ProbabilityVector:
    """P_{ij,kl} = Tr(E^A_ij ⊗ E^B_kl rho)."""
    if (a.dim, b.dim) != state.dims:
        raise ValueError(f"POVM dims ({a.dim},{b.dim}) do not match state dims {state.dims}")
    scenario = MeasurementScenario(a.outcome_counts, b.outcome_counts)
    table = np.zeros(scenario.table_shape)
    for i, ea in enumerate(a.settings):
        for j, eij in enumerate(ea):
            for k, eb in enumerate(b.settings):
                for l, ekl in enumerate(eb):
                    val = np.vdot(np.kron(eij, ekl), state.rho).real
                    table[scenario.a_offset(i) + j, scenario.b_offset(k) + l] = val
    return ProbabilityVector(scenario, table)


@dataclass
class LhvModel:
    """Nonnegative weights over deterministic strategies.

    ``weights[u, v]`` belongs to the u-th Alice strategy and v-th Bob
    strategy in lexicographic order over (m_1..m_{s_a}) and
    (n_1..n_{s_b}).
    """

    scenario: MeasurementScenario
    weights: np.ndarray

    def validate(self) -> None:
        if float(self.weights.min()) < PROB_FLOOR:
            raise ValueError(f"negative weight {self.weights.min():.3e}")
        total = float(self.weights.sum())
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValueError(f"weights sum to {total}")

    def entries(self):
        for u, m in enumerate(self.scenario.alice_strategies()):
            for v, n in enumerate(self.scenario.bob_strategies()):
                yield m, n, float(self.weights[u, v])


def _strategy_povm_products(povms: PovmSet):
    """E_m = E_{1 m_1} ⊗ ... ⊗ E_{s m_s} for every strategy m, in order."""
    out = []
    for m in itertools.product(*[range(o) for o in povms.outcome_counts]):
        out.append(tensor.kron_all([povms.settings[i][mi] for i, mi in enumerate(m)]))
    return out


def lhv_from_extension(h: np.ndarray, a: PovmSet, b: PovmSet) -> LhvModel:
    """Weights p_{m,n} = Tr(E^A_m ⊗ E^B_n H) from a verified certificate.

    The certificate must live on A^{s_a} ⊗ B^{s_b} with one Alice setting
    per A copy and one Bob setting per B copy; its witness property makes
    every weight nonnegative and its reduction to rho makes the model
    reproduce the quantum probabilities.
    """
    h = tensor.as_matrix(h)
    s_a, s_b = a.n_settings, b.n_settings
    n_dim = a.dim**s_a * b.dim**s_b
    if h.shape != (n_dim, n_dim):
        raise ValueError(f"certificate dim {h.shape[0]} != expected {n_dim} "
                         f"for {s_a} Alice / {s_b} Bob settings")
    scenario = MeasurementScenario(a.outcome_counts, b.outcome_counts)
    ea = _strategy_povm_products(a)
    eb = _strategy_povm_products(b)
    weights = np.zeros((len(ea), len(eb)))
    for u, em in enumerate(ea):
        for v, en in enumerate(eb):
            weights[u, v] = np.vdot(np.kron(em, en), h).real
    return LhvModel(scenario, weights)


def lhv_from_one_sided(h: np.ndarray, a: PovmSet, b: PovmSet) -> LhvModel:
    """Weights for any number of Alice settings from a (1, s_b) certificate.

    p_{m,n} = Π_i Tr(E^A_{i m_i} ⊗ E^B_n H) / Tr(I ⊗ E^B_n H)^{s_a - 1};
    every factor is a witness expectation, so the weights are nonnegative.
    A vanishing denominator forces all its numerator factors to vanish
    (their sum over outcomes equals the denominator), so the weight is 0.
    """
    h = tensor.as_matrix(h)
    s_b = b.n_settings
    n_dim = a.dim * b.dim**s_b
    if h.shape != (n_dim, n_dim):
        raise ValueError(f"certificate dim {h.shape[0]} != expected {n_dim} for (1,{s_b}) shape")
    scenario = MeasurementScenario(a.outcome_counts, b.outcome_counts)
    eb = _strategy_povm_products(b)
    eye_a = np.eye(a.dim, dtype=complex)
    denominators = np.array([np.vdot(np.kron(eye_a, en), h).real for en in eb])
    # factors[i][j][v] = Tr(E^A_ij ⊗ E^B_n H)
    factors = [
        [
            np.array([np.vdot(np.kron(eij, en), h).real for en in eb])
            for eij in setting
        ]
        for setting in a.settings
    ]
    s_a = a.n_settings
    weights = np.zeros((int(np.prod(a.outcome_counts)), len(eb)))
    for u, m in enumerate(itertools.product(*[range(o) for o in a.outcome_counts])):
        for v in range(len(eb)):
            den = denominators[v]
            if den <= 1e-12:
                weights[u, v] = 0.0
                continue
            num = 1.0
            for i, mi in enumerate(m):
                num *= factors[i][mi][v]
            weights[u, v] = num / den ** (s_a - 1)
    return LhvModel(scenario, weights)


def reconstruct(model: LhvModel, scenario: MeasurementScenario | None = None) -> ProbabilityVector:
    """Σ_{m,n} p_{m,n} B^{m,n}, the probability vector of the model."""
    sc = model.scenario
    if scenario is not None and scenario != sc:
        raise ValueError("scenario does not match the model")
    nd = sc.outcomes_a + sc.outcomes_b
    w = model.weights.reshape(nd)
    table = np.zeros(sc.table_shape)
    for i in range(sc.s_a):
        for k in range(sc.s_b):
            axes = tuple(ax for ax in range(len(nd)) if ax not in (i, sc.s_a + k))
            block = w.sum(axis=axes)
            table[
                sc.a_offset(i):sc.a_offset(i) + sc.outcomes_a[i],
                sc.b_offset(k):sc.b_offset(k) + sc.outcomes_b[k],
            ] = block
    return ProbabilityVector(sc, table)


@dataclass
class PolytopeVerdict:
    inside: bool
    distance: float                      # optimum of the membership program
    weights: LhvModel | None = None
    functional: np.ndarray | None = None  # same layout as the probability table
    value: float | None = None            # functional . p
    local_bound: float | None = None      # max over vertices
    margin: float | None = None

    def as_dict(self) -> dict:
        out = {"inside": self.inside, "distance": self.distance}
        if self.functional is not None:
            out.update({
                "functional": [[float(v) for v in row] for row in self.functional],
                "value": self.value,
                "local_bound": self.local_bound,
                "margin": self.margin,
            })
        return out


def _membership_lp(p_flat: np.ndarray, bmat: np.ndarray) -> sdp.SdpStandardForm:
    # variables (q_1..q_N, t): minimize t s.t. |B^T q - p| <= t, q >= 0,
    # t >= 0, sum q = 1 (two-sided with a strict-interior slack).
    n_vert, dim = bmat.shape
    rows = []
    rhs = []
    for v in range(n_vert):
        e = np.zeros(n_vert + 1)
        e[v] = 1.0
        rows.append(e)
        rhs.append(0.0)
    t_row = np.zeros(n_vert + 1)
    t_row[-1] = 1.0
    rows.append(t_row)
    rhs.append(0.0)
    for j in range(dim):
        up = np.concatenate([-bmat[:, j], [1.0]])
        rows.append(up)
        rhs.append(-p_flat[j])
        dn = np.concatenate([bmat[:, j], [1.0]])
        rows.append(dn)
        rhs.append(p_flat[j])
    ones = np.concatenate([np.ones(n_vert), [0.0]])
    rows.append(ones)
    rhs.append(1.0 - MEMBERSHIP_EQ_SLACK)
    rows.append(-ones)
    rhs.append(-1.0 - MEMBERSHIP_EQ_SLACK)
    c = np.zeros(n_vert + 1)
    c[-1] = 1.0
    return sdp.lp_standard_form(np.array(rows), np.array(rhs), c)


def _functional_lp(p_flat: np.ndarray, bmat: np.ndarray) -> sdp.SdpStandardForm:
    # variables (f_1..f_dim, s): maximize f.p - s s.t. f.B_v <= s, |f| <= 1.
    n_vert, dim = bmat.shape
    rows = []
    rhs = []
    for v in range(n_vert):
        rows.append(np.concatenate([-bmat[v], [1.0]]))
        rhs.append(0.0)
    for j in range(dim):
        e = np.zeros(dim + 1)
        e[j] = 1.0
        rows.append(-e)
        rhs.append(-1.0)
        rows.append(e)
        rhs.append(-1.0)
    c = np.concatenate([-p_flat, [1.0]])
    return sdp.lp_standard_form(np.array(rows), np.array(rhs), c)


def _canonicalize_functional(f_table: np.ndarray, p: ProbabilityVector,
                             bmat: np.ndarray) -> np.ndarray:
    """Gauge-fix a separating functional.

    Adding a constant to one (i,k) block shifts f.p and every f.B_v
    equally, so block means are removed; the scale is set by the sup
    norm, and near-integer coefficients are snapped when that does not
    hurt the margin.
    """
    sc = p.scenario
    f = f_table.copy()
    for i in range(sc.s_a):
        for k in range(sc.s_b):
            rows = slice(sc.a_offset(i), sc.a_offset(i) + sc.outcomes_a[i])
            cols = slice(sc.b_offset(k), sc.b_offset(k) + sc.outcomes_b[k])
            f[rows, cols] -= f[rows, cols].mean()
    peak = np.max(np.abs(f))
    if peak > 0:
        f /= peak
    snapped = np.round(f)
    if np.max(np.abs(snapped - f)) <= FUNCTIONAL_SNAP_TOL:
        old_margin = float(f.reshape(-1) @ p.flat - np.max(bmat @ f.reshape(-1)))
        new_margin = float(snapped.reshape(-1) @ p.flat - np.max(bmat @ snapped.reshape(-1)))
        if new_margin >= old_margin - 1e-9:
            return snapped
    return f


def polytope_membership(p: ProbabilityVector, scenario: MeasurementScenario | None = None,
                        solver_tol: float = 1e-9,
                        vertex_cap: int = MEMBERSHIP_VERTEX_CAP) -> PolytopeVerdict:
    """Decide whether p lies in the local polytope.

    Inside: returns reconstructing weights.  Outside: returns a
    separating functional (a Bell inequality) with its value on p, the
    local bound max over vertices, and the margin.
    """
    sc = p.scenario
    if scenario is not None and scenario != sc:
        raise ValueError("scenario does not match the probability vector")
    if sc.vertex_count > vertex_cap:
        raise ValueError(f"vertex count {sc.vertex_count} exceeds cap {vertex_cap}")
    bmat = vertex_matrix(sc)
    p_flat = p.flat
    res = sdp.solve(_membership_lp(p_flat, bmat), tol=solver_tol)
    if res.status != sdp.STATUS_OPTIMAL:
        raise RuntimeError(f"membership LP did not converge: {res.status} {res.message}")
    t_star = float(res.x[-1])
    if t_star <= MEMBERSHIP_INSIDE_TOL:
        q = np.maximum(res.x[:-1], 0.0)
        q /= q.sum()
        model = LhvModel(sc, q.reshape(int(np.prod(sc.outcomes_a)), int(np.prod(sc.outcomes_b))))
        return PolytopeVerdict(inside=True, distance=t_star, weights=model)
    fres = sdp.solve(_functional_lp(p_flat, bmat), tol=solver_tol)
    if fres.status != sdp.STATUS_OPTIMAL:
        raise RuntimeError(f"functional LP did not converge: {fres.status} {fres.message}")
    f_table = fres.x[:-1].reshape(sc.table_shape)
    f_table = _canonicalize_functional(f_table, p, bmat)
    f_flat = f_table.reshape(-1)
    value = float(f_flat @ p_flat)
    bound = float(np.max(bmat @ f_flat))
    return PolytopeVerdict(inside=False, distance=t_star, functional=f_table,
                           value=value, local_bound=bound, margin=value - bound)
