"""Benchmark bipartite states: Werner, Choi-Horodecki, real-UPB bound
entangled states (Tiles, Pyramid), maximally entangled states and random
separable states.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import tensor

STATE_HERMITIAN_TOL = 1e-12
STATE_TRACE_TOL = 1e-12
STATE_EIG_FLOOR = -1e-10


@dataclass(frozen=True)
class BipartiteState:
    """Density matrix on H_{d_A} ⊗ H_{d_B}."""

    rho: np.ndarray
    dims: tuple[int, int]
    label: str = ""

    @property
    def d_a(self) -> int:
        return self.dims[0]

    @property
    def d_b(self) -> int:
        return self.dims[1]


def check_state(state: BipartiteState) -> None:
    """Raise if the state violates Hermiticity, positivity or unit trace."""
    rho = state.rho
    n = state.d_a * state.d_b
    if rho.shape != (n, n):
        raise ValueError(f"shape {rho.shape} does not match dims {state.dims}")
    if tensor.hermiticity_defect(rho) > STATE_HERMITIAN_TOL:
        raise ValueError(f"{state.label or 'state'} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > STATE_TRACE_TOL:
        raise ValueError(f"{state.label or 'state'} has trace {np.trace(rho)}")
    if tensor.min_eigenvalue(rho) < STATE_EIG_FLOOR:
        raise ValueError(f"{state.label or 'state'} has a negative eigenvalue")


def _state(rho, d_a, d_b, label) -> BipartiteState:
    s = BipartiteState(rho=tensor.hermitize(rho), dims=(int(d_a), int(d_b)), label=label)
    check_state(s)
    return s


def flip_operator(d: int) -> np.ndarray:
    """The swap V|ij> = |ji> on H_d ⊗ H_d."""
    return tensor.permutation_op((1, 0), (d, d))


def werner(d: int, phi: float) -> BipartiteState:
    """Werner state with flip expectation Tr(ρV) = phi.

    rho = (I(d - phi) + (d phi - 1) V) / (d^3 - d), the unique
    (U ⊗ U)-invariant family in d x d.
    """
    d = int(d)
    if d < 2:
        raise ValueError("werner requires d >= 2")
    if not -1.0 <= phi <= 1.0:
        raise ValueError(f"phi must lie in [-1, 1], got {phi}")
    v = flip_operator(d)
    eye = np.eye(d * d, dtype=complex)
    rho = (eye * (d - phi) + v * (d * phi - 1.0)) / (d**3 - d)
    return _state(rho, d, d, f"werner(d={d},phi={phi})")


def _ket(d: int, i: int) -> np.ndarray:
    e = np.zeros(d, dtype=complex)
    e[i] = 1.0
    return e


def max_entangled(d: int) -> BipartiteState:
    """Maximally entangled pure state, |Ψ> = Σ_i |ii> normalized."""
    d = int(d)
    if d < 1:
        raise ValueError("d must be >= 1")
    psi = np.zeros(d * d, dtype=complex)
    for i in range(d):
        psi[i * d + i] = 1.0
    psi /= np.sqrt(d)
    return _state(np.outer(psi, psi.conj()), d, d, f"max_entangled({d})")


def choi_horodecki(alpha: float) -> BipartiteState:
    """One-parameter 3x3 family: separable on [2,3], bound entangled on
    (3,4], nonpositive partial transpose for alpha > 4.

    rho_alpha = (2/7) P_+ + (alpha/7) sigma_+ + ((5-alpha)/7) sigma_-.
    """
    alpha = float(alpha)
    if not 2.0 <= alpha <= 5.0:
        raise ValueError(f"alpha must lie in [2, 5], got {alpha}")
    d = 3
    p_plus = max_entangled(d).rho
    sigma_plus = np.zeros((9, 9), dtype=complex)
    sigma_minus = np.zeros((9, 9), dtype=complex)
    for i in range(d):
        ket_fwd = np.kron(_ket(d, i), _ket(d, (i + 1) % d))
        ket_bwd = np.kron(_ket(d, (i + 1) % d), _ket(d, i))
        sigma_plus += np.outer(ket_fwd, ket_fwd.conj()) / d
        sigma_minus += np.outer(ket_bwd, ket_bwd.conj()) / d
    rho = (2.0 * p_plus + alpha * sigma_plus + (5.0 - alpha) * sigma_minus) / 7.0
    return _state(rho, d, d, f"choi_horodecki(alpha={alpha})")


UPB_UNIT_TOL = 1e-12
UPB_ORTHO_TOL = 1e-10


@dataclass(frozen=True)
class UpbSpec:
    """A real unextendible product basis: pairs (a_i, b_i) of unit vectors
    whose product states are pairwise orthogonal."""

    d_a: int
    d_b: int
    vectors: tuple
    label: str = ""


def check_upb(upb: UpbSpec) -> None:
    prods = []
    for a, b in upb.vectors:
        a = np.asarray(a)
        b = np.asarray(b)
        if np.max(np.abs(a.imag)) > 0 or np.max(np.abs(b.imag)) > 0:
            raise ValueError("UPB vectors must be real")
        if abs(np.linalg.norm(a) - 1.0) > UPB_UNIT_TOL or abs(np.linalg.norm(b) - 1.0) > UPB_UNIT_TOL:
            raise ValueError("UPB vectors must be unit norm")
        prods.append(np.kron(a, b))
    gram = np.array([[float(np.dot(p, q).real) for q in prods] for p in prods])
    if np.max(np.abs(gram - np.eye(len(prods)))) > UPB_ORTHO_TOL:
        raise ValueError("UPB product states are not orthonormal")


def _upb(d_a, d_b, pairs, label) -> UpbSpec:
    vectors = tuple(
        (np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)) for a, b in pairs
    )
    upb = UpbSpec(d_a=d_a, d_b=d_b, vectors=vectors, label=label)
    check_upb(upb)
    return upb


def tiles_upb() -> UpbSpec:
    """The 3x3 Tiles unextendible product basis (5 real product vectors)."""
    e0, e1, e2 = np.eye(3)
    m01 = (e0 - e1) / np.sqrt(2)
    m12 = (e1 - e2) / np.sqrt(2)
    s = (e0 + e1 + e2) / np.sqrt(3)
    pairs = [
        (e0, m01),
        (e2, m12),
        (m01, e2),
        (m12, e0),
        (s, s),
    ]
    return _upb(3, 3, pairs, "tiles")


def pyramid_upb() -> UpbSpec:
    """The 3x3 Pyramid unextendible product basis.

    Five unit vectors v_j ∝ (cos(2πj/5), sin(2πj/5), h) with h^2 chosen so
    that next-nearest neighbours are orthogonal; the basis pairs v_j with
    v_{2j mod 5}.
    """
    h = np.sqrt((1.0 + np.sqrt(5.0)) / 4.0)
    vs = []
    for j in range(5):
        v = np.array([np.cos(2 * np.pi * j / 5), np.sin(2 * np.pi * j / 5), h])
        vs.append(v / np.linalg.norm(v))
    pairs = [(vs[j], vs[(2 * j) % 5]) for j in range(5)]
    return _upb(3, 3, pairs, "pyramid")


def upb_projector(upb: UpbSpec) -> np.ndarray:
    """Unnormalized projector onto the complement of the UPB span."""
    n = upb.d_a * upb.d_b
    p = np.eye(n, dtype=complex)
    for a, b in upb.vectors:
        prod = np.kron(a, b)
        p -= np.outer(prod, prod.conj())
    return p


def upb_state(upb: UpbSpec) -> BipartiteState:
    """Normalized bound entangled state on the UPB complement."""
    p = upb_projector(upb)
    rank = upb.d_a * upb.d_b - len(upb.vectors)
    return _state(p / rank, upb.d_a, upb.d_b, f"upb_state({upb.label})")


@dataclass(frozen=True)
class SeparableEnsemble:
    """Explicit product-state decomposition Σ_i p_i |ψ_i><ψ_i| ⊗ |φ_i><φ_i|."""

    weights: np.ndarray
    a_vectors: tuple
    b_vectors: tuple
    dims: tuple[int, int]
    seed: int = 0

    def state(self) -> BipartiteState:
        d_a, d_b = self.dims
        rho = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
        for p, a, b in zip(self.weights, self.a_vectors, self.b_vectors):
            prod = np.kron(a, b)
            rho += p * np.outer(prod, prod.conj())
        return _state(
            rho, d_a, d_b, f"random_separable(d_a={d_a},d_b={d_b},k={len(self.weights)},seed={self.seed})"
        )


def _haarish_vector(rng, d: int) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


def random_separable_ensemble(d_a: int, d_b: int, k: int, seed: int = 0) -> SeparableEnsemble:
    """Random mixture of k product states, deterministic per seed.

    Uses the counter-based Philox generator so that output is reproducible
    across platforms.
    """
    if min(d_a, d_b, k) < 1:
        raise ValueError("d_a, d_b, k must all be >= 1")
    rng = np.random.Generator(np.random.Philox(int(seed)))
    raw = rng.random(k) + 1.0 / k  # bounded away from zero
    weights = raw / raw.sum()
    a_vecs = tuple(_haarish_vector(rng, d_a) for _ in range(k))
    b_vecs = tuple(_haarish_vector(rng, d_b) for _ in range(k))
    return SeparableEnsemble(
        weights=weights, a_vectors=a_vecs, b_vectors=b_vecs, dims=(int(d_a), int(d_b)), seed=int(seed)
    )


def random_separable(d_a: int, d_b: int, k: int, seed: int = 0) -> BipartiteState:
    """Random separable state Σ p_i |ψ_i><ψ_i| ⊗ |φ_i><φ_i|."""
    return random_separable_ensemble(d_a, d_b, k, seed).state()
