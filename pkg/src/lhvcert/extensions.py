"""Symmetric extensions and decomposable quasi-extensions of bipartite
states.

A state rho on A ⊗ B has an (s_a, s_b)-symmetric extension when some
positive semidefinite H on A^{s_a} ⊗ B^{s_b}, invariant under permuting
the A copies and permuting the B copies, reduces to rho on the first
copy of each side.  For a quasi-extension H need only be an entanglement
witness (nonnegative on product vectors); here the decomposable class
H = P + Σ_p Q_p^{T_p} with P, Q_p >= 0 is used, since both existence
questions are semidefinite programs.

The factor layout of the extension space is fixed as
[A_1 .. A_{s_a}, B_1 .. B_{s_b}]; the reduction keeps (A_1, B_1).
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import sdp, tensor
from .states import BipartiteState, SeparableEnsemble, UpbSpec

KIND_POSITIVE = "positive"
KIND_DECOMPOSABLE = "decomposable"
_KIND_LABELS = {
    KIND_POSITIVE: "positive-extension",
    KIND_DECOMPOSABLE: "decomposable-quasi-extension",
}

# The existence criterion is exact "optimum <= 1".  In floating point a
# candidate within EPS_DECISION above 1 (solver-resolution scale) is still
# handed to certificate assembly, and the verified certificate (or its
# failure) settles the call; beyond the band the dual no-go side takes over.
EPS_DECISION = 5e-8
VERIFY_TOL = 1e-7
BLOCK_PSD_TOL = 1e-9
DUAL_EIG_FLOOR = -1e-9
DUAL_TRACE_CEIL = -1e-7
WITNESS_SAMPLES = 10_000
WITNESS_SAMPLE_FLOOR = -1e-8
WITNESS_SAMPLE_SEED = 20021

DEFAULT_MAX_DIM = 1024
DEFAULT_SOLVER_TOL = 1e-9
SPECTRUM_DIM_CAP = 4096

DECISION_EXISTS = "exists"
DECISION_NOT_EXISTS = "not-exists"
DECISION_INDETERMINATE = "indeterminate"


@dataclass(frozen=True)
class ExtensionShape:
    """Extension space H_A^{s_a} ⊗ H_B^{s_b} over local dims (d_a, d_b)."""

    d_a: int
    d_b: int
    s_a: int
    s_b: int

    def __post_init__(self):
        for name in ("d_a", "d_b", "s_a", "s_b"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")

    @property
    def factor_dims(self) -> tuple[int, ...]:
        return (self.d_a,) * self.s_a + (self.d_b,) * self.s_b

    @property
    def n(self) -> int:
        return self.d_a**self.s_a * self.d_b**self.s_b

    @property
    def a_factors(self) -> tuple[int, ...]:
        return tuple(range(self.s_a))

    @property
    def b_factors(self) -> tuple[int, ...]:
        return tuple(range(self.s_a, self.s_a + self.s_b))

    @property
    def kept_factors(self) -> tuple[int, int]:
        return (0, self.s_a)


def configured_max_dim() -> int:
    env = os.environ.get("LHVCERT_MAX_DIM")
    return int(env) if env else DEFAULT_MAX_DIM


def sym_project(m: np.ndarray, shape: ExtensionShape) -> np.ndarray:
    """Sym_A ⊗ Sym_B applied to an operator on the extension space."""
    return tensor.sym_average(m, shape.factor_dims, shape.a_factors, shape.b_factors)


def embed_pair_operator(op: np.ndarray, shape: ExtensionShape) -> np.ndarray:
    """Lift an operator on A ⊗ B to act on (A_1, B_1) of the extension space."""
    d_ab = shape.d_a * shape.d_b
    op = tensor.as_matrix(op)
    if op.shape != (d_ab, d_ab):
        raise ValueError(f"operator shape {op.shape} does not match d_a*d_b = {d_ab}")
    return tensor.embed_operator(op, shape.factor_dims, shape.kept_factors)


def _check_cap(shape: ExtensionShape, blocks: int, max_dim: int | None) -> None:
    cap = configured_max_dim() if max_dim is None else int(max_dim)
    if shape.n * blocks > cap:
        raise ValueError(
            f"extension dimension {shape.n} x {blocks} block(s) exceeds cap {cap}; "
            "raise LHVCERT_MAX_DIM to override"
        )


def _pair_basis_constraints(rho: BipartiteState, shape: ExtensionShape):
    """Symmetrized embedded basis elements G_i and targets r_i, i > 0."""
    basis = tensor.hermitian_basis(shape.d_a * shape.d_b)
    gs, rs = [], []
    for sigma in basis.elements[1:]:
        gs.append(sym_project(embed_pair_operator(sigma, shape), shape))
        rs.append(float(np.vdot(sigma, rho.rho).real))
    return gs, np.array(rs)


def build_extension_sdp(rho: BipartiteState, shape: ExtensionShape,
                        max_dim: int | None = None) -> sdp.SdpStandardForm:
    """Standard form whose dual is: minimize Tr K over K >= 0 matching the
    reductions of rho on every non-identity basis element.

    F0 = I on the extension space, F_i = Sym'(sigma_i ⊗ I) and
    c_i = Tr(sigma_i rho); the primal variable x parameterizes the
    witness X = I + Σ x_i sigma_i with Sym'(X ⊗ I) >= 0.
    """
    if rho.dims != (shape.d_a, shape.d_b):
        raise ValueError(f"state dims {rho.dims} do not match shape {shape}")
    _check_cap(shape, 1, max_dim)
    gs, rs = _pair_basis_constraints(rho, shape)
    f0 = np.eye(shape.n, dtype=complex)
    return sdp.SdpStandardForm(f0=f0, fs=gs, c=rs)


def partition_classes(shape: ExtensionShape) -> list[tuple[int, ...]]:
    """Representative bipartitions for the decomposable witness search.

    All 2^{s_a+s_b-1} - 1 bipartitions of the extension factors are
    quotiented by permutations within the A copies, permutations within
    the B copies, and by complementation (a full transpose preserves
    PSD); a class is determined by how many A and B factors the part
    contains.  Representatives take the lowest-index factors of each
    kind.
    """
    s_a, s_b = shape.s_a, shape.s_b
    keys = set()
    for a in range(s_a + 1):
        for b in range(s_b + 1):
            if (a, b) in ((0, 0), (s_a, s_b)):
                continue
            keys.add(min((a, b), (s_a - a, s_b - b)))
    reps = []
    for a, b in sorted(keys):
        reps.append(tuple(range(a)) + tuple(range(s_a, s_a + b)))
    return reps


def build_quasi_extension_sdp(rho: BipartiteState, shape: ExtensionShape,
                              max_dim: int | None = None) -> sdp.SdpStandardForm:
    """Standard form whose dual variable is blockdiag(P, Q_1, .., Q_t).

    The dual minimizes Tr P + Σ_p Tr Q_p subject to the reductions of
    Sym'(P + Σ_p Q_p^{T_p}) matching rho; the primal positivity
    constraints require Sym'(X ⊗ I) and all its representative partial
    transposes to be positive semidefinite.
    """
    if rho.dims != (shape.d_a, shape.d_b):
        raise ValueError(f"state dims {rho.dims} do not match shape {shape}")
    parts = partition_classes(shape)
    _check_cap(shape, 1 + len(parts), max_dim)
    gs, rs = _pair_basis_constraints(rho, shape)
    dims = shape.factor_dims
    n = shape.n
    blocks = 1 + len(parts)
    f0 = np.eye(n * blocks, dtype=complex)
    fs = []
    for g in gs:
        big = np.zeros((n * blocks, n * blocks), dtype=complex)
        big[:n, :n] = g
        for k, part in enumerate(parts, start=1):
            big[k * n:(k + 1) * n, k * n:(k + 1) * n] = tensor.partial_transpose(g, dims, part)
        fs.append(big)
    return sdp.SdpStandardForm(f0=f0, fs=fs, c=rs)


@dataclass
class WitnessDecomposition:
    """Decomposable form H = P + Σ_p Q_p^{T_p} with all blocks PSD."""

    p_block: np.ndarray
    q_blocks: list  # [(partition factor tuple, matrix), ...]

    def reassemble(self, dims) -> np.ndarray:
        h = np.array(self.p_block, dtype=complex)
        for part, q in self.q_blocks:
            h = h + tensor.partial_transpose(q, dims, part)
        return h


@dataclass
class CertificateReport:
    kind: str
    ptrace_residual: float
    symmetry_residual: float
    min_eigenvalue: float | None = None
    block_min_eigenvalues: list = field(default_factory=list)
    reassembly_residual: float | None = None
    witness_sample_min: float | None = None

    @property
    def passed(self) -> bool:
        if self.ptrace_residual > VERIFY_TOL or self.symmetry_residual > VERIFY_TOL:
            return False
        if self.kind == KIND_POSITIVE:
            return self.min_eigenvalue is not None and self.min_eigenvalue >= -VERIFY_TOL
        ok = True
        if self.block_min_eigenvalues:
            ok &= min(self.block_min_eigenvalues) >= -BLOCK_PSD_TOL
        if self.reassembly_residual is not None:
            ok &= self.reassembly_residual <= BLOCK_PSD_TOL
        if self.witness_sample_min is not None:
            ok &= self.witness_sample_min >= WITNESS_SAMPLE_FLOOR
        return bool(ok)

    def as_dict(self) -> dict:
        return {
            "kind": _KIND_LABELS[self.kind],
            "ptrace_residual": self.ptrace_residual,
            "symmetry_residual": self.symmetry_residual,
            "min_eigenvalue": self.min_eigenvalue,
            "block_min_eigenvalues": list(self.block_min_eigenvalues),
            "reassembly_residual": self.reassembly_residual,
            "witness_sample_min": self.witness_sample_min,
            "passed": self.passed,
        }


@dataclass
class ExtensionVerdict:
    kind: str
    optimum: float
    decision: str
    certificate: np.ndarray | None = None
    dual_certificate: np.ndarray | None = None
    residuals: CertificateReport | None = None
    decomposition: WitnessDecomposition | None = None
    solver_status: str = ""
    solver_gap: float = 0.0
    solver_iterations: int = 0
    message: str = ""

    @property
    def kind_label(self) -> str:
        return _KIND_LABELS[self.kind]


def sample_product_expectations(h: np.ndarray, shape: ExtensionShape,
                                n_samples: int = WITNESS_SAMPLES,
                                seed: int = WITNESS_SAMPLE_SEED,
                                real: bool = False) -> float:
    """Minimum of <v|H|v> over random product vectors v = v_1 ⊗ ... ⊗ v_s.

    A sampled sanity layer: deciding witness positivity exactly is hard,
    and the decomposable form already guarantees it structurally.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    vecs = np.ones((n_samples, 1), dtype=complex)
    for d in shape.factor_dims:
        local = rng.standard_normal((n_samples, d))
        if not real:
            local = local + 1j * rng.standard_normal((n_samples, d))
        local /= np.linalg.norm(local, axis=1, keepdims=True)
        vecs = (vecs[:, :, None] * local[:, None, :]).reshape(n_samples, -1)
    vals = np.einsum("bi,ij,bj->b", vecs.conj(), h, vecs).real
    return float(vals.min())


def verify_certificate(h: np.ndarray, rho: BipartiteState, shape: ExtensionShape,
                       kind: str = KIND_POSITIVE,
                       decomposition: WitnessDecomposition | None = None,
                       sample_witness: bool = True) -> CertificateReport:
    """Independent residual checks of a claimed (quasi-)extension.

    Reports the distance of the (A_1, B_1) reduction from rho, the
    distance from exact permutation symmetry, and positivity: the minimum
    eigenvalue for a positive extension, or block PSD + reassembly (plus
    sampled product-vector expectations) for a decomposable witness.
    """
    h = tensor.as_matrix(h)
    if h.shape != (shape.n, shape.n):
        raise ValueError(f"certificate shape {h.shape} does not match extension dim {shape.n}")
    dims = shape.factor_dims
    reduced = tensor.partial_trace(h, dims, shape.kept_factors)
    ptrace_res = float(np.linalg.norm(reduced - rho.rho))
    sym_res = float(np.linalg.norm(h - sym_project(h, shape)))
    if kind == KIND_POSITIVE:
        return CertificateReport(
            kind=kind,
            ptrace_residual=ptrace_res,
            symmetry_residual=sym_res,
            min_eigenvalue=tensor.min_eigenvalue(h),
        )
    if kind != KIND_DECOMPOSABLE:
        raise ValueError(f"unknown kind {kind!r}")
    block_eigs = []
    reassembly = None
    if decomposition is not None:
        block_eigs.append(tensor.min_eigenvalue(decomposition.p_block))
        for _, q in decomposition.q_blocks:
            block_eigs.append(tensor.min_eigenvalue(q))
        reassembly = float(np.linalg.norm(decomposition.reassemble(dims) - h))
    sample_min = None
    if sample_witness:
        sample_min = sample_product_expectations(h, shape)
    return CertificateReport(
        kind=kind,
        ptrace_residual=ptrace_res,
        symmetry_residual=sym_res,
        block_min_eigenvalues=block_eigs,
        reassembly_residual=reassembly,
        witness_sample_min=sample_min,
    )


def _clip_psd(m: np.ndarray, floor: float = -VERIFY_TOL) -> np.ndarray:
    """Zero out tiny negative eigenvalues introduced by solver roundoff.

    Eigenvalues below ``floor`` are left untouched so that a genuinely
    indefinite matrix still fails verification downstream.
    """
    w, u = np.linalg.eigh(tensor.hermitize(m))
    if w[0] >= 0.0 or w[0] < floor:
        return m
    return (u * np.maximum(w, 0.0)) @ u.conj().T


def _assemble_positive(z: np.ndarray, shape: ExtensionShape) -> np.ndarray:
    """H = Sym'(K + ((1 - Tr K)/n) I), floored and renormalized to trace 1."""
    trace = float(np.trace(z).real)
    h = z + ((1.0 - trace) / shape.n) * np.eye(shape.n, dtype=complex)
    h = _clip_psd(h)
    h = h / float(np.trace(h).real)
    return sym_project(tensor.hermitize(h), shape)


def _group_elements(shape: ExtensionShape) -> list[tuple[int, ...]]:
    perms = []
    for ga in itertools.permutations(range(shape.s_a)):
        for gb in itertools.permutations(range(shape.s_b)):
            perm = list(ga) + [shape.s_a + p for p in gb]
            perms.append(tuple(perm))
    return perms


def _assemble_decomposable(z: np.ndarray, shape: ExtensionShape,
                           parts: list) -> tuple[np.ndarray, WitnessDecomposition]:
    """Symmetrize blockdiag(P, Q_p) into an explicitly decomposable witness.

    Conjugating Q^{T_p} by a copy permutation g gives (g Q g†)^{T_{g(p)}},
    so Sym'(P + Σ Q_p^{T_p}) expands over the partition orbits with PSD
    blocks, and the stored decomposition reassembles to H exactly.
    """
    n = shape.n
    dims = shape.factor_dims
    trace = float(np.trace(z).real)
    p_block = z[:n, :n] + ((1.0 - trace) / n) * np.eye(n, dtype=complex)
    p_block = _clip_psd(tensor.hermitize(p_block))
    q_raw = []
    for k in range(len(parts)):
        blk = tensor.hermitize(z[(k + 1) * n:(k + 2) * n, (k + 1) * n:(k + 2) * n])
        q_raw.append(_clip_psd(blk))
    group = _group_elements(shape)
    p_sym = sym_project(p_block, shape)
    orbit_blocks: dict[tuple[int, ...], np.ndarray] = {}
    for part, q in zip(parts, q_raw):
        for g in group:
            image = tuple(sorted(g[f] for f in part))
            contrib = tensor.conjugate_by_permutation(q, g, dims) / len(group)
            if image in orbit_blocks:
                orbit_blocks[image] += contrib
            else:
                orbit_blocks[image] = contrib
    q_blocks = [(part, blk) for part, blk in sorted(orbit_blocks.items())]
    decomp = WitnessDecomposition(p_block=p_sym, q_blocks=q_blocks)
    h = decomp.reassemble(dims)
    return tensor.hermitize(h), decomp


def _dual_witness(x: np.ndarray, rho: BipartiteState, shape: ExtensionShape, kind: str):
    """Rebuild X = I + Σ x_i sigma_i and check it refutes existence.

    Any admissible H would give 0 <= Tr(Sym'(X ⊗ I) H) = Tr(X rho), so a
    verified X with Tr(X rho) < 0 is a no-go certificate; for the
    decomposable kind the representative partial transposes of
    Sym'(X ⊗ I) must be PSD as well.  Solver roundoff on the positivity
    side is repaired by lifting X with a multiple of the identity, which
    shifts every eigenvalue and Tr(X rho) by the same small amount.
    """
    d_ab = shape.d_a * shape.d_b
    basis = tensor.hermitian_basis(d_ab)
    x_op = np.eye(d_ab, dtype=complex)
    for xi, sigma in zip(x, basis.elements[1:]):
        x_op = x_op + xi * sigma

    def min_block_eig(op):
        g = sym_project(embed_pair_operator(op, shape), shape)
        eigs = [tensor.min_eigenvalue(g)]
        if kind == KIND_DECOMPOSABLE:
            for part in partition_classes(shape):
                eigs.append(tensor.min_eigenvalue(tensor.partial_transpose(g, shape.factor_dims, part)))
        return min(eigs)

    min_eig = min_block_eig(x_op)
    if -1e-6 < min_eig < 0.0:
        x_op = x_op - min_eig * np.eye(d_ab, dtype=complex)
        min_eig = min_block_eig(x_op)
    tr_x_rho = float(np.vdot(x_op, rho.rho).real)
    ok = tr_x_rho < DUAL_TRACE_CEIL and min_eig >= DUAL_EIG_FLOOR
    return x_op, tr_x_rho, min_eig, ok


def decide(rho: BipartiteState, shape: ExtensionShape, kind: str = KIND_POSITIVE,
           tol: float = DEFAULT_SOLVER_TOL, max_dim: int | None = None,
           dump_sdp: str | None = None) -> ExtensionVerdict:
    """Decide whether rho admits the requested (quasi-)extension.

    Solves the extension SDP; an optimum at most 1 (within the decision
    band) yields an explicit certificate H with unit trace, exact
    symmetry and verified reduction to rho, while a larger optimum yields
    a verified dual no-go certificate X.  Solver trouble or failed
    verification is reported as indeterminate rather than guessed.
    """
    if kind not in (KIND_POSITIVE, KIND_DECOMPOSABLE):
        raise ValueError(f"unknown kind {kind!r}")
    if kind == KIND_POSITIVE:
        form = build_extension_sdp(rho, shape, max_dim)
        parts = []
    else:
        form = build_quasi_extension_sdp(rho, shape, max_dim)
        parts = partition_classes(shape)
    result = sdp.solve(form, tol=tol)
    if dump_sdp:
        with open(dump_sdp, "w") as fh:
            json.dump(sdp.form_to_json(form, result), fh)
    base = dict(
        kind=kind,
        solver_status=result.status,
        solver_gap=result.gap,
        solver_iterations=result.iterations,
    )
    if result.status != sdp.STATUS_OPTIMAL:
        return ExtensionVerdict(optimum=math.nan, decision=DECISION_INDETERMINATE,
                                message=f"solver did not converge: {result.status} {result.message}",
                                **base)
    optimum = float(np.trace(result.z).real)
    if optimum <= 1.0 + EPS_DECISION:
        if kind == KIND_POSITIVE:
            h = _assemble_positive(result.z, shape)
            decomp = None
        else:
            h, decomp = _assemble_decomposable(result.z, shape, parts)
        report = verify_certificate(h, rho, shape, kind, decomp)
        if report.passed:
            return ExtensionVerdict(optimum=optimum, decision=DECISION_EXISTS,
                                    certificate=h, residuals=report, decomposition=decomp,
                                    **base)
        return ExtensionVerdict(optimum=optimum, decision=DECISION_INDETERMINATE,
                                certificate=h, residuals=report, decomposition=decomp,
                                message="assembled certificate failed verification", **base)
    x_op, tr_x_rho, min_eig, ok = _dual_witness(result.x, rho, shape, kind)
    if ok:
        return ExtensionVerdict(optimum=optimum, decision=DECISION_NOT_EXISTS,
                                dual_certificate=x_op,
                                message=f"Tr(X rho) = {tr_x_rho:.6g}, witness min eig {min_eig:.3g}",
                                **base)
    return ExtensionVerdict(optimum=optimum, decision=DECISION_INDETERMINATE,
                            dual_certificate=x_op,
                            message=f"dual certificate failed: Tr(X rho) = {tr_x_rho:.6g}, "
                                    f"min eig {min_eig:.3g}", **base)


def product_extension(ensemble: SeparableEnsemble, shape: ExtensionShape) -> np.ndarray:
    """Copy each product state onto every extension slot:
    H = Σ_i p_i (|ψ_i><ψ_i|)^{⊗ s_a} ⊗ (|φ_i><φ_i|)^{⊗ s_b}."""
    if ensemble.dims != (shape.d_a, shape.d_b):
        raise ValueError("ensemble dims do not match shape")
    h = np.zeros((shape.n, shape.n), dtype=complex)
    for p, a, b in zip(ensemble.weights, ensemble.a_vectors, ensemble.b_vectors):
        vec = tensor.vec_kron_all([a] * shape.s_a + [b] * shape.s_b)
        h += p * np.outer(vec, vec.conj())
    return h


def upb_analytic_extension(upb: UpbSpec) -> np.ndarray:
    """Closed-form (2,2)-symmetric extension for a real-UPB state.

    With |Ψ> = Σ_i |ii> and v = |Ψ>_{A2 A1} ⊗ |Ψ>_{B1 B2} - Σ_i
    |a_i a_i b_i b_i>, the rank-one operator |v><v| is manifestly PSD,
    invariant under swapping the two A copies and the two B copies, and
    its trace over (A_2, B_2) is exactly the UPB complement projector;
    normalizing by the projector rank makes the reduction the normalized
    UPB state.  Factor order of the result is A2 A1 B1 B2, which the swap
    symmetry makes identical to A1 A2 B1 B2.
    """
    for a, b in upb.vectors:
        if np.max(np.abs(np.asarray(a).imag)) > 0 or np.max(np.abs(np.asarray(b).imag)) > 0:
            raise ValueError("analytic extension requires a real UPB")
    d_a, d_b = upb.d_a, upb.d_b
    psi_a = np.zeros(d_a * d_a, dtype=complex)
    for i in range(d_a):
        psi_a[i * d_a + i] = 1.0
    psi_b = np.zeros(d_b * d_b, dtype=complex)
    for i in range(d_b):
        psi_b[i * d_b + i] = 1.0
    v = np.kron(psi_a, psi_b)
    for a, b in upb.vectors:
        v = v - tensor.vec_kron_all([a, a, b, b])
    rank = d_a * d_b - len(upb.vectors)
    return np.outer(v, v.conj()) / rank


def trace_down(h: np.ndarray, shape: ExtensionShape, new_shape: ExtensionShape) -> np.ndarray:
    """Reduce a certificate to a smaller shape by tracing out trailing copies.

    Tracing out copies of A or B preserves the witness property, the
    residual symmetry and the (A_1, B_1) reduction, so existence at a
    shape implies existence at every smaller shape.
    """
    if (new_shape.d_a, new_shape.d_b) != (shape.d_a, shape.d_b):
        raise ValueError("local dimensions must match")
    if new_shape.s_a > shape.s_a or new_shape.s_b > shape.s_b:
        raise ValueError("new shape must be no larger than the old one")
    keep = list(range(new_shape.s_a)) + [shape.s_a + k for k in range(new_shape.s_b)]
    return tensor.partial_trace(h, shape.factor_dims, keep)


def werner_swap_spectrum(d: int, s_a: int, s_b: int) -> np.ndarray:
    """Eigenvalues (ascending) of Sym'(V ⊗ I) on H_d^{s_a + s_b}.

    Symmetrizing the flip between the first A and B copies leaves an
    average of the transpositions that swap one A copy with one B copy,
    (1/(s_a s_b)) Σ_{i,j} π_(A_i, B_j); its spectrum is computed by a
    dense eigensolve.
    """
    s = s_a + s_b
    if d**s > SPECTRUM_DIM_CAP:
        raise ValueError(f"d^(s_a+s_b) = {d**s} exceeds cap {SPECTRUM_DIM_CAP}")
    dims = (d,) * s
    acc = np.zeros((d**s, d**s), dtype=complex)
    for i in range(s_a):
        for j in range(s_b):
            perm = list(range(s))
            perm[i], perm[s_a + j] = perm[s_a + j], perm[i]
            acc += tensor.permutation_op(perm, dims)
    return np.linalg.eigvalsh(tensor.hermitize(acc / (s_a * s_b)))


def werner_threshold(d: int, s_a: int, s_b: int) -> tuple[float, float]:
    """(lambda_m, phi_min): Werner states extend exactly for phi >= phi_min.

    lambda_m is the magnitude of the most negative eigenvalue of
    Sym'(V ⊗ I); the single-variable dual optimum is 1/lambda_m, so the
    extension exists over -lambda_m <= phi <= 1.
    """
    eigs = werner_swap_spectrum(d, s_a, s_b)
    lam = -float(eigs[0]) if eigs[0] < 0 else 0.0
    return lam, -lam


@dataclass
class SweepResult:
    status: str                    # ok | non-monotone | indeterminate-probe
    bracket_lo: float
    bracket_hi: float
    estimate: float
    evaluations: list              # [(parameter, optimum, decision), ...]
    kind: str
    resolution: float


def sweep_threshold(family: Callable[[float], BipartiteState], shape: ExtensionShape,
                    kind: str, lo: float, hi: float, resolution: float = 0.005,
                    tol: float = DEFAULT_SOLVER_TOL, max_dim: int | None = None) -> SweepResult:
    """Bisect the decision boundary of a one-parameter family.

    The endpoints must decide differently (the family is assumed monotone
    by the caller); otherwise the sweep reports non-monotone instead of
    guessing.  Probes very close to the boundary can be certificate-
    indeterminate; bracketing then falls back on the sign of optimum - 1,
    which is the exact existence criterion.  All probe verdicts are
    returned.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    evals = []

    def probe(param: float):
        verdict = decide(family(param), shape, kind, tol=tol, max_dim=max_dim)
        evals.append((param, verdict.optimum, verdict.decision))
        if verdict.solver_status != sdp.STATUS_OPTIMAL:
            return None
        # Rank-deficient states sit exactly at optimum 1 on the extendible
        # side, so classify against the same band used by decide().
        return verdict.optimum <= 1.0 + EPS_DECISION

    side_lo = probe(lo)
    side_hi = probe(hi)
    if None in (side_lo, side_hi):
        return SweepResult("indeterminate-probe", lo, hi, 0.5 * (lo + hi), evals, kind, resolution)
    if side_lo == side_hi or DECISION_INDETERMINATE in (evals[0][2], evals[1][2]):
        return SweepResult("non-monotone", lo, hi, 0.5 * (lo + hi), evals, kind, resolution)
    a, b = lo, hi
    while b - a > resolution:
        mid = 0.5 * (a + b)
        side_mid = probe(mid)
        if side_mid is None:
            return SweepResult("indeterminate-probe", a, b, 0.5 * (a + b), evals, kind, resolution)
        if side_mid == side_lo:
            a = mid
        else:
            b = mid
    return SweepResult("ok", a, b, 0.5 * (a + b), evals, kind, resolution)
