"""Dense complex linear algebra on tensor-product Hilbert spaces.

Matrices are numpy ``complex128`` arrays in row-major order.  A
tensor-product space is described by the ordered list of its factor
dimensions; factor 0 is the leftmost Kronecker slot.  All operations are
pure functions of their inputs and never mutate their arguments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

# Hermiticity is enforced tightly at construction time and more loosely at
# operation boundaries, where solver noise has accumulated.
HERMITIAN_CONSTRUCTION_TOL = 1e-12
HERMITIAN_OPERATION_TOL = 1e-10


def as_matrix(m) -> np.ndarray:
    """Coerce input to a 2-d complex array."""
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a matrix, got array of ndim {a.ndim}")
    return a


def hermiticity_defect(m) -> float:
    m = as_matrix(m)
    return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0


def is_hermitian(m, tol: float = HERMITIAN_OPERATION_TOL) -> bool:
    return hermiticity_defect(m) <= tol


def hermitize(m) -> np.ndarray:
    """Project onto the Hermitian part, (M + M†)/2."""
    m = as_matrix(m)
    return 0.5 * (m + m.conj().T)


def _check_dims(m: np.ndarray, dims) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must be positive, got {dims}")
    n = int(np.prod(dims))
    if m.shape != (n, n):
        raise ValueError(f"matrix shape {m.shape} does not match factor dims {dims}")
    return dims


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices."""
    return np.kron(as_matrix(a), as_matrix(b))


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence of matrices, left to right."""
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, as_matrix(m))
    return out


def vec_kron_all(vecs) -> np.ndarray:
    """Kronecker product of a sequence of vectors, left to right."""
    out = np.array([1.0 + 0.0j])
    for v in vecs:
        out = np.kron(out, np.asarray(v, dtype=complex).ravel())
    return out


def partial_trace(m, dims, keep) -> np.ndarray:
    """Trace out all factors not listed in ``keep``.

    The kept factors appear in the result in ascending index order.  The
    total trace is preserved.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    s = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= s for k in keep):
        raise ValueError(f"keep indices {keep} out of range for {s} factors")
    t = m.reshape(dims + dims)
    row = list(range(s))
    col = list(range(s, 2 * s))
    for f in range(s):
        if f not in keep:
            col[f] = row[f]
    out_sub = [row[f] for f in keep] + [col[f] for f in keep]
    dk = int(np.prod([dims[f] for f in keep])) if keep else 1
    return np.einsum(t, row + col, out_sub).reshape(dk, dk)


def partial_transpose(m, dims, subset) -> np.ndarray:
    """Transpose the factors listed in ``subset``, leaving the rest alone."""
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    s = len(dims)
    subset = set(int(k) for k in subset)
    if any(k < 0 or k >= s for k in subset):
        raise ValueError(f"subset {sorted(subset)} out of range for {s} factors")
    t = m.reshape(dims + dims)
    axes = list(range(2 * s))
    for f in subset:
        axes[f], axes[s + f] = axes[s + f], axes[f]
    n = m.shape[0]
    return t.transpose(axes).reshape(n, n)


def compose_permutations(g, h) -> tuple[int, ...]:
    """Composition g∘h acting as: factor k -> h[k] -> g[h[k]]."""
    return tuple(g[h[k]] for k in range(len(h)))


def invert_permutation(perm) -> tuple[int, ...]:
    inv = [0] * len(perm)
    for k, p in enumerate(perm):
        inv[p] = k
    return tuple(inv)


def _permutation_targets(perm, dims) -> np.ndarray:
    """Flat index map t with t[col] = row for the factor permutation.

    ``perm[k]`` is the destination slot of factor ``k``; the destination
    slot must have the same local dimension.
    """
    dims = tuple(int(d) for d in dims)
    s = len(dims)
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(s)):
        raise ValueError(f"{perm} is not a permutation of {s} factors")
    out_dims = [0] * s
    for k, p in enumerate(perm):
        out_dims[p] = dims[k]
    if tuple(out_dims) != dims:
        raise ValueError(f"permutation {perm} moves factors between unequal dims {dims}")
    n = int(np.prod(dims))
    strides = np.ones(s, dtype=np.int64)
    for k in range(s - 2, -1, -1):
        strides[k] = strides[k + 1] * dims[k + 1]
    grids = np.indices(dims).reshape(s, n)
    t = np.zeros(n, dtype=np.int64)
    for k in range(s):
        t += grids[k] * strides[perm[k]]
    return t


def permutation_op(perm, dims) -> np.ndarray:
    """Unitary 0/1 matrix sending factor k to slot perm[k].

    Satisfies the composition law P(g) P(h) = P(g∘h).
    """
    t = _permutation_targets(perm, dims)
    n = t.size
    out = np.zeros((n, n), dtype=complex)
    out[t, np.arange(n)] = 1.0
    return out


def conjugate_by_permutation(m, perm, dims) -> np.ndarray:
    """P M P† for the factor permutation, via index relabeling."""
    m = as_matrix(m)
    t = _permutation_targets(perm, dims)
    tinv = np.empty_like(t)
    tinv[t] = np.arange(t.size)
    return m[np.ix_(tinv, tinv)]


def _group_permutations(s: int, group_a, group_b) -> list[tuple[int, ...]]:
    """All factor permutations acting within group_a and within group_b."""
    group_a = tuple(int(f) for f in group_a)
    group_b = tuple(int(f) for f in group_b)
    if set(group_a) & set(group_b):
        raise ValueError("symmetrization groups must be disjoint")
    perms = []
    for ga in itertools.permutations(range(len(group_a))):
        for gb in itertools.permutations(range(len(group_b))):
            perm = list(range(s))
            for k, f in enumerate(group_a):
                perm[f] = group_a[ga[k]]
            for k, f in enumerate(group_b):
                perm[f] = group_b[gb[k]]
            perms.append(tuple(perm))
    return perms


def sym_average(m, dims, group_a, group_b=()) -> np.ndarray:
    """Average of all conjugations by within-group factor permutations.

    The result is invariant under every permutation that acts inside
    ``group_a`` or inside ``group_b``; trace is preserved and positive
    semidefiniteness is maintained.
    """
    m = as_matrix(m)
    dims = _check_dims(m, dims)
    for grp in (group_a, group_b):
        gdims = {dims[int(f)] for f in grp}
        if len(gdims) > 1:
            raise ValueError(f"group {tuple(grp)} mixes unequal dims {sorted(gdims)}")
    perms = _group_permutations(len(dims), group_a, group_b)
    acc = np.zeros_like(m)
    for perm in perms:
        acc += conjugate_by_permutation(m, perm, dims)
    return acc / len(perms)


def embed_operator(op, dims, positions) -> np.ndarray:
    """Lift an operator acting on the listed factors to the full space.

    ``op`` acts on the tensor product of ``dims[p]`` for p in ``positions``
    (in that order); identity is placed on every other factor.
    """
    op = as_matrix(op)
    dims = tuple(int(d) for d in dims)
    pos = [int(p) for p in positions]
    if len(set(pos)) != len(pos):
        raise ValueError("positions must be distinct")
    s = len(dims)
    dsub = tuple(dims[p] for p in pos)
    nsub = int(np.prod(dsub))
    if op.shape != (nsub, nsub):
        raise ValueError(f"operator shape {op.shape} does not match factors {dsub}")
    op_t = op.reshape(dsub + dsub)
    operands = [op_t, [p for p in pos] + [s + p for p in pos]]
    for k in range(s):
        if k not in pos:
            operands.extend([np.eye(dims[k], dtype=complex), [k, s + k]])
    operands.append(list(range(2 * s)))
    n = int(np.prod(dims))
    return np.einsum(*operands).reshape(n, n)


@dataclass(frozen=True)
class HermitianBasis:
    """Trace-orthonormal Hermitian basis with identity-proportional first element."""

    dim: int
    elements: tuple

    def __len__(self) -> int:
        return len(self.elements)


def hermitian_basis(dim: int) -> HermitianBasis:
    """Generalized Gell-Mann basis, trace-orthonormalized.

    Element 0 is I/sqrt(dim); the remaining dim**2 - 1 elements are
    traceless (symmetric, antisymmetric and diagonal families).
    """
    dim = int(dim)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    elems = [np.eye(dim, dtype=complex) / np.sqrt(dim)]
    inv_sqrt2 = 1.0 / np.sqrt(2.0)
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = inv_sqrt2
            sym[k, j] = inv_sqrt2
            elems.append(sym)
            asym = np.zeros((dim, dim), dtype=complex)
            asym[j, k] = -1j * inv_sqrt2
            asym[k, j] = 1j * inv_sqrt2
            elems.append(asym)
    for l in range(1, dim):
        diag = np.zeros(dim, dtype=complex)
        diag[:l] = 1.0
        diag[l] = -l
        elems.append(np.diag(diag) / np.sqrt(l * (l + 1)))
    return HermitianBasis(dim=dim, elements=tuple(elems))


def hermitian_eig(m, tol: float = HERMITIAN_OPERATION_TOL):
    """Eigendecomposition of a Hermitian matrix.

    Returns (eigenvalues ascending, eigenvector columns).  Raises on
    non-Hermitian input.
    """
    m = as_matrix(m)
    defect = hermiticity_defect(m)
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if defect > tol * scale:
        raise ValueError(f"matrix is not Hermitian (defect {defect:.3e})")
    w, u = np.linalg.eigh(hermitize(m))
    return w, u


def min_eigenvalue(m) -> float:
    return float(np.linalg.eigvalsh(hermitize(m))[0])


def matrix_to_json(m) -> dict:
    """Serialize a matrix as {"rows", "cols", "entries": [[re, im], ...]}."""
    m = as_matrix(m)
    rows, cols = m.shape
    flat = m.reshape(-1)
    return {
        "rows": int(rows),
        "cols": int(cols),
        "entries": [[float(z.real), float(z.imag)] for z in flat],
    }


def matrix_from_json(d: dict) -> np.ndarray:
    rows = int(d["rows"])
    cols = int(d["cols"])
    entries = d["entries"]
    if len(entries) != rows * cols:
        raise ValueError(f"entry count {len(entries)} != rows*cols = {rows * cols}")
    flat = np.array([complex(re, im) for re, im in entries])
    return flat.reshape(rows, cols)
