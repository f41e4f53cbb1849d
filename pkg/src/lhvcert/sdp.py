"""Dense primal-dual interior-point solver for linear matrix inequalities.

Solves the standard-form pair

    (P)  minimize    c.x          over x in R^m
         subject to  F(x) = F0 + sum_i x_i F_i  >= 0

    (D)  maximize   -Tr(F0 Z)     over Hermitian Z
         subject to  Z >= 0,  Tr(F_i Z) = c_i,

with Hermitian complex data, using an infeasible-start path-following
method with Nesterov-Todd scaling and a Mehrotra predictor-corrector
step.  For any feasible pair, c.x + Tr(F0 Z) = Tr(F(x) Z) >= 0 (weak
duality); the solver drives this gap and both feasibility residuals
below the requested tolerance.

Linear programs are handled by the same routine with diagonal matrices;
see :func:`lp_standard_form`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import tensor

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "primal-infeasible-certified"
STATUS_NUMERICAL = "numerical-failure"
STATUS_ITERATIONS = "iteration-limit"

FRACTION_TO_BOUNDARY = 0.98
MAX_ITERATIONS = 200
SCHUR_REG_INITIAL = 1e-10
SCHUR_REG_MAX = 1e-6
INFEAS_RAY_TOL = 1e-7

# Schur-complement assembly works on chunks of the constraint stack to
# bound peak memory on the largest desk-scale problems (n=256, m=255).
_CHUNK_ENTRIES = 4_000_000


@dataclass
class SdpStandardForm:
    """Problem data (F0, F_i, c); all matrices Hermitian of equal size."""

    f0: np.ndarray
    fs: list
    c: np.ndarray

    def __post_init__(self):
        self.f0 = tensor.as_matrix(self.f0)
        self.fs = [tensor.as_matrix(f) for f in self.fs]
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.f0.shape[0]
        if self.f0.shape != (n, n):
            raise ValueError("F0 must be square")
        if len(self.fs) != self.c.size:
            raise ValueError("number of F_i must match length of c")
        for k, f in enumerate([self.f0] + self.fs):
            if f.shape != (n, n):
                raise ValueError(f"constraint matrix {k} has shape {f.shape}, expected {(n, n)}")
            if tensor.hermiticity_defect(f) > tensor.HERMITIAN_OPERATION_TOL:
                raise ValueError(f"constraint matrix {k} is not Hermitian")

    @property
    def n(self) -> int:
        return self.f0.shape[0]

    @property
    def m(self) -> int:
        return self.c.size


@dataclass
class IterateRecord:
    iteration: int
    mu: float
    primal_infeas: float
    dual_infeas: float
    gap: float          # c.x + Tr(F0 Z), signed
    primal_obj: float
    dual_obj: float


@dataclass
class SdpResult:
    x: np.ndarray
    z: np.ndarray
    primal_obj: float
    dual_obj: float
    gap: float          # |c.x + Tr(F0 Z)|
    status: str
    iterations: int
    history: list = field(default_factory=list)
    message: str = ""


def _tr_inner(a: np.ndarray, b: np.ndarray) -> float:
    """Tr(A B) for Hermitian A, B (real up to roundoff)."""
    return float(np.vdot(a, b).real)


def _psd_eig(m: np.ndarray):
    w, u = np.linalg.eigh(tensor.hermitize(m))
    floor = max(abs(w[-1]), 1.0) * 5e-16
    return np.maximum(w, floor), u


def _apply_spectral(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    return (u * w) @ u.conj().T


def _max_step(m: np.ndarray, dm: np.ndarray) -> float:
    """sup {alpha : M + alpha dM >= 0} for Hermitian PD M."""
    try:
        chol = np.linalg.cholesky(tensor.hermitize(m))
    except np.linalg.LinAlgError:
        w, u = _psd_eig(m)
        chol = _apply_spectral(u, np.sqrt(w))
    y = sla.solve_triangular(chol, dm, lower=True)
    y = sla.solve_triangular(chol, y.conj().T, lower=True).conj().T
    lam_min = float(np.linalg.eigvalsh(tensor.hermitize(y))[0])
    if lam_min >= -1e-14:
        return np.inf
    return -1.0 / lam_min


class _ConstraintStack:
    """The constraint matrices stacked for vectorized contractions."""

    def __init__(self, fs):
        self.f = np.stack(fs)  # (m, n, n)
        m, n, _ = self.f.shape
        self.m, self.n = m, n
        self.f_flat = self.f.reshape(m, n * n)

    def combine(self, x: np.ndarray) -> np.ndarray:
        """A(x) = sum_i x_i F_i."""
        return np.tensordot(x, self.f, axes=1)

    def inner_all(self, r: np.ndarray) -> np.ndarray:
        """Vector of Tr(F_i R) for Hermitian R."""
        return (self.f_flat @ r.conj().reshape(-1)).real

    def schur(self, w_inv: np.ndarray) -> np.ndarray:
        """M_ij = Tr(F_i W^-1 F_j W^-1), symmetric positive definite."""
        m, n = self.m, self.n
        chunk = max(1, _CHUNK_ENTRIES // (n * n))
        out = np.empty((m, m))
        for lo in range(0, m, chunk):
            hi = min(m, lo + chunk)
            g = w_inv @ self.f[lo:hi] @ w_inv          # (k, n, n)
            out[:, lo:hi] = (self.f_flat @ g.reshape(hi - lo, n * n).conj().T).real
        return 0.5 * (out + out.T)


def _certify_infeasibility(form: SdpStandardForm, stack: _ConstraintStack, z: np.ndarray):
    """A dual improving ray certifies that no x satisfies F(x) >= 0.

    Requires Z >= 0 with Tr(F_i Z) ~ 0 for all i and Tr(F0 Z) < 0.
    """
    tr = float(np.trace(z).real)
    if tr <= 0:
        return None
    ray = z / tr
    if np.max(np.abs(stack.inner_all(ray))) > INFEAS_RAY_TOL:
        return None
    if _tr_inner(form.f0, ray) >= -INFEAS_RAY_TOL:
        return None
    return ray


def solve(form: SdpStandardForm, tol: float = 1e-9, max_iter: int = MAX_ITERATIONS) -> SdpResult:
    """Solve the standard-form pair to the requested tolerance.

    Terminates with status ``optimal`` when both feasibility residuals and
    the relative duality gap are below ``tol``.  Deterministic for
    identical inputs.
    """
    if not 1e-10 <= tol <= 1e-4:
        raise ValueError(f"tol must lie in [1e-10, 1e-4], got {tol}")
    n, m = form.n, form.m
    stack = _ConstraintStack(form.fs)
    f0 = tensor.hermitize(form.f0)
    c = form.c

    eta = max(1.0, np.linalg.norm(f0) / np.sqrt(n), float(np.max(np.abs(c))) if m else 1.0)
    x = np.zeros(m)
    s = eta * np.eye(n, dtype=complex)
    z = eta * np.eye(n, dtype=complex)

    f0_norm = 1.0 + np.linalg.norm(f0)
    c_scale = 1.0 + np.abs(c)

    history: list[IterateRecord] = []
    status = STATUS_ITERATIONS
    message = ""
    it = 0

    for it in range(max_iter + 1):
        r_p = f0 + stack.combine(x) - s
        r_d = c - stack.inner_all(z)
        pobj = float(c @ x)
        dobj = -_tr_inner(f0, z)
        gap_signed = pobj - dobj
        mu = _tr_inner(s, z) / n
        pinf = np.linalg.norm(r_p) / f0_norm
        dinf = float(np.max(np.abs(r_d) / c_scale)) if m else 0.0
        history.append(
            IterateRecord(it, mu, pinf, dinf, gap_signed, pobj, dobj)
        )
        if pinf <= tol and dinf <= tol and abs(gap_signed) <= tol * (1.0 + abs(pobj)):
            status = STATUS_OPTIMAL
            break
        if it == max_iter:
            break

        # Nesterov-Todd scaling point: W Z W = S.
        ws, us = _psd_eig(s)
        s_half = _apply_spectral(us, np.sqrt(ws))
        t = tensor.hermitize(s_half @ z @ s_half)
        wt, ut = _psd_eig(t)
        t_ih = _apply_spectral(ut, wt**-0.5)
        w_mat = tensor.hermitize(s_half @ t_ih @ s_half)
        ww, uw = _psd_eig(w_mat)
        w_inv = _apply_spectral(uw, 1.0 / ww)
        w_half = _apply_spectral(uw, np.sqrt(ww))
        w_ihalf = _apply_spectral(uw, ww**-0.5)
        d_mat = tensor.hermitize(w_ihalf @ s @ w_ihalf)
        wd, ud = _psd_eig(d_mat)

        schur = stack.schur(w_inv)
        reg = SCHUR_REG_INITIAL
        cho = None
        while reg <= SCHUR_REG_MAX:
            try:
                cho = sla.cho_factor(schur + reg * np.eye(m), lower=True)
                break
            except np.linalg.LinAlgError:
                reg *= 10.0
        if cho is None:
            ray = _certify_infeasibility(form, stack, z)
            if ray is not None:
                return SdpResult(x, ray, pobj, dobj, abs(gap_signed), STATUS_INFEASIBLE, it, history,
                                 "dual improving ray found during Schur factorization failure")
            return SdpResult(x, z, pobj, dobj, abs(gap_signed), STATUS_NUMERICAL, it, history,
                             "Schur complement factorization failed after regularization retries")

        w_rp_w = w_inv @ r_p @ w_inv

        def newton(r_c):
            rhs = stack.inner_all(r_c - w_rp_w) - r_d
            dx = sla.cho_solve(cho, rhs)
            ds = tensor.hermitize(stack.combine(dx) + r_p)
            dz = tensor.hermitize(r_c - w_inv @ ds @ w_inv)
            return dx, ds, dz

        # Predictor (affine scaling direction).
        dx_a, ds_a, dz_a = newton(-z)
        ap_a = min(1.0, FRACTION_TO_BOUNDARY * _max_step(s, ds_a))
        ad_a = min(1.0, FRACTION_TO_BOUNDARY * _max_step(z, dz_a))
        mu_aff = max(_tr_inner(s + ap_a * ds_a, z + ad_a * dz_a), 0.0) / n
        sigma = min(max((mu_aff / mu) ** 3, 1e-10), 1.0) if mu > 0 else 0.1

        # Corrector with the second-order term in the scaled space.
        ds_t = w_ihalf @ ds_a @ w_ihalf
        dz_t = w_half @ dz_a @ w_half
        e_corr = tensor.hermitize(0.5 * (ds_t @ dz_t + dz_t @ ds_t))
        e_b = ud.conj().T @ e_corr @ ud
        lyap = 2.0 * e_b / (wd[:, None] + wd[None, :])
        d_inv = _apply_spectral(ud, 1.0 / wd)
        r_tilde = sigma * mu * d_inv - d_mat - tensor.hermitize(ud @ lyap @ ud.conj().T)
        r_c = tensor.hermitize(w_ihalf @ r_tilde @ w_ihalf)

        dx, ds, dz = newton(r_c)
        ap = min(1.0, FRACTION_TO_BOUNDARY * _max_step(s, ds))
        ad = min(1.0, FRACTION_TO_BOUNDARY * _max_step(z, dz))
        if ap < 1e-12 and ad < 1e-12:
            ray = _certify_infeasibility(form, stack, z)
            if ray is not None:
                return SdpResult(x, ray, pobj, dobj, abs(gap_signed), STATUS_INFEASIBLE, it, history,
                                 "dual improving ray found after step stall")
            return SdpResult(x, z, pobj, dobj, abs(gap_signed), STATUS_NUMERICAL, it, history,
                             f"step lengths collapsed at iteration {it}")

        x = x + ap * dx
        s = tensor.hermitize(s + ap * ds)
        z = tensor.hermitize(z + ad * dz)

    pobj = float(c @ x)
    dobj = -_tr_inner(f0, z)
    if status != STATUS_OPTIMAL:
        ray = _certify_infeasibility(form, stack, z)
        if ray is not None:
            return SdpResult(x, ray, pobj, dobj, abs(pobj - dobj), STATUS_INFEASIBLE, it, history,
                             "dual improving ray found at iteration limit")
        message = f"no convergence within {max_iter} iterations"
    return SdpResult(x, z, pobj, dobj, abs(pobj - dobj), status, it, history, message)


# Contract thresholds for a solution reported optimal.
PSD_FLOOR = -1e-8
CONSTRAINT_TOL = 1e-8
GAP_TOL = 1e-7


@dataclass
class DualityReport:
    fx_min_eig: float
    z_min_eig: float
    constraint_violation: float   # max_i |Tr(F_i Z) - c_i| / (1 + |c_i|)
    gap: float                    # |c.x + Tr(F0 Z)|
    primal_psd_ok: bool
    dual_psd_ok: bool
    constraints_ok: bool
    gap_ok: bool

    @property
    def passed(self) -> bool:
        return self.primal_psd_ok and self.dual_psd_ok and self.constraints_ok and self.gap_ok


def check_duality(form: SdpStandardForm, result: SdpResult) -> DualityReport:
    """Recompute all optimality residuals from scratch and flag violations."""
    fx = form.f0 + np.tensordot(result.x, np.stack(form.fs), axes=1)
    fx_min = tensor.min_eigenvalue(fx)
    z_min = tensor.min_eigenvalue(result.z)
    viol = 0.0
    for f, ci in zip(form.fs, form.c):
        viol = max(viol, abs(_tr_inner(f, result.z) - ci) / (1.0 + abs(ci)))
    pobj = float(form.c @ result.x)
    gap = abs(pobj + _tr_inner(form.f0, result.z))
    return DualityReport(
        fx_min_eig=fx_min,
        z_min_eig=z_min,
        constraint_violation=viol,
        gap=gap,
        primal_psd_ok=fx_min >= PSD_FLOOR,
        dual_psd_ok=z_min >= PSD_FLOOR,
        constraints_ok=viol <= CONSTRAINT_TOL,
        gap_ok=gap <= GAP_TOL * (1.0 + abs(pobj)),
    )


def lp_standard_form(a_rows: np.ndarray, b: np.ndarray, c: np.ndarray) -> SdpStandardForm:
    """Encode the LP  min c.x  s.t.  A x >= b  with diagonal matrices.

    Row r of the LMI is a_r . x - b_r >= 0, so F0 = diag(-b) and
    F_i = diag(A[:, i]).
    """
    a_rows = np.asarray(a_rows, dtype=float)
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    n_rows, n_vars = a_rows.shape
    if b.size != n_rows or c.size != n_vars:
        raise ValueError("inconsistent LP dimensions")
    f0 = np.diag(-b).astype(complex)
    fs = [np.diag(a_rows[:, i]).astype(complex) for i in range(n_vars)]
    return SdpStandardForm(f0=f0, fs=fs, c=c)


def form_to_json(form: SdpStandardForm, result: SdpResult | None = None) -> dict:
    """Debug dump of problem data and (optionally) the solution."""
    out = {
        "f0": tensor.matrix_to_json(form.f0),
        "fs": [tensor.matrix_to_json(f) for f in form.fs],
        "c": [float(v) for v in form.c],
    }
    if result is not None:
        out["result"] = {
            "x": [float(v) for v in result.x],
            "z": tensor.matrix_to_json(result.z),
            "primal_obj": result.primal_obj,
            "dual_obj": result.dual_obj,
            "gap": result.gap,
            "status": result.status,
            "iterations": result.iterations,
        }
    return out
