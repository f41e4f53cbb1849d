"""Shared helpers: random SDP instances with a known optimal pair.

Choosing complementary-support S* and Z* on a common eigenbasis makes
(x_hat, Z*) a feasible pair with zero duality gap, so both are optimal
and the optimum value c.x_hat is known in advance.  Including the
identity among the F_i guarantees strict primal feasibility.
"""

import numpy as np

from lhvcert import sdp


def rand_hermitian(rng, n):
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (a + a.conj().T) / 2


def random_certified_instance(seed, n_max=20, m_max=15):
    """Returns (form, optimal_value, x_hat, z_opt)."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = int(rng.integers(4, n_max + 1))
    m = int(rng.integers(2, m_max + 1))
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    u, _ = np.linalg.qr(x)
    rank = int(rng.integers(1, n))
    s_vals = np.zeros(n)
    s_vals[:rank] = rng.random(rank) + 0.2
    z_vals = np.zeros(n)
    z_vals[rank:] = rng.random(n - rank) + 0.2
    s_opt = (u * s_vals) @ u.conj().T
    z_opt = (u * z_vals) @ u.conj().T
    fs = [np.eye(n, dtype=complex)] + [rand_hermitian(rng, n) for _ in range(m - 1)]
    x_hat = rng.standard_normal(m)
    f0 = s_opt - np.tensordot(x_hat, np.stack(fs), axes=1)
    c = np.array([np.vdot(f, z_opt).real for f in fs])
    form = sdp.SdpStandardForm(f0=f0, fs=fs, c=c)
    return form, float(c @ x_hat), x_hat, z_opt
