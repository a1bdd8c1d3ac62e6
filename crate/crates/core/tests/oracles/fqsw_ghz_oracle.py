"""Independent Monte Carlo oracle for the GHZ merge sweep.

Draws Haar unitaries with scipy, encodes Alice's n-copy register, and
evaluates F(rho_{kept,R}, pi_kept (x) rho_R) with the generic
sqrt-matrix formula (small n) or the spectral shortcut valid when
rho_R is maximally mixed (GHZ), which this script asserts.
"""
import sys
import numpy as np
from scipy.stats import unitary_group
from scipy.linalg import sqrtm


def ghz_copies(n):
    # single copy over (A, B, R); n copies regrouped as (A^n, B^n, R^n)
    g = np.zeros((2, 2, 2), dtype=complex)
    g[0, 0, 0] = g[1, 1, 1] = 1 / np.sqrt(2)
    t = g
    for _ in range(n - 1):
        t = np.tensordot(t, g, axes=0)
    # axes: a1 b1 r1 a2 b2 r2 ...
    order = [3 * i for i in range(n)] + [3 * i + 1 for i in range(n)] + [3 * i + 2 for i in range(n)]
    t = np.transpose(t, order)
    d = 2 ** n
    return t.reshape(d, d, d)


def uhlmann(psi, k, rng):
    d = psi.shape[0]
    u = unitary_group.rvs(d, random_state=rng)
    enc = np.tensordot(u, psi, axes=([1], [0]))  # (A, B, R)
    ds = 2 ** k
    dk = d // ds
    enc = enc.reshape(ds, dk, d, d)  # sent, kept, B, R
    # rows (kept, R), cols (sent, B)
    y = np.transpose(enc, (1, 3, 0, 2)).reshape(dk * d, ds * d)
    rho_r = np.einsum('abr,abs->rs', psi, psi.conj())
    if dk * d <= 512:
        rho = y @ y.conj().T
        sigma = np.kron(np.eye(dk) / dk, rho_r)
        s = sqrtm(rho)
        m = s @ sigma @ s
        ev = np.linalg.eigvalsh((m + m.conj().T) / 2)
        return float(np.sum(np.sqrt(np.clip(ev, 0, None))))
    assert np.allclose(rho_r, np.eye(d) / d, atol=1e-12)
    sv = np.linalg.svd(y, compute_uv=False)
    return float(np.sum(sv) / np.sqrt(dk * d))


def main():
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 6
    trials = int(sys.argv[2]) if len(sys.argv) > 2 else 20
    rng = np.random.default_rng(20260101)
    psi = ghz_copies(n)
    for k in range(1, n + 1):
        vals = np.array([uhlmann(psi, k, rng) for _ in range(trials)])
        se = vals.std(ddof=1) / np.sqrt(trials)
        print(f"n={n} k={k} mean={vals.mean():.6f} se={se:.6f} min={vals.min():.6f} max={vals.max():.6f}")


if __name__ == "__main__":
    main()
