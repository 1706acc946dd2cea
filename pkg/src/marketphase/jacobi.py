"""Cyclic Jacobi eigensolver for real symmetric matrices.

The rotation kernel is compiled with numba; everything around it (input
checks, ordering, sign convention) is plain numpy.
"""

from __future__ import annotations

import math

import numba
import numpy as np

MAX_SWEEPS = 100
REL_TOL = 1e-12
SYMMETRY_TOL = 1e-12


class EigenError(ValueError):
    """Raised for non-symmetric input or a failure to converge."""


@numba.njit(cache=True)
def _offdiag_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j] * a[i, j]
    return math.sqrt(s)


@numba.njit(cache=True)
def _jacobi_sweeps(a, v, tol, max_sweeps):
    n = a.shape[0]
    for sweep in range(max_sweeps):
        off = _offdiag_norm(a)
        if off < tol:
            return sweep, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta >= 0.0:
                    t = 1.0 / (theta + math.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + math.sqrt(1.0 + theta * theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                tau = s / (1.0 + c)
                app = a[p, p]
                aqq = a[q, q]
                a[p, p] = app - t * apq
                a[q, q] = aqq + t * apq
                a[p, q] = 0.0
                a[q, p] = 0.0
                for k in range(n):
                    if k != p and k != q:
                        akp = a[k, p]
                        akq = a[k, q]
                        nkp = akp - s * (akq + tau * akp)
                        nkq = akq + s * (akp - tau * akq)
                        a[k, p] = nkp
                        a[p, k] = nkp
                        a[k, q] = nkq
                        a[q, k] = nkq
                for k in range(n):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = vkp - s * (vkq + tau * vkp)
                    v[k, q] = vkq + s * (vkp - tau * vkq)
    return max_sweeps, _offdiag_norm(a)


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    # Component sum positive; if the sum vanishes, the largest-magnitude
    # component is made positive instead.
    out = vectors.copy()
    n = out.shape[0]
    for k in range(out.shape[1]):
        col = out[:, k]
        total = col.sum()
        if abs(total) > 1e-12 * math.sqrt(n):
            flip = total < 0.0
        else:
            flip = col[np.argmax(np.abs(col))] < 0.0
        if flip:
            out[:, k] = -col
    return out


def eigensystem(
    matrix: np.ndarray,
    tol: float = REL_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> tuple[np.ndarray, np.ndarray]:
    """Full eigensystem of a symmetric matrix.

    Parameters
    ----------
    matrix : (N, N) array
        Real symmetric matrix.
    tol : float
        Convergence when the off-diagonal Frobenius norm drops below
        ``tol * ||matrix||_F``.
    max_sweeps : int
        Iteration budget in full cyclic sweeps.

    Returns
    -------
    eigenvalues : (N,) array, descending
    eigenvectors : (N, N) array, orthonormal columns. Every column has a
        positive component sum (largest component positive when the sum
        vanishes). Ties between equal eigenvalues are ordered by
        descending lexicographic comparison of the sign-fixed vectors.
    """
    a = np.array(matrix, dtype=np.float64, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise EigenError(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    asym = np.abs(a - a.T).max() if n else 0.0
    if asym > SYMMETRY_TOL * max(scale, np.finfo(float).tiny):
        raise EigenError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    if n == 0:
        return np.empty(0), v
    sweeps, off = _jacobi_sweeps(a, v, tol * scale, max_sweeps)
    if off >= tol * scale and scale > 0.0:
        raise EigenError(
            f"Jacobi did not converge in {max_sweeps} sweeps "
            f"(off-diagonal residual {off:.3e}, target {tol * scale:.3e})"
        )
    values = np.diag(a).copy()
    vectors = _fix_signs(v)
    # lexsort: last key is primary. Descending eigenvalue, then descending
    # vector entries.
    keys = [-vectors[i] for i in range(n - 1, -1, -1)] + [-values]
    order = np.lexsort(keys)
    return values[order], vectors[:, order]
