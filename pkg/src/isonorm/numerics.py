"""Dense Hermitian spectral kernel (cyclic Jacobi) and power iteration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError, InputError

DEFAULT_TOL = 1e-11
MAX_SWEEPS = 100
HERMITIAN_TOL = 1e-12
SEED = 0x9E3779B9
DENSE_LIMIT = 2000


@dataclass(frozen=True)
class SpectralResult:
    eigenvalues: np.ndarray  # ascending
    iterations: int  # sweeps
    residual: float
    vectors: np.ndarray | None = None  # columns, matching eigenvalues


@njit(cache=True, nogil=True)
def _offdiag_max(a):
    n = a.shape[0]
    m = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            v = abs(a[i, j])
            if v > m:
                m = v
    return m


@njit(cache=True, nogil=True)
def _jacobi(a, v, tol, max_sweeps, want_vectors):
    n = a.shape[0]
    sweeps = 0
    res = _offdiag_max(a)
    # rotations below this size are numerically invisible
    skip = tol * 1e-6
    while res > tol:
        if sweeps >= max_sweeps:
            return sweeps, res
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mag = abs(apq)
                if mag <= skip:
                    continue
                ph = apq / mag  # e^{i phi}
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mag)
                t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta < 0:
                    t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                ec = np.conj(ph)
                jpp = c
                jpq = s
                jqp = -s * ec
                jqq = c * ec
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = akp * jpp + akq * jqp
                    a[k, q] = akp * jpq + akq * jqq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = np.conj(jpp) * apk + np.conj(jqp) * aqk
                    a[q, k] = np.conj(jpq) * apk + np.conj(jqq) * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for k in range(n):
                        vkp = v[k, p]
                        vkq = v[k, q]
                        v[k, p] = vkp * jpp + vkq * jqp
                        v[k, q] = vkp * jpq + vkq * jqq
        res = _offdiag_max(a)
    return sweeps, res


def hermitian_defect(A) -> float:
    A = np.asarray(A)
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(A - A.conj().T)))


def _as_hermitian(A) -> np.ndarray:
    A = np.array(A, dtype=np.complex128, copy=True)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputError(f"expected a square matrix, got shape {A.shape}")
    d = hermitian_defect(A)
    if d > HERMITIAN_TOL:
        raise InputError(f"matrix is not Hermitian (defect {d:.3e})")
    return 0.5 * (A + A.conj().T)


def hermitian_spectrum(A, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS,
                       vectors: bool = False) -> SpectralResult:
    """Eigenvalues of a Hermitian matrix by cyclic Jacobi, sorted ascending."""
    a = _as_hermitian(A)
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128) if vectors else np.empty((0, 0), dtype=np.complex128)
    if n == 0:
        return SpectralResult(np.zeros(0), 0, 0.0, v if vectors else None)
    sweeps, res = _jacobi(a, v, float(tol), int(max_sweeps), bool(vectors))
    if res > tol:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps "
                               f"(residual {res:.3e})")
    ev = a.diagonal().real.copy()
    order = np.argsort(ev, kind="stable")
    return SpectralResult(ev[order], sweeps, float(res), v[:, order] if vectors else None)


def operator_norm(A, tol: float = DEFAULT_TOL) -> float:
    """Largest singular value; exact spectral route for Hermitian input."""
    A = np.asarray(A, dtype=np.complex128)
    if A.size == 0:
        return 0.0
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.shape[0] == A.shape[1] and hermitian_defect(A) <= HERMITIAN_TOL:
        ev = hermitian_spectrum(A, tol).eigenvalues
        return float(max(abs(ev[0]), abs(ev[-1])))
    B = A.conj().T @ A if A.shape[1] <= A.shape[0] else A @ A.conj().T
    top = hermitian_spectrum(B, tol).eigenvalues[-1]
    return float(np.sqrt(max(top, 0.0)))


def psd_check(A, tol: float = 1e-10) -> bool:
    return bool(min_eigenvalue(A) >= -tol)


def min_eigenvalue(A) -> float:
    ev = hermitian_spectrum(A).eigenvalues
    return float(ev[0]) if len(ev) else 0.0


@dataclass(frozen=True)
class PowerResult:
    value: float  # certified lower bound on the norm
    iterations: int
    converged: bool
    vector: np.ndarray | None = None  # unit vector attaining ``value``


def power_norm(matvec, n: int, rmatvec=None, seed: int = SEED, restarts: int = 3,
               rtol: float = 1e-9, max_iter: int = 100_000, starts=(),
               restart_iter: int | None = None) -> PowerResult:
    """Operator norm of a linear map by power iteration on A*A.

    ``matvec`` acts on complex vectors of length ``n``; ``rmatvec`` is the
    adjoint (omit it for self-adjoint maps). Each iterate v gives the lower bound
    ‖Av‖/‖v‖, so the returned value never exceeds the true norm. ``starts`` are
    extra starting vectors tried before the random restarts; ``restart_iter``
    optionally caps the iterations of the random restarts.
    """
    if n == 0:
        return PowerResult(0.0, 0, True)
    rng = np.random.default_rng(seed)
    adj = rmatvec or matvec
    best, best_v, total, all_conv = 0.0, None, 0, True
    inits = [(np.asarray(s, dtype=np.complex128), max_iter) for s in starts]
    inits += [(rng.standard_normal(n) + 1j * rng.standard_normal(n), restart_iter or max_iter)
              for _ in range(restarts)]
    for v, cap in inits:
        nv = np.linalg.norm(v)
        if nv == 0:
            continue
        v = v / nv
        est, conv = 0.0, False
        for it in range(cap):
            w = matvec(v)
            val = float(np.linalg.norm(w))
            if val > best or best_v is None:
                best, best_v = val, v
            if val == 0.0:
                conv = True
                break
            if it and abs(val - est) <= rtol * val:
                est, conv = val, True
                break
            est = val
            u = adj(w)
            nu = np.linalg.norm(u)
            if nu == 0.0:
                conv = True
                break
            v = u / nu
        total += it + 1
        all_conv = all_conv and conv
    return PowerResult(best, total, all_conv, best_v)


def dense_power_norm(A, **kw) -> PowerResult:
    A = np.asarray(A, dtype=np.complex128)
    return power_norm(lambda v: A @ v, A.shape[1], rmatvec=lambda w: A.conj().T @ w, **kw)


def gram_factor(M, cutoff: float = 1e-10) -> np.ndarray:
    """B with M = Bᴴ B, rows spanning the range of the PSD matrix M."""
    res = hermitian_spectrum(M, vectors=True)
    keep = res.eigenvalues > cutoff
    vals = res.eigenvalues[keep]
    vecs = res.vectors[:, keep]
    return (vecs * np.sqrt(vals)).conj().T


@njit(cache=True, nogil=True)
def scatter_apply(src, dst, coef, v, adjoint):
    """out[dst[k]] += coef[k] v[src[k]] (or the adjoint pattern)."""
    out = np.zeros_like(v)
    if adjoint:
        for k in range(src.shape[0]):
            out[src[k]] += np.conj(coef[k]) * v[dst[k]]
    else:
        for k in range(src.shape[0]):
            out[dst[k]] += coef[k] * v[src[k]]
    return out
