"""Independent reference computations used only by the tests."""

import numpy as np


def brute_convolve(G, f1: dict, f2: dict) -> dict:
    """(f1*f2)(g) = Σ_{h ∈ G^{r(g)}} f1(h) f2(h⁻¹g), straight from the definition."""
    out = {}
    for g in G.elements:
        acc = 0
        for h in G.elements:
            if G.range_of(h) != G.range_of(g):
                continue
            k = G.compose(G.inverse(h), g)
            acc += f1.get(h, 0) * f2.get(k, 0)
        if acc != 0:
            out[g] = acc
    return out


def charpoly_eigenvalues(A, tol=1e-13):
    """Eigenvalues of a Hermitian matrix by bisection on the Sturm count of LDLᵀ.

    The number of negative pivots of A - tI equals the number of eigenvalues below t.
    """
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    bound = float(np.max(np.sum(np.abs(A), axis=1))) + 1.0

    def count_below(t):
        M = A - t * np.eye(n)
        neg = 0
        M = M.copy()
        for k in range(n):
            p = M[k, k].real
            if p == 0:
                p = 1e-300
            if p < 0:
                neg += 1
            if k + 1 < n:
                col = M[k + 1:, k].copy()
                M[k + 1:, k + 1:] -= np.outer(col, M[k, k + 1:]) / p
        return neg

    out = []
    for j in range(n):
        lo, hi = -bound, bound
        while hi - lo > tol * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            if count_below(mid) > j:
                hi = mid
            else:
                lo = mid
        out.append(0.5 * (lo + hi))
    return np.array(out)


def random_hermitian(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return (X + X.conj().T) / 2


def random_unitary(rng, n):
    X = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    Q, R = np.linalg.qr(X)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def circulant_eigenvalues(first_row):
    return np.fft.fft(first_row)
