"""Dense complex 4x4 kernel.

Everything here works on plain ``numpy`` arrays of shape ``(4, 4)`` or
``(4,)`` with complex dtype. numpy is used for storage and elementwise
arithmetic only; inversion, null vectors and eigenvalues are computed by
the routines below so that they can serve as independent checks of the
closed-form results elsewhere in the package.
"""
from __future__ import annotations

import cmath
import functools

import numpy as np

from .errors import ConvergenceError, RankError, SingularMatrix

N = 4

# pivot threshold for mat_inverse, relative to max|m_ij|
INVERSE_PIVOT_TOL = 1e-13


def as_matrix4(m) -> np.ndarray:
    """Return ``m`` as a fresh complex 4x4 array, rejecting NaN/Inf."""
    a = np.array(m, dtype=complex)
    if a.shape != (N, N):
        raise ValueError(f"expected a 4x4 matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def as_vector4(v) -> np.ndarray:
    a = np.array(v, dtype=complex)
    if a.shape != (N,):
        raise ValueError(f"expected a 4-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector has non-finite entries")
    return a


def max_norm(m) -> float:
    """Largest entry modulus."""
    return float(np.max(np.abs(m)))


def mat_inverse(m) -> np.ndarray:
    """Invert a 4x4 matrix by Gauss-Jordan elimination with partial pivoting.

    Raises
    ------
    SingularMatrix
        If a pivot falls below ``1e-13 * max|m_ij|``.
    """
    a = as_matrix4(m)
    scale = max_norm(a)
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    aug = np.hstack([a, np.eye(N, dtype=complex)])
    for k in range(N):
        piv = k + int(np.argmax(np.abs(aug[k:, k])))
        if abs(aug[piv, k]) < INVERSE_PIVOT_TOL * scale:
            raise SingularMatrix(
                f"pivot {abs(aug[piv, k]):.3e} below {INVERSE_PIVOT_TOL:g}*|m|max at column {k}"
            )
        if piv != k:
            aug[[k, piv]] = aug[[piv, k]]
        aug[k] /= aug[k, k]
        for i in range(N):
            if i != k and aug[i, k] != 0:
                aug[i] -= aug[i, k] * aug[k]
    return aug[:, N:].copy()


def _complete_pivot_lu(m):
    """Gaussian elimination with complete pivoting.

    Returns the reduced upper-triangular array, the column permutation and
    the pivot moduli in elimination order.
    """
    a = m.copy()
    cols = list(range(N))
    pivots = []
    for k in range(N):
        sub = np.abs(a[k:, k:])
        i, j = np.unravel_index(int(np.argmax(sub)), sub.shape)
        i += k
        j += k
        if i != k:
            a[[k, i]] = a[[i, k]]
        if j != k:
            a[:, [k, j]] = a[:, [j, k]]
            cols[k], cols[j] = cols[j], cols[k]
        pivots.append(abs(a[k, k]))
        if a[k, k] == 0:
            continue
        for r in range(k + 1, N):
            f = a[r, k] / a[k, k]
            a[r, k:] -= f * a[k, k:]
    return a, cols, pivots


def numerical_rank(m, tol: float) -> int:
    """Number of complete-pivoting pivots above ``tol * max|m_ij|``."""
    a = as_matrix4(m)
    scale = max_norm(a)
    if scale == 0.0:
        return 0
    _, _, pivots = _complete_pivot_lu(a)
    rank = 0
    for p in pivots:
        if p <= tol * scale:
            break
        rank += 1
    return rank


def fix_phase(v) -> np.ndarray:
    """Rotate ``v`` so that its largest-modulus entry is real and positive."""
    v = np.asarray(v, dtype=complex)
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def null_space_vector(m, tol: float = 1e-9) -> np.ndarray:
    """Unit vector spanning the one-dimensional null space of ``m``.

    The largest-modulus entry of the result is real and positive.

    Raises
    ------
    RankError
        If the numerical rank at ``tol`` is not 3. The detected rank is
        available as ``err.rank``.
    """
    a = as_matrix4(m)
    scale = max_norm(a)
    if scale == 0.0:
        raise RankError("zero matrix has a four-dimensional null space", rank=0)
    red, cols, pivots = _complete_pivot_lu(a)
    thresh = tol * scale
    for k in range(N - 1):
        if pivots[k] <= thresh:
            raise RankError(f"numerical rank {k} at tol={tol:g}, expected 3", rank=k)
    if pivots[N - 1] > thresh:
        raise RankError(f"matrix is nonsingular at tol={tol:g} (rank 4)", rank=N)

    # back substitution with the last permuted unknown set to one
    z = np.zeros(N, dtype=complex)
    z[N - 1] = 1.0
    for k in range(N - 2, -1, -1):
        z[k] = -(red[k, k + 1:] @ z[k + 1:]) / red[k, k]
    v = np.zeros(N, dtype=complex)
    for k in range(N):
        v[cols[k]] = z[k]
    v /= np.sqrt(np.sum(np.abs(v) ** 2))
    return fix_phase(v)


def char_poly_coefficients(m) -> np.ndarray:
    """Coefficients of ``det(lambda*I - m)``, highest power first.

    Faddeev-LeVerrier recursion. For 4x4 matrices ``det(m - lambda*I)`` is
    the same polynomial.
    """
    a = as_matrix4(m)
    c = np.zeros(N + 1, dtype=complex)
    c[0] = 1.0
    mk = np.zeros((N, N), dtype=complex)
    eye = np.eye(N, dtype=complex)
    for k in range(1, N + 1):
        mk = a @ mk + c[k - 1] * eye
        c[k] = -np.trace(a @ mk) / k
    return c


def _horner(coeffs, z):
    p = 0j
    dp = 0j
    for c in coeffs:
        dp = dp * z + p
        p = p * z + c
    return p, dp


def _aberth(coeffs, max_iter=500):
    n = len(coeffs) - 1
    # Fujiwara bound on root moduli
    bound = 2.0 * max(abs(coeffs[k] / coeffs[0]) ** (1.0 / k) for k in range(1, n + 1))
    bound = max(bound, 1e-300)
    z = [bound * 0.5 * cmath.exp(1j * (2.0 * np.pi * k / n + 0.4)) for k in range(n)]
    for _ in range(max_iter):
        done = True
        for k in range(n):
            p, dp = _horner(coeffs, z[k])
            if p == 0:
                continue
            s = 0j
            for j in range(n):
                if j != k:
                    d = z[k] - z[j]
                    if d == 0:
                        d = 1e-300
                    s += 1.0 / d
            if dp == 0:
                step = 1e-8 * (1.0 + abs(z[k]))
            else:
                w = p / dp
                step = w / (1.0 - w * s)
            z[k] -= step
            if abs(step) > 1e-15 * (1.0 + abs(z[k])):
                done = False
        if done:
            return z
    return z


def _polish(coeffs, z, steps=2):
    for _ in range(steps):
        p, dp = _horner(coeffs, z)
        if dp == 0:
            break
        trial = z - p / dp
        if abs(_horner(coeffs, trial)[0]) <= abs(p):
            z = trial
    return z


def sort_complex(values, rtol: float = 1e-9) -> list:
    """Sort by real part, then imaginary part.

    Real parts closer than ``rtol * max(1, max|z|)`` count as equal, so
    rounding noise on purely imaginary values does not scramble the order.
    """
    values = list(values)
    scale = max([1.0] + [abs(v) for v in values])
    eps = rtol * scale

    def cmp(a, b):
        if abs(a.real - b.real) > eps:
            return -1 if a.real < b.real else 1
        if a.imag != b.imag:
            return -1 if a.imag < b.imag else 1
        return 0

    return sorted(values, key=functools.cmp_to_key(cmp))


def char_poly_eigenvalues(m) -> list:
    """Eigenvalues of ``m`` as roots of its characteristic polynomial.

    The quartic is expanded with Faddeev-LeVerrier, solved by Aberth-Ehrlich
    iteration and every root is polished with two Newton steps.

    Raises
    ------
    ConvergenceError
        If some ``|p(lambda)|`` exceeds ``1e-8 * (1 + max|m_ij|**4)``.
    """
    a = as_matrix4(m)
    coeffs = char_poly_coefficients(a)
    roots = [_polish(coeffs, z) for z in _aberth(coeffs)]
    limit = 1e-8 * (1.0 + max_norm(a) ** 4)
    for z in roots:
        r = abs(_horner(coeffs, z)[0])
        if not np.isfinite(r) or r > limit:
            raise ConvergenceError(f"root {z} has residual {r:.3e} > {limit:.3e}")
    return sort_complex(complex(z) for z in roots)


def propagator_from_diagonal(u, d, t: float, v) -> np.ndarray:
    """``u @ diag(exp(d*t)) @ v``; ``u`` and ``v`` are assumed mutually inverse."""
    u = as_matrix4(u)
    v = as_matrix4(v)
    d = np.asarray(d, dtype=complex)
    return (u * np.exp(d * t)[None, :]) @ v
