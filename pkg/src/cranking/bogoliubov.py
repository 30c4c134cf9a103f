"""Quasi-boson transform of the cranked oscillator.

The transform matrix ``u`` expresses phase space through the quasi-boson
operators, ``(p_x, p_y, x, y) = u @ (q_+, q_-, q_-^dag, q_+^dag)``, and
``v = u^-1`` gives the quasi-bosons in terms of phase space. Columns of
``u`` are right eigenvectors of the dynamical matrix for the eigenvalues
``(-i w_+, -i w_-, +i w_-, +i w_+)``.

Normalisation
-------------
Each column pair ``(j, k)`` in ``{(0, 3), (1, 2)}`` is scaled so that
``u_j @ K2 @ u_k = -i``; this is exactly the statement that the
quasi-bosons obey canonical commutators. The residual freedom is fixed by
giving both columns of a pair the same modulus scale and making the
largest entry of column ``j`` real and positive. Below the window this
yields ``u_k = conj(u_j)``. Above the window the soft mode has negative
symplectic signature and the same rule gives ``u_2 = -conj(u_1)``.

Strictly inside the window (real ``Omega``) the soft pair has real
eigenvalues. There the pair is normalised the way the stable-side
hermitian construction continues: the conjugation that turns ``q_-`` into
its partner also conjugates ``w_-``, and since ``conj(w_-) = -w_-`` the
bilinear target flips to ``+i``. The commutator ``[q_-, q_-^dag]`` then
comes out as ``-1`` and ``v`` no longer agrees with the closed-form
left-eigenvector construction :func:`left_from_right`. Such transforms
carry ``continued=True``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DegenerateModes, EPTooClose, RankError
from .model import (
    ModelParams,
    build_dynamical_matrix,
    build_quadratic_form,
    eigenmodes,
    in_instability_window,
)

K1 = np.array(
    [[0, 0, 0, -1j],
     [0, 0, -1j, 0],
     [0, 1j, 0, 0],
     [1j, 0, 0, 0]],
    dtype=complex,
)
K2 = np.array(
    [[0, 0, 1, 0],
     [0, 0, 0, 1],
     [-1, 0, 0, 0],
     [0, -1, 0, 0]],
    dtype=complex,
)
# [s_j, s_k] for s = (p_x, p_y, x, y)
J_CANON = np.array(
    [[0, 0, -1j, 0],
     [0, 0, 0, -1j],
     [1j, 0, 0, 0],
     [0, 1j, 0, 0]],
    dtype=complex,
)
# canonical quasi-boson commutators in the ordering (q_+, q_-, q_-^dag, q_+^dag)
C_CANON = np.array(
    [[0, 0, 0, 1],
     [0, 0, 1, 0],
     [0, -1, 0, 0],
     [-1, 0, 0, 0]],
    dtype=complex,
)

PAIRS = ((0, 3), (1, 2))
EP_EXCLUSION = 1e-8
NULL_TOL = 1e-9


@dataclass(frozen=True)
class TransformPair:
    u: np.ndarray
    v: np.ndarray
    params: ModelParams
    eigenvalues: tuple
    continued: bool = False


def mode_eigenvalues(p: ModelParams) -> tuple:
    """Eigenvalues of the dynamical matrix in column order of ``u``."""
    wp, wm = eigenmodes(p)
    return (-1j * wp, -1j * wm, 1j * wm, 1j * wp)


def raw_eigenvector(m, lam, tol: float = NULL_TOL) -> np.ndarray:
    """Unit right eigenvector of ``m`` for the simple eigenvalue ``lam``."""
    try:
        return linalg.null_space_vector(m - lam * np.eye(4), tol)
    except RankError as err:
        raise DegenerateModes(f"eigenvalue {lam:.6g} is not simple: {err}") from err


def check_ep_distance(p: ModelParams) -> None:
    wm = eigenmodes(p).omega_minus
    limit = EP_EXCLUSION * (p.omega_x + p.omega_y)
    if abs(wm) < limit:
        raise EPTooClose(f"|omega_-| = {abs(wm):.3e} below exclusion radius {limit:.3e}")


def normalize_pair(uj, uk, target=-1j):
    """Scale a column pair so that ``uj @ K2 @ uk == target``.

    Both columns receive the same modulus factor and ``uj`` keeps its phase.
    """
    b = uj @ K2 @ uk
    if b == 0:
        raise DegenerateModes("column pair has vanishing symplectic product")
    ratio = target / b
    alpha = np.sqrt(abs(ratio))
    beta = ratio / alpha
    return uj * alpha, uk * beta


def build_transform(p: ModelParams) -> TransformPair:
    """Eigenvector matrix ``u`` with quasi-boson normalisation, and ``v = u^-1``.

    Raises
    ------
    EPTooClose
        If ``|w_-| < 1e-8 (omega_x + omega_y)``.
    DegenerateModes
        If an eigenvalue is not simple.
    """
    check_ep_distance(p)
    m = build_dynamical_matrix(p)
    lams = mode_eigenvalues(p)
    cols = [raw_eigenvector(m, lam) for lam in lams]
    continued = in_instability_window(p)
    for j, k in PAIRS:
        target = 1j if (continued and j == 1) else -1j
        cols[j], cols[k] = normalize_pair(cols[j], cols[k], target)
    u = np.column_stack(cols)
    v = linalg.mat_inverse(u)
    return TransformPair(u=u, v=v, params=p, eigenvalues=lams, continued=continued)


def left_from_right(u) -> np.ndarray:
    """Left eigenvectors from right ones via the symplectic structure, ``K1 u^T K2``."""
    u = linalg.as_matrix4(u)
    return K1 @ u.T @ K2


def quantum_form_matrix(p: ModelParams) -> np.ndarray:
    wp, wm = eigenmodes(p)
    h = np.zeros((4, 4), dtype=complex)
    h[0, 3] = h[3, 0] = 0.5 * wp
    h[1, 2] = h[2, 1] = 0.5 * wm
    return h


def verify_normalization(t: TransformPair) -> float:
    """Max deviation of ``v^T H_QM v`` from the phase-space form ``h``.

    With ``s = u q`` the Routhian ``s^T h s`` equals ``q^T H_QM q`` iff
    ``h = v^T H_QM v`` (equivalently ``u^T h u = H_QM``).
    """
    h = build_quadratic_form(t.params)
    hqm = quantum_form_matrix(t.params)
    return linalg.max_norm(t.v.T @ hqm @ t.v - h)


def commutator_matrix(t: TransformPair) -> np.ndarray:
    """``C[j, k] = [q_j, q_k]`` for ``q = v s``."""
    return t.v @ J_CANON @ t.v.T


def check_bosonic(p: ModelParams, tol: float = 1e-6) -> dict:
    t = build_transform(p)
    c = commutator_matrix(t)
    ok = abs(c[1, 2] - 1) <= tol and abs(c[0, 3] - 1) <= tol
    for j in range(4):
        for k in range(j + 1, 4):
            if (j, k) not in PAIRS and abs(c[j, k]) > tol:
                ok = False
    return {"is_bosonic": bool(ok), "c23": complex(c[1, 2]), "c14": complex(c[0, 3])}
