"""Cranked two-dimensional harmonic oscillator (Routhian).

Phase-space ordering is ``(p_x, p_y, x, y)`` everywhere, with hbar = m = 1.
The Routhian is the quadratic form ``s @ h @ s`` with ``h`` from
:func:`build_quadratic_form`; Hamilton's equations read ``ds/dt = M s``
with ``M`` from :func:`build_dynamical_matrix`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

# symplectic rotation that turns the gradient of H into (dp/dt, dr/dt)
J_TILDE = np.array(
    [[0, 0, -1, 0],
     [0, 0, 0, -1],
     [1, 0, 0, 0],
     [0, 1, 0, 0]],
    dtype=complex,
)


@dataclass(frozen=True)
class ModelParams:
    """Oscillator frequencies and the (possibly complex) cranking frequency."""

    omega_x: float
    omega_y: float
    Omega: complex = 0.0

    def __post_init__(self):
        wx = float(self.omega_x)
        wy = float(self.omega_y)
        W = complex(self.Omega)
        if not (math.isfinite(wx) and math.isfinite(wy) and cmath.isfinite(W)):
            raise ValueError("model parameters must be finite")
        if wx <= 0 or wy <= 0:
            raise ValueError(f"oscillator frequencies must be positive, got {wx}, {wy}")
        object.__setattr__(self, "omega_x", wx)
        object.__setattr__(self, "omega_y", wy)
        object.__setattr__(self, "Omega", W)

    @property
    def is_real(self) -> bool:
        return self.Omega.imag == 0.0

    def with_Omega(self, Omega) -> "ModelParams":
        return ModelParams(self.omega_x, self.omega_y, Omega)


class EigenmodePair(NamedTuple):
    omega_plus: complex
    omega_minus: complex


@dataclass(frozen=True)
class CouplingSet:
    """Frequencies and strengths of the two-mode boson Hamiltonian."""

    omega_1: float
    omega_2: float
    g_1: float
    g_2: float

    def __post_init__(self):
        vals = (self.omega_1, self.omega_2, self.g_1, self.g_2)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("couplings must be finite")
        if self.omega_1 <= 0 or self.omega_2 <= 0:
            raise ValueError("boson frequencies must be positive")


def _omega_value(p: ModelParams):
    return p.Omega.real if p.is_real else p.Omega


def build_quadratic_form(p: ModelParams) -> np.ndarray:
    """Symmetric matrix ``h`` with Routhian ``H = s @ h @ s``."""
    W = _omega_value(p)
    wx2 = p.omega_x ** 2
    wy2 = p.omega_y ** 2
    return 0.5 * np.array(
        [[1, 0, 0, W],
         [0, 1, -W, 0],
         [0, -W, wx2, 0],
         [W, 0, 0, wy2]],
        dtype=complex,
    )


def build_dynamical_matrix(p: ModelParams) -> np.ndarray:
    # dH/ds = 2 h s, hence the factor 2
    return J_TILDE @ (2.0 * build_quadratic_form(p))


def _mode_squares(p: ModelParams):
    """Return (omega_+^2, omega_-^2).

    The smaller root is taken from the product ``omega_+^2 omega_-^2 =
    (omega_x^2 - Omega^2)(omega_y^2 - Omega^2)``, which is algebraically the
    same root but avoids cancellation close to the critical points.
    """
    wx2 = p.omega_x ** 2
    wy2 = p.omega_y ** 2
    W = _omega_value(p)
    W2 = W * W
    a = wx2 + wy2 + 2.0 * W2
    disc = (wx2 - wy2) ** 2 + 8.0 * W2 * (wx2 + wy2)
    prod = (wx2 - W2) * (wy2 - W2)
    if p.is_real:
        sd = math.sqrt(disc)
        wp2 = 0.5 * (a + sd)
        return wp2, prod / wp2
    sd = cmath.sqrt(disc)
    plus = 0.5 * (a + sd)
    minus = 0.5 * (a - sd)
    if abs(plus) >= abs(minus):
        return plus, (prod / plus if plus != 0 else minus)
    return prod / minus, minus


def _principal_sqrt(z) -> complex:
    if isinstance(z, float):
        # keeps the sign of the imaginary part deterministic: sqrt(-x) = +i sqrt(x)
        return complex(math.sqrt(z), 0.0) if z >= 0 else complex(0.0, math.sqrt(-z))
    return cmath.sqrt(z)


def eigenmode_squares(p: ModelParams) -> tuple:
    """``(omega_+^2, omega_-^2)``; real floats for real ``Omega``."""
    return _mode_squares(p)


def eigenmodes(p: ModelParams) -> EigenmodePair:
    """Normal-mode energies omega_+ and omega_-.

    Principal square roots throughout, so for real ``Omega`` strictly
    between the two oscillator frequencies ``omega_minus`` is ``+i|omega_-|``.
    """
    wp2, wm2 = _mode_squares(p)
    return EigenmodePair(_principal_sqrt(wp2), _principal_sqrt(wm2))


def instability_interval(p: ModelParams) -> tuple:
    return (min(p.omega_x, p.omega_y), max(p.omega_x, p.omega_y))


def in_instability_window(p: ModelParams) -> bool:
    """True for real ``Omega`` with ``|Omega|`` strictly inside the instability interval.

    The spectrum depends on ``Omega**2`` only, so the window is mirrored at
    negative cranking frequency.
    """
    if not p.is_real:
        return False
    lo, hi = instability_interval(p)
    return lo < abs(p.Omega.real) < hi


def map_couplings(omega_1: float, omega_2: float, Omega: float) -> CouplingSet:
    """Boson couplings that reproduce the cranking term ``-Omega L_z``.

    Boson mode 1 is the x oscillator and mode 2 the y oscillator.
    """
    if omega_1 <= 0 or omega_2 <= 0:
        raise ValueError("boson frequencies must be positive")
    root = 2.0 * math.sqrt(omega_1 * omega_2)
    return CouplingSet(
        omega_1=float(omega_1),
        omega_2=float(omega_2),
        g_1=Omega * (omega_1 + omega_2) / root,
        g_2=Omega * (omega_2 - omega_1) / root,
    )


def _ladder_forms(omega, k):
    """Linear forms of a_k and a_k^dagger over (p_x, p_y, x, y)."""
    a = np.zeros(4, dtype=complex)
    ad = np.zeros(4, dtype=complex)
    a[2 + k] = math.sqrt(omega / 2.0)
    a[k] = 1j / math.sqrt(2.0 * omega)
    ad[2 + k] = math.sqrt(omega / 2.0)
    ad[k] = -1j / math.sqrt(2.0 * omega)
    return a, ad


def _sym(l1, l2):
    # operator product l1*l2 minus its c-number commutator part
    return 0.5 * (np.outer(l1, l2) + np.outer(l2, l1))


def quadratic_form_from_couplings(c: CouplingSet) -> np.ndarray:
    """Phase-space quadratic form of the two-mode boson Hamiltonian.

    The ladder operators are replaced by their position/momentum forms and
    the operator products are symmetrised; the c-number terms that this
    drops are zero-point constants.
    """
    a1, a1d = _ladder_forms(c.omega_1, 0)
    a2, a2d = _ladder_forms(c.omega_2, 1)
    h = (
        c.omega_1 * _sym(a1d, a1)
        + c.omega_2 * _sym(a2d, a2)
        + 1j * c.g_1 * (_sym(a1d, a2) - _sym(a2d, a1))
        - 1j * c.g_2 * (_sym(a1d, a2d) - _sym(a2, a1))
    )
    return h


def routhian_energy(state, h) -> float:
    s = np.asarray(state, dtype=float)
    if s.shape != (4,) or not np.all(np.isfinite(s)):
        raise ValueError("state must be four finite reals (p_x, p_y, x, y)")
    return float(np.real(s @ np.asarray(h) @ s))
