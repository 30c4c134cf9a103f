"""Classical phase-space flow of the cranked oscillator.

States are real 4-vectors ``(p_x, p_y, x, y)``. The flow is computed from
the eigen-decomposition of the dynamical matrix; a fixed-step RK4
integrator serves as an independent check and as the fallback where the
decomposition does not exist (at the critical points).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import linalg
from .bogoliubov import build_transform
from .errors import EPTooClose, ImaginaryResidual, NoGrowth, StepSizeError
from .model import ModelParams, build_dynamical_matrix, eigenmodes, in_instability_window

log = logging.getLogger(__name__)

IMAG_TOL = 1e-9


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray  # shape (len(times), 4)
    params: ModelParams
    method: str  # "propagator" or "rk4"


def _state(s0) -> np.ndarray:
    s = np.asarray(s0, dtype=float)
    if s.shape != (4,) or not np.all(np.isfinite(s)):
        raise ValueError("phase state must be four finite reals (p_x, p_y, x, y)")
    return s


def _real_part(prop: np.ndarray) -> np.ndarray:
    scale = linalg.max_norm(prop)
    resid = float(np.max(np.abs(prop.imag)))
    if resid > IMAG_TOL * max(scale, 1e-300):
        raise ImaginaryResidual(
            f"propagator has imaginary part {resid:.3e} (scale {scale:.3e})"
        )
    return prop.real.copy()


def propagator(p: ModelParams, t: float) -> np.ndarray:
    """Real 4x4 matrix advancing a phase state by time ``t``.

    Raises
    ------
    EPTooClose
        At or next to a critical point, where the flow has no diagonal form.
    ImaginaryResidual
        If the eigen-decomposition leaves a non-negligible imaginary part.
    """
    tp = build_transform(p)
    d = np.array(tp.eigenvalues, dtype=complex)
    return _real_part(linalg.propagator_from_diagonal(tp.u, d, t, tp.v))


def default_dt(p: ModelParams) -> float:
    return 1e-3 * min(1.0 / p.omega_x, 1.0 / p.omega_y)


def rk4_step_matrix(p: ModelParams, h: float) -> np.ndarray:
    """One classical RK4 step for ds/dt = M s, written out as a matrix."""
    m = build_dynamical_matrix(p).real
    hm = h * m
    eye = np.eye(4)
    k = eye.copy()
    term = eye.copy()
    for n in range(1, 5):
        term = term @ hm / n
        k = k + term
    return k


def evolve_rk4(p: ModelParams, s0, t: float, dt: float | None = None) -> np.ndarray:
    """Integrate with fixed-step RK4; the step is shrunk so ``t`` is hit exactly.

    Raises
    ------
    StepSizeError
        If ``dt`` exceeds ``1e-3 * min(1/omega_x, 1/omega_y)``.
    """
    if not p.is_real:
        raise ValueError("time evolution needs a real cranking frequency")
    s = _state(s0)
    limit = default_dt(p)
    if dt is None:
        dt = limit
    if not (0 < dt <= limit * (1 + 1e-12)):
        raise StepSizeError(f"dt={dt:g} must be in (0, {limit:g}]")
    n = max(1, math.ceil(abs(t) / dt))
    step = rk4_step_matrix(p, t / n)
    for _ in range(n):
        s = step @ s
    return s


def evolve(p: ModelParams, s0, t: float) -> np.ndarray:
    """Advance ``s0`` by ``t``; falls back to RK4 next to a critical point."""
    s = _state(s0)
    try:
        return propagator(p, t) @ s
    except EPTooClose:
        log.info("no diagonal form at Omega=%s; using RK4", p.Omega)
        return evolve_rk4(p, s, t)


def trajectory(p: ModelParams, s0, times) -> Trajectory:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise ValueError("times must be strictly increasing")
    s = _state(s0)
    try:
        tp = build_transform(p)
    except EPTooClose:
        log.info("no diagonal form at Omega=%s; trajectory by RK4", p.Omega)
        states = np.array([evolve_rk4(p, s, t) for t in times])
        return Trajectory(times, states, p, "rk4")
    d = np.array(tp.eigenvalues, dtype=complex)
    states = np.array(
        [_real_part(linalg.propagator_from_diagonal(tp.u, d, t, tp.v)) @ s for t in times]
    )
    return Trajectory(times, states, p, "propagator")


def growth_rate(p: ModelParams, s0, t_max: float, n_samples: int = 200) -> float:
    """Slope of ``log|s(t)|`` fitted over ``[t_max/2, t_max]``.

    Inside the instability window this approaches ``|w_-|`` once
    ``t_max`` is several e-folding times.

    Raises
    ------
    NoGrowth
        If ``Omega`` is outside the window; the fitted slope is attached.
    """
    if t_max <= 0:
        raise ValueError("t_max must be positive")
    times = np.linspace(0.5 * t_max, t_max, n_samples)
    traj = trajectory(p, s0, times)
    norms = np.linalg.norm(traj.states, axis=1)
    if np.any(norms == 0):
        raise ValueError("initial state has no dynamics (zero vector)")
    slope = float(np.polyfit(times, np.log(norms), 1)[0])
    if not in_instability_window(p):
        raise NoGrowth(f"Omega={p.Omega.real:g} is outside the instability window", slope=slope)
    return slope


def unstable_rate(p: ModelParams) -> float:
    """``|Im w_-|``, the exponential rate expected inside the window."""
    return abs(eigenmodes(p).omega_minus.imag)
