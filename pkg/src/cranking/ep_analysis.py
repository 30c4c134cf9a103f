"""Exceptional points of the cranked oscillator.

The soft-mode pair ``+-i w_-`` coalesces at ``Omega = omega_y`` and
``Omega = omega_x``. This module locates those points, measures how the
two eigenvectors merge, fits the power laws of the normalised columns and
of their symplectic overlap, follows the spectrum around a loop in the
complex ``Omega`` plane, and separates the exceptional points from the
genuine degeneracy at ``omega_x == omega_y``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .bogoliubov import K2, build_transform, check_ep_distance, raw_eigenvector
from .errors import (
    BracketError,
    EPOnPath,
    FitError,
    TrackingAmbiguity,
    ZeroVector,
)
from .model import (
    ModelParams,
    build_dynamical_matrix,
    eigenmode_squares,
    eigenmodes,
)

# linear map with S M S = -M; sends the eigenvector of lambda to that of -lambda
REVERSAL = np.diag([-1.0, 1.0, 1.0, -1.0]).astype(complex)

PERMUTATIONS = list(itertools.permutations(range(4)))
FIT_WINDOW = (1e-8, 1e-2)
MAX_REFINE = 8


@dataclass(frozen=True)
class EPLocation:
    omega_c: float
    kind: str  # "lower" | "upper"
    residual: float


@dataclass(frozen=True)
class ScalingFit:
    exponent: float
    intercept: float
    r_squared: float
    radii: tuple
    quantity: str = ""
    side: str = "stable"
    window: tuple = FIT_WINDOW


@dataclass
class LoopReport:
    center: complex
    radius: float
    direction: str
    n_steps: int
    loops: int
    eigenvalue_permutation: tuple
    phase_factor: complex
    eigenvector_factor: complex
    min_gap: float
    start_eigenvalues: tuple
    end_eigenvalues: tuple
    refinements: int = 0
    gauge: str = (
        "parallel transport of unit eigenvectors; partner started as -S*u; "
        "pair rescaled to u^T K2 u' = -i with the square-root branch continued"
    )
    extra: dict = field(default_factory=dict)


def _minus_square(omega_x, omega_y, Omega):
    return eigenmode_squares(ModelParams(omega_x, omega_y, Omega))[1]


def locate_eps(omega_x: float, omega_y: float) -> tuple:
    """Bisect ``w_-^2(Omega)`` for its two real zeros.

    Raises
    ------
    BracketError
        If a bracket shows no sign change (``omega_x == omega_y``).
    """
    if omega_x == omega_y:
        # w_-^2 = (omega - Omega)^2 touches zero without a sign change
        raise BracketError("omega_x == omega_y: the critical points merge into a degeneracy")
    s = omega_x + omega_y
    tol = 1e-12 * (omega_x ** 2 + omega_y ** 2)
    out = []
    for kind, (lo, hi) in (("lower", (0.0, 0.5 * s)), ("upper", (0.5 * s, 2.0 * s))):
        flo = _minus_square(omega_x, omega_y, lo)
        fhi = _minus_square(omega_x, omega_y, hi)
        if flo == 0.0:
            out.append(EPLocation(lo, kind, 0.0))
            continue
        if fhi == 0.0:
            out.append(EPLocation(hi, kind, 0.0))
            continue
        if (flo > 0) == (fhi > 0):
            raise BracketError(
                f"no sign change of w_-^2 on [{lo}, {hi}] (omega_x == omega_y?)"
            )
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = _minus_square(omega_x, omega_y, mid)
            if abs(fm) <= tol and hi - lo <= 1e-12 * s:
                break
            if fm == 0.0 or mid in (lo, hi):
                break
            if (fm > 0) == (flo > 0):
                lo, flo = mid, fm
            else:
                hi = mid
        out.append(EPLocation(mid, kind, abs(fm)))
    return tuple(out)


def alignment_measure(v1, v2) -> float:
    """``1 - |<v1, v2>|^2 / (|v1|^2 |v2|^2)``; zero iff linearly dependent."""
    v1 = np.asarray(v1, dtype=complex)
    v2 = np.asarray(v2, dtype=complex)
    n1 = np.vdot(v1, v1).real
    n2 = np.vdot(v2, v2).real
    if n1 == 0 or n2 == 0:
        raise ZeroVector("alignment of a zero vector is undefined")
    val = 1.0 - abs(np.vdot(v1, v2)) ** 2 / (n1 * n2)
    return min(1.0, max(0.0, val))


def coalescing_vectors(p: ModelParams):
    """Unit eigenvectors for ``-i w_-`` and ``+i w_-``."""
    check_ep_distance(p)
    wm = eigenmodes(p).omega_minus
    m = build_dynamical_matrix(p)
    return raw_eigenvector(m, -1j * wm), raw_eigenvector(m, 1j * wm)


def coalescence_overlap(p: ModelParams) -> complex:
    """Symplectic product ``u^T K2 u'`` of the unit coalescing eigenvectors."""
    u2, u3 = coalescing_vectors(p)
    return complex(u2 @ K2 @ u3)


def _stable_side_sign(omega_x, omega_y, omega_c):
    lo, hi = min(omega_x, omega_y), max(omega_x, omega_y)
    if math.isclose(omega_c, lo, rel_tol=0, abs_tol=1e-9 * hi):
        return -1.0
    if math.isclose(omega_c, hi, rel_tol=0, abs_tol=1e-9 * hi):
        return 1.0
    raise ValueError(f"{omega_c} is not a critical frequency of ({omega_x}, {omega_y})")


def _component_norm(p):
    u = build_transform(p).u
    return float(np.max(np.linalg.norm(u[:, 1:3], axis=0)))


def scaling_exponent(omega_x, omega_y, omega_c, quantity, radii, side="stable") -> ScalingFit:
    """Log-log slope of a near-EP quantity against ``|Omega - Omega_c|``.

    ``quantity`` is ``"component_norm"`` (largest column norm of the
    normalised soft-mode columns) or ``"overlap"`` (modulus of
    :func:`coalescence_overlap`). ``side="unstable"`` samples inside the
    window instead; no exponent is implied for that side.

    Raises
    ------
    FitError
        If the fit has ``r_squared < 0.99``.
    """
    radii = sorted((float(r) for r in radii), reverse=True)
    if len(radii) < 6:
        raise ValueError("need at least 6 radii")
    if len(set(radii)) != len(radii):
        raise ValueError("radii must be distinct")
    if radii[-1] < FIT_WINDOW[0] or radii[0] > FIT_WINDOW[1]:
        raise ValueError(f"radii must lie in {FIT_WINDOW}")
    sign = _stable_side_sign(omega_x, omega_y, omega_c)
    if side == "unstable":
        sign = -sign
    elif side != "stable":
        raise ValueError("side must be 'stable' or 'unstable'")
    if quantity == "component_norm":
        f = _component_norm
    elif quantity == "overlap":
        f = lambda p: abs(coalescence_overlap(p))  # noqa: E731
    else:
        raise ValueError(f"unknown quantity {quantity!r}")

    x = np.log(radii)
    y = np.log([f(ModelParams(omega_x, omega_y, omega_c + sign * r)) for r in radii])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    r2 = min(1.0, max(0.0, r2))
    fit = ScalingFit(float(slope), float(intercept), r2, tuple(radii), quantity, side)
    if r2 < 0.99:
        raise FitError(f"poor power-law fit, r^2 = {r2:.4f}", fit=fit)
    return fit


# --- encircling ---------------------------------------------------------


def _assign(prev, new):
    """Best and runner-up total distances over all 24 relabelings."""
    scored = sorted(
        (sum(abs(new[perm[k]] - prev[k]) for k in range(4)), perm) for perm in PERMUTATIONS
    )
    return scored[0], scored[1][0]


def _min_gap(eigs):
    return min(abs(a - b) for a, b in itertools.combinations(eigs, 2))


class _Tracker:
    def __init__(self, omega_x, omega_y, Omega0):
        self.omega_x = omega_x
        self.omega_y = omega_y
        p0 = ModelParams(omega_x, omega_y, Omega0)
        wp, wm = eigenmodes(p0)
        labelled = (-1j * wp, -1j * wm, 1j * wm, 1j * wp)
        found = self._eigs(Omega0)
        (_, perm), _ = _assign(labelled, found)
        self.eigs = [found[perm[k]] for k in range(4)]
        self.start_eigs = tuple(self.eigs)
        self.min_gap = _min_gap(self.eigs)
        self.refinements = 0
        m = build_dynamical_matrix(p0)
        w2 = raw_eigenvector(m, self.eigs[1])
        # same partner as build_transform uses next to either critical point
        w3 = -(REVERSAL @ w2)
        self.w = [w2, w3]
        self.c = self._scale(None)
        self.start_vectors = self.normalized()
        self.Omega = Omega0

    def _eigs(self, Omega):
        m = build_dynamical_matrix(ModelParams(self.omega_x, self.omega_y, Omega))
        return linalg.char_poly_eigenvalues(m)

    def _scale(self, prev):
        b = self.w[0] @ K2 @ self.w[1]
        c = np.sqrt(-1j / b)
        if prev is not None and abs(c - prev) > abs(c + prev):
            c = -c
        return c

    def normalized(self):
        return self.c * self.w[0], self.c * self.w[1]

    def advance(self, Omega, depth=0):
        found = self._eigs(Omega)
        (best, perm), second = _assign(self.eigs, found)
        if second > 0 and best / second > 0.5:
            if depth >= MAX_REFINE:
                raise TrackingAmbiguity(
                    f"eigenvalue assignment ambiguous near Omega={Omega:.6g} "
                    f"(ratio {best / second:.3f}) after {depth} refinements"
                )
            self.refinements += 1
            mid = 0.5 * (self.Omega + Omega)
            self.advance(mid, depth + 1)
            self.advance(Omega, depth + 1)
            return
        self.eigs = [found[perm[k]] for k in range(4)]
        gap = _min_gap(self.eigs)
        self.min_gap = min(self.min_gap, gap)
        if gap < 1e-9:
            raise EPOnPath(f"eigenvalues within {gap:.2e} at Omega={Omega:.6g}")
        m = build_dynamical_matrix(ModelParams(self.omega_x, self.omega_y, Omega))
        for i, lam in enumerate((self.eigs[1], self.eigs[2])):
            raw = raw_eigenvector(m, lam)
            ov = np.vdot(self.w[i], raw)
            self.w[i] = raw * (abs(ov) / ov).conjugate()
        self.c = self._scale(self.c)
        self.Omega = Omega


def encircle_ep(
    omega_x,
    omega_y,
    omega_c,
    radius=None,
    n_steps=256,
    direction="ccw",
    loops=1,
) -> LoopReport:
    """Follow the spectrum around ``Omega = omega_c + radius e^{i theta}``.

    The loop starts at ``theta = 0``. Eigenvalues are continued by optimal
    assignment over all relabelings; steps whose assignment is ambiguous
    are halved. The soft pair is transported as described in
    ``LoopReport.gauge``.

    ``eigenvector_factor`` is ``z`` in ``u_end = z * u_land``, where ``u_end``
    is the continued ``-i w_-`` vector and ``u_land`` the starting vector of
    the branch it lands on. ``phase_factor = 1 / eigenvector_factor`` is the
    monodromy of the normalising fourth root, ``u_land = phase_factor * u_end``.
    """
    if direction not in ("ccw", "cw"):
        raise ValueError("direction must be 'ccw' or 'cw'")
    if n_steps < 64:
        raise ValueError("n_steps must be at least 64")
    if loops < 1:
        raise ValueError("loops must be positive")
    if radius is None:
        radius = 0.05 * abs(omega_x - omega_y) or 0.05 * omega_x
    eps_all = (min(omega_x, omega_y), max(omega_x, omega_y))
    others = [abs(omega_c - e) for e in eps_all if abs(omega_c - e) > 1e-12]
    if radius < 1e-4 or (others and radius > 0.5 * min(others)):
        raise ValueError(
            f"radius {radius} outside [1e-4, half the distance to the nearest other EP]"
        )

    sgn = 1.0 if direction == "ccw" else -1.0
    total = n_steps * loops
    tracker = _Tracker(omega_x, omega_y, complex(omega_c + radius))
    for k in range(1, total + 1):
        theta = sgn * 2.0 * math.pi * k / n_steps
        tracker.advance(complex(omega_c + radius * np.exp(1j * theta)))

    start = tracker.start_eigs
    end = tracker.eigs
    perm = []
    for lam in end:
        perm.append(int(np.argmin([abs(lam - s) for s in start])))
    land = perm[1]
    u_end = tracker.normalized()[0]
    if land == 1:
        u_land = tracker.start_vectors[0]
    elif land == 2:
        u_land = tracker.start_vectors[1]
    else:
        raise TrackingAmbiguity("soft-mode branch landed on a stiff-mode eigenvalue")
    z = np.vdot(u_land, u_end) / np.vdot(u_land, u_land)
    return LoopReport(
        center=complex(omega_c),
        radius=float(radius),
        direction=direction,
        n_steps=int(n_steps),
        loops=int(loops),
        eigenvalue_permutation=tuple(perm),
        phase_factor=complex(1.0 / z),
        eigenvector_factor=complex(z),
        min_gap=float(tracker.min_gap),
        start_eigenvalues=tuple(start),
        end_eigenvalues=tuple(end),
        refinements=tracker.refinements,
        extra={"landing_residual": float(linalg.max_norm(u_end - z * u_land))},
    )


def diabolic_check(omega, Omega, omega_y=None, tol=1e-8) -> dict:
    """Count independent eigenvectors of the soft eigenvalue ``-i w_-``.

    With ``omega_y`` omitted both oscillator frequencies equal ``omega``.
    A coalesced pair with a single eigenvector is an exceptional point; a
    coalesced pair with two is a diabolic (genuine) degeneracy.
    """
    wy = omega if omega_y is None else omega_y
    p = ModelParams(omega, wy, Omega)
    m = build_dynamical_matrix(p)
    wm = eigenmodes(p).omega_minus
    lam = -1j * wm
    rank = linalg.numerical_rank(m - lam * np.eye(4), tol)
    n_indep = 4 - rank
    coalesced = abs(wm) <= tol * (omega + wy)
    return {
        "is_ep": bool(coalesced and n_indep == 1),
        "coalesced": bool(coalesced),
        "n_independent_eigenvectors": int(n_indep),
        "eigenvalue": complex(lam),
    }
