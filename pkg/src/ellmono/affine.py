"""The versal family of affine structures on the torus.

For a parameter c the developing map is

    f_c(u) = (exp(c u) - 1) / c,    f_0(u) = u,

an entire function of (c, u) whose translation monodromy is

    f_c(u + gamma) = e^(c gamma) f_c(u) + (e^(c gamma) - 1) / c.

The quotient coordinates of the resulting affine pair live in the space of
non-linear affine representations; Schwarzian utilities convert between the
quadratic-differential and developing-map descriptions (S(f_c) = -c^2/2).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CriticalPointError, DegeneracyError, DomainError, PoleError
from .mobius import AffinePair, B1Point, b1_from_affine_pair, normalize_direction

# Below this size of |c u| the order-8 Taylor series of (e^(cu)-1)/c is used,
# keeping the family smooth through c = 0 (next omitted term < 1e-36 |u|).
_SERIES_THRESHOLD = 1e-4
_FACTORIALS = [math.factorial(k + 1) for k in range(9)]


@dataclass(frozen=True)
class AffineStructure:
    """Marked complex structure tau with developing-map parameter c.

    The associated quadratic-differential constant is -c^2/2.
    """

    tau: complex
    c: complex

    def __post_init__(self):
        if self.tau.imag <= 0:
            raise DomainError(f"Im tau must be positive, got {self.tau}")

    def quadratic_differential_constant(self) -> complex:
        return -self.c * self.c / 2.0


def developing_map(c: complex, u: complex) -> complex:
    """(e^(cu) - 1)/c, evaluated by series through the removable set c u ~ 0."""
    cu = c * u
    if abs(cu) < _SERIES_THRESHOLD:
        acc = 0j
        power = 1.0 + 0j
        for k in range(9):
            acc += power / _FACTORIALS[k]
            power *= cu
        return u * acc
    return (cmath.exp(cu) - 1.0) / c


def affine_monodromy(s: AffineStructure) -> AffinePair:
    """Affine images of the generators 1 and tau: (e^(c gamma), f_c(gamma))."""
    return AffinePair(
        a1=cmath.exp(s.c),
        b1=developing_map(s.c, 1.0),
        a_tau=cmath.exp(s.c * s.tau),
        b_tau=developing_map(s.c, s.tau),
    )


def monodromy_to_b1(s: AffineStructure, tol: float = 1e-12) -> B1Point:
    """Quotient coordinates of the structure's monodromy.

    At c = 0 the pair consists of the translations (1, tau), giving the
    point (1, 1, [1 : tau]).
    """
    if s.c == 0:
        return B1Point(1.0 + 0j, 1.0 + 0j, normalize_direction(1.0 + 0j, s.tau))
    pair = affine_monodromy(s)
    if abs(pair.b1) < tol and abs(pair.b_tau) < tol:
        raise DegeneracyError(
            f"both translation parts below {tol} for c = {s.c}: "
            "the homogeneous direction is not resolved"
        )
    return B1Point(pair.a1, pair.a_tau, normalize_direction(pair.b1, pair.b_tau))


def noninjective_pair(
    tau: complex, tau2: complex, m: int, n: int
) -> tuple[AffineStructure, AffineStructure]:
    """Two structures on distinct curves with the same monodromy.

    Parameters follow c = 2 pi i (m tau' + n)/(tau' - tau) on the first curve
    and c' = 2 pi i (m tau + n)/(tau' - tau) on the second, so that
    c - c' = 2 pi i m and c tau - c' tau' = -2 pi i n exactly.
    """
    if (m, n) == (0, 0):
        raise DomainError("(m, n) = (0, 0) yields the same structure twice")
    if tau == tau2:
        raise DomainError("the two marked structures must differ")
    denom = tau2 - tau
    c1 = 2j * math.pi * (m * tau2 + n) / denom
    c2 = 2j * math.pi * (m * tau + n) / denom
    return AffineStructure(tau, c1), AffineStructure(tau2, c2)


def _derivatives(f, u: complex, h: float):
    """(f', f'', f''') by 4th-order central differences."""
    f3p, f2p, f1p = f(u + 3 * h), f(u + 2 * h), f(u + h)
    f3m, f2m, f1m = f(u - 3 * h), f(u - 2 * h), f(u - h)
    f0 = f(u)
    d1 = (-f2p + 8 * f1p - 8 * f1m + f2m) / (12 * h)
    d2 = (-f2p + 16 * f1p - 30 * f0 + 16 * f1m - f2m) / (12 * h * h)
    d3 = (-f3p + 8 * f2p - 13 * f1p + 13 * f1m - 8 * f2m + f3m) / (8 * h ** 3)
    return d1, d2, d3


def schwarzian_numeric(
    f,
    u: complex,
    h: float = 1e-3,
    richardson: bool = False,
    critical_tol: float = 1e-8,
) -> complex:
    """S(f)(u) = f'''/f' - (3/2) (f''/f')^2 by 4th-order central differences.

    Error is O(h^4) for f analytic near u; richardson=True combines h and h/2
    evaluations for two extra orders.
    """
    if not (1e-6 <= h <= 1e-2):
        raise DomainError(f"step h = {h} outside [1e-6, 1e-2]")

    def value(step):
        d1, d2, d3 = _derivatives(f, u, step)
        if abs(d1) < critical_tol:
            raise CriticalPointError(
                f"|f'({u})| = {abs(d1):.3e} below {critical_tol}"
            )
        r = d2 / d1
        return d3 / d1 - 1.5 * r * r

    if not richardson:
        return value(h)
    s_h = value(h)
    s_h2 = value(h / 2)
    return (16.0 * s_h2 - s_h) / 15.0


def schwarzian_composition_residual(f, g, u: complex, h: float = 1e-3) -> complex:
    """S(f o g)(u) - [S(f)(g(u)) g'(u)^2 + S(g)(u)] (zero for holomorphic f, g)."""
    gu = g(u)
    d1g, _, _ = _derivatives(g, u, h)
    lhs = schwarzian_numeric(lambda w: f(g(w)), u, h)
    rhs = schwarzian_numeric(f, gu, h) * d1g * d1g + schwarzian_numeric(g, u, h)
    return lhs - rhs


def ratio_of_linear_solutions(
    phi: complex,
    v: complex,
    rtol: float = 1e-12,
    atol: float = 1e-14,
) -> complex:
    """z1/z2 for the solutions of z'' + (phi/2) z = 0 with standard initial data.

    z1(0) = 0, z1'(0) = 1; z2(0) = 1, z2'(0) = 0; both integrated numerically
    along the straight segment 0 -> v.  The Schwarzian derivative of the
    returned germ equals phi.
    """
    if v == 0:
        return 0j
    y0 = np.array([0, 1, 1, 0], dtype=complex)

    def rhs(t, y):
        z1, dz1, z2, dz2 = y
        return np.array([dz1, -(phi / 2.0) * z1, dz2, -(phi / 2.0) * z2]) * v

    sol = solve_ivp(rhs, (0.0, 1.0), y0, method="DOP853", rtol=rtol, atol=atol)
    z1, _, z2, _ = sol.y[:, -1]
    if abs(z2) < 1e-10 * max(1.0, abs(z1)):
        raise PoleError(
            f"v = {v} is a zero of z2: pole of the developing map", nearest=v
        )
    return complex(z1 / z2)


@dataclass(frozen=True)
class ContinuationResult:
    """Affine map fitted by stepwise continuation along a generator."""

    a: complex
    b: complex
    max_step_residual: float


def continue_affine_along_generator(
    s: AffineStructure,
    gamma: complex,
    base: complex = 0.11 + 0.07j,
    steps: int = 32,
) -> ContinuationResult:
    """Fit the affine deck transformation of f_c along base -> base + gamma.

    The segment is walked in `steps` straight-line steps; at each step the
    affine map between consecutive local frames is refitted by least squares
    on 3 sample points, and the fitted maps are composed.  The least-squares
    residual exposes any non-affine drift.
    """
    delta = gamma / steps
    offsets = np.array([0.0, 0.04, 0.04j]) * gamma
    a_tot, b_tot = 1.0 + 0j, 0j
    worst = 0.0
    for k in range(steps):
        x = base + k * delta
        w = np.array([developing_map(s.c, x + o) for o in offsets])
        w_next = np.array([developing_map(s.c, x + delta + o) for o in offsets])
        design = np.column_stack([w, np.ones(3, dtype=complex)])
        coeffs, _, _, _ = np.linalg.lstsq(design, w_next, rcond=None)
        a_k, b_k = complex(coeffs[0]), complex(coeffs[1])
        worst = max(worst, float(np.max(np.abs(design @ coeffs - w_next))))
        # Compose: total after this step is m_k o total.
        a_tot, b_tot = a_k * a_tot, a_k * b_tot + b_k
    return ContinuationResult(a_tot, b_tot, worst)
