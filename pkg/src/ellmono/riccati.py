"""Transport of linear and Riccati equations along pole-avoiding loops.

The linear family on the once-marked torus is

    dz/du = (A(u) + c) z,   A(u) = (wp'(u) + wp'(u0)) / (2 (wp(u) - wp(u0))),

whose coefficient has simple poles with residue -1 at the lattice and +1 on
the u0 translates; u = -u0 is a removable point.  Linear transport integrates
the logarithm (the 1-form is closed off the poles, so residue tests come out
sharp); general Riccati transport lifts to a trace-free 2x2 system and
projectivizes, which never meets the y = infinity coordinate singularity.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import GeometryError, IntegrationError, PathClearanceError, PoleError
from .mobius import INFINITY, InfinityPoint, MobiusMap
from .quadrature import QuadratureResult, integrate_polyline
from .weierstrass import WeierstrassContext

# Radius inflation keeping the polygonal approximation of a detour arc at the
# requested clearance.
_ARC_INFLATION = 1.1
_ARC_POINTS = 16
DEFAULT_CLEARANCE = 0.05


@dataclass(frozen=True)
class PathSpec:
    """Polyline in the u-plane with a declared pole set and clearance."""

    vertices: tuple
    poles: tuple
    clearance: float

    def segments(self):
        return list(zip(self.vertices, self.vertices[1:]))

    def length(self) -> float:
        return sum(abs(b - a) for a, b in self.segments())

    def min_pole_distance(self) -> float:
        if not self.poles:
            return math.inf
        best = math.inf
        for a, b in self.segments():
            for p in self.poles:
                best = min(best, _point_segment_distance(p, a, b))
        return best

    def validate(self):
        d = self.min_pole_distance()
        if d < self.clearance * (1.0 - 1e-9):
            raise PathClearanceError(
                f"path approaches a pole to {d:.4g} < clearance {self.clearance:.4g}"
            )


def _point_segment_distance(p: complex, a: complex, b: complex) -> float:
    ab = b - a
    denom = abs(ab) ** 2
    if denom == 0:
        return abs(p - a)
    t = ((p - a).real * ab.real + (p - a).imag * ab.imag) / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def _lattice_translates(poles, tau: complex, lo: complex, hi: complex, margin: float):
    """All lattice translates of `poles` near the bounding box [lo, hi]."""
    out = []
    im_t = tau.imag
    for p in poles:
        n_min = int(math.floor((lo.imag - p.imag - margin) / im_t)) - 1
        n_max = int(math.ceil((hi.imag - p.imag + margin) / im_t)) + 1
        for n in range(n_min, n_max + 1):
            base = p + n * tau
            m_min = int(math.floor(lo.real - base.real - margin)) - 1
            m_max = int(math.ceil(hi.real - base.real + margin)) + 1
            for m in range(m_min, m_max + 1):
                out.append(base + m)
    return out


def _detour_vertices(a: complex, b: complex, poles, clearance: float):
    """Vertices from a to b dodging poles by counterclockwise arcs.

    Each pole closer than `clearance` to the open segment is bypassed along a
    circular arc of radius _ARC_INFLATION * clearance, entered and left where
    the circle meets the segment line; arcs always run counterclockwise
    around the pole, which is monodromy-neutral for apparent singularities.
    """
    radius = _ARC_INFLATION * clearance
    ab = b - a
    length = abs(ab)
    if length == 0:
        return [a]
    direction = ab / length

    hits = []
    for p in poles:
        d = _point_segment_distance(p, a, b)
        if d >= clearance:
            continue
        t = ((p - a).real * ab.real + (p - a).imag * ab.imag) / length ** 2
        hits.append((t, p, d))
    hits.sort(key=lambda h: h[0])

    for (t1, p1, _), (t2, p2, _) in zip(hits, hits[1:]):
        if abs(p2 - p1) < 2.2 * radius:
            raise GeometryError(
                f"poles {p1} and {p2} too close for clearance {clearance}"
            )

    verts = [a]
    for t, p, d in hits:
        chord = math.sqrt(max(radius ** 2 - d ** 2, 0.0))
        foot = a + t * ab
        entry = foot - chord * direction
        exit_ = foot + chord * direction
        if abs(entry - verts[-1]) > 1e-15:
            verts.append(entry)
        a0 = cmath.phase(entry - p)
        a1 = cmath.phase(exit_ - p)
        while a1 <= a0:
            a1 += 2 * math.pi
        for theta in np.linspace(a0, a1, _ARC_POINTS + 1)[1:]:
            verts.append(p + radius * cmath.exp(1j * theta))
    if abs(b - verts[-1]) > 1e-15:
        verts.append(b)
    return verts


def period_loops(
    tau: complex,
    poles,
    base: complex,
    clearance: float = DEFAULT_CLEARANCE,
) -> tuple[PathSpec, PathSpec]:
    """Pole-avoiding polylines base -> base+1 and base -> base+tau.

    Every lattice translate of the declared poles is avoided by at least the
    clearance (after detour insertion); the base point must sit at distance
    >= 2 * clearance from all translates.
    """
    poles = [complex(p) for p in poles]
    specs = []
    for gamma in (1.0 + 0j, tau):
        a, b = complex(base), complex(base) + gamma
        lo = complex(min(a.real, b.real), min(a.imag, b.imag))
        hi = complex(max(a.real, b.real), max(a.imag, b.imag))
        translated = _lattice_translates(poles, tau, lo, hi, margin=1.0 + abs(tau))
        near = [p for p in translated if _point_segment_distance(p, a, b) < 5 * clearance + 1]
        for p in near:
            if min(abs(p - a), abs(p - b)) < 2 * clearance:
                raise GeometryError(
                    f"base point {base} within 2x clearance of pole translate {p}"
                )
        verts = _detour_vertices(a, b, near, clearance)
        spec = PathSpec(tuple(verts), tuple(near), clearance)
        spec.validate()
        specs.append(spec)
    return specs[0], specs[1]


def polygon_loop(center: complex, radius: float, poles=(), nsides: int = 16) -> PathSpec:
    """Closed polygonal loop (counterclockwise) around a center point."""
    angles = np.linspace(0.0, 2 * math.pi, nsides + 1)
    verts = tuple(center + radius * cmath.exp(1j * t) for t in angles)
    return PathSpec(verts, tuple(complex(p) for p in poles), radius * 0.5)


@dataclass(frozen=True)
class LinearFamilyPoint:
    """Parameters (u0, c) of the linear equation dz/du = (A(u) + c) z."""

    u0: complex
    c: complex


@dataclass(frozen=True)
class MonodromyResult:
    """Transport multipliers along the generators 1 and tau."""

    x: complex
    y: complex
    error_estimate: float


@dataclass(frozen=True)
class TransportResult:
    multiplier: complex
    error_estimate: float
    nevals: int


def coefficient_A(ctx: WeierstrassContext, u0: complex, u):
    """(wp'(u) + wp'(u0)) / (2 (wp(u) - wp(u0))).

    Near the removable point u = -u0 the zeta form
    zeta(u-u0) - zeta(u) + zeta(u0) is used instead, which stays accurate
    where the wp quotient is 0/0.
    """
    scalar = np.isscalar(u) or isinstance(u, complex)
    u_arr = np.atleast_1d(np.asarray(u, dtype=complex))
    for label, pts in (("lattice", u_arr), ("u0 translate", u_arr - u0)):
        dist = ctx.lattice.distance(pts)
        if np.any(dist < 1e-6):
            bad = complex(u_arr[np.argmin(dist)])
            raise PoleError(
                f"u = {bad} too close to a {label} pole of the coefficient",
                nearest=bad - complex(pts[np.argmin(dist)]) + ctx.lattice.nearest_point(
                    complex(pts[np.argmin(dist)])
                ),
            )
    out = np.empty_like(u_arr)
    near_removable = ctx.lattice.distance(u_arr + u0) < 0.02
    if np.any(~near_removable):
        w = u_arr[~near_removable]
        out[~near_removable] = (ctx.wp_prime(w) + ctx.wp_prime(u0)) / (
            2.0 * (ctx.wp(w) - ctx.wp(u0))
        )
    if np.any(near_removable):
        w = u_arr[near_removable]
        out[near_removable] = ctx.zeta(w - u0) - ctx.zeta(w) + ctx.zeta(u0)
    if scalar:
        return complex(out.reshape(-1)[0])
    return out


def transport_linear(
    ctx: WeierstrassContext,
    point: LinearFamilyPoint,
    path: PathSpec,
    abs_tol: float = 1e-11,
    rel_tol: float = 1e-10,
    max_step: float | None = None,
    adaptive: bool = True,
) -> TransportResult:
    """Multiplier exp(integral of (A + c) du) along the path."""
    path.validate()

    def integrand(u):
        return coefficient_A(ctx, point.u0, u) + point.c

    res: QuadratureResult = integrate_polyline(
        integrand,
        path.vertices,
        abs_tol=abs_tol,
        rel_tol=rel_tol,
        max_step=max_step,
        adaptive=adaptive,
    )
    mult = cmath.exp(res.value)
    return TransportResult(mult, abs(mult) * res.error_estimate, res.nevals)


@dataclass(frozen=True)
class RiccatiCoefficients:
    """Callables (quad, lin, const) defining dy/du = quad y^2 + lin y + const."""

    quad: object
    lin: object
    const: object


def transport_riccati_matrix(
    eq: RiccatiCoefficients,
    path: PathSpec,
    rtol: float = 1e-11,
    atol: float = 1e-12,
) -> MobiusMap:
    """Transport as a Moebius map via the trace-free 2x2 lift.

    With y = z1/z2 the lift is z' = M(u) z, M = [[lin/2, const], [-quad,
    -lin/2]]; the fundamental matrix is renormalized to unit determinant
    after each polyline segment.
    """
    path.validate()
    Z = np.eye(2, dtype=complex)
    for a, b in path.segments():
        seg = b - a

        def rhs(t, y):
            u = a + t * seg
            m = np.array(
                [
                    [0.5 * eq.lin(u), eq.const(u)],
                    [-eq.quad(u), -0.5 * eq.lin(u)],
                ],
                dtype=complex,
            )
            return (m @ y.reshape(2, 2) * seg).ravel()

        sol = solve_ivp(
            rhs,
            (0.0, 1.0),
            Z.ravel(),
            method="DOP853",
            rtol=rtol,
            atol=atol,
        )
        if not sol.success:
            raise IntegrationError(
                f"Riccati transport failed on segment {a} -> {b}: {sol.message}",
                interval=(a, b),
            )
        Z = sol.y[:, -1].reshape(2, 2)
        det = Z[0, 0] * Z[1, 1] - Z[0, 1] * Z[1, 0]
        Z = Z / cmath.sqrt(det)
    return MobiusMap.from_matrix(Z)


def transport_riccati(
    eq: RiccatiCoefficients,
    path: PathSpec,
    y0,
    rtol: float = 1e-11,
    atol: float = 1e-12,
):
    """Transport an initial point of the sphere along the path."""
    return transport_riccati_matrix(eq, path, rtol=rtol, atol=atol).apply(y0)


def _default_base(ctx: WeierstrassContext, poles, clearance: float) -> complex:
    tau = ctx.tau
    candidates = [
        0.23 + 0.31 * tau,
        0.37 + 0.19 * tau,
        0.13 + 0.41 * tau,
        0.29 + 0.07 * tau,
        -0.17 + 0.23 * tau,
    ]
    for cand in candidates:
        ok = True
        for p in poles:
            if float(ctx.lattice.distance(cand - p)) < 2.5 * clearance:
                ok = False
                break
        if ok:
            return complex(cand)
    raise GeometryError("no admissible base point found at the requested clearance")


def monodromy_numeric(
    ctx: WeierstrassContext,
    point: LinearFamilyPoint,
    base: complex | None = None,
    clearance: float = DEFAULT_CLEARANCE,
    abs_tol: float = 1e-11,
) -> MonodromyResult:
    """Multipliers of the linear family along both generator loops."""
    poles = (0j, complex(point.u0))
    if base is None:
        base = _default_base(ctx, poles, clearance)
    loop1, loop_tau = period_loops(ctx.tau, poles, base, clearance)
    t1 = transport_linear(ctx, point, loop1, abs_tol=abs_tol)
    t2 = transport_linear(ctx, point, loop_tau, abs_tol=abs_tol)
    return MonodromyResult(t1.multiplier, t2.multiplier, t1.error_estimate + t2.error_estimate)


def closed_form_solution(
    ctx: WeierstrassContext, point: LinearFamilyPoint, a: complex, u: complex
) -> complex:
    """a sigma(u-u0)/sigma(u) exp((zeta(u0) + c) u).

    The exp(c u) factor is part of the solution (its logarithmic derivative
    is A(u) + c, and the generator multipliers acquire the c gamma term); u0
    is reduced mod the lattice first, which only rescales the solution.
    """
    if float(ctx.lattice.distance(u)) < 1e-9:
        raise PoleError(f"u = {u} is a lattice zero of sigma", nearest=complex(u))
    u0, _, _ = ctx.lattice.reduce(np.atleast_1d(complex(point.u0)))
    u0 = complex(u0[0])
    return a * ctx.sigma(u - u0) / ctx.sigma(u) * cmath.exp((ctx.zeta(u0) + point.c) * u)


@dataclass(frozen=True)
class EuclideanMonodromy:
    """Translation parts of dz/du = wp(u) + gamma along the generators."""

    b1: complex
    b_tau: complex
    b1_formula: complex
    b_tau_formula: complex
    multiplier_1: complex
    multiplier_tau: complex
    error_estimate: float


def euclidean_monodromy(
    ctx: WeierstrassContext,
    gamma_param: complex,
    base: complex | None = None,
    clearance: float = DEFAULT_CLEARANCE,
) -> EuclideanMonodromy:
    """Integrate wp + gamma along both generator loops.

    Since zeta' = -wp the antiderivative value is gamma * period - eta_period
    for each generator; the quadrature value is returned together with that
    formula value, and the multiplier part of the projective transport (which
    must be 1: the monodromy consists of translations).
    """
    poles = (0j,)
    if base is None:
        base = _default_base(ctx, poles, clearance)
    loop1, loop_tau = period_loops(ctx.tau, poles, base, clearance)

    def integrand(u):
        return ctx.wp(u) + gamma_param

    q1 = integrate_polyline(integrand, loop1.vertices)
    q2 = integrate_polyline(integrand, loop_tau.vertices)

    eq = RiccatiCoefficients(
        quad=lambda u: 0j, lin=lambda u: 0j, const=lambda u: ctx.wp(u) + gamma_param
    )
    m1 = transport_riccati_matrix(eq, loop1).normalized()
    m2 = transport_riccati_matrix(eq, loop_tau).normalized()

    return EuclideanMonodromy(
        b1=q1.value,
        b_tau=q2.value,
        b1_formula=gamma_param - ctx.eta1,
        b_tau_formula=gamma_param * ctx.tau - ctx.eta_tau,
        multiplier_1=complex(m1.a / m1.d),
        multiplier_tau=complex(m2.a / m2.d),
        error_estimate=q1.error_estimate + q2.error_estimate,
    )
