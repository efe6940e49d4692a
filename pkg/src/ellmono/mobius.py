"""Moebius transformations, commuting pairs and affine-representation coordinates.

Matrices act on the Riemann sphere as z -> (az+b)/(cz+d).  Equality is always
meant projectively: two matrices represent the same map iff they are
proportional.  The point at infinity is a dedicated marker, never a large
float, so pole cases stay exact.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import (
    AmbiguityError,
    DegeneracyError,
    ExcludedRepresentationError,
    NonCommutingError,
)


class InfinityPoint:
    """Singleton marker for the point at infinity of the Riemann sphere."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"


INFINITY = InfinityPoint()

# Componentwise tolerance for projective equality of normalized matrices.
PGL_EQ_TOL = 1e-10
# Determinant floor (after max-entry normalization) below which a product is
# treated as degenerate.
DET_TOL = 1e-12


def chordal_distance(p, q) -> float:
    """Chordal metric on the sphere; both arguments may be INFINITY."""
    if isinstance(p, InfinityPoint):
        z1, z2 = 1.0, 0.0
    else:
        z1, z2 = complex(p), 1.0
    if isinstance(q, InfinityPoint):
        w1, w2 = 1.0, 0.0
    else:
        w1, w2 = complex(q), 1.0
    num = abs(z1 * w2 - z2 * w1)
    den = ((abs(z1) ** 2 + abs(z2) ** 2) * (abs(w1) ** 2 + abs(w2) ** 2)) ** 0.5
    return num / den


@dataclass(frozen=True)
class MobiusMap:
    a: complex
    b: complex
    c: complex
    d: complex

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def scaling(cls, a: complex) -> "MobiusMap":
        return cls(a, 0, 0, 1)

    @classmethod
    def translation(cls, b: complex) -> "MobiusMap":
        return cls(1, b, 0, 1)

    @classmethod
    def inversion(cls) -> "MobiusMap":
        return cls(0, 1, 1, 0)

    @classmethod
    def affine(cls, a: complex, b: complex) -> "MobiusMap":
        return cls(a, b, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "MobiusMap":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def normalized(self) -> "MobiusMap":
        """Scale so the max-modulus entry equals 1 (row-major tie break)."""
        m = self.matrix
        flat = np.abs(m).ravel()
        k = int(np.argmax(flat))
        pivot = m.ravel()[k]
        if pivot == 0:
            raise DegeneracyError("zero matrix is not a Moebius map")
        return MobiusMap.from_matrix(m / pivot)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a).normalized()

    def apply(self, z):
        """Evaluate on the sphere; total (poles map to INFINITY)."""
        if isinstance(z, InfinityPoint):
            if self.c == 0:
                return INFINITY
            return self.a / self.c
        z = complex(z)
        den = self.c * z + self.d
        num = self.a * z + self.b
        if den == 0:
            return INFINITY
        # Guard against overflow when |den| is tiny relative to |num|.
        if abs(den) < 1e-150 * max(1.0, abs(num)):
            return INFINITY
        return num / den

    def is_identity(self, tol: float = PGL_EQ_TOL) -> bool:
        m = self.normalized().matrix
        return (
            abs(m[0, 1]) <= tol
            and abs(m[1, 0]) <= tol
            and abs(m[0, 0] - m[1, 1]) <= tol
        )

    def fixed_points(self, tol: float = 1e-9):
        """Fixed points on the sphere.

        Returns a list with two entries for maps with distinct fixed points
        and one entry for parabolic maps; the discriminant test uses the
        normalized matrix so `tol` is scale-free.
        """
        m = self.normalized()
        a, b, c, d = m.a, m.b, m.c, m.d
        disc = (a - d) ** 2 + 4 * b * c
        if abs(c) <= tol:
            # Affine: infinity is fixed.
            if abs(a - d) <= tol:
                return [INFINITY]
            return [b / (d - a), INFINITY]
        if abs(disc) <= tol ** 2:
            return [(a - d) / (2 * c)]
        r = cmath.sqrt(disc)
        return [((a - d) + r) / (2 * c), ((a - d) - r) / (2 * c)]


def compose(f: MobiusMap, g: MobiusMap) -> MobiusMap:
    """Composition f o g as a normalized matrix product."""
    prod = MobiusMap.from_matrix(f.matrix @ g.matrix).normalized()
    if abs(prod.det()) < DET_TOL:
        raise DegeneracyError(
            f"composition is degenerate: |det| = {abs(prod.det()):.3e} < {DET_TOL}"
        )
    return prod


def apply(f: MobiusMap, z):
    return f.apply(z)


def pgl_distance(f: MobiusMap, g: MobiusMap) -> float:
    """Scale-free componentwise distance between projective classes."""
    fm = f.normalized().matrix
    gm = g.normalized().matrix
    k = int(np.argmax(np.abs(fm).ravel()))
    pivot_f = fm.ravel()[k]
    pivot_g = gm.ravel()[k]
    if abs(pivot_g) < 1e-300:
        return float(np.max(np.abs(fm - gm)))
    lam = pivot_f / pivot_g
    return float(np.max(np.abs(fm - lam * gm)))


def pgl_equal(f: MobiusMap, g: MobiusMap, tol: float = PGL_EQ_TOL) -> bool:
    return pgl_distance(f, g) <= tol


def commutation_defect(f: MobiusMap, g: MobiusMap) -> float:
    """Normalized commutator size of the pair in PGL(2, C)."""
    return pgl_distance(compose(f, g), compose(g, f))


@dataclass(frozen=True)
class RepClass:
    """Conjugacy class of a commuting pair of Moebius maps.

    tag is one of {"Trivial", "Linear", "Euclidean", "Dihedral"}; data holds
    the normal-form parameters (eigen-multipliers for Linear, translation
    parts for Euclidean), and conjugator is the map realizing the normal form.
    """

    tag: str
    data: tuple | None
    conjugator: MobiusMap


def _to_zero_infinity_frame(p, q) -> MobiusMap:
    """Moebius map sending p -> 0 and q -> infinity."""
    if isinstance(q, InfinityPoint):
        if isinstance(p, InfinityPoint):
            raise DegeneracyError("coincident frame points")
        return MobiusMap(1, -complex(p), 0, 1)
    if isinstance(p, InfinityPoint):
        return MobiusMap(0, 1, 1, -complex(q))
    return MobiusMap(1, -complex(p), 1, -complex(q))


def _to_infinity_frame(p) -> MobiusMap:
    """Moebius map sending p -> infinity (identity when p is infinity)."""
    if isinstance(p, InfinityPoint):
        return MobiusMap.identity()
    return MobiusMap(0, 1, 1, -complex(p))


def _eigen_split(f: MobiusMap, tol: float):
    """Eigenvalues of the normalized matrix with a separation verdict.

    Returns (lam1, lam2, kind) with kind in {"separated", "parabolic"}.
    Tie break: a separation in (tol, 10*tol] is treated as too close to call
    and raises AmbiguityError rather than guessing.
    """
    m = f.normalized().matrix
    lam = np.linalg.eigvals(m)
    scale = max(abs(lam[0]), abs(lam[1]))
    sep = abs(lam[0] - lam[1]) / scale
    if sep <= tol:
        return lam[0], lam[1], "parabolic"
    if sep <= 10 * tol:
        raise AmbiguityError(
            f"eigenvalue separation {sep:.3e} within the ambiguity band "
            f"({tol:.1e}, {10 * tol:.1e}]",
            candidates=("parabolic", "separated"),
        )
    return lam[0], lam[1], "separated"


def _translation_part(f: MobiusMap) -> complex:
    m = f.normalized().matrix
    return complex(m[0, 1] / m[0, 0])


def _conjugate(f: MobiusMap, t: MobiusMap) -> MobiusMap:
    return compose(compose(t, f), t.inverse())


def classify_commuting_pair(f: MobiusMap, g: MobiusMap, tol: float = 1e-8) -> RepClass:
    """Classify a commuting pair up to conjugacy.

    Trivial: both identity.  Linear: a common pair of fixed points, conjugate
    to (z -> a1 z, z -> a2 z); data = multipliers at the point sent to 0,
    oriented so |a_f| >= 1 when f is not the identity.  Euclidean: a single
    common fixed point with unit multipliers, conjugate to translations; data
    = translation parts in the chosen frame (canonical up to a common scale;
    the frame is the identity when the common fixed point is already at
    infinity, so translation inputs are returned verbatim).  Dihedral:
    conjugate to <-z, 1/z>.
    """
    defect = commutation_defect(f, g)
    if defect > max(tol, PGL_EQ_TOL):
        raise NonCommutingError(f"pair does not commute: defect {defect:.3e}")

    f_id = f.is_identity(tol)
    g_id = g.is_identity(tol)
    if f_id and g_id:
        return RepClass("Trivial", None, MobiusMap.identity())

    fp_tol = max(1e-7, 10 * tol)

    # Determine map types first; the parabolic/separated split drives the
    # classification.
    kinds = {}
    for name, h, h_id in (("f", f, f_id), ("g", g, g_id)):
        if h_id:
            kinds[name] = "identity"
        else:
            kinds[name] = _eigen_split(h, tol)[2]

    if "parabolic" in kinds.values():
        # Euclidean case: every non-identity member must be parabolic with a
        # shared fixed point (a separated map cannot commute with a parabolic).
        fps = []
        for h, h_id in ((f, f_id), (g, g_id)):
            if h_id:
                continue
            pts = h.fixed_points()
            if len(pts) != 1:
                raise NonCommutingError(
                    "parabolic and non-parabolic maps cannot commute"
                )
            fps.append(pts[0])
        if len(fps) == 2 and chordal_distance(fps[0], fps[1]) > fp_tol:
            raise NonCommutingError("parabolic maps with distinct fixed points")
        t = _to_infinity_frame(fps[0])
        bf = 0j if f_id else _translation_part(_conjugate(f, t))
        bg = 0j if g_id else _translation_part(_conjugate(g, t))
        return RepClass("Euclidean", (bf, bg), t)

    # Pick a non-identity separated map to supply the frame.
    h, k, h_is_f = (f, g, True) if not f_id else (g, f, False)
    p, q = h.fixed_points()
    k_id = g_id if h_is_f else f_id

    if k_id:
        swap = False
    else:
        kp = k.apply(p)
        d_fix = chordal_distance(kp, p)
        d_swap = chordal_distance(kp, q)
        if d_fix <= fp_tol and d_fix <= d_swap:
            swap = False
        elif d_swap <= fp_tol:
            swap = True
        else:
            raise NonCommutingError(
                "second map neither fixes nor swaps the fixed-point pair"
            )

    if not swap:
        t = _to_zero_infinity_frame(p, q)
        fc = _conjugate(f, t).normalized()
        gc = _conjugate(g, t).normalized()
        af = complex(fc.a / fc.d)
        ag = complex(gc.a / gc.d)
        # Orientation tie break: prefer |a_f| >= 1 (use g when f is trivial).
        ref = ag if f_id else af
        if abs(ref) < 1 - 1e-12:
            t = _to_zero_infinity_frame(q, p)
            fc = _conjugate(f, t).normalized()
            gc = _conjugate(g, t).normalized()
            af = complex(fc.a / fc.d)
            ag = complex(gc.a / gc.d)
        return RepClass("Linear", (af, ag), t)

    # Swap case: commutation forces the frame map to be an involution -z and
    # the swapping map to be w -> b/w; rescaling sends b to 1.
    t = _to_zero_infinity_frame(p, q)
    hc = _conjugate(h, t).normalized()
    ah = complex(hc.a / hc.d)
    if abs(ah + 1) > fp_tol:
        raise NonCommutingError(
            f"swap structure requires multiplier -1, got {ah:.6g}"
        )
    kc = _conjugate(k, t).normalized()
    bk = complex(kc.b / kc.c)
    s = MobiusMap(1, 0, 0, cmath.sqrt(bk))  # w -> w / sqrt(b)
    return RepClass("Dihedral", None, compose(s, t))


@dataclass(frozen=True)
class AffinePair:
    """Images (z -> a z + b) of the two lattice generators."""

    a1: complex
    b1: complex
    a_tau: complex
    b_tau: complex

    def commutation_residual(self) -> float:
        return abs((self.a1 - 1) * self.b_tau - (self.a_tau - 1) * self.b1)

    def maps(self) -> tuple[MobiusMap, MobiusMap]:
        return MobiusMap.affine(self.a1, self.b1), MobiusMap.affine(self.a_tau, self.b_tau)


def normalize_direction(b1: complex, b_tau: complex) -> tuple[complex, complex]:
    """Scale a homogeneous pair so the max-modulus component is 1.

    Tie break: when |b1| >= |b_tau| the first component is the pivot.
    """
    if b1 == 0 and b_tau == 0:
        raise DegeneracyError("zero homogeneous direction")
    if abs(b1) >= abs(b_tau):
        return (1.0 + 0j, b_tau / b1)
    return (b1 / b_tau, 1.0 + 0j)


@dataclass(frozen=True)
class B1Point:
    """Quotient coordinates (a1, a_tau, [b1 : b_tau]) of a non-linear affine pair."""

    a1: complex
    a_tau: complex
    bdir: tuple[complex, complex]

    def constraint_residual(self) -> float:
        b1, bt = self.bdir
        return abs((self.a1 - 1) * bt - (self.a_tau - 1) * b1)


def b1_from_affine_pair(pair: AffinePair, tol: float = 1e-9) -> B1Point:
    """Quotient a commuting affine pair to its B1 coordinates."""
    scale = max(abs(pair.b1), abs(pair.b_tau), 1.0)
    if pair.commutation_residual() > tol * max(
        1.0, abs(pair.a1 - 1), abs(pair.a_tau - 1)
    ) * scale:
        raise NonCommutingError(
            f"commutation constraint violated: {pair.commutation_residual():.3e}"
        )
    if pair.b1 == 0 and pair.b_tau == 0:
        raise ExcludedRepresentationError(
            "linear representation (b1 = b_tau = 0) has no B1 image"
        )
    return B1Point(pair.a1, pair.a_tau, normalize_direction(pair.b1, pair.b_tau))


def direction_distance(u: tuple[complex, complex], v: tuple[complex, complex]) -> float:
    """Chordal distance between homogeneous directions."""
    num = abs(u[0] * v[1] - u[1] * v[0])
    den = ((abs(u[0]) ** 2 + abs(u[1]) ** 2) * (abs(v[0]) ** 2 + abs(v[1]) ** 2)) ** 0.5
    return num / den


def b1_distance(p: B1Point, q: B1Point) -> float:
    """Max of relative multiplier distances and the direction distance."""
    da1 = abs(p.a1 - q.a1) / max(abs(p.a1), abs(q.a1))
    dat = abs(p.a_tau - q.a_tau) / max(abs(p.a_tau), abs(q.a_tau))
    return max(da1, dat, direction_distance(p.bdir, q.bdir))
