"""High-accuracy Weierstrass functions for the lattice Z + tau*Z.

Evaluation strategy: reduce the argument into the fundamental parallelogram
centered at 0, evaluate the first Jacobi theta function

    theta1(v, q) = 2 * sum_{n>=0} (-1)^n q^((n+1/2)^2) sin((2n+1) v),
    q = exp(i pi tau),

and rebuild everything from the logarithmic derivative L = theta1'/theta1 at
v = pi*u together with the quasi-period eta1:

    zeta(u)  = eta1 u + pi L(pi u)
    wp(u)    = -eta1 - pi^2 L'(pi u)
    wp'(u)   = -pi^3 L''(pi u)
    sigma(u) = exp(eta1 u^2 / 2) theta1(pi u) / (pi theta1'(0))

with eta1 = -pi^2 theta1'''(0) / (3 theta1'(0)) and eta1, eta_tau the additive
periods of zeta (zeta(u+1) = zeta(u) + eta1, zeta(u+tau) = zeta(u) + eta_tau).
eta_tau is computed independently as 2 zeta(tau/2) so that the Legendre
relation eta1*tau - eta_tau = 2*pi*i remains a genuine cross-check of the
construction.  The cubic invariants come from the Eisenstein q-series

    g2 = (4 pi^4 / 3) E4(tau),   g3 = (8 pi^6 / 27) E6(tau).

After reduction the theta series converges like |q|^(n^2), so truncation
orders stay small for Im tau bounded below; the order is chosen adaptively
from |q| and validated against the differential equation and the Legendre
relation at construction time.  Within 1e-3 of a lattice point the principal
parts are evaluated from the Laurent series instead, which keeps relative
accuracy near poles; evaluation closer than 1e-6 to a lattice point is a hard
error.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PoleError, PrecisionError

POLE_GUARD = 1e-6
# Below this distance from a lattice point the Laurent series replaces the
# theta-quotient evaluation (cancellation would otherwise cost ~|u|-many
# digits in the principal part).
_LAURENT_RADIUS = 1e-3
_MAX_THETA_TERMS = 200
_MAX_EISENSTEIN_TERMS = 5000


@dataclass(frozen=True)
class Lattice:
    """Marked lattice Z + tau*Z with Im tau > 0."""

    tau: complex

    def __post_init__(self):
        if self.tau.imag <= 0:
            raise DomainError(f"Im tau must be positive, got tau = {self.tau}")

    def reduce(self, u):
        """Reduce u mod the lattice to the parallelogram centered at 0.

        Returns (u_red, m, n) with u = u_red + m + n*tau.
        """
        u = np.asarray(u, dtype=complex)
        n = np.round(u.imag / self.tau.imag)
        m = np.round((u - n * self.tau).real)
        return u - m - n * self.tau, m.astype(int), n.astype(int)

    def distance(self, u):
        """Distance from u to the nearest lattice point."""
        u_red, _, _ = self.reduce(np.asarray(u, dtype=complex))
        best = np.full(u_red.shape, np.inf)
        for dm in (-1, 0, 1):
            for dn in (-1, 0, 1):
                best = np.minimum(best, np.abs(u_red - dm - dn * self.tau))
        return best

    def nearest_point(self, u) -> complex:
        u = complex(u)
        _, m, n = self.reduce(u)
        candidates = [
            m + dm + (n + dn) * self.tau for dm in (-1, 0, 1) for dn in (-1, 0, 1)
        ]
        return min(candidates, key=lambda p: abs(u - p))


def _divisor_power_sums(nmax: int, k: int) -> np.ndarray:
    """sigma_k(n) for n = 1..nmax by sieve."""
    out = np.zeros(nmax + 1)
    for d in range(1, nmax + 1):
        out[d::d] += float(d) ** k
    return out[1:]


@dataclass(frozen=True)
class WeierstrassContext:
    """Precomputed lattice data driving all evaluations; immutable and shareable."""

    lattice: Lattice
    g2: complex
    g3: complex
    eta1: complex
    eta_tau: complex
    nome: complex  # exp(2 pi i tau)
    half_nome: complex  # exp(i pi tau)
    nterms: int
    accuracy: float
    theta1_prime0: complex

    @property
    def tau(self) -> complex:
        return self.lattice.tau

    # -- theta machinery ---------------------------------------------------

    def _theta_family(self, v: np.ndarray):
        """theta1 and its first three v-derivatives at v (vectorized)."""
        th0 = np.zeros_like(v)
        th1 = np.zeros_like(v)
        th2 = np.zeros_like(v)
        th3 = np.zeros_like(v)
        for n in range(self.nterms):
            k = 2 * n + 1
            coeff = 2.0 * (-1) ** n * cmath.exp(1j * math.pi * self.tau * (n + 0.5) ** 2)
            s = np.sin(k * v)
            c = np.cos(k * v)
            th0 += coeff * s
            th1 += coeff * k * c
            th2 -= coeff * k * k * s
            th3 -= coeff * k ** 3 * c
        return th0, th1, th2, th3

    def _reduce_guarded(self, u):
        u_arr = np.atleast_1d(np.asarray(u, dtype=complex))
        u_red, m, n = self.lattice.reduce(u_arr)
        dist = self.lattice.distance(u_arr)
        if np.any(dist < POLE_GUARD):
            bad = complex(u_arr[np.argmin(dist)])
            raise PoleError(
                f"argument {bad} within {POLE_GUARD} of a lattice point",
                nearest=self.lattice.nearest_point(bad),
            )
        return u_arr, u_red, m, n

    def _laurent_coeffs(self):
        c2 = self.g2 / 20.0
        c3 = self.g3 / 28.0
        c4 = c2 * c2 / 3.0
        return c2, c3, c4

    def _core_values(self, u_red: np.ndarray):
        """(wp, wp', zeta) on reduced arguments, blending series near 0."""
        wp = np.zeros_like(u_red)
        wpp = np.zeros_like(u_red)
        zt = np.zeros_like(u_red)
        near = np.abs(u_red) < _LAURENT_RADIUS
        far = ~near
        if np.any(far):
            v = math.pi * u_red[far]
            th0, th1, th2, th3 = self._theta_family(v)
            L = th1 / th0
            Lp = th2 / th0 - L * L
            Lpp = th3 / th0 - 3.0 * L * th2 / th0 + 2.0 * L ** 3
            zt[far] = self.eta1 * u_red[far] + math.pi * L
            wp[far] = -self.eta1 - math.pi ** 2 * Lp
            wpp[far] = -math.pi ** 3 * Lpp
        if np.any(near):
            c2, c3, c4 = self._laurent_coeffs()
            z = u_red[near]
            z2 = z * z
            wp[near] = 1.0 / z2 + z2 * (c2 + z2 * (c3 + z2 * c4))
            wpp[near] = -2.0 / (z2 * z) + z * (2 * c2 + z2 * (4 * c3 + z2 * 6 * c4))
            zt[near] = 1.0 / z - z * z2 * (c2 / 3.0 + z2 * (c3 / 5.0 + z2 * c4 / 7.0))
        return wp, wpp, zt

    @staticmethod
    def _shape(values: np.ndarray, scalar_input: bool):
        if scalar_input:
            return complex(values.reshape(-1)[0])
        return values

    # -- public evaluations ------------------------------------------------

    def wp(self, u):
        """Weierstrass P function (even, lattice-periodic)."""
        scalar = np.isscalar(u) or isinstance(u, complex)
        _, u_red, _, _ = self._reduce_guarded(u)
        val, _, _ = self._core_values(u_red)
        return self._shape(val, scalar)

    def wp_prime(self, u):
        """Derivative of the P function (odd, lattice-periodic)."""
        scalar = np.isscalar(u) or isinstance(u, complex)
        _, u_red, _, _ = self._reduce_guarded(u)
        _, val, _ = self._core_values(u_red)
        return self._shape(val, scalar)

    def wp_second(self, u):
        """P'' via the derived algebraic identity P'' = 6 P^2 - g2/2."""
        p = self.wp(u)
        return 6.0 * p * p - self.g2 / 2.0

    def zeta(self, u):
        """Weierstrass zeta: odd, zeta(u+1)=zeta(u)+eta1, zeta(u+tau)=zeta(u)+eta_tau."""
        scalar = np.isscalar(u) or isinstance(u, complex)
        _, u_red, m, n = self._reduce_guarded(u)
        _, _, val = self._core_values(u_red)
        val = val + m * self.eta1 + n * self.eta_tau
        return self._shape(val, scalar)

    def zeta_minus_pole(self, u):
        """zeta(u) - 1/u, holomorphic near 0; u must not sit on Lambda - {0}.

        Stable for small |u| (series), exact for u = 0.
        """
        scalar = np.isscalar(u) or isinstance(u, complex)
        u_arr = np.atleast_1d(np.asarray(u, dtype=complex))
        out = np.zeros_like(u_arr)
        small = np.abs(u_arr) < _LAURENT_RADIUS
        if np.any(small):
            c2, c3, c4 = self._laurent_coeffs()
            z = u_arr[small]
            z2 = z * z
            out[small] = -z * z2 * (c2 / 3.0 + z2 * (c3 / 5.0 + z2 * c4 / 7.0))
        if np.any(~small):
            z = u_arr[~small]
            out[~small] = self.zeta(z) - 1.0 / z
        return self._shape(out, scalar)

    def sigma(self, u):
        """Weierstrass sigma: entire, odd, sigma(u)/u -> 1 at 0.

        Quasi-periodicity under gamma = m + n*tau:
        sigma(u+gamma) = (-1)^(m+n+mn) exp(eta_gamma (u + gamma/2)) sigma(u).
        """
        scalar = np.isscalar(u) or isinstance(u, complex)
        u_arr = np.atleast_1d(np.asarray(u, dtype=complex))
        u_red, m, n = self.lattice.reduce(u_arr)
        v = math.pi * u_red
        th0, _, _, _ = self._theta_family(v)
        base = np.exp(self.eta1 * u_red ** 2 / 2.0) * th0 / (math.pi * self.theta1_prime0)
        eta_g = m * self.eta1 + n * self.eta_tau
        gamma = m + n * self.tau
        sign = np.where((m + n + m * n) % 2 == 0, 1.0, -1.0)
        val = sign * np.exp(eta_g * (u_red + gamma / 2.0)) * base
        return self._shape(val, scalar)

    def half_periods(self) -> tuple[complex, complex, complex]:
        return 0.5, self.tau / 2.0, (1.0 + self.tau) / 2.0


def _choose_theta_terms(half_nome_abs: float, accuracy: float) -> int:
    """Smallest term count with tail bound below accuracy / 100 (after reduction)."""
    for n in range(4, _MAX_THETA_TERMS):
        tail = half_nome_abs ** (n * n - 0.25) * (2 * n + 1) ** 3
        if tail < accuracy * 1e-2:
            return n + 1
    raise PrecisionError(
        f"theta truncation cannot reach accuracy {accuracy:.1e} for |q| = "
        f"{half_nome_abs:.4f} (Im tau too small)"
    )


def _eisenstein(nome: complex, weight_k: int, coeff: float, accuracy: float) -> complex:
    """1 + coeff * sum sigma_k(n) q^n truncated to the requested accuracy."""
    qa = abs(nome)
    nmax = None
    for n in range(1, _MAX_EISENSTEIN_TERMS):
        if abs(coeff) * 1.1 * n ** weight_k * qa ** n / max(1e-300, 1 - qa) < accuracy * 1e-2:
            nmax = n
            break
    if nmax is None:
        raise PrecisionError(
            f"Eisenstein truncation cannot reach accuracy {accuracy:.1e}"
        )
    sig = _divisor_power_sums(nmax, weight_k)
    powers = nome ** np.arange(1, nmax + 1)
    return 1.0 + coeff * complex(np.sum(sig * powers))


def make_context(tau: complex, accuracy: float = 1e-12) -> WeierstrassContext:
    """Build the evaluation context for the lattice Z + tau*Z.

    accuracy must lie in [1e-14, 1e-6]; the construction self-validates the
    Legendre relation and the differential equation at sample points and
    raises PrecisionError when the target cannot be met.
    """
    tau = complex(tau)
    lattice = Lattice(tau)  # raises DomainError for Im tau <= 0
    if not (1e-14 <= accuracy <= 1e-6):
        raise DomainError(f"accuracy {accuracy:.2e} outside [1e-14, 1e-6]")

    half_nome = cmath.exp(1j * math.pi * tau)
    nome = half_nome ** 2
    nterms = _choose_theta_terms(abs(half_nome), accuracy)

    # Theta derivatives at 0 give eta1 = -pi^2/3 * theta1'''(0)/theta1'(0).
    th1p = 0j
    th3p = 0j
    for n in range(nterms):
        k = 2 * n + 1
        coeff = 2.0 * (-1) ** n * cmath.exp(1j * math.pi * tau * (n + 0.5) ** 2)
        th1p += coeff * k
        th3p -= coeff * k ** 3
    eta1 = -math.pi ** 2 * th3p / (3.0 * th1p)

    g2 = (4.0 * math.pi ** 4 / 3.0) * _eisenstein(nome, 3, 240.0, accuracy)
    g3 = (8.0 * math.pi ** 6 / 27.0) * _eisenstein(nome, 5, -504.0, accuracy)

    ctx = WeierstrassContext(
        lattice=lattice,
        g2=g2,
        g3=g3,
        eta1=eta1,
        eta_tau=0j,  # placeholder until zeta(tau/2) is available
        nome=nome,
        half_nome=half_nome,
        nterms=nterms,
        accuracy=accuracy,
        theta1_prime0=th1p,
    )
    # eta_tau = 2 zeta(tau/2): independent of the Legendre relation, which
    # then serves as a genuine consistency check below.
    eta_tau = 2.0 * ctx.zeta(tau / 2.0)
    ctx = WeierstrassContext(
        lattice=lattice,
        g2=g2,
        g3=g3,
        eta1=eta1,
        eta_tau=eta_tau,
        nome=nome,
        half_nome=half_nome,
        nterms=nterms,
        accuracy=accuracy,
        theta1_prime0=th1p,
    )

    legendre = abs(eta1 * tau - eta_tau - 2j * math.pi)
    if legendre > accuracy:
        raise PrecisionError(
            f"Legendre residual {legendre:.3e} exceeds accuracy {accuracy:.1e}"
        )
    # Differential-equation spot check away from poles.
    for probe in (0.37 + 0.29 * tau, -0.21 + 0.43 * tau, 0.44 - 0.37 * tau):
        p = ctx.wp(probe)
        dp = ctx.wp_prime(probe)
        res = abs(dp * dp - (4.0 * p ** 3 - g2 * p - g3))
        scale = max(1.0, abs(p) ** 3)
        if res > 100.0 * accuracy * scale:
            raise PrecisionError(
                f"differential-equation residual {res:.3e} at probe {probe}"
            )
    return ctx


def zeta_identity_residual(ctx: WeierstrassContext, u: complex, u0: complex) -> complex:
    """Residual of (wp'(u)+wp'(u0)) / (2(wp(u)-wp(u0))) = zeta(u-u0)-zeta(u)+zeta(u0).

    All of u, u0, u-u0, u+u0 must stay at least 1e-3 away from the lattice
    (the left side is 0/0 at u = -u0 although the limit is finite).
    """
    for label, w in (("u", u), ("u0", u0), ("u-u0", u - u0), ("u+u0", u + u0)):
        if float(ctx.lattice.distance(w)) < _LAURENT_RADIUS:
            raise PoleError(
                f"{label} = {complex(w)} within {_LAURENT_RADIUS} of the lattice",
                nearest=ctx.lattice.nearest_point(w),
            )
    lhs = (ctx.wp_prime(u) + ctx.wp_prime(u0)) / (2.0 * (ctx.wp(u) - ctx.wp(u0)))
    rhs = ctx.zeta(u - u0) - ctx.zeta(u) + ctx.zeta(u0)
    return lhs - rhs
