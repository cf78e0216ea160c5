"""Energy bookkeeping for Palais-Smale sequences.

The functional on the whole space is

    I_(lam,s)(u) = 1/2 (int |grad u|^2 + [u]_s^2) - lam/2 int u^2
                   - 1/2* int |u|^(2*),

and the limiting functional ``I_inf`` drops the nonlocal and the mass terms.
A ground bubble normalized to solve ``-Delta W = W^(2*-1)`` carries the
energy ``beta* = S_N^(N/2) / N``; compactness can only fail at levels that
add whole multiples of it.
"""

import logging
import math

import numpy as np

from .bubble import (
    Bubble,
    Cutoff,
    _AxialBubble,
    _axial_integral,
    bubble_grad_sq,
    bubble_lcrit,
    solution_amplitude,
    standard_bubble,
)
from .exceptions import DomainError, InternalConsistencyError
from .quad import (
    QuadResult,
    RadialFn,
    cross_term,
    gagliardo_direct,
    gradient_sq,
    l2_sq,
    lcrit,
)
from .specfn import _check_integer, sobolev_constant

logger = logging.getLogger(__name__)

#: Agreement required between the closed-form and quadrature bubble energy.
ENERGY_AGREEMENT = 1e-5

#: Relative amplitude deviation under which a profile counts as a
#: solution-normalized ground bubble.
AMPLITUDE_TOL = 1e-9

_ZERO = QuadResult(0.0, 0.0)


class EnergyReport:
    """The components of ``I_(lam,s)(u)``.

    :ivar float quadratic: ``rho(u)^2 / 2``.
    :ivar float mass: ``lam / 2 int u^2``.
    :ivar float critical: ``int |u|^(2*) / 2*``.
    :ivar float error: Sum of the component error estimates.
    """

    def __init__(self, quadratic, mass, critical, error=0.0):
        self.quadratic = quadratic
        self.mass = mass
        self.critical = critical
        self.error = error

    @property
    def total(self):
        return self.quadratic - self.mass - self.critical

    def __float__(self):
        return self.total

    def to_dict(self):
        return {
            "total": self.total,
            "quadratic": self.quadratic,
            "mass": self.mass,
            "critical": self.critical,
            "error": self.error,
        }

    def __repr__(self):
        return "EnergyReport(total={!r}, error={!r})".format(self.total, self.error)


def _as_radial(u):
    if isinstance(u, Bubble):
        return u.radial()
    if not isinstance(u, RadialFn):
        raise DomainError("Expected a radial function or a bubble, got {!r}.".format(u))
    return u


def _parts(u, N, s, spec, with_seminorm=True, with_l2=False):
    if u.is_zero:
        return _ZERO, _ZERO, _ZERO, _ZERO
    grad = gradient_sq(u, N, spec)
    crit = lcrit(u, N, spec)
    semi = gagliardo_direct(u, N, s, spec) if with_seminorm else _ZERO
    mass = l2_sq(u, N, spec) if with_l2 else _ZERO
    return grad, semi, mass, crit


def energy_local(u, dim, spec, lam=0.0):
    """Return the :class:`EnergyReport` of ``I_(lam,s)(u)`` for a radial `u`.

    The mass term is only integrated when `lam` is nonzero.
    """
    u = _as_radial(u)
    N, s = dim.N, dim.s
    grad, semi, mass, crit = _parts(u, N, s, spec, with_l2=lam != 0.0)
    p = dim.two_star
    report = EnergyReport(
        0.5 * (grad.value + semi.value),
        0.5 * lam * mass.value,
        crit.value / p,
        0.5 * (grad.error + semi.error) + 0.5 * abs(lam) * mass.error + crit.error / p,
    )
    logger.debug("I_(%g,%g)(%s) = %.10g", lam, s, u.name, report.total)
    return report


def energy_infty(u, N, spec):
    """Return ``I_inf(u) = 1/2 int |grad u|^2 - 1/2* int |u|^(2*)``."""
    u = _as_radial(u)
    N = _check_integer("N", N, 3)
    if u.is_zero:
        return 0.0
    p = 2.0 * N / (N - 2)
    return 0.5 * gradient_sq(u, N, spec).value - lcrit(u, N, spec).value / p


def bubble_energy(N, spec=None):
    """Return ``beta* = S_N^(N/2) / N``.

    When `spec` is given, the value is also checked against the quadrature
    energy of the solution-normalized bubble.

    >>> round(bubble_energy(3), 4)
    4.2736
    """
    N = _check_integer("N", N, 3)
    beta = sobolev_constant(N) ** (0.5 * N) / N
    if spec is not None:
        w = standard_bubble(N, amplitude=solution_amplitude(N))
        quadrature = energy_infty(w, N, spec)
        mismatch = abs(quadrature / beta - 1.0)
        if mismatch > ENERGY_AGREEMENT:
            raise InternalConsistencyError(
                "Bubble energy for N={} is {!r} in closed form but {!r} by quadrature.".format(
                    N, beta, quadrature
                )
            )
    return beta


def profile_energy(b):
    """Return ``I_inf`` of the bubble `b` from the closed-form norms.

    ``I_inf(c U[z, lam])`` does not depend on ``(z, lam)``.
    """
    N = b.N
    c = abs(b.amplitude)
    p = 2.0 * N / (N - 2)
    return 0.5 * c * c * bubble_grad_sq(N) - c ** p * bubble_lcrit(N) / p


def is_ground_bubble(b):
    """Return whether `b` carries the solution normalization."""
    target = solution_amplitude(b.N)
    return abs(b.amplitude / target - 1.0) <= AMPLITUDE_TOL


class ProfileSet:
    """The limit data of a Palais-Smale sequence.

    :ivar float base: The energy of the weak limit (possibly zero).
    :ivar list profiles: The bubbles split off from the sequence.
    :ivar float lam: The parameter of the functional.
    """

    def __init__(self, base=0.0, profiles=(), lam=0.0):
        self.base = float(base)
        self.profiles = list(profiles)
        self.lam = float(lam)
        for b in self.profiles:
            if not profile_energy(b) > 0:
                raise DomainError(
                    "Profile {!r} has nonpositive limiting energy.".format(b)
                )

    @classmethod
    def ground(cls, N, count, base=0.0, lam=0.0):
        """Return `count` solution-normalized ground bubbles in R^N."""
        amplitude = solution_amplitude(N)
        return cls(base, [Bubble(np.zeros(N), amplitude=amplitude) for _ in range(count)], lam)

    def __len__(self):
        return len(self.profiles)


def ps_level(ps, N):
    """Return the level ``I(u_0) + sum_i I_inf(U_i)`` of the profile set."""
    N = _check_integer("N", N, 3)
    for b in ps.profiles:
        if b.N != N:
            raise DomainError("Profile lives in R^{}, expected R^{}.".format(b.N, N))
    if all(is_ground_bubble(b) for b in ps.profiles):
        return ps.base + len(ps.profiles) * bubble_energy(N)
    return ps.base + math.fsum(profile_energy(b) for b in ps.profiles)


def coron_window(N):
    """Return the energy window ``(beta*, 2 beta*)`` of the Coron problem."""
    beta = bubble_energy(N)
    return beta, 2.0 * beta


def energy_from_quotient(q, N):
    """Return ``q^(N/2) / N``, the energy of the critical point obtained by
    rescaling a point of quotient level `q` on the unit sphere of L^(2*).

    >>> lo, hi = coron_window(5)
    >>> abs(energy_from_quotient(sobolev_constant(5), 5) / lo - 1.0) < 1e-12
    True
    """
    N = _check_integer("N", N, 3)
    if not q > 0:
        raise DomainError("The quotient level must be positive, got {!r}.".format(q))
    return q ** (0.5 * N) / N


def separation_stat(p_i, p_j):
    """Return ``|log(lam_i / lam_j)| + |z_i - z_j| / lam_i``.

    Only the scale of `p_i` divides the distance, so the statistic is not
    symmetric.
    """
    if p_i.N != p_j.N:
        raise DomainError("Bubbles live in different dimensions.")
    return abs(math.log(p_i.scale / p_j.scale)) + float(
        np.linalg.norm(p_i.center - p_j.center)
    ) / p_i.scale


def separation_matrix(profiles):
    """Return the matrix of pairwise :func:`separation_stat` values."""
    n = len(profiles)
    matrix = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                matrix[i, j] = separation_stat(profiles[i], profiles[j])
    return matrix


def sign_changing_identity(u_plus, u_minus, dim, spec):
    """Return the relative residual between two evaluations of ``I_(0,s)(u)``
    for ``u = u_plus - u_minus``.

    The first evaluation treats `u` as a single function. The second one adds
    the energies of the two parts and the interaction ``2 iint u_plus(x)
    u_minus(y) |x-y|^-(N+2s)``, which is all that survives of the seminorm
    cross terms when the supports are disjoint.

    :raises UnsupportedInputError: if the supports overlap.
    """
    N, s = dim.N, dim.s
    interaction = cross_term(u_plus, u_minus, N, s, spec)
    whole = energy_local(u_plus - u_minus, dim, spec)
    plus = energy_local(u_plus, dim, spec)
    minus = energy_local(u_minus, dim, spec)
    split = plus.total + minus.total + 2.0 * interaction.value
    scale = max(abs(whole.total), abs(split))
    if scale == 0.0:
        return 0.0
    residual = abs(whole.total - split) / scale
    logger.debug(
        "Sign-changing identity N=%d s=%g: whole %.10g, split %.10g, residual %.2e.",
        N, s, whole.total, split, residual,
    )
    return residual


def center_of_mass(b, spec, R=None):
    """Return ``F(w) = int x |grad w|^2 / int |grad w|^2`` for the bubble `b`,
    truncated by the cutoff of radius `R` about the origin when given.

    The Dirichlet density of the untruncated bubble is radial about its
    center, so its first moment there vanishes and F is the center itself.
    With a cutoff, the density is axisymmetric about the line through the
    origin and the center, and only the component along that line survives.
    """
    if R is None:
        return b.center.copy()
    N = b.N
    cut = Cutoff(R)
    t = float(np.linalg.norm(b.center))
    sigma = b.center / t if t > 0 else np.eye(N)[0]
    field = _AxialBubble(N, t, b.scale)
    c2 = b.amplitude ** 2

    def density(r, cos_t):
        u, radial, grad_sq = field.fields(r, cos_t)
        phi, dphi = cut(r), cut.derivative(r)
        return c2 * (dphi * dphi * u * u + 2.0 * dphi * phi * u * radial + phi * phi * grad_sq)

    breaks = tuple(sorted(set(cut.breaks + ((t,) if 0.0 < t < 4.0 * cut.R else ()))))
    extent = max(t, b.scale, 0.25 / cut.R)
    hi = 4.0 * cut.R
    mass = _axial_integral(density, N, spec, 0.0, hi, None, extent, breaks)
    if not mass.value > 0:
        raise DomainError("The truncated bubble has no Dirichlet energy.")
    moment = _axial_integral(
        lambda r, cos_t: r * cos_t * density(r, cos_t), N, spec, 0.0, hi, None, extent, breaks
    )
    return sigma * (moment.value / mass.value)


def solution_residual(N, radii):
    """Return the largest relative residual of ``-Delta W = W^(2*-1)`` for the
    solution-normalized bubble at `radii`.

    The second derivative is taken by central differences of the exact first
    derivative.
    """
    N = _check_integer("N", N, 3)
    w = standard_bubble(N, amplitude=solution_amplitude(N))
    exponent = (N + 2.0) / (N - 2.0)
    worst = 0.0
    for r in radii:
        if not r > 0:
            raise DomainError("Radii must be positive, got {!r}.".format(r))
        h = 1e-4 * max(r, 1.0)
        second = (w.deriv(r + h) - w.deriv(r - h)) / (2.0 * h) if r > h else (
            (w.deriv(r + h) - w.deriv(r)) / h
        )
        laplacian = second + (N - 1.0) / r * w.deriv(r)
        rhs = w(r) ** exponent
        worst = max(worst, abs(-laplacian - rhs) / rhs)
    return worst

