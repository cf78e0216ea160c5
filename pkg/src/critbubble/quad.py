"""Quadrature engine for radial functions in dimension N.

Every integral here reduces to one or two radial variables. Half-line
integrals are split into geometrically growing panels, each integrated by
:func:`scipy.integrate.quad`, and summed with :func:`math.fsum` in a fixed
order so that results are deterministic for a fixed :class:`QuadSpec`.
Power-law tails beyond the last panel are estimated from the decay hint and
added to both the value and the error estimate.

The Gagliardo seminorm is computed by two independent routes:

* :func:`gagliardo_direct` integrates the double integral in the variables
  ``(r, tau = rho / r)``. The angular kernel is homogeneous of degree
  ``-(N + 2s)``, which separates the ``tau`` integral from a one dimensional
  radial integral. The diagonal singularity ``(1 - tau)^(1 - 2s)`` is handled
  by algebraic-weight quadrature (QUADPACK QAWS).
* :func:`gagliardo_fourier` integrates ``|k|^(2s) |u_hat(k)|^2`` over
  frequency space, using the radial transform of the function.
"""

import itertools
import logging
import math

import mpmath
import numpy as np
from numpy.polynomial import legendre
from scipy import integrate, special

from .exceptions import (
    DiagonalSingularityError,
    DivergenceError,
    DomainError,
    InternalConsistencyError,
    ToleranceNotMetError,
    UnsupportedInputError,
)
from .specfn import DimPair, log_gamma, sphere_measure
from .utils import cache, timer

logger = logging.getLogger(__name__)

#: Width of the first panel of a half-line integral, relative to the scale of
#: the integrand.
FIRST_PANEL = 2.0 ** -10

#: A half-line integral is never stopped before this many scales.
MIN_REACH = 64.0

#: Growth factor and number of consecutive panels that signal divergence.
GROWTH_FACTOR = 1.5
GROWTH_PANELS = 4

#: Below this distance from the diagonal the hypergeometric argument is close
#: enough to one that the kernel is evaluated in extended precision.
EXTENDED_PRECISION_GAP = 0.3

#: Relative tolerance for the k-invariance of gradient and critical norms along
#: a rescaled sequence.
INVARIANCE_TOL = 1e-6

#: Absolute cap and relative slope of the near-diagonal band
#: ``|r - rho| < min(BAND_CAP, (r + rho) * BAND_SLOPE)``.
BAND_CAP = 0.05
BAND_SLOPE = 0.01


def diagonal_band(r=1.0):
    """Return the relative band width ``h = 1 - rho/r`` at radius `r`.

    Solves ``h r = min(BAND_CAP, (2 - h) r BAND_SLOPE)`` for h. The seminorm
    quadrature integrates in the scale-free ratio ``rho/r``, where the band is
    taken at the unit radius.
    """
    h = 2.0 * BAND_SLOPE / (1.0 + BAND_SLOPE)
    return min(h, BAND_CAP / r)


class QuadSpec:
    """Quadrature controls.

    :ivar float rel_tol: Requested relative tolerance.
    :ivar float abs_tol: Requested absolute tolerance.
    :ivar r_max: Truncation radius for half-line integrals, or `None` to let
        the tail bound decide.
    :ivar int max_subdiv: Maximum number of panels of a half-line integral.
    :ivar float band: Relative width ``1 - rho/r < band`` of the near-diagonal
        band where the seminorm integrand is replaced by its first-order
        expansion. Defaults to :func:`diagonal_band`.
    :ivar int limit: Subdivision limit passed to each QUADPACK call.
    """

    def __init__(
        self,
        rel_tol=1e-8,
        abs_tol=1e-12,
        r_max=None,
        max_subdiv=200,
        band=None,
        limit=200,
    ):
        if band is None:
            band = diagonal_band()
        if not rel_tol > 0 or not abs_tol > 0:
            raise DomainError("Tolerances must be positive.")
        if int(max_subdiv) < 1:
            raise DomainError("max_subdiv must be at least 1.")
        if r_max is not None and not r_max > 0:
            raise DomainError("r_max must be positive.")
        if not 0 < band < 0.5:
            raise DomainError("band must lie in (0, 0.5).")
        self.rel_tol = float(rel_tol)
        self.abs_tol = float(abs_tol)
        self.r_max = None if r_max is None else float(r_max)
        self.max_subdiv = int(max_subdiv)
        self.band = float(band)
        self.limit = int(limit)

    @classmethod
    def from_config(cls, config):
        return cls(
            rel_tol=config["quad.rel_tol"],
            abs_tol=config["quad.abs_tol"],
            r_max=config.get("quad.r_max"),
            max_subdiv=config["quad.max_subdiv"],
        )

    def key(self):
        return (
            self.rel_tol,
            self.abs_tol,
            self.r_max,
            self.max_subdiv,
            self.band,
            self.limit,
        )

    def replace(self, **kwargs):
        fields = dict(
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            r_max=self.r_max,
            max_subdiv=self.max_subdiv,
            band=self.band,
            limit=self.limit,
        )
        fields.update(kwargs)
        return QuadSpec(**fields)

    def tightened(self, factor):
        """Return a copy with both tolerances divided by `factor`."""
        return self.replace(rel_tol=self.rel_tol / factor, abs_tol=self.abs_tol / factor)

    def loosened(self, factor):
        return self.tightened(1.0 / factor)

    def __eq__(self, other):
        if not isinstance(other, QuadSpec):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "QuadSpec(rel_tol={!r}, abs_tol={!r}, r_max={!r}, max_subdiv={!r})".format(
            self.rel_tol, self.abs_tol, self.r_max, self.max_subdiv
        )


class QuadResult:
    """A quadrature value with its achieved error estimate."""

    def __init__(self, value, error):
        self.value = float(value)
        self.error = float(error)

    def __float__(self):
        return self.value

    def __repr__(self):
        return "QuadResult(value={!r}, error={!r})".format(self.value, self.error)


class RadialFn:
    """A radial function u(|x|) on R^N.

    :ivar value: Callable ``r -> u(r)`` defined for all ``r >= 0``.
    :ivar derivative: Optional callable ``r -> u'(r)``. Central finite
        differences are used when it is missing.
    :ivar decay: Exponent d with ``u(r) ~ r^-d`` at infinity. `None` means
        unknown, ``math.inf`` means compact support or faster than any power.
    :ivar tuple support: Radial interval ``(lo, hi)`` outside which u vanishes.
    :ivar float scale: Length scale on which u varies.
    :ivar transform: Optional callable ``k -> u_hat(k)`` giving the unitary
        Fourier transform as a radial function.
    :ivar tuple breaks: Radii where u is not analytic (ramp endpoints).
    """

    def __init__(
        self,
        value,
        derivative=None,
        decay=None,
        support=(0.0, math.inf),
        scale=1.0,
        transform=None,
        breaks=(),
        name="u",
        zero=False,
    ):
        lo, hi = support
        if lo < 0 or not hi > lo:
            raise DomainError("Invalid radial support {!r}.".format(support))
        if not scale > 0:
            raise DomainError("scale must be positive.")
        if math.isfinite(hi):
            decay = math.inf
        self.value = value
        self.derivative = derivative
        self.decay = decay
        self.support = (float(lo), float(hi))
        self.scale = float(scale)
        self.transform = transform
        self.breaks = tuple(sorted(float(b) for b in breaks))
        self.name = name
        self._zero = zero

    @classmethod
    def zero(cls):
        return cls(
            lambda r: 0.0,
            derivative=lambda r: 0.0,
            decay=math.inf,
            transform=lambda k: 0.0,
            name="0",
            zero=True,
        )

    @property
    def is_zero(self):
        return self._zero

    def __call__(self, r):
        return self.value(r)

    def deriv(self, r):
        if self.derivative is not None:
            return self.derivative(r)
        return self.finite_difference(r)

    def finite_difference(self, r):
        h = 1e-5 * max(abs(r), self.scale)
        return (self.value(r + h) - self.value(abs(r - h))) / (2.0 * h)

    def check_derivative(self, radii):
        """Return the largest relative mismatch between the derivative oracle
        and central finite differences at `radii`."""
        worst = 0.0
        for r in radii:
            exact = self.deriv(r)
            approx = self.finite_difference(r)
            denom = max(abs(exact), abs(approx))
            if denom > 0:
                worst = max(worst, abs(exact - approx) / denom)
        return worst

    def scaled(self, alpha):
        """Return ``alpha * u``."""
        if self.is_zero:
            return self
        value, derivative, transform = self.value, self.derivative, self.transform
        return RadialFn(
            lambda r: alpha * value(r),
            derivative=None if derivative is None else (lambda r: alpha * derivative(r)),
            decay=self.decay,
            support=self.support,
            scale=self.scale,
            transform=None if transform is None else (lambda k: alpha * transform(k)),
            breaks=self.breaks,
            name="{!r}*{}".format(alpha, self.name),
        )

    def dilated(self, mu, N=None):
        """Return ``u(r / mu)``.

        The transform of the dilation depends on the dimension, so it is only
        carried over when `N` is given.
        """
        if not mu > 0:
            raise DomainError("Dilation factor must be positive.")
        value, derivative, transform = self.value, self.derivative, self.transform
        lo, hi = self.support
        new_transform = None
        if transform is not None and N is not None:
            new_transform = lambda k: mu ** N * transform(mu * k)  # noqa: E731
        return RadialFn(
            lambda r: value(r / mu),
            derivative=None if derivative is None else (lambda r: derivative(r / mu) / mu),
            decay=self.decay,
            support=(lo * mu, hi * mu),
            scale=self.scale * mu,
            transform=new_transform,
            breaks=[b * mu for b in self.breaks],
            name="{}(r/{!r})".format(self.name, mu),
        )

    def rescaled(self, k, N):
        """Return the critical rescaling ``k^((N-2)/2) u(k r)``."""
        return self.dilated(1.0 / k, N=N).scaled(k ** ((N - 2) / 2.0))

    def _combine(self, other, sign):
        if other.is_zero:
            return self
        value_a, value_b = self.value, other.value
        deriv_a, deriv_b = self.deriv, other.deriv
        transform = None
        if self.transform is not None and other.transform is not None:
            ta, tb = self.transform, other.transform
            transform = lambda k: ta(k) + sign * tb(k)  # noqa: E731
        decays = [d for d in (self.decay, other.decay) if d is not None]
        decay = min(decays) if len(decays) == 2 else None
        return RadialFn(
            lambda r: value_a(r) + sign * value_b(r),
            derivative=lambda r: deriv_a(r) + sign * deriv_b(r),
            decay=decay,
            support=(
                min(self.support[0], other.support[0]),
                max(self.support[1], other.support[1]),
            ),
            scale=min(self.scale, other.scale),
            transform=transform,
            breaks=self.breaks + other.breaks,
            name="({}{}{})".format(self.name, "+" if sign > 0 else "-", other.name),
        )

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        if self.is_zero:
            return other.scaled(-1.0)
        return self._combine(other, -1.0)

    def __repr__(self):
        return "RadialFn({}, decay={!r}, support={!r})".format(
            self.name, self.decay, self.support
        )


def gaussian_profile():
    """Return ``exp(-r^2 / 2)``, which is its own radial transform.

    Other widths are obtained with :meth:`RadialFn.dilated`.
    """
    return RadialFn(
        lambda r: np.exp(-0.5 * r * r),
        derivative=lambda r: -r * np.exp(-0.5 * r * r),
        decay=math.inf,
        transform=lambda k: np.exp(-0.5 * k * k),
        name="gauss",
    )


def bump_profile(center, half_width, height=1.0):
    """Return a smooth bump supported on ``[center - half_width, center + half_width]``.

    The profile is ``height * exp(1 - 1 / (1 - x^2))`` with
    ``x = (r - center) / half_width``, so it peaks at `height`.
    """
    if not half_width > 0:
        raise DomainError("half_width must be positive.")
    lo = center - half_width
    if lo < 0:
        raise DomainError("A radial bump must be supported in r >= 0.")
    hi = center + half_width

    def value(r):
        x = (r - center) / half_width
        if abs(x) >= 1.0:
            return 0.0
        return height * math.exp(1.0 - 1.0 / (1.0 - x * x))

    def derivative(r):
        x = (r - center) / half_width
        if abs(x) >= 1.0:
            return 0.0
        q = 1.0 - x * x
        return value(r) * (-2.0 * x / (q * q)) / half_width

    return RadialFn(
        value,
        derivative=derivative,
        support=(lo, hi),
        scale=half_width,
        breaks=(lo, hi),
        name="bump[{!r},{!r}]".format(lo, hi),
    )


def _quad(func, a, b, rel_tol, abs_tol, spec, **kwargs):
    out = integrate.quad(
        func, a, b, epsabs=abs_tol, epsrel=rel_tol, limit=spec.limit, full_output=1, **kwargs
    )
    value, error = out[0], out[1]
    if len(out) > 3:
        loose = math.sqrt(rel_tol) * abs(value) + abs_tol
        if not math.isfinite(value) or error > loose:
            raise ToleranceNotMetError(
                "Quadrature on [{:.3g}, {:.3g}] reached error {:.3e} only: {}".format(
                    a, b, error, out[3]
                ),
                estimate=value,
                error=error,
            )
        logger.debug("Accepting quadrature on [%.3g, %.3g] with error %.3e.", a, b, error)
    return value, error


def _panels(lo, hi, scale, breaks):
    breaks = [x for x in breaks if lo < x < hi]
    a = lo
    b = max(2.0 * lo, lo + scale * FIRST_PANEL)
    while a < hi:
        b = min(b, hi)
        while breaks and breaks[0] <= a:
            breaks.pop(0)
        if breaks and breaks[0] < b:
            b = breaks.pop(0)
        yield a, b
        a, b = b, 2.0 * b


def integrate_half_line(
    h,
    spec,
    lo=0.0,
    hi=math.inf,
    tail=None,
    scale=1.0,
    extent=None,
    breaks=(),
    rel_tol=None,
    abs_tol=None,
):
    """Integrate `h` over ``[lo, hi]`` with geometric panels.

    :param tail: Exponent m with ``h(r) ~ r^-m`` at infinity, ``math.inf``
        for compact or faster decay, `None` if unknown.
    :param extent: Radius beyond which `h` is in its asymptotic regime;
        defaults to `scale`.
    """
    rel_tol = spec.rel_tol if rel_tol is None else rel_tol
    abs_tol = spec.abs_tol if abs_tol is None else abs_tol
    extent = scale if extent is None else extent
    if spec.r_max is not None and spec.r_max < hi:
        hi_eff = max(spec.r_max, lo + scale)
    else:
        hi_eff = hi
    infinite = math.isinf(hi)
    if infinite and tail is not None and tail <= 1.0:
        raise DivergenceError(
            "Integrand decays like r^-{:.4g}, which is not integrable at infinity.".format(tail)
        )

    reach = MIN_REACH * extent
    parts, errors = [], []
    previous, growth = None, 0
    tail_value, tail_error = 0.0, 0.0
    panels = _panels(lo, hi_eff, scale, sorted(breaks))
    exhausted = False
    for count in itertools.count(1):
        try:
            a, b = next(panels)
        except StopIteration:
            exhausted = True
            break
        if count > spec.max_subdiv:
            total = math.fsum(parts)
            raise ToleranceNotMetError(
                "Half-line integral not converged after {} panels (r={:.3g}).".format(
                    spec.max_subdiv, a
                ),
                estimate=total,
                error=abs(parts[-1]) if parts else None,
            )
        value, error = _quad(h, a, b, rel_tol, abs_tol / 8.0, spec)
        parts.append(value)
        errors.append(error)

        if not infinite or b < reach:
            previous = value
            continue

        if tail is None and previous is not None and abs(value) >= GROWTH_FACTOR * abs(previous) > 0:
            growth += 1
            if growth >= GROWTH_PANELS:
                raise DivergenceError(
                    "Integral grows without bound (panel ending at r={:.3g}).".format(b)
                )
        else:
            growth = 0
        previous = value

        total = math.fsum(parts)
        tol = max(abs_tol, rel_tol * abs(total))
        if tail is None or math.isinf(tail):
            if abs(value) <= tol:
                break
        else:
            estimate = h(b) * b / (tail - 1.0)
            uncertainty = abs(estimate) * extent / b
            if uncertainty <= tol:
                tail_value, tail_error = estimate, uncertainty
                break

    if exhausted and infinite and tail is not None and math.isfinite(tail):
        tail_value = h(hi_eff) * hi_eff / (tail - 1.0)
        tail_error = abs(tail_value)

    parts.append(tail_value)
    return QuadResult(math.fsum(parts), math.fsum(errors) + tail_error)


def radial_integral(g, N, spec, decay=None, scale=None, support=None, breaks=None):
    """Return the integral over R^N of the radial function `g`.

    The integral is ``omega_(N-1) * int_0^inf r^(N-1) g(r) dr``. When `g` is a
    :class:`RadialFn`, its decay hint, scale, support and breaks are used
    unless overridden.

    >>> spec = QuadSpec()
    >>> ball = RadialFn(lambda r: 1.0, support=(0.0, 1.0))
    >>> round(radial_integral(ball, 3, spec).value, 8)
    4.1887902
    """
    if isinstance(g, RadialFn):
        decay = g.decay if decay is None else decay
        scale = g.scale if scale is None else scale
        support = g.support if support is None else support
        breaks = g.breaks if breaks is None else breaks
    scale = 1.0 if scale is None else scale
    support = (0.0, math.inf) if support is None else support
    breaks = () if breaks is None else breaks
    if decay is not None and math.isfinite(support[1]):
        decay = math.inf

    if decay is not None and math.isfinite(decay) and decay <= N:
        raise DivergenceError(
            "Radial integrand decays like r^-{:.4g}; the volume element r^{} makes it "
            "diverge at infinity.".format(decay, N - 1)
        )
    tail = None if decay is None else decay - (N - 1)
    result = integrate_half_line(
        lambda r: r ** (N - 1) * g(r),
        spec,
        lo=support[0],
        hi=support[1],
        tail=tail,
        scale=scale,
        breaks=breaks,
    )
    omega = sphere_measure(N - 1)
    return QuadResult(omega * result.value, omega * result.error)


def l2_sq(u, N, spec):
    """Return the squared L^2 norm of `u`."""
    decay = None if u.decay is None else 2.0 * u.decay
    return radial_integral(lambda r: u(r) ** 2, N, spec, decay=decay, scale=u.scale,
                           support=u.support, breaks=u.breaks)


def lcrit(u, N, spec):
    """Return the integral of ``|u|^(2*)``."""
    p = 2.0 * N / (N - 2)
    decay = None if u.decay is None else p * u.decay
    return radial_integral(lambda r: abs(u(r)) ** p, N, spec, decay=decay, scale=u.scale,
                           support=u.support, breaks=u.breaks)


def gradient_sq(u, N, spec):
    """Return the Dirichlet energy of `u`."""
    decay = None if u.decay is None else 2.0 * u.decay + 2.0
    return radial_integral(lambda r: u.deriv(r) ** 2, N, spec, decay=decay, scale=u.scale,
                           support=u.support, breaks=u.breaks)


def _kernel_three(s, r, rho):
    q = 1.0 + 2.0 * s
    return (abs(r - rho) ** -q - (r + rho) ** -q) * 2.0 * math.pi / (q * r * rho)


def _kernel_hypergeometric(N, s, r, rho):
    p = 0.5 * (N + 2.0 * s)
    a = r * r + rho * rho
    z = (2.0 * r * rho / a) ** 2
    omega = sphere_measure(N - 1)
    if z < 0.9:
        return omega * a ** -p * float(special.hyp2f1(0.5 * p, 0.5 * (p + 1.0), 0.5 * N, z))
    with mpmath.workdps(40):
        r_mp, rho_mp = mpmath.mpf(r), mpmath.mpf(rho)
        a_mp = r_mp * r_mp + rho_mp * rho_mp
        z_mp = (2 * r_mp * rho_mp / a_mp) ** 2
        p_mp = (N + 2 * mpmath.mpf(s)) / 2
        value = a_mp ** -p_mp * mpmath.hyp2f1(p_mp / 2, (p_mp + 1) / 2, mpmath.mpf(N) / 2, z_mp)
        return omega * float(value)


def _kernel(N, s, r, rho):
    if N == 3:
        return _kernel_three(s, r, rho)
    return _kernel_hypergeometric(N, s, r, rho)


def angular_kernel(N, s, r, rho):
    """Return the angular integral of the Gagliardo kernel.

    This is ``omega_(N-2) int_0^pi sin^(N-2)(t) (r^2 + rho^2 - 2 r rho
    cos t)^(-(N+2s)/2) dt``, evaluated through the Gauss hypergeometric
    function (closed form for N = 3).

    >>> round(angular_kernel(3, 0.5, 1.0, 2.0), 5)
    1.39626
    """
    dim = DimPair(N, s)
    if not r > 0 or not rho > 0:
        raise DomainError("Radii must be positive, got r={!r}, rho={!r}.".format(r, rho))
    if r == rho:
        raise DiagonalSingularityError(
            "The angular kernel is singular on the diagonal r = rho = {!r}.".format(r)
        )
    return _kernel(dim.N, dim.s, float(r), float(rho))


def angular_kernel_quadrature(N, s, r, rho, nodes=64):
    """Evaluate the angular kernel by Gauss-Legendre quadrature in the angle."""
    dim = DimPair(N, s)
    if r == rho:
        raise DiagonalSingularityError("The angular kernel is singular on the diagonal.")
    x, w = legendre.leggauss(int(nodes))
    theta = 0.5 * math.pi * (x + 1.0)
    p = 0.5 * (dim.N + 2.0 * dim.s)
    base = r * r + rho * rho - 2.0 * r * rho * np.cos(theta)
    integrand = np.sin(theta) ** (dim.N - 2) * base ** -p
    return sphere_measure(dim.N - 2) * 0.5 * math.pi * math.fsum(w * integrand)


def diagonal_constant(N, s):
    """Return the limit of ``rho^(N-1) A(r, rho) |r - rho|^(1+2s)`` at r = 1."""
    return math.exp(
        0.5 * (N - 1) * math.log(math.pi) + log_gamma(s + 0.5) - log_gamma(0.5 * N + s)
    )


def _diagonal_weight(N, s, h):
    """Return ``tau^(N-1) A(1, tau) h^(1+2s)`` with ``tau = 1 - h``.

    This factor is smooth in h up to the diagonal, where it tends to
    :func:`diagonal_constant`.
    """
    if h == 0.0:
        return diagonal_constant(N, s)
    q = 1.0 + 2.0 * s
    if N == 3:
        tau = 1.0 - h
        return 2.0 * math.pi * tau / q * (1.0 - (h / (1.0 + tau)) ** q)
    if h >= EXTENDED_PRECISION_GAP:
        tau = 1.0 - h
        return tau ** (N - 1) * _kernel_hypergeometric(N, s, 1.0, tau) * h ** q
    with mpmath.workdps(40):
        h_mp = mpmath.mpf(h)
        tau = 1 - h_mp
        a = 1 + tau * tau
        z = (2 * tau / a) ** 2
        p = (N + 2 * mpmath.mpf(s)) / 2
        value = (
            tau ** (N - 1)
            * a ** -p
            * mpmath.hyp2f1(p / 2, (p + 1) / 2, mpmath.mpf(N) / 2, z)
            * h_mp ** q
        )
        return sphere_measure(N - 1) * float(value)


def seminorm_tail_exponent(u, N, s):
    """Return the tail exponent of the radial seminorm integrand, or `None`."""
    if u.decay is None:
        return None
    if math.isinf(u.decay):
        return math.inf
    return 2.0 * u.decay + 1.0 + 2.0 * s - N


def _check_seminorm_finite(u, dim):
    if u.decay is not None and 2.0 * u.decay <= dim.N - 2.0 * dim.s:
        raise DivergenceError(
            "[u]_s^2 diverges for N={}, s={}: u decays like r^-{:.4g} and the "
            "low-frequency integrand is not integrable (for bubble decay this is "
            "N + 2s <= 4).".format(dim.N, dim.s, u.decay)
        )


def _difference_integral(u, dim, tau, spec, rel_tol):
    """Return ``int_0^inf r^(N-1-2s) (u(r) - u(r tau))^2 dr``."""
    N, s = dim.N, dim.s
    lo, hi = u.support
    power = N - 1.0 - 2.0 * s

    def integrand(r):
        diff = u(r) - u(r * tau)
        return r ** power * diff * diff

    breaks = u.breaks + tuple(b / tau for b in u.breaks)
    return integrate_half_line(
        integrand,
        spec,
        lo=lo,
        hi=hi / tau,
        tail=seminorm_tail_exponent(u, N, s),
        scale=u.scale,
        extent=u.scale / tau,
        breaks=breaks,
        rel_tol=rel_tol,
        abs_tol=spec.abs_tol,
    ).value


def _derivative_integral(u, dim, h, spec, rel_tol):
    """Return ``int_0^inf r^(N+1-2s) u'(r (1 - h/2))^2 dr``."""
    N, s = dim.N, dim.s
    lo, hi = u.support
    shrink = 1.0 - 0.5 * h
    power = N + 1.0 - 2.0 * s

    def integrand(r):
        d = u.deriv(r * shrink)
        return r ** power * d * d

    return integrate_half_line(
        integrand,
        spec,
        lo=lo,
        hi=hi / shrink,
        tail=seminorm_tail_exponent(u, N, s),
        scale=u.scale,
        breaks=tuple(b / shrink for b in u.breaks),
        rel_tol=rel_tol,
        abs_tol=spec.abs_tol,
    ).value


def _seminorm_far(u, dim, spec, rel_tol):
    """Return ``int_0^(1/2) tau^(N-1) A(1,tau) J(tau) dtau``."""
    N, s = dim.N, dim.s
    omega = sphere_measure(N - 1)

    def f(tau):
        if tau == 0.0:
            # Limit of tau^(N-2s) J(tau) as tau -> 0.
            return omega * integrate_half_line(
                lambda r: r ** (N - 1.0 - 2.0 * s) * u(r) ** 2,
                spec,
                lo=u.support[0],
                hi=u.support[1],
                tail=seminorm_tail_exponent(u, N, s),
                scale=u.scale,
                breaks=u.breaks,
                rel_tol=rel_tol,
            ).value
        return tau ** (N - 2.0 * s) * _kernel(N, s, 1.0, tau) * _difference_integral(
            u, dim, tau, spec, rel_tol
        )

    return _quad(f, 0.0, 0.5, spec.rel_tol, spec.abs_tol, spec, weight="alg",
                 wvar=(2.0 * s - 1.0, 0.0))


def _seminorm_near(u, dim, spec, rel_tol):
    """Return the ``tau`` in ``[1/2, 1)`` part and the near-diagonal band error."""
    N, s = dim.N, dim.s
    band = spec.band
    q = 1.0 + 2.0 * s

    def exact(h):
        return _diagonal_weight(N, s, h) * h ** -q * _difference_integral(
            u, dim, 1.0 - h, spec, rel_tol
        )

    def surrogate(h):
        return _diagonal_weight(N, s, h) * _derivative_integral(u, dim, h, spec, rel_tol)

    outer_value, outer_error = _quad(exact, band, 0.5, spec.rel_tol, spec.abs_tol, spec)
    band_value, band_error = _quad(
        surrogate, 0.0, band, spec.rel_tol, spec.abs_tol, spec, weight="alg",
        wvar=(1.0 - 2.0 * s, 0.0)
    )

    # The surrogate error grows like h^2, so its worst relative size is at the
    # band edge.
    at_edge_exact = _difference_integral(u, dim, 1.0 - band, spec, rel_tol) / band ** 2
    at_edge_surrogate = _derivative_integral(u, dim, band, spec, rel_tol)
    if at_edge_exact > 0:
        relative = abs(at_edge_surrogate - at_edge_exact) / at_edge_exact
    else:
        relative = 0.0
    return (
        outer_value + band_value,
        outer_error + band_error + abs(band_value) * relative,
    )


def gagliardo_direct(u, N, s, spec):
    """Return the Gagliardo seminorm ``[u]_s^2`` by direct quadrature.

    The angular integral over the direction of x contributes omega_(N-1).
    Writing ``rho = tau r`` and using the homogeneity of the angular kernel,

        [u]_s^2 = 2 omega_(N-1) int_0^1 tau^(N-1) A(1, tau)
                  int_0^inf r^(N-1-2s) (u(r) - u(tau r))^2 dr dtau.

    The ``tau`` integral is split at 1/2. Near ``tau = 0`` the integrand
    behaves like ``tau^(2s-1)``, near ``tau = 1`` like ``(1-tau)^(1-2s)``; both
    endpoint singularities are integrated with algebraic weights. Inside the
    band ``1 - tau < spec.band`` the difference quotient is replaced by the
    derivative at the midpoint, and the resulting error is estimated at the
    band edge and added to the error estimate.

    :raises DivergenceError: if the decay of `u` makes the seminorm infinite.
    """
    dim = DimPair(N, s)
    if u.is_zero:
        return QuadResult(0.0, 0.0)
    _check_seminorm_finite(u, dim)
    inner_tol = spec.rel_tol / 10.0
    with timer("Direct seminorm of " + u.name + " took %.3fs", logger=logger):
        far_value, far_error = _seminorm_far(u, dim, spec, inner_tol)
        near_value, near_error = _seminorm_near(u, dim, spec, inner_tol)
    factor = 2.0 * sphere_measure(dim.N - 1)
    value = factor * (far_value + near_value)
    error = factor * (far_error + near_error) + abs(value) * inner_tol
    logger.debug("[%s]_%g^2 in N=%d: %.10g (+/- %.2e)", u.name, s, N, value, error)
    return QuadResult(value, error)


def fourier_normalization(N, s):
    """Return the constant tying ``int |k|^(2s) |u_hat|^2`` to ``[u]_s^2``.

    The value is ``2 pi^(N/2) Gamma(1-s) / (s 4^s Gamma(N/2+s))`` for the
    unitary Fourier transform.
    """
    dim = DimPair(N, s)
    N, s = dim.N, dim.s
    return math.exp(
        math.log(2.0)
        + 0.5 * N * math.log(math.pi)
        + log_gamma(1.0 - s)
        - math.log(s)
        - s * math.log(4.0)
        - log_gamma(0.5 * N + s)
    )


def hankel_transform(u, N, k, spec):
    """Return the unitary Fourier transform of the compactly supported radial
    function `u` at frequency `k`."""
    lo, hi = u.support
    if math.isinf(hi):
        raise UnsupportedInputError(
            "Numerical Hankel transforms need a compactly supported function."
        )
    nu = 0.5 * N - 1.0
    if k == 0.0:
        moment = integrate_half_line(lambda r: r ** (N - 1) * u(r), spec, lo=lo, hi=hi,
                                     scale=u.scale, breaks=u.breaks)
        return 2.0 ** (1.0 - 0.5 * N) / math.exp(log_gamma(0.5 * N)) * moment.value
    edges = sorted(set([lo, hi] + [b for b in u.breaks if lo < b < hi]))
    parts = []
    for a, b in zip(edges, edges[1:]):
        pieces = max(1, int(math.ceil((b - a) * k / math.pi)))
        grid = np.linspace(a, b, pieces + 1)
        for x0, x1 in zip(grid, grid[1:]):
            value, _ = _quad(
                lambda r: u(r) * special.jv(nu, k * r) * r ** (0.5 * N),
                x0, x1, spec.rel_tol, spec.abs_tol, spec,
            )
            parts.append(value)
    return k ** (1.0 - 0.5 * N) * math.fsum(parts)


def _frequency_integral(u, dim, spec):
    N, s = dim.N, dim.s
    if u.transform is not None:
        transform = u.transform
    else:
        transform = lambda k: hankel_transform(u, N, k, spec)  # noqa: E731
    # A power decay r^-d with d < N gives |u_hat(k)| ~ k^(d-N) near the origin.
    low = 0.0
    if u.decay is not None and u.decay < N:
        low = 2.0 * (u.decay - N)
    if N - 1.0 + 2.0 * s + low <= -1.0:
        raise DivergenceError(
            "The frequency-side integrand of [u]_s^2 is not integrable at the origin "
            "for N={}, s={}.".format(N, s)
        )
    return integrate_half_line(
        lambda k: k ** (N - 1.0 + 2.0 * s) * transform(k) ** 2,
        spec,
        tail=math.inf if u.transform is not None else None,
        scale=1.0 / u.scale,
        rel_tol=spec.rel_tol,
    )


@cache
def calibrated_normalization(N, s, spec):
    """Return the frequency-side normalization fitted on a Gaussian.

    The direct seminorm of the Gaussian is divided by its frequency-side
    integral. The analytic constant of :func:`fourier_normalization` is only
    used to report the calibration quality.
    """
    dim = DimPair(N, s)
    reference = gaussian_profile()
    direct = gagliardo_direct(reference, dim.N, dim.s, spec)
    frequency = sphere_measure(dim.N - 1) * _frequency_integral(reference, dim, spec).value
    kappa = direct.value / frequency
    analytic = fourier_normalization(dim.N, dim.s)
    mismatch = abs(kappa / analytic - 1.0)
    logger.debug(
        "Calibrated normalization for N=%d, s=%g: %.12g (analytic %.12g).",
        dim.N, dim.s, kappa, analytic,
    )
    if mismatch > 1e-4:
        logger.warning(
            "Calibrated normalization for N=%d, s=%g differs from the analytic value by %.2e.",
            dim.N, dim.s, mismatch,
        )
    return kappa


def gagliardo_fourier(u, N, s, spec):
    """Return ``[u]_s^2`` from the frequency-side integral.

    The radial transform of `u` is used when available, otherwise it is
    computed by :func:`hankel_transform`. The normalization constant is
    calibrated once per ``(N, s, spec)`` by :func:`calibrated_normalization`.
    """
    dim = DimPair(N, s)
    if u.is_zero:
        return QuadResult(0.0, 0.0)
    _check_seminorm_finite(u, dim)
    kappa = calibrated_normalization(dim.N, dim.s, spec)
    result = _frequency_integral(u, dim, spec)
    omega = sphere_measure(dim.N - 1)
    return QuadResult(kappa * omega * result.value, kappa * omega * result.error)


def seminorm_closed_form(N, s):
    """Return ``[u_0]_s^2`` for the standard bubble from a Bessel-K moment.

    Combines the transform ``u_0_hat(k) = 2^(1-nu) / Gamma(nu) K_1(k) / k``,
    ``nu = (N-2)/2``, with the moment
    ``int_0^inf t^(mu-1) K_1(t)^2 dt``, ``mu = N + 2s - 2``.
    """
    dim = DimPair(N, s)
    N, s = dim.N, dim.s
    if not dim.finite_seminorm:
        raise DivergenceError(
            "[u_0]_s^2 diverges for N + 2s <= 4 (N={}, s={}).".format(N, s)
        )
    nu = 0.5 * (N - 2)
    mu = N + 2.0 * s - 2.0
    log_moment = (
        0.5 * math.log(math.pi)
        + log_gamma(0.5 * mu + 1.0)
        + log_gamma(0.5 * mu)
        + log_gamma(0.5 * mu - 1.0)
        - math.log(4.0)
        - log_gamma(0.5 * (mu + 1.0))
    )
    log_amplitude = 2.0 * ((1.0 - nu) * math.log(2.0) - log_gamma(nu))
    return math.exp(
        math.log(fourier_normalization(N, s))
        + math.log(sphere_measure(N - 1))
        + log_amplitude
        + log_moment
    )


def cross_term(u_plus, u_minus, N, s, spec):
    """Return ``iint u_plus(x) u_minus(y) |x-y|^-(N+2s) dx dy``.

    Only radially separated supports are accepted, so the kernel singularity
    is never met where both factors are nonzero.
    """
    dim = DimPair(N, s)
    N, s = dim.N, dim.s
    if u_plus.is_zero or u_minus.is_zero:
        return QuadResult(0.0, 0.0)
    (a1, b1), (a2, b2) = u_plus.support, u_minus.support
    if not (b1 < a2 or b2 < a1):
        raise UnsupportedInputError(
            "cross_term needs radially separated supports, got {!r} and {!r}.".format(
                u_plus.support, u_minus.support
            )
        )
    inner_tol = spec.rel_tol / 10.0

    def inner_tail(u):
        if u.decay is None:
            return None
        return u.decay + 1.0 + 2.0 * s

    def inner(r):
        return integrate_half_line(
            lambda rho: u_minus(rho) * rho ** (N - 1) * _kernel(N, s, r, rho),
            spec,
            lo=a2,
            hi=b2,
            tail=inner_tail(u_minus),
            scale=u_minus.scale,
            breaks=u_minus.breaks,
            rel_tol=inner_tol,
        ).value

    result = integrate_half_line(
        lambda r: u_plus(r) * r ** (N - 1) * inner(r),
        spec,
        lo=a1,
        hi=b1,
        tail=inner_tail(u_plus),
        scale=u_plus.scale,
        breaks=u_plus.breaks,
    )
    omega = sphere_measure(N - 1)
    value = omega * result.value
    return QuadResult(value, omega * result.error + abs(value) * inner_tol)


class QuotientReport:
    """The mixed Rayleigh quotient and its three components.

    :ivar float gradient: Dirichlet energy.
    :ivar float seminorm: ``[u]_s^2``, zero when the nonlocal term is omitted.
    :ivar float lcrit: Integral of ``|u|^(2*)``.
    :ivar float quotient: ``(gradient + seminorm) / lcrit^(2/2*)``.
    :ivar float error: Propagated error estimate of the quotient.
    """

    def __init__(self, N, s, gradient, seminorm, lcrit, error=0.0):
        self.N = N
        self.s = s
        self.gradient = gradient
        self.seminorm = seminorm
        self.lcrit = lcrit
        self.error = error

    @property
    def norm_sq(self):
        return self.lcrit ** ((self.N - 2.0) / self.N)

    @property
    def quotient(self):
        return (self.gradient + self.seminorm) / self.norm_sq

    @property
    def gradient_quotient(self):
        return self.gradient / self.norm_sq

    def __float__(self):
        return self.quotient

    def __repr__(self):
        return "QuotientReport(N={}, s={!r}, quotient={!r})".format(self.N, self.s, self.quotient)


def mixed_quotient(u, N, s, spec, include_seminorm=True):
    """Return the :class:`QuotientReport` of `u`.

    With `include_seminorm` false only the gradient quotient is formed and `s`
    is ignored.
    """
    grad = gradient_sq(u, N, spec)
    crit = lcrit(u, N, spec)
    if not crit.value > 0:
        raise DomainError("The quotient is undefined for the zero function.")
    if include_seminorm:
        semi = gagliardo_direct(u, N, s, spec)
    else:
        semi = QuadResult(0.0, 0.0)
    report = QuotientReport(N, s, grad.value, semi.value, crit.value)
    relative = (grad.error + semi.error) / (grad.value + semi.value) + (
        (N - 2.0) / N
    ) * crit.error / crit.value
    report.error = report.quotient * relative
    return report


def rescaled_quotient_sequence(u, N, s, k_list, spec):
    """Return the quotient reports of ``u_k = k^((N-2)/2) u(k x)`` for `k_list`.

    The gradient and critical parts are invariant under this rescaling; a
    violation beyond :data:`INVARIANCE_TOL` raises
    :class:`~critbubble.exceptions.InternalConsistencyError`.
    """
    lo, hi = u.support
    if math.isinf(hi):
        raise UnsupportedInputError("The rescaled sequence needs a compactly supported function.")
    reports = []
    for k in k_list:
        report = mixed_quotient(u.rescaled(k, N), N, s, spec)
        logger.info("k=%g: quotient %.10g (seminorm %.6g).", k, report.quotient, report.seminorm)
        reports.append(report)
    first = reports[0]
    tol = max(INVARIANCE_TOL, 100.0 * spec.rel_tol)
    for k, report in zip(k_list, reports):
        for field in ("gradient", "lcrit"):
            a, b = getattr(first, field), getattr(report, field)
            if abs(a - b) > tol * abs(a):
                raise InternalConsistencyError(
                    "The {} part changed under rescaling by k={}: {} vs {}.".format(field, k, a, b)
                )
    return reports


def seminorm_scaling_error(reports, k_list, s):
    """Return the largest relative deviation of the seminorm parts from the
    ``k^(2s-2)`` law, taking the first entry as reference."""
    k0, base = k_list[0], reports[0].seminorm
    worst = 0.0
    for k, report in zip(k_list, reports):
        expected = base * (k / k0) ** (2.0 * s - 2.0)
        worst = max(worst, abs(report.seminorm / expected - 1.0))
    return worst


def extrapolate_quotient(reports, k_list, s):
    """Extrapolate the quotient to ``k -> inf`` from the last two entries.

    The quotient is affine in ``x = k^(2s-2)``, so two points determine the
    limit.
    """
    if len(reports) < 2:
        raise DomainError("Extrapolation needs at least two rescalings.")
    qa, qb = reports[-2].quotient, reports[-1].quotient
    xa, xb = k_list[-2] ** (2.0 * s - 2.0), k_list[-1] ** (2.0 * s - 2.0)
    return (qb * xa - qa * xb) / (xa - xb)


def interpolation_ratio(u, N, s1, s2, spec):
    """Return ``[u]_s1 / (||u||_2^(1-s1/s2) [u]_s2^(s1/s2))``."""
    if not 0.0 < s1 < s2 < 1.0:
        raise DomainError("Need 0 < s1 < s2 < 1, got s1={!r}, s2={!r}.".format(s1, s2))
    theta = s1 / s2
    low = math.sqrt(gagliardo_direct(u, N, s1, spec).value)
    high = math.sqrt(gagliardo_direct(u, N, s2, spec).value)
    l2 = math.sqrt(l2_sq(u, N, spec).value)
    return low / (l2 ** (1.0 - theta) * high ** theta)


#: Centers and half widths of the bumps used to estimate the interpolation
#: constant.
INTERPOLATION_BUMPS = ((0.5, 0.5), (1.0, 0.25), (1.5, 1.0), (2.5, 0.5), (4.0, 2.0))


def interpolation_family():
    """Return the compactly supported bumps of :data:`INTERPOLATION_BUMPS`."""
    return [bump_profile(center, half_width) for center, half_width in INTERPOLATION_BUMPS]


def interpolation_constant(family, N, s1, s2, spec):
    """Return the empirical constant ``c*`` and the ratios of `family`.

    ``c*`` is the largest :func:`interpolation_ratio` over the family; a
    non-finite ratio raises :class:`~critbubble.exceptions.DivergenceError`.
    """
    if not family:
        raise DomainError("The interpolation family is empty.")
    ratios = [interpolation_ratio(u, N, s1, s2, spec) for u in family]
    for u, ratio in zip(family, ratios):
        if not math.isfinite(ratio) or not ratio > 0:
            raise DivergenceError(
                "Interpolation ratio of {} is {!r} for N={}.".format(u.name, ratio, N)
            )
    c_star = max(ratios)
    logger.info("Interpolation constant for N=%d, s1=%g, s2=%g: %.8g", N, s1, s2, c_star)
    return c_star, ratios
