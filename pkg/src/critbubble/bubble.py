"""The Aubin-Talenti bubble family, its norms and the cutoff family.

The standard bubble is ``u_0(x) = (1 + |x|^2)^(-(N-2)/2)`` and the family is

    U[z, lam](x) = c lam^(-(N-2)/2) (1 + |x - z|^2 / lam^2)^(-(N-2)/2).

The scale parameter ``lam`` shrinks as a bubble concentrates. The closed
form norms always refer to ``c = 1``.
"""

import logging
import math

import numpy as np
from scipy import integrate, special

from .exceptions import DivergenceError, DomainError
from .quad import QuadResult, RadialFn, integrate_half_line
from .specfn import (
    LOG_2,
    LOG_PI,
    _check_integer,
    _check_positive,
    log_gamma,
    log_sobolev_constant,
    log_sphere_measure,
    sphere_measure,
)

logger = logging.getLogger(__name__)

#: Allowed deviation of a Coron direction from the unit sphere.
UNIT_TOL = 1e-12


def _as_output(value):
    value = np.asarray(value, dtype=float)
    if value.ndim == 0:
        return float(value)
    return value


class Bubble:
    """A bubble ``U[z, lam]`` with amplitude ``c``.

    :ivar numpy.ndarray center: The concentration point z in R^N.
    :ivar float scale: The concentration scale lam.
    :ivar float amplitude: The multiplier c.
    """

    def __init__(self, center, scale=1.0, amplitude=1.0):
        center = np.atleast_1d(np.asarray(center, dtype=float))
        if center.ndim != 1 or center.shape[0] < 3:
            raise DomainError("A bubble center must be a point in R^N with N >= 3.")
        if not scale > 0:
            raise DomainError("Bubble scale must be positive, got {!r}.".format(scale))
        if amplitude == 0:
            raise DomainError("Bubble amplitude must be nonzero.")
        self.center = center
        self.scale = float(scale)
        self.amplitude = float(amplitude)

    @property
    def N(self):
        return self.center.shape[0]

    def __call__(self, x):
        return eval_bubble(self, x)

    def radial(self):
        """Return the profile about the bubble's own center as a :class:`RadialFn`."""
        return standard_bubble(self.N, scale=self.scale, amplitude=self.amplitude)

    def to_dict(self):
        return {
            "center": [float(c) for c in self.center],
            "scale": self.scale,
            "amplitude": self.amplitude,
        }

    def __repr__(self):
        return "Bubble(center={}, scale={!r}, amplitude={!r})".format(
            np.array2string(self.center, precision=6), self.scale, self.amplitude
        )


class CoronParams:
    """The parameters ``(t, sigma)`` of the bubble concentrating at sigma.

    :ivar float t: Concentration parameter in ``[0, 1)``.
    :ivar numpy.ndarray sigma: Unit vector in R^N.
    """

    def __init__(self, t, sigma):
        t = float(t)
        if not 0.0 <= t < 1.0:
            raise DomainError("t must lie in [0, 1), got {!r}.".format(t))
        sigma = np.atleast_1d(np.asarray(sigma, dtype=float))
        if abs(np.linalg.norm(sigma) - 1.0) > UNIT_TOL:
            raise DomainError("sigma must be a unit vector, got |sigma| = {!r}.".format(
                float(np.linalg.norm(sigma))
            ))
        self.t = t
        self.sigma = sigma

    @property
    def N(self):
        return self.sigma.shape[0]

    def to_bubble(self):
        return coron_bubble(self)

    def __repr__(self):
        return "CoronParams(t={!r}, sigma={})".format(self.t, self.sigma.tolist())


def coron_bubble(params):
    """Return ``Bubble(center = t sigma, scale = 1 - t, amplitude = 1)``."""
    return Bubble(params.t * params.sigma, scale=1.0 - params.t, amplitude=1.0)


def axis(N, index=0):
    """Return the unit vector e_(index+1) in R^N."""
    e = np.zeros(N)
    e[index] = 1.0
    return e


def eval_bubble(b, x):
    """Evaluate the bubble `b` at the point(s) `x` (last axis of length N)."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != b.N:
        raise DomainError("Point has dimension {}, bubble has {}.".format(x.shape[-1], b.N))
    d2 = np.sum((x - b.center) ** 2, axis=-1)
    p = 0.5 * (b.N - 2)
    return _as_output(b.amplitude * b.scale ** -p * (1.0 + d2 / b.scale ** 2) ** -p)


def solution_amplitude(N):
    """Return ``(N(N-2))^((N-2)/4)``, the multiplier that turns u_0 into a
    solution of ``-Delta U = U^(2*-1)``."""
    N = _check_integer("N", N, 3)
    return (N * (N - 2.0)) ** ((N - 2) / 4.0)


def log_bubble_l2_sq(N):
    N = _check_integer("N", N, 3)
    if N <= 4:
        raise DivergenceError(
            "The L^2 norm of u_0 diverges for N={}: the radial integrand has an "
            "r^(3-N) tail.".format(N)
        )
    return (
        log_sphere_measure(N - 1)
        + log_gamma(0.5 * N - 2.0)
        + log_gamma(0.5 * N)
        - LOG_2
        - log_gamma(N - 2.0)
    )


def bubble_l2_sq(N):
    """Return the squared L^2 norm of the standard bubble (N >= 5).

    >>> round(bubble_l2_sq(5) / math.pi ** 3, 12)
    0.5
    """
    return math.exp(log_bubble_l2_sq(N))


def log_bubble_lcrit(N):
    N = _check_integer("N", N, 3)
    return (
        log_sphere_measure(N - 1)
        - N * LOG_2
        + 0.5 * LOG_PI
        + log_gamma(0.5 * N)
        - log_gamma(0.5 * (N + 1))
    )


def bubble_lcrit(N):
    """Return the integral of ``u_0^(2*)``."""
    return math.exp(log_bubble_lcrit(N))


def log_bubble_grad_sq(N):
    N = _check_integer("N", N, 3)
    return log_sobolev_constant(N) + (N - 2.0) / N * log_bubble_lcrit(N)


def bubble_grad_sq(N):
    """Return the Dirichlet energy of the standard bubble.

    The value is ``S_N (int u_0^(2*))^(2/2*)``, since u_0 is an extremal of
    the Sobolev inequality.
    """
    return math.exp(log_bubble_grad_sq(N))


def seminorm_scale_factor(lam, s):
    """Return ``lam^(2-2s)``, the ratio ``[U[z, lam]]_s^2 / [u_0]_s^2``."""
    lam = _check_positive("lam", lam)
    if not 0.0 < s < 1.0:
        raise DomainError("s must lie in (0, 1), got {!r}.".format(s))
    return lam ** (2.0 - 2.0 * s)


def standard_bubble(N, scale=1.0, amplitude=1.0):
    """Return ``c U[0, scale]`` as a :class:`~critbubble.quad.RadialFn`.

    The radial Fourier transform ``2^(1-nu) / Gamma(nu) K_1(k) / k`` with
    ``nu = (N - 2) / 2`` is attached, rescaled along with the profile.
    """
    N = _check_integer("N", N, 3)
    p = 0.5 * (N - 2)
    log_c0 = (1.0 - p) * LOG_2 - log_gamma(p)
    c0 = math.exp(log_c0)

    def value(r):
        return (1.0 + r * r) ** -p

    def derivative(r):
        return -(N - 2.0) * r * (1.0 + r * r) ** (-p - 1.0)

    def transform(k):
        return c0 * special.k1(k) / k

    u0 = RadialFn(
        value,
        derivative=derivative,
        decay=N - 2.0,
        transform=transform,
        name="u0",
    )
    if scale == 1.0 and amplitude == 1.0:
        return u0
    u = u0.rescaled(1.0 / scale, N)
    if amplitude != 1.0:
        u = u.scaled(amplitude)
    u.name = "U[0,{!r}]".format(scale)
    return u


def _q(tau):
    tau = np.asarray(tau, dtype=float)
    positive = tau > 0
    safe = np.where(positive, tau, 1.0)
    return np.where(positive, np.exp(-1.0 / safe), 0.0)


def smooth_step(tau):
    """Return the smooth monotone step ``q(t) / (q(t) + q(1-t))``,
    ``q(t) = exp(-1/t)``, clipped to [0, 1]."""
    tau = np.clip(np.asarray(tau, dtype=float), 0.0, 1.0)
    a, b = _q(tau), _q(1.0 - tau)
    return _as_output(a / (a + b))


def smooth_step_derivative(tau):
    tau = np.asarray(tau, dtype=float)
    inside = (tau > 0.0) & (tau < 1.0)
    t = np.where(inside, tau, 0.5)
    a, b = _q(t), _q(1.0 - t)
    with np.errstate(divide="ignore", invalid="ignore"):
        da = np.where(a > 0, a / (t * t), 0.0)
        db = np.where(b > 0, b / ((1.0 - t) ** 2), 0.0)
    value = (da * b + a * db) / (a + b) ** 2
    return _as_output(np.where(inside, value, 0.0))


def plateau_profile(y):
    """Return the fixed cutoff profile: 0 below 1/4, ramping up on [1/4, 1/2],
    1 on [1/2, 2], ramping down on [2, 4], 0 beyond 4."""
    y = np.asarray(y, dtype=float)
    rising = smooth_step(4.0 * y - 1.0)
    falling = 1.0 - np.asarray(smooth_step(0.5 * (y - 2.0)))
    return _as_output(np.where(y < 1.0, rising, falling))


def plateau_profile_derivative(y):
    y = np.asarray(y, dtype=float)
    rising = 4.0 * np.asarray(smooth_step_derivative(4.0 * y - 1.0))
    falling = -0.5 * np.asarray(smooth_step_derivative(0.5 * (y - 2.0)))
    return _as_output(np.where(y < 1.0, rising, falling))


class Cutoff:
    """The radial cutoff ``phi_R``.

    ``phi_R`` is identically one on ``1/R <= |x| < R`` (in fact on
    ``[1/(2R), 2R]``), vanishes for ``|x| <= 1/(4R)`` and ``|x| >= 4R``, and is
    built from :func:`plateau_profile` as ``phi(R x)`` inside the unit-scale
    ball and ``phi(x / R)`` outside.

    :ivar float R: Cutoff radius, at least 1.
    """

    def __init__(self, R):
        R = float(R)
        if not R >= 1.0:
            raise DomainError("Cutoff radius must be at least 1, got {!r}.".format(R))
        self.R = R

    @property
    def breaks(self):
        R = self.R
        return (0.25 / R, 0.5 / R, 2.0 * R, 4.0 * R)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        R = self.R
        inner = np.asarray(plateau_profile(R * r))
        outer = np.asarray(plateau_profile(r / R))
        return _as_output(np.where(r < 1.0 / R, inner, np.where(r < R, 1.0, outer)))

    def derivative(self, r):
        r = np.asarray(r, dtype=float)
        R = self.R
        inner = R * np.asarray(plateau_profile_derivative(R * r))
        outer = np.asarray(plateau_profile_derivative(r / R)) / R
        return _as_output(np.where(r < 1.0 / R, inner, np.where(r < R, 0.0, outer)))

    def __repr__(self):
        return "Cutoff(R={!r})".format(self.R)


def eval_cutoff(cut, x):
    """Return ``phi_R(|x|)``. A scalar `x` is read as a radius."""
    x = np.asarray(x, dtype=float)
    r = np.abs(x) if x.ndim == 0 else np.linalg.norm(x, axis=-1)
    return cut(r)


def truncated_bubble(N, R):
    """Return ``w_(0,R) = phi_R u_0`` as a compactly supported radial function."""
    N = _check_integer("N", N, 3)
    cut = Cutoff(R)
    u0 = standard_bubble(N)

    def value(r):
        return cut(r) * u0(r)

    def derivative(r):
        return cut.derivative(r) * u0(r) + cut(r) * u0.deriv(r)

    return RadialFn(
        value,
        derivative=derivative,
        support=(0.25 / cut.R, 4.0 * cut.R),
        scale=1.0,
        breaks=cut.breaks,
        name="w[R={!r}]".format(cut.R),
    )


class _AxialBubble:
    """A bubble centered on the first axis at distance `t`, evaluated in
    coordinates ``(r, cos theta)`` about the origin."""

    def __init__(self, N, t, scale):
        self.N = N
        self.t = t
        self.scale = scale
        self.p = 0.5 * (N - 2)
        self.a = scale ** -self.p

    def fields(self, r, c):
        """Return ``u``, ``x_hat . grad u`` and ``|grad u|^2`` at ``(r, c)``."""
        lam2 = self.scale * self.scale
        d2 = max(r * r - 2.0 * r * self.t * c + self.t * self.t, 0.0)
        base = 1.0 + d2 / lam2
        u = self.a * base ** -self.p
        g = (self.N - 2.0) * self.a / lam2 * base ** (-self.p - 1.0)
        radial = -g * (r - self.t * c)
        return u, radial, g * g * d2


def _axial_integral(density, N, spec, lo, hi, tail, extent, breaks=(), rel_tol=None):
    """Integrate ``density(r, cos theta)`` over an axisymmetric region of R^N.

    The region is the spherical shell ``lo <= |x| <= hi``; the angular
    integral carries the weight ``omega_(N-2) sin^(N-2) theta``.
    """
    rel_tol = spec.rel_tol if rel_tol is None else rel_tol
    inner_tol = rel_tol / 10.0
    omega = sphere_measure(N - 2)

    def shell(r):
        if r == 0.0:
            return 0.0
        value, _ = integrate.quad(
            lambda theta: math.sin(theta) ** (N - 2) * density(r, math.cos(theta)),
            0.0,
            math.pi,
            epsabs=spec.abs_tol,
            epsrel=inner_tol,
            limit=spec.limit,
        )
        return omega * r ** (N - 1) * value

    return integrate_half_line(
        shell,
        spec,
        lo=lo,
        hi=hi,
        tail=tail,
        scale=extent / 8.0,
        extent=extent,
        breaks=breaks,
        rel_tol=rel_tol,
    )


def axial_norms(b, spec):
    """Return the ``L^(2*)`` integral and Dirichlet energy of ``b`` computed
    about the origin rather than about the bubble center.

    The center must lie on the first coordinate axis. Both values are
    translation invariant, so this checks the axisymmetric integrator against
    the closed forms.
    """
    N = b.N
    t = float(b.center[0])
    if np.any(b.center[1:] != 0):
        raise DomainError("axial_norms needs a center on the first coordinate axis.")
    field = _AxialBubble(N, t, b.scale)
    p = 2.0 * N / (N - 2)
    c = abs(b.amplitude)
    extent = abs(t) + b.scale
    breaks = (abs(t),) if t != 0 else ()

    def crit(r, cos_t):
        return field.fields(r, cos_t)[0] ** p

    def grad(r, cos_t):
        return field.fields(r, cos_t)[2]

    lc = _axial_integral(crit, N, spec, 0.0, math.inf, N + 1.0, extent, breaks)
    gr = _axial_integral(grad, N, spec, 0.0, math.inf, N - 1.0, extent, breaks)
    return (
        QuadResult(c ** p * lc.value, c ** p * lc.error),
        QuadResult(c * c * gr.value, c * c * gr.error),
    )


def _truncation_regions(N, R):
    cut = Cutoff(R)
    return cut, [
        (0.0, 0.5 / cut.R, (0.25 / cut.R,)),
        (2.0 * cut.R, math.inf, (4.0 * cut.R,)),
    ]


def truncation_components(N, params, R, spec):
    """Return the gradient and L^2 parts of ``||w_(t,R) - u_t^sigma||^2``.

    ``w_(t,R) = phi_R u_t^sigma``, so the difference ``(phi_R - 1) u`` vanishes
    on ``[1/(2R), 2R]`` and only the inner ball and the outer complement are
    integrated. The bubble is axisymmetric about sigma, which reduces every
    integral to the variables ``(|x|, theta)``; for ``t = 0`` the angular
    integral is trivial.
    """
    N = _check_integer("N", N, 3)
    if N <= 4:
        raise DivergenceError(
            "The L^2 truncation error is infinite for N={}: the bubble tail "
            "r^(3-N) is not integrable.".format(N)
        )
    if params.N != N:
        raise DomainError("CoronParams live in R^{}, expected R^{}.".format(params.N, N))
    cut, regions = _truncation_regions(N, R)
    field = _AxialBubble(N, params.t, 1.0 - params.t)

    def grad_density(r, c):
        u, radial, grad_sq = field.fields(r, c)
        phi, dphi = cut(r), cut.derivative(r)
        gap = phi - 1.0
        return dphi * dphi * u * u + 2.0 * dphi * gap * u * radial + gap * gap * grad_sq

    def l2_density(r, c):
        u = field.fields(r, c)[0]
        gap = cut(r) - 1.0
        return gap * gap * u * u

    omega = sphere_measure(N - 1)
    gradient, l2 = [], []
    for lo, hi, breaks in regions:
        extent = max(hi if math.isfinite(hi) else lo, 1.0)
        if params.t == 0.0:
            for density, parts, tail in (
                (grad_density, gradient, N - 1.0),
                (l2_density, l2, N - 3.0),
            ):
                result = integrate_half_line(
                    lambda r, density=density: omega * r ** (N - 1) * density(r, 1.0),
                    spec,
                    lo=lo,
                    hi=hi,
                    tail=tail,
                    scale=extent / 8.0,
                    extent=extent,
                    breaks=breaks,
                )
                parts.append(result)
        else:
            gradient.append(_axial_integral(grad_density, N, spec, lo, hi, N - 1.0, extent, breaks))
            l2.append(_axial_integral(l2_density, N, spec, lo, hi, N - 3.0, extent, breaks))

    def total(parts):
        return QuadResult(math.fsum(p.value for p in parts), math.fsum(p.error for p in parts))

    return total(gradient), total(l2)


def truncation_error(N, params, R, spec):
    """Return the energy error ``||w_(t,R) - u_t^sigma||^2`` (gradient plus
    L^2 part)."""
    gradient, l2 = truncation_components(N, params, R, spec)
    logger.debug(
        "Truncation error N=%d t=%g R=%g: gradient %.6e, L2 %.6e.", N, params.t, R,
        gradient.value, l2.value,
    )
    return QuadResult(gradient.value + l2.value, gradient.error + l2.error)


def truncation_l2_bounds(N, R, spec):
    """Return the two analytic majorants of the L^2 truncation error.

    ``outer`` is the integral of ``(1 + |y|^2)^(2-N)`` over ``|y| > 2R`` and
    ``inner`` is ``||u_0||_(2*)^2 |B_(1/(2R))|^(2/N)`` (Hoelder on the inner
    ball). Both tend to zero as R grows when N >= 5.
    """
    N = _check_integer("N", N, 5)
    cut = Cutoff(R)
    outer = integrate_half_line(
        lambda r: r ** (N - 1) * (1.0 + r * r) ** (2.0 - N),
        spec,
        lo=2.0 * cut.R,
        tail=N - 3.0,
        scale=cut.R,
        extent=2.0 * cut.R,
    )
    radius = 0.5 / cut.R
    log_ball = log_sphere_measure(N - 1) + N * math.log(radius) - math.log(N)
    inner = math.exp((N - 2.0) / N * log_bubble_lcrit(N) + 2.0 / N * log_ball)
    return sphere_measure(N - 1) * outer.value, inner
