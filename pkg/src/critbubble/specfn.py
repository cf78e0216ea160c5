"""Special functions and dimension-dependent constants.

All Gamma arithmetic is done on the logarithmic scale. Dimensions up to a few
hundred push Gamma values far outside the range of a double, while the
quantities built from them (sphere measures, Sobolev constants, ratios of
Gamma values) stay moderate.
"""

import logging
import math
import numbers

from scipy import special

from .exceptions import DomainError, InternalConsistencyError

logger = logging.getLogger(__name__)

#: Relative agreement required between the two Sobolev constant formulas
#: before a warning is logged.
SOBOLEV_AGREEMENT = 1e-12

#: Relative disagreement at which the special functions are declared broken.
SOBOLEV_FAILURE = 1e-10

LOG_PI = math.log(math.pi)
LOG_2 = math.log(2.0)


def _check_integer(name, value, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        if not (isinstance(value, numbers.Real) and float(value).is_integer()):
            raise DomainError(
                "{} must be an integer, got {!r}.".format(name, value)
            )
    value = int(value)
    if value < minimum:
        raise DomainError("{} must be at least {}, got {}.".format(name, minimum, value))
    return value


def _check_positive(name, value):
    if not value > 0:
        raise DomainError("{} must be positive, got {!r}.".format(name, value))
    return float(value)


class DimPair:
    """The pair (N, s) that parameterizes every formula.

    :ivar int N: Ambient dimension, at least 3.
    :ivar float s: Fractional order in the open interval (0, 1).
    """

    def __init__(self, N, s):
        self.N = _check_integer("N", N, 3)
        s = float(s)
        if not 0.0 < s < 1.0:
            raise DomainError("s must lie in (0, 1), got {!r}.".format(s))
        self.s = s

    @property
    def two_star(self):
        """The critical Sobolev exponent 2N/(N-2)."""
        return 2.0 * self.N / (self.N - 2)

    @property
    def finite_seminorm(self):
        """Whether the Gagliardo seminorm of the standard bubble is finite."""
        return self.N + 2.0 * self.s > 4.0

    def __eq__(self, other):
        if not isinstance(other, DimPair):
            return NotImplemented
        return (self.N, self.s) == (other.N, other.s)

    def __hash__(self):
        return hash((self.N, self.s))

    def __repr__(self):
        return "DimPair(N={}, s={!r})".format(self.N, self.s)


def log_gamma(x):
    """Return the natural logarithm of Gamma(`x`) for positive `x`."""
    x = _check_positive("x", x)
    return float(special.gammaln(x))


def gamma(x):
    """Return Gamma(`x`) for positive `x`, derived from :func:`log_gamma`."""
    return math.exp(log_gamma(x))


def log_sphere_measure(n):
    """Return the logarithm of the surface measure of the unit n-sphere."""
    n = _check_integer("n", n, 1)
    return LOG_2 + 0.5 * (n + 1) * LOG_PI - log_gamma(0.5 * (n + 1))


def sphere_measure(n):
    """Return the surface measure of the unit sphere S^n in R^(n+1).

    >>> round(sphere_measure(2), 7)
    12.5663706
    """
    return math.exp(log_sphere_measure(n))


def log_sobolev_constant_forms(N):
    """Return the logarithms of both closed forms of the Sobolev constant.

    The first form is N(N-2)pi (Gamma(N/2)/Gamma(N))^(2/N), the second is
    N(N-2)/4 times the 2/N-th power of the measure of the unit N-sphere.
    """
    N = _check_integer("N", N, 3)
    base = math.log(N * (N - 2))
    gamma_form = base + LOG_PI + (2.0 / N) * (log_gamma(N / 2.0) - log_gamma(N))
    sphere_form = base - 2.0 * LOG_2 + (2.0 / N) * log_sphere_measure(N)
    return gamma_form, sphere_form


def sobolev_constant_forms(N):
    """Return both closed forms of the Sobolev constant, unchecked."""
    gamma_form, sphere_form = log_sobolev_constant_forms(N)
    return math.exp(gamma_form), math.exp(sphere_form)


def log_sobolev_constant(N):
    gamma_form, sphere_form = log_sobolev_constant_forms(N)
    disagreement = abs(math.expm1(gamma_form - sphere_form))
    if disagreement > SOBOLEV_FAILURE:
        raise InternalConsistencyError(
            "Sobolev constant forms disagree for N={}: relative difference {:.3e}.".format(
                N, disagreement
            )
        )
    if disagreement > SOBOLEV_AGREEMENT:
        logger.warning(
            "Sobolev constant forms for N=%d agree only to %.3e.", N, disagreement
        )
    return gamma_form


def sobolev_constant(N):
    """Return the sharp Sobolev constant S_N.

    Both closed forms are evaluated and compared before the value is
    returned.

    >>> abs(sobolev_constant(3) - 5.4779) < 1e-3
    True
    """
    return math.exp(log_sobolev_constant(N))


def duplication_residual(N):
    """Return the relative residual of the Legendre duplication formula.

    Compares Gamma(N)Gamma(N+1/2) with 2^(1-2N) sqrt(pi) Gamma(2N) on the
    logarithmic scale.
    """
    N = _check_positive("N", N)
    lhs = log_gamma(N) + log_gamma(N + 0.5)
    rhs = (1.0 - 2.0 * N) * LOG_2 + 0.5 * LOG_PI + log_gamma(2.0 * N)
    return abs(math.expm1(lhs - rhs))


def stirling_ratio(N):
    """Return Gamma(N+1) / (sqrt(2 pi N) (N/e)^N)."""
    N = _check_positive("N", N)
    log_ratio = log_gamma(N + 1.0) - 0.5 * math.log(2.0 * math.pi * N) - N * (
        math.log(N) - 1.0
    )
    return math.exp(log_ratio)
