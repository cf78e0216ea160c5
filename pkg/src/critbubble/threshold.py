"""The dimension-threshold inequality for the standard bubble.

The question is for which (N, s) the seminorm of the standard bubble stays
below the gap between two Sobolev levels,

    [u_0]_s^2 < (2^(2/N) - 1) int |grad u_0|^2.

Two predicates are provided. The analytic one replaces ``[u_0]_s^2`` by an
interpolation upper bound assembled from closed forms, so it is a sufficient
condition. The exact one uses the quadrature value of the seminorm. All
closed-form arithmetic is done on the logarithmic scale because both sides
span hundreds of orders of magnitude over the scan range.
"""

import logging
import math
from enum import Enum

import numpy as np
from scipy import optimize

from . import sweep
from .bubble import (
    log_bubble_grad_sq,
    log_bubble_l2_sq,
    log_bubble_lcrit,
    standard_bubble,
    truncated_bubble,
)
from .exceptions import (
    DivergenceError,
    DomainError,
    InternalConsistencyError,
    UnreliableValueError,
)
from .quad import QuadResult, gagliardo_direct, gagliardo_fourier, mixed_quotient
from .specfn import (
    LOG_2,
    LOG_PI,
    DimPair,
    _check_integer,
    log_gamma,
    log_sobolev_constant,
    log_sphere_measure,
    sobolev_constant,
)
from .utils import cache

logger = logging.getLogger(__name__)

#: Agreement required between equivalent closed-form evaluations.
FORM_AGREEMENT = 1e-10

#: Disagreement between the two seminorm oracles beyond which a value is
#: declared unreliable.
DUAL_AGREEMENT = 1e-2

#: A predicate is decided only if its margin exceeds this multiple of the
#: propagated error.
STRICTNESS = 10.0

#: Relative error assumed for closed-form log-Gamma arithmetic.
ANALYTIC_ERROR = 1e-12


class Verdict(Enum):
    HOLDS = "holds"
    FAILS = "fails"
    INDETERMINATE = "indeterminate"

    @classmethod
    def from_margin(cls, margin, error):
        if abs(margin) <= STRICTNESS * error:
            return cls.INDETERMINATE
        return cls.HOLDS if margin > 0 else cls.FAILS


def _g(ell, A, B, a, b):
    return A * ell ** -a + B * ell ** b


def log_g_min(log_A, log_B, a, b):
    """Return ``(log l*, log min g)`` for ``g(l) = A l^-a + B l^b``."""
    total = a + b
    log_ell = (math.log(a) + log_A - math.log(b) - log_B) / total
    coefficient = (b / a) ** (a / total) + (a / b) ** (b / total)
    log_value = math.log(coefficient) + (b / total) * log_A + (a / total) * log_B
    return log_ell, log_value


def g_min_numeric(A, B, a, b, grid=401, center=0.0):
    """Minimize ``g`` by a logarithmic grid scan around ``log l = center``
    followed by golden-section refinement."""
    x = np.linspace(center - 20.0, center + 20.0, grid)
    values = A * np.exp(-a * x) + B * np.exp(b * x)
    i = int(np.clip(np.argmin(values), 1, grid - 2))
    result = optimize.minimize_scalar(
        lambda y: A * math.exp(-a * y) + B * math.exp(b * y),
        bracket=(x[i - 1], x[i], x[i + 1]),
        method="golden",
        tol=1e-12,
    )
    return math.exp(result.x), float(result.fun)


def g_min(A, B, a, b):
    """Return the minimizer and minimum of ``g(l) = A l^-a + B l^b`` on l > 0.

    The closed form is checked against :func:`g_min_numeric`.

    >>> g_min(2.0, 8.0, 1.0, 1.0)
    (0.5, 8.0)
    """
    for name, value in (("A", A), ("B", B), ("a", a), ("b", b)):
        if not value > 0:
            raise DomainError("{} must be positive, got {!r}.".format(name, value))
    ell = (a * A / (b * B)) ** (1.0 / (a + b))
    value = _g(ell, A, B, a, b)
    _, numeric = g_min_numeric(A, B, a, b, center=math.log(ell))
    if abs(numeric / value - 1.0) > FORM_AGREEMENT:
        raise InternalConsistencyError(
            "g_min closed form {!r} disagrees with numeric minimum {!r}.".format(value, numeric)
        )
    return ell, value


def _log_gap(N):
    """Return ``log(2^(2/N) - 1)``."""
    return math.log(math.expm1(2.0 * LOG_2 / N))


def log_seminorm_upper_bound(dim):
    N, s = dim.N, dim.s
    log_l2 = log_bubble_l2_sq(N)
    log_grad = log_bubble_grad_sq(N)
    direct = (
        log_sphere_measure(N - 1)
        - s * LOG_2
        - math.log(s * (1.0 - s))
        + (1.0 - s) * log_l2
        + s * log_grad
    )
    # Same bound as half the minimum of A l^-2s + B l^(2-2s).
    _, log_min = log_g_min(LOG_2 + log_l2 - math.log(s), log_grad - math.log(1.0 - s),
                           2.0 * s, 2.0 * (1.0 - s))
    via_g = log_sphere_measure(N - 1) - LOG_2 + log_min
    if abs(math.expm1(direct - via_g)) > FORM_AGREEMENT:
        raise InternalConsistencyError(
            "Seminorm bound forms disagree for {!r}: {} vs {}.".format(dim, direct, via_g)
        )
    return direct


def seminorm_upper_bound(dim):
    """Return the interpolation upper bound on ``[u_0]_s^2``.

    The bound is ``omega_(N-1) 2^-s / (s (1-s)) (int u_0^2)^(1-s)
    (int |grad u_0|^2)^s`` and requires N >= 5.
    """
    return math.exp(log_seminorm_upper_bound(dim))


def log_rhs(N):
    """Return the log of ``(2^(2/N) - 1) int |grad u_0|^2``."""
    return _log_gap(N) + log_bubble_grad_sq(N)


def log_eq_bound_sides(dim):
    """Return the logs of both sides of the rearranged sufficient condition.

    The left side is ``[omega_(N-1) 2^-s / (s (1-s) (2^(2/N) - 1))]^(1/(1-s))``
    and the right side is ``int |grad u_0|^2 / int u_0^2``, which is also
    ``S_N^2 R(N)``.
    """
    N, s = dim.N, dim.s
    log_lhs = (
        log_sphere_measure(N - 1) - s * LOG_2 - math.log(s * (1.0 - s)) - _log_gap(N)
    ) / (1.0 - s)
    log_ratio = log_bubble_grad_sq(N) - log_bubble_l2_sq(N)
    via_r = 2.0 * log_sobolev_constant(N) + math.log(r_of_n(N))
    if abs(math.expm1(log_ratio - via_r)) > FORM_AGREEMENT:
        raise InternalConsistencyError(
            "Gradient to L^2 ratio disagrees with S_N^2 R(N) for N={}.".format(N)
        )
    return log_lhs, log_ratio


def eq_bound_sides(dim):
    log_lhs, log_rhs_ = log_eq_bound_sides(dim)
    return math.exp(log_lhs), math.exp(log_rhs_)


def _check_analytic_dim(dim):
    if dim.N <= 4:
        raise DomainError(
            "The analytic bound needs N >= 5 (int u_0^2 diverges for N={}).".format(dim.N)
        )


def analytic_margin(dim):
    """Return the log margin ``log rhs - log lhs`` of the sufficient condition.

    Both formulations are evaluated; their log margins differ exactly by the
    factor ``1 - s``.
    """
    _check_analytic_dim(dim)
    log_lhs, log_ratio = log_eq_bound_sides(dim)
    margin = log_ratio - log_lhs
    bound_margin = log_rhs(dim.N) - log_seminorm_upper_bound(dim)
    if abs(bound_margin - (1.0 - dim.s) * margin) > FORM_AGREEMENT * (1.0 + abs(margin)):
        raise InternalConsistencyError(
            "The two forms of the sufficient condition disagree for {!r}.".format(dim)
        )
    return bound_margin


def analytic_predicate(dim):
    """Return whether the sufficient condition holds for `dim`.

    :raises UnreliableValueError: if the log margin lies within the
        strictness band around zero.
    """
    verdict = Verdict.from_margin(analytic_margin(dim), ANALYTIC_ERROR)
    if verdict is Verdict.INDETERMINATE:
        raise UnreliableValueError(
            "The analytic margin for {!r} lies inside its error bar.".format(dim)
        )
    return verdict is Verdict.HOLDS


def _check_exact_dim(dim):
    if not dim.finite_seminorm:
        raise UnreliableValueError(
            "[u_0]_s^2 is infinite for N + 2s <= 4 (N={}, s={}).".format(dim.N, dim.s)
        )


@cache
def exact_seminorm(N, s, spec):
    """Return ``[u_0]_s^2`` agreed by the direct and frequency-side oracles."""
    dim = DimPair(N, s)
    _check_exact_dim(dim)
    u0 = standard_bubble(dim.N)
    try:
        direct = gagliardo_direct(u0, dim.N, dim.s, spec)
        fourier = gagliardo_fourier(u0, dim.N, dim.s, spec)
    except DivergenceError as e:
        raise UnreliableValueError(e.format_message())
    disagreement = abs(direct.value - fourier.value) / abs(fourier.value)
    if disagreement > DUAL_AGREEMENT:
        raise UnreliableValueError(
            "Seminorm oracles disagree by {:.2e} for N={}, s={}.".format(
                disagreement, dim.N, dim.s
            )
        )
    value = 0.5 * (direct.value + fourier.value)
    error = max(direct.error, fourier.error, 0.5 * abs(direct.value - fourier.value))
    logger.debug("Exact [u_0]_%g^2 for N=%d: %.10g +/- %.2e", s, N, value, error)
    return QuadResult(value, error)


def exact_verdict(dim, spec):
    """Return the verdict of the exact inequality and the seminorm used."""
    semi = exact_seminorm(dim.N, dim.s, spec)
    rhs = math.exp(log_rhs(dim.N))
    return Verdict.from_margin(rhs - semi.value, semi.error + ANALYTIC_ERROR * rhs), semi


def exact_predicate(dim, spec):
    """Return whether ``[u_0]_s^2 < (2^(2/N) - 1) int |grad u_0|^2`` holds.

    :raises UnreliableValueError: if the seminorm is infinite, the two oracles
        disagree, or the margin lies inside the error bar.
    """
    verdict, semi = exact_verdict(dim, spec)
    if verdict is Verdict.INDETERMINATE:
        raise UnreliableValueError(
            "The exact margin for {!r} lies inside its error bar.".format(dim)
        )
    return verdict is Verdict.HOLDS


class BoundReport:
    """Both sides of the threshold inequality for one (N, s).

    :ivar DimPair dim: The dimension pair.
    :ivar lhs_analytic: The interpolation bound on ``[u_0]_s^2``, or `None`.
    :ivar lhs_exact: The quadrature value of ``[u_0]_s^2``, or `None`.
    :ivar float rhs: ``(2^(2/N) - 1) int |grad u_0|^2``.
    :ivar error: Error estimate of `lhs_exact`.
    """

    def __init__(self, dim, rhs, lhs_analytic=None, lhs_exact=None, error=None,
                 log_margin=None):
        self.dim = dim
        self.rhs = rhs
        self.lhs_analytic = lhs_analytic
        self.lhs_exact = lhs_exact
        self.error = error
        self.log_margin = log_margin
        if lhs_analytic is not None and lhs_exact is not None and not lhs_exact < lhs_analytic:
            raise InternalConsistencyError(
                "Quadrature seminorm {!r} exceeds its upper bound {!r} for {!r}.".format(
                    lhs_exact, lhs_analytic, dim
                )
            )

    @property
    def predicate_analytic(self):
        verdict = self.verdict_analytic
        if verdict is None or verdict is Verdict.INDETERMINATE:
            return None
        return verdict is Verdict.HOLDS

    @property
    def verdict_analytic(self):
        if self.log_margin is None:
            return None
        return Verdict.from_margin(self.log_margin, ANALYTIC_ERROR)

    @property
    def verdict_exact(self):
        if self.lhs_exact is None:
            return None
        return Verdict.from_margin(self.rhs - self.lhs_exact, self.error + ANALYTIC_ERROR * self.rhs)

    @property
    def predicate_exact(self):
        verdict = self.verdict_exact
        if verdict is None or verdict is Verdict.INDETERMINATE:
            return None
        return verdict is Verdict.HOLDS

    @property
    def margin_analytic(self):
        if self.lhs_analytic is None:
            return None
        return self.rhs - self.lhs_analytic

    @property
    def margin_exact(self):
        if self.lhs_exact is None:
            return None
        return self.rhs - self.lhs_exact

    def holds(self, mode):
        if mode == "analytic":
            return self.verdict_analytic is Verdict.HOLDS
        return self.verdict_exact is Verdict.HOLDS

    def __repr__(self):
        return "BoundReport({!r}, analytic={}, exact={})".format(
            self.dim, self.predicate_analytic, self.predicate_exact
        )


def bound_report(dim, mode, spec=None):
    """Return the :class:`BoundReport` of `dim` in `mode` (analytic or exact).

    In exact mode the analytic side is filled in too whenever N >= 5.
    """
    rhs = math.exp(log_rhs(dim.N))
    lhs_analytic = log_margin = None
    if mode == "analytic" or dim.N >= 5:
        _check_analytic_dim(dim)
        log_margin = analytic_margin(dim)
        lhs_analytic = seminorm_upper_bound(dim)
    if mode == "analytic":
        return BoundReport(dim, rhs, lhs_analytic=lhs_analytic, log_margin=log_margin)
    if mode != "exact":
        raise DomainError("Unknown mode {!r}.".format(mode))
    semi = exact_seminorm(dim.N, dim.s, spec)
    return BoundReport(dim, rhs, lhs_analytic=lhs_analytic, lhs_exact=semi.value,
                       error=semi.error, log_margin=log_margin)


class _ReportCell:
    def __init__(self, s, mode, spec):
        self.s = s
        self.mode = mode
        self.spec = spec

    def __call__(self, N):
        return bound_report(DimPair(N, self.s), self.mode, self.spec)


class ThresholdRecord:
    """The outcome of a threshold scan.

    :ivar float s: Fractional order.
    :ivar str mode: ``analytic`` or ``exact``.
    :ivar N0: Least N from which the predicate holds for every tested larger
        N, or `None`.
    :ivar list table: One :class:`~critbubble.sweep.CellOutcome` per N.
    :ivar list isolated: Dimensions below N0 where the predicate holds.
    """

    def __init__(self, s, mode, N0, table, isolated):
        self.s = s
        self.mode = mode
        self.N0 = N0
        self.table = table
        self.isolated = isolated

    @property
    def monotone(self):
        return not self.isolated

    @property
    def failures(self):
        return [cell for cell in self.table if cell.failed]

    def __repr__(self):
        return "ThresholdRecord(s={!r}, mode={!r}, N0={!r})".format(self.s, self.mode, self.N0)

    def rows(self):
        """Return one table row (a dict over :data:`TABLE_COLUMNS`) per cell."""
        rows = []
        for cell in self.table:
            row = {"N": cell.key, "s": self.s}
            if cell.failed:
                row["status"] = cell.error
                rows.append(row)
                continue
            report = cell.value
            row.update(
                rhs=report.rhs,
                lhs_analytic=report.lhs_analytic,
                lhs_exact=report.lhs_exact,
                margin_analytic=report.margin_analytic,
                margin_exact=report.margin_exact,
                predicate_analytic=report.predicate_analytic,
                predicate_exact=report.predicate_exact,
                error_estimate=report.error,
                status="holds" if report.holds(self.mode) else "fails",
            )
            rows.append(row)
        return rows

    def summary(self):
        return {
            "s": self.s,
            "mode": self.mode,
            "N0": self.N0,
            "monotone": self.monotone,
            "isolated": list(self.isolated),
            "failed_cells": [cell.key for cell in self.failures],
        }


TABLE_COLUMNS = [
    "N",
    "s",
    "rhs",
    "lhs_analytic",
    "lhs_exact",
    "margin_analytic",
    "margin_exact",
    "predicate_analytic",
    "predicate_exact",
    "error_estimate",
    "status",
]


def threshold_search(s, mode, N_range, spec=None, workers=1):
    """Return the :class:`ThresholdRecord` of `s` over ``N_range = (lo, hi)``.

    Cell errors are recorded in the table and count as "does not hold".
    Dimensions below N0 where the predicate holds are reported as
    non-monotone behaviour.
    """
    lo, hi = N_range
    lo = _check_integer("N_lo", lo, 3)
    hi = _check_integer("N_hi", hi, lo)
    first = DimPair(lo, s)
    if mode == "analytic":
        _check_analytic_dim(first)
    elif mode == "exact":
        _check_exact_dim(first)
    else:
        raise DomainError("Unknown mode {!r}.".format(mode))

    table = sweep.run_cells(_ReportCell(s, mode, spec), range(lo, hi + 1), workers=workers)
    holds = [not cell.failed and cell.value.holds(mode) for cell in table]

    N0 = None
    for N, ok in zip(reversed(range(lo, hi + 1)), reversed(holds)):
        if not ok:
            break
        N0 = N
    limit = hi + 1 if N0 is None else N0
    isolated = [N for N, ok in zip(range(lo, hi + 1), holds) if ok and N < limit]
    if isolated:
        logger.warning("Predicate (%s, s=%g) holds below its threshold at N=%s.", mode, s, isolated)
    logger.info("Threshold for s=%g (%s mode): N0=%s", s, mode, N0)
    return ThresholdRecord(s, mode, N0, table, isolated)


def log_r_of_n_forms(N):
    """Return the logs of R(N) as displayed with the threshold inequality and
    of its duplication-simplified form.

    The displayed form is

        2^(3 - 2/N - N) pi^(-3/2 - 1/N) Gamma(N-2) (Gamma(N)/Gamma(N/2))^(2/N)
        Gamma((1+N)/2)^(-1 + 2/N) / (N (N-2) Gamma(N/2 - 2)).
    """
    N = _check_integer("N", N, 5)
    direct = (
        (3.0 - 2.0 / N - N) * LOG_2
        - (1.5 + 1.0 / N) * LOG_PI
        + log_gamma(N - 2.0)
        + (2.0 / N) * (log_gamma(N) - log_gamma(0.5 * N))
        + (-1.0 + 2.0 / N) * log_gamma(0.5 * (N + 1))
        - math.log(N * (N - 2.0))
        - log_gamma(0.5 * N - 2.0)
    )
    simplified = (
        -2.0 * LOG_PI
        + 2.0 * LOG_2
        + math.log((N - 4.0) / (N - 2.0))
        - (4.0 / N) * LOG_2
        - (2.0 / N) * LOG_PI
        + (4.0 / N) * log_gamma(0.5 * (N + 1))
        - math.log(N * (N - 1.0))
    )
    return direct, simplified


def r_of_n_forms(N):
    direct, simplified = log_r_of_n_forms(N)
    return math.exp(direct), math.exp(simplified)


def r_of_n(N):
    """Return R(N), the factor with ``S_N^2 R(N) = int |grad u_0|^2 / int u_0^2``.

    R(N) tends to ``1 / (pi^2 e^2)`` as N grows.
    """
    direct, simplified = log_r_of_n_forms(N)
    if abs(math.expm1(direct - simplified)) > FORM_AGREEMENT:
        raise InternalConsistencyError(
            "The two forms of R(N) disagree for N={}.".format(N)
        )
    return math.exp(direct)


class AsymptoticRow:
    def __init__(self, N, log_sphere_ratio, sobolev, log_bound_ratio):
        self.N = N
        self.log_sphere_ratio = log_sphere_ratio
        self.sobolev = sobolev
        self.log_bound_ratio = log_bound_ratio

    @property
    def sphere_ratio(self):
        return math.exp(self.log_sphere_ratio)

    @property
    def bound_ratio(self):
        if self.log_bound_ratio is None:
            return None
        return math.exp(self.log_bound_ratio)


class AsymptoticTable:
    """Per-N asymptotic quantities and their trend checks.

    :ivar list rows: One :class:`AsymptoticRow` per N.
    :ivar dict trends: Trend name to boolean, checked on the tail half.
    """

    def __init__(self, s, rows):
        self.s = s
        self.rows = rows
        self.trends = self._trends()

    def _tail(self):
        return self.rows[len(self.rows) // 2:]

    def _trends(self):
        tail = self._tail()
        sphere = [row.log_sphere_ratio for row in tail]
        sobolev = [row.sobolev for row in self.rows]
        bound = [row.log_bound_ratio for row in tail if row.log_bound_ratio is not None]
        return {
            "sphere_ratio_to_zero": all(b < a for a, b in zip(sphere, sphere[1:]))
            and sphere[-1] < sphere[0],
            "sobolev_to_infinity": all(b > a for a, b in zip(sobolev, sobolev[1:])),
            "bound_ratio_to_zero": all(b < a for a, b in zip(bound, bound[1:])),
        }

    @property
    def ok(self):
        return all(self.trends.values())

    def sphere_ratio_below(self, bound, N_from):
        """Return whether the sphere ratio stays below `bound` for every N >= `N_from`."""
        log_bound = math.log(bound)
        return all(row.log_sphere_ratio < log_bound for row in self.rows if row.N >= N_from)


def asymptotic_scan(N_hi, s=0.5):
    """Tabulate ``omega_(N-1) / (2^(2/N) - 1)``, ``S_N`` and the ratio of the
    two sides of the sufficient condition for N from 3 to `N_hi`."""
    N_hi = _check_integer("N_hi", N_hi, 10)
    rows = []
    for N in range(3, N_hi + 1):
        log_sphere_ratio = log_sphere_measure(N - 1) - _log_gap(N)
        log_ratio = None
        if N >= 5:
            log_lhs, log_rhs_ = log_eq_bound_sides(DimPair(N, s))
            log_ratio = log_lhs - log_rhs_
        rows.append(AsymptoticRow(N, log_sphere_ratio, sobolev_constant(N), log_ratio))
    return AsymptoticTable(s, rows)


class ConcentrationReport:
    """The quotient of the concentrating bubble and the level it is compared with.

    :ivar float quotient: The quotient value.
    :ivar float level: ``2^(2/N) S_N``.
    """

    def __init__(self, dim, t, quotient, level):
        self.dim = dim
        self.t = t
        self.quotient = quotient
        self.level = level

    @property
    def below(self):
        return self.quotient < self.level

    def __float__(self):
        return self.quotient

    def __repr__(self):
        return "ConcentrationReport({!r}, t={!r}, quotient={!r}, level={!r})".format(
            self.dim, self.t, self.quotient, self.level
        )


def concentrating_quotient(dim, t, mode="analytic", spec=None):
    """Return the quotient ``(|grad u_0|^2 + (1-t)^(2-2s) [u_0]_s^2) /
    ||u_0||_(2*)^2`` of the bubble concentrating as t -> 1.

    In analytic mode the seminorm is replaced by its upper bound.
    """
    if not 0.0 <= t < 1.0:
        raise DomainError("t must lie in [0, 1), got {!r}.".format(t))
    if mode == "analytic":
        _check_analytic_dim(dim)
        semi = seminorm_upper_bound(dim)
    elif mode == "exact":
        semi = exact_seminorm(dim.N, dim.s, spec).value
    else:
        raise DomainError("Unknown mode {!r}.".format(mode))
    N, s = dim.N, dim.s
    norm_sq = math.exp((N - 2.0) / N * log_bubble_lcrit(N))
    grad = math.exp(log_bubble_grad_sq(N))
    quotient = (grad + (1.0 - t) ** (2.0 - 2.0 * s) * semi) / norm_sq
    level = 2.0 ** (2.0 / N) * sobolev_constant(N)
    return ConcentrationReport(dim, t, quotient, level)


lemma43_quotient = concentrating_quotient


def truncated_family_quotient(dim, R, spec):
    """Return the mixed quotient of the radial truncated bubble ``w_(0,R)``."""
    report = mixed_quotient(truncated_bubble(dim.N, R), dim.N, dim.s, spec)
    logger.debug("Truncated quotient N=%d s=%g R=%g: %.10g", dim.N, dim.s, R, report.quotient)
    return report.quotient
