"""The acceptance suite run by ``critbubble verify``.

Each criterion is a function taking a :class:`Context` and returning a
dictionary of measured quantities; it raises :class:`CriterionFailed` (or any
library error) when the check does not hold. Tolerances are divided by
:attr:`Context.strictness`, which is how fault injection is done.
"""

import json
import logging
import math
import os.path
from importlib import resources

import numpy as np

from . import ledger, quad, specfn, threshold
from .bubble import (
    CoronParams,
    axis,
    bubble_grad_sq,
    bubble_l2_sq,
    standard_bubble,
    truncated_bubble,
    truncation_error,
)
from .exceptions import CritBubbleError, DivergenceError
from .extractor import ExtractionSettings, SyntheticSpec, extract_all, make_ps_sequence
from .report import SCHEMA_VERSION, render_csv, render_json
from .specfn import DimPair
from .utils import atomic_write, timer

logger = logging.getLogger(__name__)

GOLDENS_FILE = "goldens.json"

#: Default relative tolerance of golden float comparisons.
GOLDEN_TOL = 1e-9

#: Relative tolerance of pinned quadrature values, which carry the
#: dual-oracle disagreement.
QUADRATURE_GOLDEN_TOL = 1e-3

THRESHOLD_ORDERS = (0.25, 0.5, 0.75)

DUAL_PAIRS = [(N, s) for N in (3, 4, 5, 6) for s in (0.25, 0.5, 0.75)]


class CriterionFailed(Exception):
    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail or {}


def require(condition, message, **detail):
    if not condition:
        raise CriterionFailed(message, detail)


class Context:
    """Shared state of one acceptance run.

    :ivar RunConfig run: The run configuration.
    :ivar float strictness: Divisor applied to every tolerance.
    :ivar dict goldens: Reference values shipped with the package, updated
        with those pinned in the output directory.
    :ivar dict pinned: Values computed in this run that are pinned.
    """

    def __init__(self, run, strictness=1.0, goldens=None):
        self.run = run
        self.spec = run.quad
        self.strictness = float(strictness)
        self.goldens = goldens or {}
        self.pinned = {}

    def tol(self, value):
        return value / self.strictness

    def pin(self, key, value, rel_tol=GOLDEN_TOL):
        """Record `value` under `key` and compare it with the golden value.

        Floats, and lists of floats elementwise, agree when they differ by at
        most ``rel_tol * max(|golden|, 1)``.
        """
        self.pinned[key] = value
        if key not in self.goldens:
            return
        golden = self.goldens[key]
        require(
            _same(value, golden, rel_tol),
            "Value of {} changed from pinned {!r} to {!r}.".format(key, golden, value),
        )


def _same(value, golden, rel_tol):
    if isinstance(value, (list, tuple)) and isinstance(golden, list):
        return len(value) == len(golden) and all(
            _same(v, g, rel_tol) for v, g in zip(value, golden)
        )
    if isinstance(value, float) and isinstance(golden, (int, float)):
        return abs(value - golden) <= rel_tol * max(abs(golden), 1.0)
    return value == golden


CRITERIA = []


def criterion(number, name):
    def _inner(func):
        func.number = number
        func.title = name
        CRITERIA.append(func)
        return func

    return _inner


@criterion(1, "sobolev-constant-consistency")
def sobolev_consistency(ctx):
    worst = 0.0
    for N in range(3, 501):
        a, b = specfn.log_sobolev_constant_forms(N)
        worst = max(worst, abs(math.expm1(a - b)))
    s3 = specfn.sobolev_constant(3)
    require(worst <= ctx.tol(1e-12), "Sobolev constant forms disagree.", worst=worst)
    require(abs(s3 - 5.4779) <= ctx.tol(1e-3), "S_3 is off.", s3=s3)
    return {"worst_disagreement": worst, "S_3": s3}


@criterion(2, "bubble-extremality")
def bubble_extremality(ctx):
    worst = 0.0
    for N in range(3, 9):
        report = quad.mixed_quotient(standard_bubble(N), N, 0.5, ctx.spec, include_seminorm=False)
        worst = max(worst, abs(report.gradient_quotient / specfn.sobolev_constant(N) - 1.0))
    require(worst <= ctx.tol(1e-6), "Gradient quotient of u_0 differs from S_N.", worst=worst)
    return {"worst_relative_error": worst}


@criterion(3, "non-attainment")
def non_attainment(ctx):
    N, s, k_list = 3, 0.5, [1.0, 2.0, 4.0, 8.0, 16.0]
    u = truncated_bubble(N, 10.0)
    reports = quad.rescaled_quotient_sequence(u, N, s, k_list, ctx.spec)
    quotients = [r.quotient for r in reports]
    level = specfn.sobolev_constant(N)
    scaling = quad.seminorm_scaling_error(reports, k_list, s)
    require(all(b < a for a, b in zip(quotients, quotients[1:])),
            "Quotients are not strictly decreasing.", quotients=quotients)
    require(all(q > level for q in quotients), "A quotient is not above S_N.")
    require(scaling <= ctx.tol(1e-3), "Seminorm part does not follow k^(2s-2).", scaling=scaling)
    return {"quotients": quotients, "scaling_error": scaling,
            "limit": quad.extrapolate_quotient(reports, k_list, s)}


@criterion(4, "dual-oracle-seminorm")
def dual_oracle(ctx):
    worst = 0.0
    divergent = []
    for N, s in DUAL_PAIRS:
        dim = DimPair(N, s)
        u0 = standard_bubble(N)
        if not dim.finite_seminorm:
            for route in (quad.gagliardo_direct, quad.gagliardo_fourier):
                try:
                    route(u0, N, s, ctx.spec)
                except DivergenceError:
                    continue
                raise CriterionFailed("{} did not diverge for N={}, s={}.".format(
                    route.__name__, N, s))
            divergent.append([N, s])
            continue
        direct = quad.gagliardo_direct(u0, N, s, ctx.spec).value
        fourier = quad.gagliardo_fourier(u0, N, s, ctx.spec).value
        worst = max(worst, abs(direct / fourier - 1.0))
        ctx.pin("seminorm.{}.{}".format(N, s), direct, QUADRATURE_GOLDEN_TOL)
    require(worst <= ctx.tol(1e-3), "Seminorm oracles disagree.", worst=worst)
    return {"worst_disagreement": worst, "divergent": divergent}


@criterion(5, "seminorm-scaling-law")
def scaling_law(ctx):
    worst = 0.0
    for N, s in DUAL_PAIRS:
        if not DimPair(N, s).finite_seminorm:
            continue
        base = quad.gagliardo_direct(standard_bubble(N), N, s, ctx.spec).value
        for lam in (0.5, 2.0):
            value = quad.gagliardo_direct(standard_bubble(N, scale=lam), N, s, ctx.spec).value
            worst = max(worst, abs(value / base / lam ** (2.0 - 2.0 * s) - 1.0))
    require(worst <= ctx.tol(1e-4), "Seminorm does not scale like lam^(2-2s).", worst=worst)
    return {"worst_relative_error": worst}


@criterion(6, "bound-chain")
def bound_chain(ctx):
    margins = {}
    for N in (5, 6):
        for s in THRESHOLD_ORDERS:
            dim = DimPair(N, s)
            exact = threshold.exact_seminorm(N, s, ctx.spec).value
            bound = threshold.seminorm_upper_bound(dim)
            threshold.analytic_margin(dim)
            require(exact < bound, "Quadrature seminorm exceeds its bound.", N=N, s=s)
            margins["{}/{}".format(N, s)] = bound - exact
    return {"margins": margins}


@criterion(7, "threshold-tables")
def threshold_tables(ctx):
    table = {}
    for s in THRESHOLD_ORDERS:
        analytic = threshold.threshold_search(s, "analytic", (5, 500), workers=ctx.run.workers)
        require(analytic.N0 is not None, "No analytic threshold for s={}.".format(s))
        exact = threshold.threshold_search(
            s, "exact", (5, ctx.run.exact_n_max), ctx.spec, workers=ctx.run.workers
        )
        if exact.N0 is not None:
            require(exact.N0 <= analytic.N0, "Exact threshold above analytic one.", s=s)
        table[str(s)] = {"analytic": analytic.N0, "exact": exact.N0}
        ctx.pin("threshold.{}.analytic".format(s), analytic.N0)
        ctx.pin("threshold.{}.analytic.log_margin".format(s),
                [cell.value.log_margin for cell in analytic.table], rel_tol=1e-8)
        ctx.pin("threshold.{}.exact.5..{}".format(s, ctx.run.exact_n_max), exact.N0)
        for cell in exact.table:
            require(not cell.failed, "Exact cell failed.", s=s, N=cell.key, error=cell.error)
            ctx.pin("threshold.{}.exact.{}".format(s, cell.key), cell.value.lhs_exact,
                    QUADRATURE_GOLDEN_TOL)
    return {"thresholds": table}


@criterion(8, "r-of-n-limit")
def r_of_n_limit(ctx):
    worst = 0.0
    for N in range(5, 501):
        direct, simplified = threshold.log_r_of_n_forms(N)
        worst = max(worst, abs(math.expm1(direct - simplified)))
    limit = threshold.r_of_n(400) * math.pi ** 2 * math.e ** 2
    require(worst <= ctx.tol(1e-10), "R(N) forms disagree.", worst=worst)
    require(abs(limit - 1.0) <= ctx.tol(0.01), "R(400) is far from its limit.", limit=limit)
    ctx.pin("r_of_n.5", threshold.r_of_n(5))
    return {"worst_disagreement": worst, "scaled_r_400": limit}


@criterion(9, "asymptotics")
def asymptotics(ctx):
    table = threshold.asymptotic_scan(500)
    bound = ctx.tol(1e-6)
    require(table.sphere_ratio_below(bound, 80), "Sphere ratio not small beyond N=80.")
    require(table.ok, "An asymptotic trend fails.", trends=table.trends)
    return {"trends": table.trends}


@criterion(10, "stirling-duplication")
def stirling_duplication(ctx):
    worst_excess = 0.0
    for N in (10, 20, 50, 100, 200, 500):
        ratio = specfn.stirling_ratio(N)
        require(1.0 < ratio <= 1.0 + 1.0 / (10.0 * N) / ctx.strictness,
                "Stirling ratio out of range.", N=N, ratio=ratio)
        worst_excess = max(worst_excess, (ratio - 1.0) * N)
    residual = max(specfn.duplication_residual(x) for x in (1.0, 2.5, 10.0, 50.0, 200.0))
    require(residual <= ctx.tol(1e-11), "Duplication formula residual too large.",
            residual=residual)
    return {"worst_scaled_excess": worst_excess, "duplication_residual": residual}


@criterion(11, "truncation-family")
def truncation_family(ctx):
    N = 5
    sigma = axis(N)
    energy = bubble_grad_sq(N) + bubble_l2_sq(N)
    sups = []
    for R in (10.0, 30.0, 100.0):
        errors = [
            truncation_error(N, CoronParams(t, sigma), R, ctx.spec).value
            for t in (0.0, 0.25, 0.5, 0.75, 0.9)
        ]
        sups.append(max(errors))
        ctx.pin("truncation.{}.0.{:g}".format(N, R), errors[0], rel_tol=1e-6)
    require(all(b < a for a, b in zip(sups, sups[1:])), "Truncation error not decreasing.",
            sups=sups)
    require(sups[-1] < ctx.tol(0.01) * energy, "Truncation error too large at R=100.")
    return {"sup_errors": sups, "relative_at_100": sups[-1] / energy}


@criterion(12, "energy-quantization")
def energy_quantization(ctx):
    levels = {}
    for N in (3, 4, 5):
        beta = ledger.bubble_energy(N, ctx.spec)
        for count in (0, 1, 2, 3):
            level = ledger.ps_level(ledger.ProfileSet.ground(N, count), N)
            require(level == count * beta, "Level arithmetic is off.", N=N, count=count)
        require(ledger.coron_window(N) == (beta, 2.0 * beta), "Coron window is off.", N=N)
        ctx.pin("bubble_energy.{}".format(N), beta)
        levels[str(N)] = beta
    return {"bubble_energy": levels}


def _match(recovered, truth):
    errors = []
    for b in truth:
        best = min(recovered, key=lambda p: np.linalg.norm(p.center - b.center))
        errors.append((
            float(np.linalg.norm(best.center - b.center)) / b.scale,
            abs(best.scale / b.scale - 1.0),
        ))
    return errors


def _off_diagonal(matrix):
    n = matrix.shape[0]
    return [matrix[i, j] for i in range(n) for j in range(n) if i != j]


@criterion(13, "extractor")
def extractor(ctx):
    spec = SyntheticSpec()
    settings = ExtractionSettings(seed=ctx.run.seed)
    results = {}
    for k in (16, 32):
        oracle = make_ps_sequence(spec, k)
        results[k] = (oracle, extract_all(oracle, spec.N, 0.5, settings=settings))
    oracle, result = results[32]
    require(len(result.profiles) == len(oracle.bubbles), "Wrong number of profiles.",
            found=len(result.profiles))
    errors = _match(result.profiles, oracle.bubbles)
    center_error = max(e[0] for e in errors)
    scale_error = max(e[1] for e in errors)
    require(center_error <= ctx.tol(0.01), "Center error too large.", error=center_error)
    require(scale_error <= ctx.tol(0.02), "Scale error too large.", error=scale_error)
    require(result.relative_gap <= ctx.tol(0.01), "Energy additivity gap too large.",
            gap=result.relative_gap)
    before = _off_diagonal(results[16][1].separation)
    after = _off_diagonal(result.separation)
    require(before and min(after) >= 2.0 * max(before), "Separation did not double.")
    return {"center_error": center_error, "scale_error": scale_error,
            "relative_gap": result.relative_gap, "separation_16": max(before),
            "separation_32": min(after)}


@criterion(14, "sign-changing-identity")
def sign_changing(ctx):
    u_plus, u_minus = quad.bump_profile(0.5, 0.5), quad.bump_profile(2.5, 0.5)
    residual = ledger.sign_changing_identity(u_plus, u_minus, DimPair(3, 0.5), ctx.spec)
    require(residual <= ctx.tol(1e-3), "Identity residual too large.", residual=residual)
    interaction = quad.cross_term(u_plus, u_minus, 3, 0.5, ctx.spec).value
    ctx.pin("cross_term.3.0.5", interaction, rel_tol=1e-6)
    return {"residual": residual, "cross_term": interaction}


def _clear_caches():
    for func in (threshold.exact_seminorm, quad.calibrated_normalization):
        func._cache.clear()


@criterion(15, "determinism")
def determinism(ctx):
    others = {c.number for c in CRITERIA if c is not determinism}
    reports = []
    for _ in range(2):
        _clear_caches()
        report = run_verify(ctx.run, strictness=ctx.strictness, only=others)
        reports.append(render_json(report))
    require(reports[0] == reports[1], "Repeated runs produced different reports.")
    return {"bytes": len(reports[0]), "criteria": sorted(others)}


@criterion(16, "interpolation-constant")
def interpolation_constant(ctx):
    N, s1, s2 = 3, 0.3, 0.7
    family = quad.interpolation_family()
    c_star, ratios = quad.interpolation_constant(family, N, s1, s2, ctx.spec)
    u = family[0]
    base = ratios[0]
    scaled = quad.interpolation_ratio(u.scaled(3.0), N, s1, s2, ctx.spec)
    dilated = quad.interpolation_ratio(u.dilated(2.0), N, s1, s2, ctx.spec)
    scale_error = max(abs(scaled / base - 1.0), abs(dilated / base - 1.0))
    require(all(r <= c_star for r in ratios), "A ratio exceeds the empirical constant.")
    require(scale_error <= ctx.tol(1e-5), "Interpolation ratio is not scale invariant.",
            error=scale_error)
    ctx.pin("interpolation.3.0.3.0.7", c_star, QUADRATURE_GOLDEN_TOL)
    return {"c_star": c_star, "ratios": ratios, "scale_error": scale_error}


def load_packaged_goldens():
    """Return the reference values shipped with the package."""
    data = json.loads(resources.read_text(__package__, GOLDENS_FILE))
    data.pop("schema_version", None)
    return data


def load_goldens(directory):
    """Return the values pinned in `directory`, or `None`."""
    path = os.path.join(directory, GOLDENS_FILE)
    try:
        with open(path) as fileobj:
            data = json.load(fileobj)
    except FileNotFoundError:
        return None
    data.pop("schema_version", None)
    return data


def save_goldens(directory, pinned):
    atomic_write(os.path.join(directory, GOLDENS_FILE), render_json(pinned))


def run_criterion(func, ctx):
    entry = {"id": func.number, "name": func.title}
    try:
        with timer("Criterion {} took %.2fs".format(func.number), logger=logger):
            detail = func(ctx)
    except CriterionFailed as e:
        entry.update(passed=False, message=str(e), detail=e.detail)
    except CritBubbleError as e:
        entry.update(passed=False, message="{}: {}".format(type(e).__name__, e.format_message()),
                     detail={})
    else:
        entry.update(passed=True, message=None, detail=detail)
    logger.info("Criterion %2d %-30s %s", func.number, func.title,
                "passed" if entry["passed"] else "FAILED")
    return entry


def run_verify(run, strictness=1.0, only=None, pin=False):
    """Run the acceptance criteria and return the report dictionary.

    Pinned values are compared with the goldens shipped with the package,
    overridden by a ``goldens.json`` in the output directory. With `pin` the
    values of a passing run are written to that file.
    """
    goldens = load_packaged_goldens()
    goldens.update(load_goldens(run.output_dir) or {})
    ctx = Context(run, strictness=strictness, goldens=goldens)
    selected = [c for c in CRITERIA if only is None or c.number in only]
    entries = [run_criterion(func, ctx) for func in selected]
    passed = all(e["passed"] for e in entries)
    if pin and ctx.pinned and passed:
        save_goldens(run.output_dir, ctx.pinned)
        logger.info("Pinned %d golden values.", len(ctx.pinned))
    return {
        "criteria": entries,
        "passed": passed,
        "strictness": strictness,
        "schema_version": SCHEMA_VERSION,
    }
