"""Synthetic Palais-Smale sequences and a profile extractor.

A synthetic sequence is a closed-form sum of solution-normalized bubbles
whose centers and scales follow prescribed schedules in the sequence index
k, plus an optional base profile and a vanishing smooth remainder. The
extractor only sees pointwise values of such a sum. It repeatedly locates the
highest peak, fits a bubble to it and subtracts the fit, until the limiting
energy of what is left drops below half the energy of one ground bubble.

Energies of the pieces are exact (closed forms); the non-additive part of the
energy, which is the only genuinely non-radial integral, is estimated by
importance sampling with a fixed seed.
"""

import logging
import math

import numpy as np
from scipy import ndimage, optimize, stats

from .bubble import Bubble, axis, solution_amplitude
from .exceptions import DomainError, FitFailureError, NoConcentrationError
from .ledger import bubble_energy, profile_energy, separation_matrix
from .specfn import DimPair, _check_integer

logger = logging.getLogger(__name__)

#: Default absolute peak height under which a field counts as flat.
FLAT_THRESHOLD = 1e-8

#: Fits with a normalized misfit above this are rejected.
MAX_FIT_RESIDUAL = 0.05


def half_height_ratio(N):
    """Return ``sqrt(2^(2/(N-2)) - 1)``, the half-height radius of a unit-scale
    bubble.

    >>> half_height_ratio(4)
    1.0
    """
    N = _check_integer("N", N, 3)
    return math.sqrt(2.0 ** (2.0 / (N - 2)) - 1.0)


class BubbleSchedule:
    """Parameters of one bubble along the sequence.

    The center at index k is ``center + drift / k`` and the scale is
    ``scale / k``.
    """

    def __init__(self, center, drift=None, scale=1.0):
        self.center = np.asarray(center, dtype=float)
        self.drift = np.zeros_like(self.center) if drift is None else np.asarray(drift, dtype=float)
        if self.drift.shape != self.center.shape:
            raise DomainError("Schedule drift and center have different shapes.")
        if not scale > 0:
            raise DomainError("Schedule scale must be positive, got {!r}.".format(scale))
        self.scale = float(scale)

    def at(self, k):
        return self.center + self.drift / k, self.scale / k

    def to_dict(self):
        return {
            "center": self.center.tolist(),
            "drift": self.drift.tolist(),
            "scale": self.scale,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(data["center"], data.get("drift"), data.get("scale", 1.0))


def default_schedules(N):
    """Return two bubbles concentrating at ``+-e_1 / 2`` while drifting
    slowly towards each other."""
    e1 = axis(N)
    return [
        BubbleSchedule(0.5 * e1, -e1 / 64.0, 1.0),
        BubbleSchedule(-0.5 * e1, e1 / 64.0, 1.0),
    ]


class SyntheticSpec:
    """Description of a synthetic Palais-Smale sequence.

    :ivar int N: Dimension (3, 4 or 5).
    :ivar bool base: Whether the unit bubble at the origin is added as weak
        limit.
    :ivar list schedules: One :class:`BubbleSchedule` per bubble.
    :ivar float remainder: The remainder amplitude is ``remainder / k``.
    """

    def __init__(self, N=5, base=False, schedules=None, remainder=1e-3,
                 bump_center=None, bump_width=0.5):
        self.N = _check_integer("N", N, 3)
        if self.N > 5:
            raise DomainError("Synthetic sequences are provided for N in {3, 4, 5}.")
        self.base = bool(base)
        self.schedules = default_schedules(self.N) if schedules is None else list(schedules)
        self.remainder = float(remainder)
        self.bump_center = 2.0 * axis(self.N, 1) if bump_center is None else np.asarray(
            bump_center, dtype=float
        )
        if not bump_width > 0:
            raise DomainError("bump_width must be positive.")
        self.bump_width = float(bump_width)
        for schedule in self.schedules:
            if schedule.center.shape != (self.N,):
                raise DomainError("Schedule center must be a point of R^{}.".format(self.N))
        for i, a in enumerate(self.schedules):
            for b in self.schedules[i + 1:]:
                if np.allclose(a.center, b.center):
                    raise DomainError(
                        "Two schedules share the limit center {}; their separation stays "
                        "bounded.".format(a.center.tolist())
                    )

    def to_dict(self):
        return {
            "N": self.N,
            "base": self.base,
            "schedules": [s.to_dict() for s in self.schedules],
            "remainder": self.remainder,
            "bump_center": self.bump_center.tolist(),
            "bump_width": self.bump_width,
        }

    @classmethod
    def from_dict(cls, data):
        schedules = data.get("schedules")
        if schedules is not None:
            schedules = [BubbleSchedule.from_dict(s) for s in schedules]
        return cls(
            N=data.get("N", 5),
            base=data.get("base", False),
            schedules=schedules,
            remainder=data.get("remainder", 1e-3),
            bump_center=data.get("bump_center"),
            bump_width=data.get("bump_width", 0.5),
        )


class PSOracle:
    """Pointwise evaluation of the k-th member of a synthetic sequence.

    :ivar list bubbles: The bubbles present at index k (ground truth).
    :ivar float eps: Remainder amplitude at index k.
    """

    def __init__(self, spec, k):
        self.N = spec.N
        self.k = k
        amplitude = solution_amplitude(spec.N)
        self.bubbles = []
        for schedule in spec.schedules:
            center, scale = schedule.at(k)
            self.bubbles.append(Bubble(center, scale=scale, amplitude=amplitude))
        self.base = Bubble(np.zeros(spec.N)) if spec.base else None
        self.eps = spec.remainder / k
        self.bump_center = spec.bump_center
        self.bump_width = spec.bump_width

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape[:-1])
        for b in self.bubbles:
            total = total + b(x)
        if self.base is not None:
            total = total + self.base(x)
        if self.eps:
            d2 = np.sum((x - self.bump_center) ** 2, axis=-1)
            total = total + self.eps * np.exp(-0.5 * d2 / self.bump_width ** 2)
        return total


def make_ps_sequence(spec, k):
    """Return the oracle of the k-th member of the sequence described by `spec`."""
    k = _check_integer("k", k, 1)
    return PSOracle(spec, k)


class _Residual:
    def __init__(self, oracle, profiles):
        self.oracle = oracle
        self.profiles = list(profiles)

    def __call__(self, x):
        value = self.oracle(x)
        for b in self.profiles:
            value = value - b(x)
        return value


def _grid(center, half_width, resolution):
    axes = [np.linspace(c - half_width, c + half_width, resolution) for c in center]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _refine(oracle, center, spacing, zoom_resolution, tol):
    peak = abs(float(oracle(center)))
    while spacing > tol:
        points = _grid(center, spacing, zoom_resolution)
        values = np.abs(oracle(points))
        best = int(np.argmax(values))
        center, peak = points[best], float(values[best])
        spacing = 2.0 * spacing / (zoom_resolution - 1)
    return center, peak, spacing


def _half_height_scale(oracle, center, peak, start, limit):
    N = center.shape[0]
    radii = []
    for i in range(N):
        for sign in (1.0, -1.0):
            direction = sign * axis(N, i)

            def excess(r, direction=direction):
                return abs(float(oracle(center + r * direction))) - 0.5 * peak

            hi = start
            while excess(hi) > 0 and hi < limit:
                hi *= 2.0
            if excess(hi) > 0:
                continue
            radii.append(optimize.brentq(excess, 0.0, hi, xtol=1e-14, rtol=1e-12))
    if not radii:
        raise NoConcentrationError(
            "No half-height radius found around {}.".format(center.tolist())
        )
    return float(np.median(radii)) / half_height_ratio(N)


def find_concentrations(oracle, N, box=1.0, resolution=9, zoom_resolution=5,
                        threshold=FLAT_THRESHOLD, fraction=1e-2, tol=1e-9):
    """Return ``(center, scale, peak)`` for every local peak of ``|oracle|``.

    The box ``[-box, box]^N`` is sampled on a grid. Grid local maxima higher
    than `fraction` of the largest value are refined by repeated zooming onto
    the neighbouring cells, and the scale is recovered from the half-height
    radius along the coordinate directions. Peaks are sorted by height.

    :raises NoConcentrationError: if the largest sampled value is below
        `threshold`.
    """
    N = _check_integer("N", N, 3)
    points = _grid(np.zeros(N), box, resolution)
    values = np.abs(oracle(points))
    top = float(values.max())
    if not top > threshold:
        raise NoConcentrationError(
            "The field is flat: largest sampled value {:.3e} is below {:.3e}.".format(
                top, threshold
            )
        )
    field = values.reshape((resolution,) * N)
    local = ndimage.maximum_filter(field, size=3, mode="constant", cval=-np.inf)
    candidates = np.flatnonzero((field == local).ravel() & (values > fraction * top))
    spacing = 2.0 * box / (resolution - 1)
    found = []
    for index in candidates[np.argsort(-values[candidates], kind="stable")]:
        center, peak, final = _refine(oracle, points[index], spacing, zoom_resolution, tol)
        if any(np.linalg.norm(center - c) < spacing for c, _, _ in found):
            continue
        try:
            scale = _half_height_scale(oracle, center, peak, final, 4.0 * box)
        except NoConcentrationError:
            continue
        logger.debug("Concentration at %s with scale %.6g (peak %.6g).",
                     np.array2string(center, precision=6), scale, peak)
        found.append((center, scale, peak))
    if not found:
        raise NoConcentrationError("No isolated peak found in the box.")
    found.sort(key=lambda item: -item[2])
    return found


def detect_concentration(oracle, N, box=1.0, resolution=9, zoom_resolution=5,
                         threshold=FLAT_THRESHOLD):
    """Return the center and scale of the highest peak of ``|oracle|``.

    See :func:`find_concentrations`.

    :raises NoConcentrationError: if the field is flat on the box.
    """
    center, scale, _ = find_concentrations(
        oracle, N, box=box, resolution=resolution, zoom_resolution=zoom_resolution,
        threshold=threshold,
    )[0]
    return center, scale


def _cloud(center, scale, size, rng):
    N = center.shape[0]
    offsets = rng.standard_normal((size, N)) * (1.5 * scale)
    return np.vstack([center, center + offsets])


def fit_bubble(oracle, init, seed=0, cloud_size=None, max_iterations=200):
    """Refine ``(center, scale, amplitude)`` of the bubble around `init`.

    `init` is ``(center, scale)``, usually from :func:`detect_concentration`.
    The oracle is sampled on a seeded Gaussian cloud of width comparable to
    the scale. Tails of other bubbles are absorbed by an affine background
    that is fitted along with the bubble and then dropped.

    Returns the fitted :class:`~critbubble.bubble.Bubble` and the normalized
    root-mean-square misfit.

    :raises FitFailureError: if the solver does not converge.
    """
    center0, scale0 = init
    center0 = np.asarray(center0, dtype=float)
    N = center0.shape[0]
    p = 0.5 * (N - 2)
    rng = np.random.default_rng(seed)
    size = 40 * (N + 3) if cloud_size is None else cloud_size
    points = _cloud(center0, scale0, size, rng)
    data = oracle(points)
    peak = float(np.max(np.abs(data)))
    amplitude0 = float(oracle(center0)) * scale0 ** p

    def unpack(theta):
        center = theta[:N]
        scale = math.exp(theta[N])
        amplitude = theta[N + 1]
        offset = theta[N + 2]
        slope = theta[N + 3:]
        return center, scale, amplitude, offset, slope

    def model(theta):
        center, scale, amplitude, offset, slope = unpack(theta)
        d2 = np.sum((points - center) ** 2, axis=-1)
        bubble = amplitude * scale ** -p * (1.0 + d2 / scale ** 2) ** -p
        return bubble + offset + (points - center0) @ slope

    def residuals(theta):
        return (model(theta) - data) / peak

    theta0 = np.concatenate(
        [center0, [math.log(scale0), amplitude0, 0.0], np.zeros(N)]
    )
    x_scale = np.concatenate(
        [np.full(N, scale0), [1.0, abs(amplitude0) or 1.0, peak], np.full(N, peak)]
    )
    result = optimize.least_squares(
        residuals,
        theta0,
        x_scale=x_scale,
        xtol=1e-14,
        ftol=1e-14,
        gtol=1e-14,
        max_nfev=max_iterations * (2 * N + 4),
    )
    center, scale, amplitude, _, _ = unpack(result.x)
    best = Bubble(center, scale=scale, amplitude=amplitude)
    rms = float(np.sqrt(np.mean((model(result.x) - data) ** 2)))
    misfit = rms / float(np.sqrt(np.mean(data ** 2)))
    if result.status <= 0:
        raise FitFailureError(
            "Bubble fit did not converge: {}".format(result.message), best=best, residual=misfit
        )
    logger.debug("Fitted %r with misfit %.3e in %d evaluations.", best, misfit, result.nfev)
    return best, misfit


class _Proposal:
    """Mixture of multivariate Cauchy laws around the known bubbles plus a
    unit-width component."""

    def __init__(self, N, centers, scales, broad_weight=0.1):
        self.components = [
            stats.multivariate_t(loc=c, shape=(s * s) * np.eye(N), df=1)
            for c, s in zip(centers, scales)
        ]
        self.components.append(stats.multivariate_t(loc=np.zeros(N), shape=np.eye(N), df=1))
        local = (1.0 - broad_weight) / max(len(centers), 1)
        self.weights = np.array([local] * len(centers) + [broad_weight])
        self.weights /= self.weights.sum()

    def sample(self, size, rng):
        counts = rng.multinomial(size, self.weights)
        draws = [
            comp.rvs(size=n, random_state=rng).reshape(n, -1)
            for comp, n in zip(self.components, counts)
            if n > 0
        ]
        return np.vstack(draws)

    def pdf(self, x):
        return sum(w * comp.pdf(x) for w, comp in zip(self.weights, self.components))


def _gradient(func, x, h):
    N = x.shape[-1]
    grad = np.empty_like(x)
    for i in range(N):
        step = np.zeros(N)
        step[i] = h
        grad[:, i] = (func(x + step) - func(x - step)) / (2.0 * h)
    return grad


def _energy_density(func, x, h, p):
    u = func(x)
    g = _gradient(func, x, h)
    return 0.5 * np.sum(g * g, axis=-1) - np.abs(u) ** p / p


class EnergySampler:
    """Importance-sampling estimator of ``I_inf`` integrals.

    The same sample is reused for every integrand, so differences of
    estimates are much more accurate than the estimates themselves.
    """

    def __init__(self, N, centers, scales, samples=20000, seed=0):
        self.N = N
        rng = np.random.default_rng(seed)
        proposal = _Proposal(N, centers, scales)
        self.points = proposal.sample(samples, rng)
        self.weights = 1.0 / proposal.pdf(self.points)
        self.h = 1e-4 * min(list(scales) + [1.0])
        self.p = 2.0 * N / (N - 2)

    def density(self, func):
        return _energy_density(func, self.points, self.h, self.p)

    def estimate(self, values):
        """Return the estimate and standard error of ``int values``."""
        terms = values * self.weights
        n = terms.shape[0]
        return float(np.mean(terms)), float(np.std(terms, ddof=1) / math.sqrt(n))


class ExtractionResult:
    """The outcome of :func:`extract_all`.

    :ivar list profiles: The recovered bubbles, in extraction order.
    :ivar list fit_residuals: Normalized misfit of each fit.
    :ivar list residual_energies: ``I_inf`` of what is left, before each
        extraction and after the last one.
    :ivar numpy.ndarray separation: Pairwise separation statistics.
    :ivar float gap: ``|I_inf(input) - sum I_inf(profiles) - I_inf(residual)|``.
    :ivar float gap_error: Standard error of `gap`.
    :ivar float total_energy: Estimated ``I_inf(input)``.
    :ivar bool partial: Whether the loop ended on a failed fit.
    """

    def __init__(self, N, s, profiles, fit_residuals, residual_energies, gap, gap_error,
                 total_energy, partial=False, message=None):
        self.N = N
        self.s = s
        self.profiles = profiles
        self.fit_residuals = fit_residuals
        self.residual_energies = residual_energies
        self.separation = separation_matrix(profiles)
        self.gap = gap
        self.gap_error = gap_error
        self.total_energy = total_energy
        self.partial = partial
        self.message = message

    @property
    def residual_energy(self):
        return self.residual_energies[-1] if self.residual_energies else 0.0

    @property
    def relative_gap(self):
        if self.total_energy == 0.0:
            return 0.0
        return self.gap / abs(self.total_energy)

    def to_dict(self):
        return {
            "N": self.N,
            "s": self.s,
            "profiles": [b.to_dict() for b in self.profiles],
            "fit_residuals": list(self.fit_residuals),
            "residual_energies": list(self.residual_energies),
            "separation": self.separation.tolist(),
            "gap": self.gap,
            "gap_error": self.gap_error,
            "total_energy": self.total_energy,
            "partial": self.partial,
            "message": self.message,
        }

    def __repr__(self):
        return "ExtractionResult(profiles={}, gap={:.3e})".format(len(self.profiles), self.gap)


class ExtractionSettings:
    """Numerical settings of :func:`extract_all`."""

    def __init__(self, box=1.0, resolution=9, samples=20000, seed=20240607,
                 threshold=FLAT_THRESHOLD):
        self.box = box
        self.resolution = resolution
        self.samples = samples
        self.seed = seed
        self.threshold = threshold

    @classmethod
    def from_config(cls, config):
        return cls(seed=config["seed"])


def _sampler(N, peaks, profiles, settings):
    centers = [c for c, _, _ in peaks] + [b.center for b in profiles]
    scales = [s for _, s, _ in peaks] + [b.scale for b in profiles]
    if not centers:
        centers, scales = [np.zeros(N)], [1.0]
    return EnergySampler(N, centers, scales, settings.samples, settings.seed)


def extract_all(oracle, N, s, max_profiles=4, settings=None):
    """Split bubbles off `oracle` until the remaining energy is small.

    Each round locates the peaks of the current residual, estimates the
    residual's limiting energy with a proposal concentrated at those peaks
    and stops once it falls below half of
    :func:`~critbubble.ledger.bubble_energy`. Otherwise a bubble is fitted to
    the highest peak and subtracted. A failed fit ends the loop with the
    result flagged as partial.
    """
    dim = DimPair(N, s)
    settings = ExtractionSettings() if settings is None else settings
    stop = 0.5 * bubble_energy(dim.N)
    profiles, misfits, energies = [], [], []
    partial, message = False, None
    residual = _Residual(oracle, [])
    seen = []
    for round_ in range(max_profiles + 1):
        try:
            peaks = find_concentrations(
                residual, dim.N, box=settings.box, resolution=settings.resolution,
                threshold=settings.threshold,
            )
        except NoConcentrationError as e:
            logger.info("Stopping after %d profiles: %s", len(profiles), e.format_message())
            break
        if round_ == 0:
            seen = peaks
        sampler = _sampler(dim.N, peaks, [], settings)
        energy, _ = sampler.estimate(sampler.density(residual))
        energies.append(energy)
        logger.info("Round %d: residual energy %.6g (stop below %.6g).", round_, energy, stop)
        if energy < stop or len(profiles) >= max_profiles:
            break
        center, scale, _ = peaks[0]
        try:
            fitted, misfit = fit_bubble(residual, (center, scale), seed=settings.seed + round_)
        except FitFailureError as e:
            partial, message = True, e.format_message()
            logger.warning("Extraction stopped on a failed fit: %s", message)
            break
        if misfit > MAX_FIT_RESIDUAL:
            partial = True
            message = "Fit misfit {:.3e} exceeds {:.3e}.".format(misfit, MAX_FIT_RESIDUAL)
            logger.warning("Extraction stopped: %s", message)
            break
        profiles.append(fitted)
        misfits.append(misfit)
        residual = _Residual(oracle, profiles)

    sampler = _sampler(dim.N, seen, profiles, settings)
    gap, gap_error, total, left = _additivity_gap(sampler, oracle, profiles)
    if len(energies) == len(profiles):
        energies.append(left)
    return ExtractionResult(dim.N, dim.s, profiles, misfits, energies, gap, gap_error, total,
                            partial, message)


def _additivity_gap(sampler, oracle, profiles):
    """Return the energy additivity gap, its standard error, the total energy
    of the input and the energy of the residual."""
    closed = math.fsum(profile_energy(b) for b in profiles)
    whole = sampler.density(oracle)
    left = sampler.density(_Residual(oracle, profiles))
    pieces = sum((sampler.density(b) for b in profiles), np.zeros_like(whole))
    gap, gap_error = sampler.estimate(whole - pieces - left)
    non_additive, _ = sampler.estimate(whole - pieces)
    residual_energy, _ = sampler.estimate(left)
    total = closed + non_additive
    logger.info("Energy additivity gap %.3e +/- %.1e (total %.6g).", abs(gap), gap_error, total)
    return abs(gap), gap_error, total, residual_energy
