import numpy as np
import pytest

from critbubble.bubble import Bubble, solution_amplitude
from critbubble.exceptions import DomainError, NoConcentrationError
from critbubble.extractor import (
    BubbleSchedule,
    EnergySampler,
    ExtractionSettings,
    SyntheticSpec,
    detect_concentration,
    extract_all,
    find_concentrations,
    fit_bubble,
    half_height_ratio,
    make_ps_sequence,
)
from critbubble.ledger import bubble_energy, profile_energy


def test_half_height_ratio_in_three_dimensions():
    assert half_height_ratio(3) == pytest.approx(3.0 ** 0.5)


def test_schedule_moves_towards_limit():
    schedule = BubbleSchedule([1.0, 0.0, 0.0], drift=[-1.0, 0.0, 0.0], scale=2.0)
    center, scale = schedule.at(4)
    assert center == pytest.approx([0.75, 0.0, 0.0])
    assert scale == pytest.approx(0.5)


def test_schedule_rejects_mismatched_drift():
    with pytest.raises(DomainError):
        BubbleSchedule([0.0, 0.0, 0.0], drift=[1.0, 0.0])


def test_synthetic_spec_defaults():
    spec = SyntheticSpec()
    assert spec.N == 5
    assert len(spec.schedules) == 2
    assert not spec.base


def test_synthetic_spec_only_for_low_dimensions():
    with pytest.raises(DomainError):
        SyntheticSpec(N=6)


def test_synthetic_spec_rejects_shared_limit_centers():
    schedules = [BubbleSchedule([0.5, 0.0, 0.0]), BubbleSchedule([0.5, 0.0, 0.0], [0.1, 0, 0])]
    with pytest.raises(DomainError):
        SyntheticSpec(N=3, schedules=schedules)


def test_synthetic_spec_from_dict():
    spec = SyntheticSpec.from_dict({
        "N": 3,
        "schedules": [{"center": [0.5, 0.0, 0.0]}, {"center": [-0.5, 0.0, 0.0], "scale": 2.0}],
        "remainder": 0.0,
    })
    assert spec.N == 3
    assert spec.schedules[1].scale == 2.0
    assert SyntheticSpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()


def test_oracle_carries_solution_normalized_bubbles():
    oracle = make_ps_sequence(SyntheticSpec(), 8)
    assert len(oracle.bubbles) == 2
    assert all(b.amplitude == pytest.approx(solution_amplitude(5)) for b in oracle.bubbles)
    assert all(b.scale == pytest.approx(1.0 / 8.0) for b in oracle.bubbles)
    assert oracle.eps == pytest.approx(1e-3 / 8.0)


def test_make_ps_sequence_rejects_zero_index():
    with pytest.raises(DomainError):
        make_ps_sequence(SyntheticSpec(), 0)


def test_detect_single_bubble():
    b = Bubble([0.1, -0.2, 0.05], scale=0.05, amplitude=2.0)
    center, scale = detect_concentration(b, 3)
    assert center == pytest.approx(b.center, abs=1e-6)
    assert scale == pytest.approx(0.05, rel=1e-6)


def test_find_two_separated_bubbles():
    first = Bubble([0.5, 0.0, 0.0], scale=0.05)
    second = Bubble([-0.5, 0.0, 0.0], scale=0.1)

    def field(x):
        return first(x) + second(x)

    peaks = find_concentrations(field, 3)
    assert len(peaks) == 2
    assert peaks[0][0] == pytest.approx(first.center, abs=1e-2)
    assert peaks[1][0] == pytest.approx(second.center, abs=1e-2)


def test_flat_field_has_no_concentration():
    with pytest.raises(NoConcentrationError):
        detect_concentration(lambda x: np.zeros(np.asarray(x).shape[:-1]), 3)


def test_fit_recovers_bubble_from_perturbed_start():
    b = Bubble([0.2, 0.0, -0.1, 0.0], scale=0.1, amplitude=8.0)
    fitted, misfit = fit_bubble(b, (b.center + 0.01, 0.12), seed=1)
    assert fitted.center == pytest.approx(b.center, abs=1e-6)
    assert fitted.scale == pytest.approx(0.1, rel=1e-6)
    assert fitted.amplitude == pytest.approx(8.0, rel=1e-6)
    assert misfit < 1e-6


def test_extraction_settings_from_config():
    settings = ExtractionSettings.from_config({"seed": 11})
    assert settings.seed == 11


@pytest.mark.slow
def test_energy_sampler_estimates_bubble_energy():
    b = Bubble(np.zeros(5), scale=0.1, amplitude=solution_amplitude(5))
    sampler = EnergySampler(5, [b.center], [b.scale], samples=40000, seed=3)
    estimate, error = sampler.estimate(sampler.density(b))
    assert estimate == pytest.approx(profile_energy(b), rel=0.05)
    assert error < 0.05 * bubble_energy(5)


@pytest.mark.slow
def test_extract_two_bubbles():
    oracle = make_ps_sequence(SyntheticSpec(), 32)
    result = extract_all(oracle, 5, 0.5)
    assert len(result.profiles) == 2
    assert not result.partial
    for truth in oracle.bubbles:
        match = min(result.profiles, key=lambda p: np.linalg.norm(p.center - truth.center))
        assert np.linalg.norm(match.center - truth.center) <= 0.01 * truth.scale
        assert match.scale == pytest.approx(truth.scale, rel=0.02)
    assert result.relative_gap <= 0.01
    assert result.separation.shape == (2, 2)


def test_fit_error_stays_within_ten_remainder_amplitudes():
    eps = 1e-3
    b = Bubble(np.zeros(5), scale=0.1, amplitude=solution_amplitude(5))
    bump_center = np.array([0.5, 0.0, 0.0, 0.0, 0.0])

    def field(x):
        d2 = np.sum((np.asarray(x) - bump_center) ** 2, axis=-1)
        return b(x) + eps * np.exp(-0.5 * d2 / 0.25)

    fitted, _ = fit_bubble(field, (b.center + 0.005, 0.105), seed=2)
    assert np.linalg.norm(fitted.center - b.center) <= 10 * eps * b.scale
    assert fitted.scale == pytest.approx(b.scale, rel=10 * eps)
    assert fitted.amplitude == pytest.approx(b.amplitude, rel=10 * eps)


@pytest.fixture(scope="module")
def extractions():
    spec = SyntheticSpec()
    results = {}
    for k in (8, 16, 32):
        oracle = make_ps_sequence(spec, k)
        results[k] = (oracle, extract_all(oracle, spec.N, 0.5))
    return results


def _off_diagonal(matrix):
    return [matrix[i, j] for i in range(len(matrix)) for j in range(len(matrix)) if i != j]


@pytest.mark.slow
def test_additivity_gap_shrinks_along_sequence(extractions):
    gaps = [extractions[k][1].relative_gap for k in (8, 16, 32)]
    assert all(b <= a + 1e-3 for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] <= 0.01


@pytest.mark.slow
def test_residual_energy_drops_with_each_profile(extractions):
    for _, result in extractions.values():
        energies = result.residual_energies
        assert len(energies) == len(result.profiles) + 1
        assert all(b < a for a, b in zip(energies, energies[1:]))
        assert all(m < 0.05 for m in result.fit_residuals)


@pytest.mark.slow
def test_separation_at_least_doubles_with_index(extractions):
    for k in (8, 16):
        before = _off_diagonal(extractions[k][1].separation)
        after = _off_diagonal(extractions[2 * k][1].separation)
        assert len(before) == len(after) == 2
        assert min(after) >= 2.0 * max(before)
