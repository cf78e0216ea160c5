import math

import numpy as np
import pytest

from critbubble.bubble import (
    Bubble,
    CoronParams,
    Cutoff,
    axial_norms,
    axis,
    bubble_grad_sq,
    bubble_l2_sq,
    bubble_lcrit,
    coron_bubble,
    eval_cutoff,
    seminorm_scale_factor,
    solution_amplitude,
    standard_bubble,
    truncated_bubble,
    truncation_error,
    truncation_l2_bounds,
)
from critbubble.exceptions import DivergenceError, DomainError
from critbubble.quad import gradient_sq, l2_sq, lcrit
from critbubble.specfn import sobolev_constant


def test_bubble_value_at_center():
    b = Bubble([0.0, 0.0, 0.0, 0.0, 1.0], scale=0.25, amplitude=2.0)
    assert b([0.0, 0.0, 0.0, 0.0, 1.0]) == pytest.approx(2.0 * 0.25 ** -1.5)


def test_bubble_evaluates_batches():
    b = Bubble(np.zeros(3))
    x = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    assert b(x) == pytest.approx([1.0, 0.5 ** 0.5])


def test_bubble_rejects_wrong_point_dimension():
    with pytest.raises(DomainError):
        Bubble(np.zeros(3))(np.zeros(4))


@pytest.mark.parametrize("kwargs", [{"scale": 0.0}, {"scale": -1.0}, {"amplitude": 0.0}])
def test_bubble_rejects_degenerate_parameters(kwargs):
    with pytest.raises(DomainError):
        Bubble(np.zeros(3), **kwargs)


def test_bubble_rejects_low_dimension():
    with pytest.raises(DomainError):
        Bubble([0.0, 0.0])


def test_coron_bubble_concentrates_at_sigma():
    sigma = axis(5, 2)
    b = coron_bubble(CoronParams(0.75, sigma))
    assert b.center == pytest.approx(0.75 * sigma)
    assert b.scale == pytest.approx(0.25)
    assert b.amplitude == 1.0


@pytest.mark.parametrize("t", [-0.1, 1.0, 1.5])
def test_coron_params_reject_t_outside_unit_interval(t):
    with pytest.raises(DomainError):
        CoronParams(t, axis(3))


def test_coron_params_reject_non_unit_direction():
    with pytest.raises(DomainError):
        CoronParams(0.5, [1.0, 1.0, 0.0])


def test_solution_amplitude():
    assert solution_amplitude(5) == pytest.approx(15.0 ** 0.75)
    assert solution_amplitude(6) == pytest.approx(24.0)


def test_bubble_l2_closed_form():
    assert bubble_l2_sq(5) == pytest.approx(0.5 * math.pi ** 3, rel=1e-12)


@pytest.mark.parametrize("N", [3, 4])
def test_bubble_l2_diverges_in_low_dimension(N):
    with pytest.raises(DivergenceError):
        bubble_l2_sq(N)


@pytest.mark.parametrize("N", [3, 4, 5, 8])
def test_gradient_closed_form_is_sobolev_extremal(N):
    assert bubble_grad_sq(N) / bubble_lcrit(N) ** ((N - 2.0) / N) == pytest.approx(
        sobolev_constant(N), rel=1e-12
    )


@pytest.mark.parametrize("N", [3, 5, 7])
def test_closed_forms_match_quadrature(N, spec):
    u0 = standard_bubble(N)
    assert gradient_sq(u0, N, spec).value == pytest.approx(bubble_grad_sq(N), rel=1e-7)
    assert lcrit(u0, N, spec).value == pytest.approx(bubble_lcrit(N), rel=1e-7)


def test_l2_closed_form_matches_quadrature(spec):
    assert l2_sq(standard_bubble(6), 6, spec).value == pytest.approx(bubble_l2_sq(6), rel=1e-7)


def test_standard_bubble_derivative_oracle():
    u = standard_bubble(5, scale=0.5, amplitude=3.0)
    assert u.check_derivative([0.1, 0.5, 1.0, 3.0]) < 1e-6


def test_scaled_bubble_keeps_critical_norm(spec):
    N = 5
    u = standard_bubble(N, scale=0.125)
    assert lcrit(u, N, spec).value == pytest.approx(bubble_lcrit(N), rel=1e-7)
    assert gradient_sq(u, N, spec).value == pytest.approx(bubble_grad_sq(N), rel=1e-7)


def test_seminorm_scale_factor():
    assert seminorm_scale_factor(4.0, 0.5) == pytest.approx(4.0)
    with pytest.raises(DomainError):
        seminorm_scale_factor(2.0, 1.0)


@pytest.mark.parametrize(
    "r,expected",
    [(0.01, 0.0), (0.1, 1.0), (1.0, 1.0), (10.0, 1.0), (20.0, 1.0), (40.0, 0.0), (100.0, 0.0)],
)
def test_cutoff_plateau(r, expected):
    assert Cutoff(10.0)(r) == pytest.approx(expected, abs=1e-15)


def test_cutoff_is_monotone_on_ramps():
    cut = Cutoff(10.0)
    inner = cut(np.linspace(0.025, 0.05, 50))
    outer = cut(np.linspace(20.0, 40.0, 50))
    assert np.all(np.diff(inner) >= 0)
    assert np.all(np.diff(outer) <= 0)


def test_eval_cutoff_takes_points():
    cut = Cutoff(2.0)
    assert eval_cutoff(cut, [0.0, 3.0, 4.0]) == pytest.approx(float(cut(5.0)))


def test_cutoff_rejects_small_radius():
    with pytest.raises(DomainError):
        Cutoff(0.5)


def test_truncated_bubble_is_compactly_supported():
    w = truncated_bubble(5, 10.0)
    assert w.support == (0.025, 40.0)
    assert w(50.0) == 0.0
    assert w(1.0) == pytest.approx(standard_bubble(5)(1.0))


def test_truncation_l2_bounds_decrease(spec):
    bounds = [truncation_l2_bounds(5, R, spec) for R in (10.0, 30.0, 100.0)]
    outer = [b[0] for b in bounds]
    inner = [b[1] for b in bounds]
    assert all(b < a for a, b in zip(outer, outer[1:]))
    assert all(b < a for a, b in zip(inner, inner[1:]))


@pytest.mark.slow
def test_truncation_error_is_below_l2_bounds(loose_spec):
    sigma = axis(5)
    outer, inner = truncation_l2_bounds(5, 30.0, loose_spec)
    error = truncation_error(5, CoronParams(0.5, sigma), 30.0, loose_spec)
    assert 0.0 < error.value
    assert error.value < 0.05 * (bubble_grad_sq(5) + bubble_l2_sq(5))
    assert outer + inner > 0.0


@pytest.mark.parametrize("scale", [0.5, 1.0, 2.0])
def test_axial_norms_are_translation_invariant(scale, spec):
    N = 5
    crit, grad = axial_norms(Bubble(axis(N), scale=scale), spec)
    assert crit.value == pytest.approx(bubble_lcrit(N), rel=1e-6)
    assert grad.value == pytest.approx(bubble_grad_sq(N), rel=1e-6)


def test_axial_norms_need_center_on_axis(spec):
    with pytest.raises(DomainError):
        axial_norms(Bubble(axis(5, 1)), spec)


@pytest.mark.slow
def test_truncation_error_vanishes_as_radius_grows(loose_spec):
    params = CoronParams(0.0, axis(5))
    errors = [truncation_error(5, params, R, loose_spec).value for R in (10.0, 30.0, 100.0, 300.0)]
    assert all(b < a for a, b in zip(errors, errors[1:]))
    # the L2 tail of u_0 falls like 1/R in five dimensions
    assert errors[-1] < 0.05 * errors[0]
    assert errors[2] == pytest.approx(0.08315816048, rel=1e-5)
