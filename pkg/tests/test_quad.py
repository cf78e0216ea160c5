import math

import pytest

from critbubble.bubble import standard_bubble, truncated_bubble
from critbubble.exceptions import (
    DiagonalSingularityError,
    DivergenceError,
    DomainError,
    UnsupportedInputError,
)
from critbubble.quad import (
    BAND_CAP,
    QuadSpec,
    RadialFn,
    angular_kernel,
    angular_kernel_quadrature,
    bump_profile,
    calibrated_normalization,
    cross_term,
    diagonal_band,
    diagonal_constant,
    extrapolate_quotient,
    fourier_normalization,
    gagliardo_direct,
    gagliardo_fourier,
    gaussian_profile,
    gradient_sq,
    hankel_transform,
    interpolation_constant,
    interpolation_family,
    interpolation_ratio,
    l2_sq,
    lcrit,
    mixed_quotient,
    rescaled_quotient_sequence,
    seminorm_closed_form,
    seminorm_scaling_error,
)
from critbubble.specfn import DimPair, sobolev_constant


def test_quad_spec_rejects_nonpositive_tolerance():
    with pytest.raises(DomainError):
        QuadSpec(rel_tol=0.0)


def test_quad_spec_tightened():
    spec = QuadSpec(rel_tol=1e-6, abs_tol=1e-10).tightened(100.0)
    assert spec.rel_tol == pytest.approx(1e-8)
    assert spec.abs_tol == pytest.approx(1e-12)


def test_gaussian_l2_norm(spec):
    # int exp(-|x|^2) over R^3
    assert l2_sq(gaussian_profile(), 3, spec).value == pytest.approx(math.pi ** 1.5, rel=1e-8)


def test_gaussian_gradient(spec):
    # int |x|^2 exp(-|x|^2) over R^4 is (N/2) pi^(N/2)
    assert gradient_sq(gaussian_profile(), 4, spec).value == pytest.approx(
        2.0 * math.pi ** 2, rel=1e-8
    )


def test_zero_function():
    zero = RadialFn.zero()
    assert zero.is_zero
    u = gaussian_profile()
    assert (u + zero) is u
    assert (zero - u)(1.0) == pytest.approx(-u(1.0))


def test_critical_rescaling_preserves_critical_norm(spec):
    u = gaussian_profile()
    for k in (0.5, 4.0):
        assert lcrit(u.rescaled(k, 3), 3, spec).value == pytest.approx(
            lcrit(u, 3, spec).value, rel=1e-7
        )


def test_bump_profile_support_and_peak():
    bump = bump_profile(2.5, 0.5)
    assert bump.support == (2.0, 3.0)
    assert bump(2.5) == pytest.approx(1.0)
    assert bump(1.9) == 0.0
    assert bump.check_derivative([2.2, 2.4, 2.8]) < 1e-6


def test_bump_profile_rejects_negative_radii():
    with pytest.raises(DomainError):
        bump_profile(0.2, 0.5)


@pytest.mark.parametrize("N,s,r,rho", [(3, 0.5, 1.0, 2.0), (4, 0.25, 1.0, 3.0),
                                       (5, 0.75, 2.0, 0.5), (7, 0.5, 1.0, 1.5)])
def test_angular_kernel_matches_gauss_legendre(N, s, r, rho):
    assert angular_kernel(N, s, r, rho) == pytest.approx(
        angular_kernel_quadrature(N, s, r, rho, nodes=128), rel=1e-10
    )


def test_angular_kernel_close_to_diagonal():
    assert angular_kernel(5, 0.5, 1.0, 0.8) == pytest.approx(
        angular_kernel_quadrature(5, 0.5, 1.0, 0.8, nodes=400), rel=1e-10
    )


def test_angular_kernel_is_singular_on_diagonal():
    with pytest.raises(DiagonalSingularityError):
        angular_kernel(4, 0.5, 1.0, 1.0)


def test_diagonal_constant_is_limit_of_kernel():
    h = 1e-5
    N, s = 5, 0.5
    scaled = (1.0 - h) ** (N - 1) * angular_kernel(N, s, 1.0, 1.0 - h) * h ** (1.0 + 2.0 * s)
    assert scaled == pytest.approx(diagonal_constant(N, s), rel=1e-3)


@pytest.mark.parametrize("N,s", [(3, 0.25), (3, 0.5)])
def test_bubble_seminorm_diverges_in_low_dimension(N, s, spec):
    with pytest.raises(DivergenceError):
        gagliardo_direct(standard_bubble(N), N, s, spec)
    with pytest.raises(DivergenceError):
        seminorm_closed_form(N, s)


def test_fourier_normalization_positive():
    assert fourier_normalization(3, 0.5) > 0.0


def test_cross_term_rejects_overlapping_supports(spec):
    with pytest.raises(UnsupportedInputError):
        cross_term(bump_profile(1.0, 0.5), bump_profile(1.2, 0.5), 3, 0.5, spec)


def test_cross_term_is_positive_for_separated_bumps(spec):
    value = cross_term(bump_profile(0.5, 0.5), bump_profile(2.5, 0.5), 3, 0.5, spec)
    assert value.value > 0.0


def test_gradient_quotient_of_bubble_is_sobolev_constant(spec):
    report = mixed_quotient(standard_bubble(4), 4, 0.5, spec, include_seminorm=False)
    assert report.seminorm == 0.0
    assert report.gradient_quotient == pytest.approx(sobolev_constant(4), rel=1e-6)


def test_quotient_of_zero_is_undefined(spec):
    with pytest.raises(DomainError):
        mixed_quotient(RadialFn.zero(), 3, 0.5, spec)


@pytest.mark.slow
@pytest.mark.parametrize("N,s", [(3, 0.75), (4, 0.5), (5, 0.25), (5, 0.5), (6, 0.75)])
def test_direct_seminorm_matches_closed_form(N, s, loose_spec):
    value = gagliardo_direct(standard_bubble(N), N, s, loose_spec).value
    assert value == pytest.approx(seminorm_closed_form(N, s), rel=1e-3)


@pytest.mark.slow
def test_fourier_seminorm_matches_direct(loose_spec):
    u = gaussian_profile().dilated(2.0, N=4)
    direct = gagliardo_direct(u, 4, 0.5, loose_spec).value
    fourier = gagliardo_fourier(u, 4, 0.5, loose_spec).value
    assert fourier == pytest.approx(direct, rel=1e-3)


@pytest.mark.slow
def test_rescaled_quotients_decrease_towards_sobolev_constant(loose_spec):
    N, s = 3, 0.5
    k_list = [1.0, 2.0, 4.0, 8.0]
    reports = rescaled_quotient_sequence(truncated_bubble(N, 10.0), N, s, k_list, loose_spec)
    quotients = [r.quotient for r in reports]
    assert all(b < a for a, b in zip(quotients, quotients[1:]))
    assert all(q > sobolev_constant(N) for q in quotients)
    assert seminorm_scaling_error(reports, k_list, s) < 1e-3
    assert extrapolate_quotient(reports, k_list, s) == pytest.approx(
        reports[0].gradient_quotient, rel=1e-4
    )


def test_default_band_is_one_percent_of_radius_sum():
    assert QuadSpec().band == pytest.approx(2.0 / 101.0)
    # h r = (r + rho) / 100 at r = 1
    h = diagonal_band()
    assert h == pytest.approx((2.0 - h) / 100.0)


def test_band_is_capped_at_large_radius():
    assert diagonal_band(10.0) == pytest.approx(BAND_CAP / 10.0)
    assert diagonal_band(0.5) == diagonal_band()


@pytest.mark.parametrize("centers,expected", [((0.5, 2.5), 3.169733119279),
                                               ((0.5, 3.5), 1.478526966498),
                                               ((0.5, 4.5), 0.8642897945641)])
def test_cross_term_values(centers, expected, spec):
    u_plus, u_minus = (bump_profile(c, 0.5) for c in centers)
    assert cross_term(u_plus, u_minus, 3, 0.5, spec).value == pytest.approx(expected, rel=1e-6)


def test_cross_term_decreases_with_separation(spec):
    inner = bump_profile(0.5, 0.5)
    values = [cross_term(inner, bump_profile(c, 0.5), 3, 0.5, spec).value
              for c in (2.5, 3.5, 4.5, 6.0)]
    assert all(b < a for a, b in zip(values, values[1:]))


def test_hankel_transform_needs_compact_support(spec):
    with pytest.raises(UnsupportedInputError):
        hankel_transform(gaussian_profile(), 3, 1.0, spec)


def test_hankel_transform_of_dilated_bump(spec):
    u = bump_profile(1.0, 0.5)
    for k in (0.0, 0.7, 1.5):
        assert hankel_transform(u.dilated(2.0), 5, k, spec) == pytest.approx(
            2.0 ** 5 * hankel_transform(u, 5, 2.0 * k, spec), rel=1e-6, abs=1e-9
        )


def test_hankel_transform_is_continuous_at_zero(spec):
    u = bump_profile(1.0, 0.5)
    assert hankel_transform(u, 4, 1e-4, spec) == pytest.approx(
        hankel_transform(u, 4, 0.0, spec), rel=1e-5
    )


@pytest.mark.slow
@pytest.mark.parametrize("N,s", [(3, 0.5), (5, 0.5), (4, 0.75)])
def test_calibrated_normalization_matches_analytic(N, s, loose_spec):
    assert calibrated_normalization(N, s, loose_spec) == pytest.approx(
        fourier_normalization(N, s), rel=1e-4
    )


@pytest.mark.slow
def test_fourier_seminorm_of_bump_matches_direct(loose_spec):
    u = bump_profile(1.0, 0.5)
    assert u.transform is None
    direct = gagliardo_direct(u, 5, 0.5, loose_spec).value
    fourier = gagliardo_fourier(u, 5, 0.5, loose_spec).value
    assert fourier == pytest.approx(direct, rel=1e-3)
    assert direct == pytest.approx(1648.2765, rel=1e-3)


@pytest.mark.slow
def test_direct_seminorm_of_bubble_in_five_dimensions(loose_spec):
    value = gagliardo_direct(standard_bubble(5), 5, 0.5, loose_spec).value
    assert value == pytest.approx(346.34343478756443, rel=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("N", [3, 4, 5, 6])
@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_seminorm_oracles_agree_on_bubble(N, s, loose_spec):
    u0 = standard_bubble(N)
    if not DimPair(N, s).finite_seminorm:
        with pytest.raises(DivergenceError):
            gagliardo_direct(u0, N, s, loose_spec)
        with pytest.raises(DivergenceError):
            gagliardo_fourier(u0, N, s, loose_spec)
        return
    closed = seminorm_closed_form(N, s)
    assert gagliardo_direct(u0, N, s, loose_spec).value == pytest.approx(closed, rel=1e-3)
    assert gagliardo_fourier(u0, N, s, loose_spec).value == pytest.approx(closed, rel=1e-3)


@pytest.mark.slow
@pytest.mark.parametrize("N,s", [(3, 0.75), (5, 0.5)])
def test_seminorm_scales_with_bubble_width(N, s, loose_spec):
    base = gagliardo_direct(standard_bubble(N), N, s, loose_spec).value
    for lam in (0.5, 2.0):
        value = gagliardo_direct(standard_bubble(N, scale=lam), N, s, loose_spec).value
        assert value / base == pytest.approx(lam ** (2.0 - 2.0 * s), rel=1e-4)


@pytest.mark.slow
def test_mixed_quotient_is_stable_across_tolerances():
    u = gaussian_profile()
    coarse = mixed_quotient(u, 4, 0.5, QuadSpec(rel_tol=1e-5, abs_tol=1e-9))
    fine = mixed_quotient(u, 4, 0.5, QuadSpec(rel_tol=1e-8, abs_tol=1e-12))
    for name in ("gradient", "seminorm", "lcrit"):
        assert getattr(coarse, name) > 0.0
        assert getattr(coarse, name) == pytest.approx(getattr(fine, name), rel=1e-4)


def test_interpolation_ratio_needs_ordered_orders(spec):
    with pytest.raises(DomainError):
        interpolation_ratio(bump_profile(1.0, 0.5), 3, 0.7, 0.3, spec)


def test_interpolation_constant_needs_a_family(spec):
    with pytest.raises(DomainError):
        interpolation_constant([], 3, 0.3, 0.7, spec)


@pytest.mark.slow
def test_interpolation_constant_bounds_family(loose_spec):
    family = interpolation_family()
    assert len(family) == 5
    c_star, ratios = interpolation_constant(family, 3, 0.3, 0.7, loose_spec)
    assert len(ratios) == 5
    assert all(0.0 < r <= c_star for r in ratios)
    assert c_star in ratios


@pytest.mark.slow
def test_interpolation_ratio_is_scale_invariant(loose_spec):
    u = bump_profile(1.0, 0.5)
    base = interpolation_ratio(u, 3, 0.3, 0.7, loose_spec)
    assert interpolation_ratio(u.scaled(3.0), 3, 0.3, 0.7, loose_spec) == pytest.approx(
        base, rel=1e-6
    )
    assert interpolation_ratio(u.dilated(2.0), 3, 0.3, 0.7, loose_spec) == pytest.approx(
        base, rel=1e-5
    )
