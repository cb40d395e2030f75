import mpmath as mp
import numpy as np
import pytest

from padelab import measure as ms
from padelab.errors import (
    PointAtPole,
    PointOnSupport,
    QuadFailure,
    UnwrapFailure,
)
from padelab.measure import (
    ComplexMeasure,
    DensityExpr,
    MeasureComponent,
    RationalPart,
    argument_variation,
    cauchy_transform,
    eval_F,
    moments,
    quad_integrate,
)

TOL = mp.mpf("1e-35")


def lebesgue01():
    return ComplexMeasure([MeasureComponent(("0", "1"), "1")])


def test_quad_constant_and_odd():
    assert abs(quad_integrate(lambda t: mp.mpc(1), ("0", "1"), mp.mpf("1e-30")) - 1) < mp.mpf("1e-30")
    assert abs(quad_integrate(lambda t: t, ("-1", "1"), mp.mpf("1e-30"))) < mp.mpf("1e-30")


def test_quad_arcsine_mass_with_midpoint_oracle(arcsine):
    mass = arcsine.integrate(lambda t: mp.mpc(1), TOL)
    assert abs(mass - 1) < mp.mpf("1e-30")
    # crude midpoint oracle on the raw singular integrand
    n = 10**6
    t = (np.arange(n) + 0.5) / n * 2.0 - 1.0
    midpoint = np.sum(1.0 / (np.pi * np.sqrt(1.0 - t * t))) * (2.0 / n)
    assert abs(float(mass.real) - midpoint) < 2e-3


def test_quad_panel_budget(monkeypatch):
    monkeypatch.setattr(ms, "PANEL_CAP", 64)
    with pytest.raises(QuadFailure):
        quad_integrate(
            lambda t: 1 / (t - mp.mpf(1) / 3), ("0", "1"), mp.mpf("1e-30")
        )


def test_quad_bit_determinism(arcsine):
    a = ms.cauchy_transform(arcsine, mp.mpc("1.25", "0.5"), TOL)
    b = ms.cauchy_transform(arcsine, mp.mpc("1.25", "0.5"), TOL)
    assert a == b  # identical panel order and rounding, bit for bit


def test_cauchy_transform_closed_forms(arcsine):
    got = cauchy_transform(arcsine, mp.mpc(2), TOL)
    assert abs(got - 1 / mp.sqrt(3)) < mp.mpf("1e-30")
    got = cauchy_transform(lebesgue01(), mp.mpc(2), TOL)
    assert abs(got - mp.log(2)) < mp.mpf("1e-30")


def test_cauchy_transform_asymptotic_mass(arcsine):
    # |z| * transform tends to the total mass like O(1/y^2) along rays
    errs = []
    for y in (mp.mpf(100), mp.mpf(10**4), mp.mpf(10**6)):
        z = mp.mpc(0, y)
        errs.append(abs(z * cauchy_transform(arcsine, z, TOL) - 1))
    assert errs[0] < mp.mpf("1e-4")
    assert errs[1] < mp.mpf("1e-8")
    assert errs[2] < mp.mpf("1e-12")


def test_point_on_support_guard(arcsine):
    with pytest.raises(PointOnSupport):
        cauchy_transform(arcsine, mp.mpc(0), TOL)
    with pytest.raises(PointOnSupport):
        cauchy_transform(arcsine, mp.mpf("0.517"), TOL)


def test_eval_f_with_single_pole_against_branch_oracle(arcsine):
    # branch of (z^2-1)^(-1/2) positive for large real z, continued to iy
    R = RationalPart([("2i", 1, ["1"])])
    for y in (mp.mpf("0.01"), mp.mpf("0.37"), mp.mpf("5")):
        z = mp.mpc(0, y)
        oracle = -mp.mpc(0, 1) / mp.sqrt(1 + y * y) + 1 / (mp.mpc(0, y - 2))
        assert abs(eval_F(arcsine, R, z, TOL) - oracle) < mp.mpf("1e-30")
    with pytest.raises(PointAtPole):
        eval_F(arcsine, R, mp.mpc(0, 2), TOL)


def test_eval_f_empty_rational_is_transform(arcsine):
    z = mp.mpc(1, 1)
    assert eval_F(arcsine, RationalPart.empty(), z, TOL) == cauchy_transform(
        arcsine, z, TOL
    )


def test_eval_f_scales_affinely():
    scaled = ComplexMeasure(
        [MeasureComponent(("-1", "1"), "(2+i)/pi", endpoint_singular=True)]
    )
    base = ComplexMeasure(
        [MeasureComponent(("-1", "1"), "1/pi", endpoint_singular=True)]
    )
    R = RationalPart([("3", 1, ["1"])])
    z = mp.mpc(0, 2)
    lhs = eval_F(scaled, R, z, TOL)
    rhs = mp.mpc(2, 1) * cauchy_transform(base, z, TOL) + R.eval(z)
    assert abs(lhs - rhs) < mp.mpf("1e-30")


def test_moments_arcsine_closed_form(arcsine):
    moms = moments(arcsine, RationalPart.empty(), 4, TOL)
    expected = [1, 0, mp.mpf(1) / 2, 0, mp.mpf(3) / 8]
    assert max(abs(a - b) for a, b in zip(moms, expected)) < mp.mpf("1e-30")


def test_moments_pure_rational_geometric():
    R = RationalPart([("1", 1, ["1"])])
    moms = moments(ComplexMeasure([]), R, 5)
    assert all(abs(c - 1) < mp.mpf("1e-70") for c in moms)


def test_moments_odd_vanish_for_symmetric(arcsine):
    moms = moments(arcsine, RationalPart.empty(), 9, TOL)
    assert all(abs(moms[j]) < mp.mpf("1e-30") for j in range(1, 10, 2))


def test_moments_linearity(arcsine):
    other = ComplexMeasure([MeasureComponent(("2", "3"), "exp(i*t)")])
    both = ComplexMeasure(
        [
            MeasureComponent(("-1", "1"), "1/pi", endpoint_singular=True),
            MeasureComponent(("2", "3"), "exp(i*t)"),
        ]
    )
    R = RationalPart.empty()
    m1 = moments(arcsine, R, 6, TOL)
    m2 = moments(other, R, 6, TOL)
    m12 = moments(both, R, 6, TOL)
    assert max(abs(a + b - c) for a, b, c in zip(m1, m2, m12)) < mp.mpf("1e-30")


def test_moments_match_taylor_differentiation_oracle(arcsine):
    """Fourier differentiation of w -> F(1/w) on a small circle, high order."""
    R = RationalPart([("2i", 2, ["1", "-1+i"])])
    J = 10
    M = 64
    rho = mp.mpf(1) / 10
    samples = [
        eval_F(arcsine, R, 1 / (rho * mp.expjpi(2 * mp.mpf(k) / M)), TOL)
        for k in range(M)
    ]
    got = moments(arcsine, R, J, TOL)
    for j in range(J + 1):
        order = j + 1  # c_j is the Taylor coefficient of w^(j+1)
        acc = mp.fsum(
            samples[k] * mp.expjpi(-2 * mp.mpf(k) * order / M) for k in range(M)
        )
        oracle = acc / (M * rho**order)
        assert abs(got[j] - oracle) < mp.mpf("1e-20")


def test_argument_variation_examples():
    lin = ComplexMeasure([MeasureComponent(("-6/7", "-1/8"), "exp(i*t)")])
    assert abs(argument_variation(lin, 512) - mp.mpf(41) / 56) < mp.mpf("1e-30")
    const = ComplexMeasure([MeasureComponent(("0", "1"), "3+2*i")])
    assert argument_variation(const, 128) == 0


def test_argument_variation_rational_density_closed_form():
    # d/dt arg((t-3/5)/(t-2i)) = -2/(t^2+4); integral gives the arctan difference
    lam = ComplexMeasure([MeasureComponent(("2/5", "1/2"), "(t-3/5)/(t-2*i)")])
    expected = mp.atan(mp.mpf(1) / 4) - mp.atan(mp.mpf(1) / 5)
    got = argument_variation(lam, 4096)
    assert abs(got - expected) < mp.mpf("1e-6")
    oracle = quad_integrate(
        lambda t: 2 / (t * t + 4), ("2/5", "1/2"), mp.mpf("1e-30")
    )
    assert abs(got - oracle) < mp.mpf("1e-6")


def test_argument_variation_monotone_in_grid():
    lam = ComplexMeasure(
        [MeasureComponent(("0", "1"), "(t-1/2)*(t-1/2)+i*t")],
        waive_floor=True,
    )
    vals = [argument_variation(lam, 2**k) for k in range(7, 13)]
    for a, b in zip(vals, vals[1:]):
        assert b >= a - mp.mpf("1e-30")


def test_argument_variation_unwrap_guard():
    wild = ComplexMeasure([MeasureComponent(("0", "10"), "exp(i*t)")])
    with pytest.raises(UnwrapFailure):
        argument_variation(wild, 2)


def test_density_expression_errors():
    with pytest.raises(ValueError):
        DensityExpr("t ** 0.5")
    with pytest.raises(ValueError):
        DensityExpr("sin(t)")
    tiny = "t/100000000000000000000"  # sampled magnitude below the default floor
    with pytest.raises(ValueError):
        ComplexMeasure([MeasureComponent(("0", "1"), tiny)])
    ComplexMeasure([MeasureComponent(("0", "1"), tiny)], waive_floor=True)


def test_measure_validation():
    with pytest.raises(ValueError):
        MeasureComponent(("1", "1"), "1")
    with pytest.raises(ValueError):
        ComplexMeasure(
            [MeasureComponent(("0", "2"), "1"), MeasureComponent(("1", "3"), "1")]
        )
    with pytest.raises(ValueError):
        RationalPart([("1", 1, ["0"])])  # zero leading Laurent coefficient
    with pytest.raises(ValueError):
        RationalPart([("1", 1, ["1"]), ("1", 2, ["0", "1"])])  # duplicate pole


def test_rational_pole_clearance(arcsine):
    R = RationalPart([("1/2", 1, ["1"])])
    with pytest.raises(ValueError):
        R.check_clear_of(arcsine)
