import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bumplab.errors import (
    ExtrapolationError,
    HypothesisViolation,
    ParameterError,
    ResolutionError,
    YoungOverflowError,
)
from bumplab.field import GridFunction
from bumplab.lattice import build_lattice
from bumplab.young import (
    associate,
    class_membership,
    evaluate,
    exp_minus_one,
    format_young,
    holder_product_ratio,
    inverse,
    parse_young,
    power,
    power_log,
    tabulated,
)


def test_power_eval_and_inverse():
    assert evaluate(power(2), 3.0) == pytest.approx(9.0)
    assert inverse(power(2), 9.0) == pytest.approx(3.0)
    assert inverse(power(3), 0.0) == 0.0


def test_power_log_eval():
    A = power_log(2, 3.5)
    assert A(2.0) == pytest.approx(4.0 * math.log(math.e + 2.0) ** 3.5)


@settings(max_examples=60, deadline=None)
@given(p=st.floats(1.1, 4.0), a=st.floats(-1.5, 4.0), s=st.floats(1e-4, 1e6))
def test_inverse_round_trip(p, a, s):
    A = power_log(p, a)
    t = inverse(A, s)
    assert A(t) == pytest.approx(s, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(t=st.floats(1e-3, 1e4), u=st.floats(1e-3, 1e4))
def test_power_log_monotone(t, u):
    A = power_log(2.0, -1.5)
    lo, hi = sorted((t, u))
    assert A(lo) <= A(hi)


def test_exp_overflow_carries_argument():
    with pytest.raises(YoungOverflowError) as ei:
        exp_minus_one()(800.0)
    assert ei.value.attempted == 800.0


def test_tabulated_extrapolation():
    ts = np.logspace(-2, 2, 40)
    T = tabulated(ts, ts ** 2)
    assert T(10.0) == pytest.approx(100.0, rel=1e-9)
    with pytest.raises(ExtrapolationError):
        T(1e3)


def test_tabulated_too_short_for_associate():
    ts = np.logspace(-1, 1, 8)
    with pytest.raises(ResolutionError):
        associate(tabulated(ts, ts ** 2))


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_associate_of_power_is_conjugate_power(p):
    B = associate(power(p))
    assert B.kind == "power"
    assert B.p == pytest.approx(p / (p - 1))


@pytest.mark.parametrize("A", [power_log(2, 1.0), power_log(3, -1.5), power_log(1.5, 2.0)],
                         ids=format_young)
def test_inverse_product_comparable_to_identity(A):
    # t <= A^{-1}(t) Abar^{-1}(t) <= 2t for the Legendre conjugate
    B = associate(A)
    for t in np.logspace(-3, 6, 30):
        r = inverse(A, t) * inverse(B, t) / t
        assert 1.0 - 1e-6 <= r <= 2.0 + 1e-6


def test_exp_associate_comparable_at_infinity():
    A = exp_minus_one()
    B = associate(A)
    r = [inverse(A, t) * inverse(B, t) / t for t in np.logspace(0, 7, 30)]
    assert 0.5 < min(r) and max(r) < 1.4


@pytest.mark.parametrize("text", ["power:p=2", "powerlog:p=2,a=3.5", "powerlog:p=1.5,a=-1.01",
                                  "expm1"])
def test_text_round_trip(text):
    assert format_young(parse_young(text)) == text


def test_table_text_form(tmp_path):
    ts = np.logspace(-2, 3, 30)
    path = tmp_path / "a.csv"
    path.write_text("t,value\n" + "".join(f"{float(t)!r},{float(t) ** 2!r}\n" for t in ts))
    A = parse_young(f"table:{path}")
    assert A(5.0) == pytest.approx(25.0, rel=1e-9)


def test_parse_rejects_garbage():
    with pytest.raises(ParameterError):
        parse_young("bogus")


def test_dilation():
    A = power(2).dilate(2.0)
    assert A(4.0) == pytest.approx(4.0)
    assert inverse(A, 4.0) == pytest.approx(4.0)


@pytest.mark.parametrize("p,q,a,expect", [
    (2.0, None, -1.5, True), (2.0, None, -1.0, False), (2.0, 4.0, -0.75, True),
    (2.0, 4.0, -0.25, False), (3.0, None, -2.0, True),
])
def test_class_membership_closed_forms(p, q, a, expect):
    assert bool(class_membership(power_log(p, a), p, q)) is expect


def test_exp_not_in_any_bp():
    assert not class_membership(exp_minus_one(), 2.0)


def test_class_membership_rejects_q_below_p():
    with pytest.raises(ParameterError):
        class_membership(power(2), 3.0, 2.0)


def test_tabulated_class_by_quadrature():
    # a table without asymptotic tag is decided numerically
    ts = np.logspace(-3, 12, 600)
    T = tabulated(ts, ts ** 2 * np.log(math.e + ts) ** -3.0)
    res = class_membership(T, 2.0)
    assert res.in_class
    assert np.isfinite(res.integral_estimate)


def test_holder_hypothesis_violation():
    lat = build_lattice([(0.0, 1.0)], 4)
    f = GridFunction(lat, np.ones(16))
    with pytest.raises(HypothesisViolation) as ei:
        holder_product_ratio([power(2), power(2)], power(2), [f, f], lat.root())
    assert ei.value.witness > 0


def test_holder_power_instance():
    lat = build_lattice([(0.0, 1.0)], 6)
    rng = np.random.default_rng(3)
    f = GridFunction(lat, rng.exponential(size=64))
    g = GridFunction(lat, rng.exponential(size=64))
    r = holder_product_ratio([power(4), power(4)], power(2), [f, g], lat.root())
    assert 0 < r <= 1.0
