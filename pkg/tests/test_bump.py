import numpy as np
import pytest

from bumplab.bump import (
    PRESETS,
    BumpSpec,
    adversarial_corpus,
    ap_constant,
    bump_constant,
    check_classes,
    conj,
    duality_chain_audit,
    holder_dilation,
    norm_ratio,
    preset,
)
from bumplab.errors import ClassConditionError, ParameterError
from bumplab.field import GridFunction, SymbolVector, sample
from bumplab.lattice import build_lattice
from bumplab.operators import hilbert, identity, potential
from bumplab.sparse import TauSubset, build_family
from bumplab.young import exp_minus_one, inverse, power


def _ones(lat):
    return GridFunction(lat, np.ones((lat.cells_per_axis,) * lat.n), "weight")


def test_conj():
    assert conj(2.0) == 2.0
    assert conj(3.0) == pytest.approx(1.5)


@pytest.mark.parametrize("name", PRESETS)
def test_every_preset_builds(name):
    diag = name in ("thm11", "czobump", "commbump", "thm13", "oscbump", "maxbump", "ap",
                    "twoweight-ap")
    q, alpha = (2.0, 0.0) if diag else (4.0, 0.5)
    spec = preset(name, 2.0, q, alpha, m=1)
    assert spec.name == name
    if name != "ap":
        assert spec.A is not None and spec.B is not None
    check_classes(spec)


def test_thm11_exponents():
    spec = preset("thm11", 2.0, delta=0.1)
    # eps = delta min(s'/q, s/p') = 0.1; (1 + eps) q / s' = 1.1
    assert spec.A.p == 2.0 and spec.A.a == pytest.approx(1.1)
    assert spec.B.a == pytest.approx(1.1)


def test_thm13_exponents():
    spec = preset("thm13", 2.0, m=2, delta=0.1)
    assert spec.A.a == pytest.approx((2 + 0.5) * 2 + 0.1)


def test_diagonal_presets_reject_fractional():
    with pytest.raises(ParameterError):
        preset("thm11", 2.0, 4.0, 0.5)
    with pytest.raises(ParameterError):
        preset("nonsense", 2.0)


def test_spec_validation():
    with pytest.raises(ParameterError):
        BumpSpec(p=2.0, q=1.5)
    with pytest.raises(ParameterError):
        BumpSpec(p=2.0, q=4.0, s=5.0)
    with pytest.raises(ParameterError):
        BumpSpec(p=2.0, tau_policy="single")


def test_class_failure_raises():
    spec = BumpSpec(p=2.0, A=power(2), B=power(2),
                    required=[("B̄ ∈ B_p", "B", 2.0, None)])
    with pytest.raises(ClassConditionError) as ei:
        check_classes(spec)
    assert ei.value.failing_class == "B̄ ∈ B_p"
    recs = check_classes(spec, raise_on_fail=False)
    assert recs[0]["in_class"] is False


def test_ap_constant_constant_weight(lat8):
    assert ap_constant(_ones(lat8), 2.0) == pytest.approx(1.0)
    assert ap_constant(_ones(lat8), 2.0, _ones(lat8)) == pytest.approx(1.0)


@pytest.mark.parametrize("a", [-0.5, 0.5])
def test_ap_power_weight_stable(a):
    vals = [ap_constant(sample("power_weight", {"a": a}, build_lattice([(-8.0, 8.0)], d)), 2.0)
            for d in (7, 8)]
    assert all(np.isfinite(vals))
    assert abs(vals[1] / vals[0] - 1) < 0.05


def test_ap_power_weight_outside_range_grows():
    vals = [ap_constant(sample("power_weight", {"a": 1.5}, build_lattice([(-8.0, 8.0)], d)), 2.0)
            for d in (7, 8, 9)]
    assert vals[1] > 1.3 * vals[0] and vals[2] > 1.3 * vals[1]


@pytest.mark.parametrize("name", ["twoweight-ap", "thm11", "czobump", "maxbump", "thm13"])
def test_constant_weights(lat8, name):
    spec = preset(name, 2.0, m=1)
    res = bump_constant(_ones(lat8), _ones(lat8), spec)
    expect = 1.0 / (inverse(spec.A, 1.0) * inverse(spec.B, 1.0))
    assert res.value == pytest.approx(expect, rel=1e-9)


def test_constant_symbol_gives_zero(lat8):
    c = sample("constant", {"c": 5.0}, lat8)
    spec = preset("thm11", 2.0, symbols=SymbolVector.repeat(c, 2))
    res = bump_constant(_ones(lat8), _ones(lat8), spec)
    assert [t["value"] for t in res.per_tau] == [0.0] * 4
    assert res.value == 0.0


def test_bump_json_shape(lat8):
    b = sample("log_abs", {}, lat8)
    w = sample("power_weight", {"a": 0.5}, lat8)
    res = bump_constant(w, w, preset("oscbump", 2.0, m=2, symbols=SymbolVector([b])))
    doc = res.to_json()
    assert set(doc) == {"value", "argmax", "per_tau", "class_checks", "spec"}
    assert len(doc["per_tau"]) == 2
    assert doc["value"] == pytest.approx(sum(t["value"] for t in doc["per_tau"]))
    assert doc["argmax"] is not None


def test_bump_oscillation_refinement():
    vals = []
    for d in (9, 10):
        lat = build_lattice([(-8.0, 8.0)], d)
        b = sample("log_abs", {}, lat)
        w = sample("power_weight", {"a": 0.5}, lat)
        spec = preset("oscbump", 2.0, m=1, symbols=SymbolVector([b]))
        vals.append(bump_constant(w, w, spec).value)
    assert abs(vals[1] / vals[0] - 1) < 0.05


def test_holder_dilation_regression():
    A = preset("thm11", 2.0).A
    U = preset("thm13", 2.0, m=2).A
    k = [holder_dilation([exp_minus_one()] * j + [U], A) for j in range(3)]
    assert k == pytest.approx([0.99927, 2.02606, 18.6153], rel=1e-4)


def test_norm_ratio_identity(lat8):
    one = _ones(lat8)
    corpus = adversarial_corpus(one, one, 2.0, op=identity())
    res = norm_ratio(identity(), one, one, 2.0, 2.0, corpus)
    assert res.best_ratio == pytest.approx(1.0, rel=1e-12)
    assert len(res.per_f) == len(corpus)


def test_norm_ratio_empty(lat8):
    with pytest.raises(ParameterError):
        norm_ratio(identity(), _ones(lat8), _ones(lat8), 2.0, 2.0, [])


def test_corpus_normalized(lat8):
    w = sample("power_weight", {"a": 0.3}, lat8)
    corpus = adversarial_corpus(w, w, 3.0, op=hilbert(), seed=1)
    vol = lat8.cell_volume
    for f in corpus:
        assert (np.abs(f.values) ** 3 * w.values).sum() * vol == pytest.approx(1.0)


@pytest.mark.parametrize("p,q,alpha,s,m", [(2.0, 2.0, 0.0, 2.0, 1), (2.0, 4.0, 0.5, 3.0, 1),
                                           (1.5, 3.0, 0.3, 1.5, 0)])
def test_duality_audit_passes(lat8, p, q, alpha, s, m):
    f = sample("smooth_bump", {"x0": 0.2, "radius": 1.5}, lat8)
    g = sample("gaussian", {"x0": -0.5}, lat8)
    b = sample("smooth_bump", {"x0": 0.5, "radius": 3.0}, lat8)
    w = sample("power_weight", {"a": 0.3}, lat8)
    syms = SymbolVector.repeat(b, m)
    op = hilbert() if alpha == 0 else potential(alpha)
    fam = build_family(op, syms, f, C_height=24.0).family
    spec = preset("thm11" if alpha == 0 else "thm12", p, q, alpha, s, symbols=syms)
    recs = duality_chain_audit(fam, syms, TauSubset(2 ** m - 1, m), alpha, f, g, spec, u=w, v=w)
    assert [r["step"] for r in recs] == [1, 2, 3, 4, 5]
    assert [r["constant"] for r in recs][:2] == [4.0, 1.0]
    assert recs[2]["constant"] == pytest.approx(1 / fam.alpha)
    assert all(r["ok"] for r in recs)


def test_duality_audit_tau_mismatch(lat8):
    f = sample("constant", {}, lat8)
    spec = preset("thm11", 2.0)
    fam = build_family(hilbert(), SymbolVector(), f).family
    with pytest.raises(ParameterError):
        duality_chain_audit(fam, SymbolVector(), TauSubset(0, 1), 0.0, f, f, spec)
