import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bumplab.errors import DegenerateCubeError, ParameterError, ResourceError, StructuralError
from bumplab.lattice import (
    Cube,
    SparseFamily,
    build_lattice,
    cover_triple,
    enumerate_cubes,
    family_from_json,
    family_to_json,
    level_blocks,
    shifted_lattices,
    sparsity_check,
    spread_level,
)


def test_cube_counts_per_level():
    lat = build_lattice([(0.0, 1.0)], 5)
    for k in range(6):
        assert len(list(lat.cubes_at(k))) == 2 ** k
    assert len(list(enumerate_cubes(lat))) == 2 ** 6 - 1


def test_two_d_counts():
    lat = build_lattice([(0.0, 1.0), (0.0, 1.0)], 3)
    assert len(list(lat.cubes_at(2))) == 16
    assert lat.n == 2


def test_bad_boxes():
    with pytest.raises(ParameterError):
        build_lattice([(0.0, 1.0), (0.0, 2.0)], 3)
    with pytest.raises(ParameterError):
        build_lattice([(1.0, 1.0)], 3)
    with pytest.raises(ParameterError):
        build_lattice([(0.0, 1.0)], 0)
    with pytest.raises(ResourceError):
        build_lattice([(0.0, 1.0)] * 3, 9)


def test_shifted_family_size():
    base = build_lattice([(0.0, 1.0)], 4)
    assert len(shifted_lattices(base)) == 3
    base2 = build_lattice([(0.0, 1.0), (0.0, 1.0)], 3)
    lats = shifted_lattices(base2)
    assert len(lats) == 9
    assert lats[0].is_base


def test_clipped_measure():
    base = build_lattice([(0.0, 1.0)], 3)
    lat = shifted_lattices(base)[1]
    tops = list(lat.cubes_at(0))
    assert len(tops) == 2 and all(Q.clipped for Q in tops)
    assert sum(Q.measure for Q in tops) == pytest.approx(1.0)
    with pytest.raises(StructuralError):
        lat.root()
    total = sum(Q.measure for Q in lat.cubes_at(2))
    assert total == pytest.approx(1.0)


def test_degenerate_cube():
    lat = build_lattice([(0.0, 1.0)], 3)
    with pytest.raises(DegenerateCubeError):
        Cube(lat, 1, (5,)).refined_bounds()


def test_children_parent():
    lat = build_lattice([(0.0, 1.0)], 3)
    Q = Cube(lat, 1, (1,))
    kids = Q.children()
    assert len(kids) == 2
    assert all(c.parent() == Q for c in kids)
    assert sum(c.measure for c in kids) == pytest.approx(Q.measure)


@settings(max_examples=40, deadline=None)
@given(k=st.integers(1, 6), j=st.integers(0, 63))
def test_triple_cover_is_small(k, j):
    base = build_lattice([(0.0, 1.0)], 6)
    Q = Cube(base, k, (j % 2 ** k,))
    R = cover_triple(Q, shifted_lattices(base))
    lo, hi = Q.triple_refined()[0]
    assert R.contains_refined_box([(lo, hi)])
    # |R_Q| <= 9^n |Q| (n = 1), clipped measure
    assert R.measure <= 9 * Q.measure + 1e-12


def test_level_blocks_round_trip():
    lat = build_lattice([(0.0, 1.0)], 4)
    arr = np.arange(lat.refined_per_axis, dtype=float)
    rows, mask = level_blocks(lat, 2, arr)
    assert rows.shape[0] == 4
    back = spread_level(lat, 2, rows.sum(axis=1) / mask.sum(axis=1))
    assert back.shape == arr.shape


def _two_cube_family(lat):
    root = lat.root()
    child = Cube(lat, 1, (0,))
    N = lat.cells_per_axis
    w_root = np.arange(N // 2, N)
    w_child = np.arange(0, N // 4)
    return SparseFamily([root, child], 0.5, [w_root, w_child])


def test_sparsity_check_passes_and_fails():
    lat = build_lattice([(0.0, 1.0)], 4)
    fam = _two_cube_family(lat)
    res = sparsity_check(fam)
    assert res.ok and res.disjoint
    assert res.worst_ratio == pytest.approx(0.5)
    fam.witnesses[1] = np.arange(0, 2)
    res = sparsity_check(fam)
    assert not res.ok
    assert res.worst_cube == fam.cubes[1]


def test_sparsity_detects_overlap():
    lat = build_lattice([(0.0, 1.0)], 4)
    fam = _two_cube_family(lat)
    fam.witnesses[0] = np.arange(0, 16)
    assert not sparsity_check(fam).disjoint


def test_sparsity_missing_witness():
    lat = build_lattice([(0.0, 1.0)], 4)
    fam = SparseFamily([lat.root()], 0.5, [])
    with pytest.raises(StructuralError):
        sparsity_check(fam)


def test_witness_outside_cube():
    lat = build_lattice([(0.0, 1.0)], 4)
    fam = SparseFamily([Cube(lat, 1, (0,))], 0.5, [np.array([12])])
    with pytest.raises(StructuralError):
        sparsity_check(fam)


def test_family_json_round_trip(tmp_path):
    lat = build_lattice([(0.0, 1.0)], 4)
    fam = _two_cube_family(lat)
    doc = family_to_json(fam, [lat])
    path = tmp_path / "fam.json"
    import json
    path.write_text(json.dumps(doc))
    back = family_from_json(path)
    assert [Q.key() for Q in back.cubes] == [Q.key() for Q in fam.cubes]
    assert all(np.array_equal(a, b) for a, b in zip(back.witnesses, fam.witnesses))
