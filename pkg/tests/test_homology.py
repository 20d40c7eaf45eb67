import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bayes_betti.homology import (
    PersistenceDiagram,
    UnionFind,
    build_rips_filtration,
    compute_persistence,
    enclosing_radius,
    load_diagram_csv,
    metadata_path,
    reduce_filtration,
    rips_persistence,
    write_diagram_csv,
    zero_dim_persistence,
)
from oracles import naive_rips_diagram, sorted_pairs

TWO_POINTS = np.array([[0.0, 0.0], [2.0, 0.0]])
SQUARE = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def test_two_point_filtration():
    filt = build_rips_filtration(TWO_POINTS, 2.0, max_dim=1)
    assert [(s.vertices, s.value) for s in filt.simplices] == [((0,), 0.0), ((1,), 0.0), ((0, 1), 1.0)]


def test_square_filtration_counts():
    filt = build_rips_filtration(SQUARE, 1.0, max_dim=2)
    by_dim = {d: [s.value for s in filt.simplices if s.dim == d] for d in range(3)}
    assert len(by_dim[0]) == 4
    assert sorted(by_dim[1]) == [0.5] * 4 + [math.sqrt(2) / 2] * 2
    assert by_dim[2] == [math.sqrt(2) / 2] * 4
    assert len(filt) == 14


def test_zero_eps_gives_vertices_only():
    cloud = np.random.default_rng(0).normal(size=(7, 2))
    filt = build_rips_filtration(cloud, 0.0, max_dim=2)
    assert len(filt) == 7 and all(s.dim == 0 for s in filt.simplices)


def test_faces_precede_cofaces():
    cloud = np.random.default_rng(1).normal(size=(10, 3))
    filt = build_rips_filtration(cloud, 1.5, max_dim=3)
    position = {s.vertices: i for i, s in enumerate(filt.simplices)}
    for i, s in enumerate(filt.simplices):
        if s.dim:
            for drop in range(len(s.vertices)):
                face = s.vertices[:drop] + s.vertices[drop + 1:]
                assert position[face] < i


@pytest.mark.parametrize("max_dim", [0, 4])
def test_filtration_rejects_max_dim(max_dim):
    with pytest.raises(ValueError):
        build_rips_filtration(SQUARE, 1.0, max_dim=max_dim)


def test_two_point_diagram():
    diag = compute_persistence(build_rips_filtration(TWO_POINTS, 2.0, max_dim=1))
    assert sorted_pairs(diag, 0) == [(0.0, 1.0), (0.0, 2.0)]
    assert sorted_pairs(zero_dim_persistence(TWO_POINTS, 2.0), 0) == [(0.0, 1.0), (0.0, 2.0)]


def test_unit_square_diagram():
    diag = compute_persistence(build_rips_filtration(SQUARE, 1.0, max_dim=2))
    assert sorted_pairs(diag, 1) == [(0.5, math.sqrt(2) / 2)]
    assert sorted_pairs(diag, 0) == [(0.0, 0.5)] * 3 + [(0.0, 1.0)]


def test_equilateral_triangle_diagram():
    s = 2.0
    tri = np.array([[0.0, 0.0], [s, 0.0], [s / 2, s * math.sqrt(3) / 2]])
    diag = compute_persistence(build_rips_filtration(tri, 3.0, max_dim=2))
    np.testing.assert_allclose(sorted_pairs(diag, 0), [(0.0, s / 2), (0.0, s / 2), (0.0, 3.0)], atol=1e-12)
    assert diag[1].shape == (0, 2)


def test_single_point_zero_dim():
    diag = zero_dim_persistence(np.array([[1.0, 2.0]]), 0.7)
    assert sorted_pairs(diag, 0) == [(0.0, 0.7)]


def test_pairing_accounts_for_every_simplex():
    cloud = np.random.default_rng(2).normal(size=(12, 2))
    filt = build_rips_filtration(cloud, 1.2, max_dim=2)
    pairs, unpaired = reduce_filtration(filt)
    assert 2 * len(pairs) + len(unpaired) == len(filt)
    for b, d in pairs:
        assert filt.simplices[d].dim == filt.simplices[b].dim + 1


@pytest.mark.parametrize("seed", range(20))
def test_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 16))
    cloud = rng.normal(size=(n, int(rng.choice([2, 3]))))
    eps = float(rng.uniform(0.3, 1.5))
    oracle = naive_rips_diagram(cloud, eps, 2)
    diag = compute_persistence(build_rips_filtration(cloud, eps, 2))
    for h in (0, 1):
        assert sorted_pairs(diag, h) == oracle[h]


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 25), st.just(2)), elements=st.floats(-10, 10, allow_nan=False, width=32)))
def test_union_find_path_matches_reduction(cloud):
    eps = enclosing_radius(cloud) * 1.05 if len(cloud) > 1 else 1.0
    eps = max(eps, 1e-3)
    a = zero_dim_persistence(cloud, eps)
    b = compute_persistence(build_rips_filtration(cloud, eps, max_dim=1))
    assert sorted_pairs(a, 0) == sorted_pairs(b, 0)


def test_rigid_motion_invariance():
    rng = np.random.default_rng(4)
    cloud = rng.normal(size=(14, 2))
    ang = 0.83
    rot = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    moved = cloud @ rot.T + np.array([3.0, -7.5])
    a = rips_persistence(cloud, 1.4, max_dim=2)
    b = rips_persistence(moved, 1.4, max_dim=2)
    for h in (0, 1):
        np.testing.assert_allclose(sorted_pairs(a, h), sorted_pairs(b, h), atol=1e-9)


def test_union_find():
    uf = UnionFind(5)
    assert uf.union(0, 1) and uf.union(3, 4) and uf.union(1, 4)
    assert not uf.union(0, 3)
    assert uf.find(0) == uf.find(4) != uf.find(2)


def test_diagram_rejects_inverted_pair():
    with pytest.raises(ValueError):
        PersistenceDiagram(1.0, {0: np.array([[0.5, 0.3]])}, 2)


def test_csv_roundtrip(tmp_path):
    cloud = np.random.default_rng(5).normal(size=(30, 2))
    diag = rips_persistence(cloud, 1.7, max_dim=2)
    path = write_diagram_csv(diag, tmp_path / "d.csv")
    assert metadata_path(path).exists()
    back = load_diagram_csv(path)
    assert back.eps_max == diag.eps_max
    assert back.same_as(diag)


def test_load_two_point_file(tmp_path):
    p = tmp_path / "two.csv"
    p.write_text("dim,birth,death\n0,0.0,1.0\n0,0.0,2.0\n")
    metadata_path(p).write_text('{"eps_max": 2.0, "n_points": 2}')
    assert sorted_pairs(load_diagram_csv(p), 0) == [(0.0, 1.0), (0.0, 2.0)]


@pytest.mark.parametrize(
    "row, fragment",
    [("1,0.5,0.3", "exceeds"), ("0,-0.1,1", "negative birth"), ("0,abc,1", "malformed"), ("0,0.1", "malformed")],
)
def test_load_reports_bad_rows(tmp_path, row, fragment):
    p = tmp_path / "bad.csv"
    p.write_text(f"dim,birth,death\n0,0.0,1.0\n{row}\n")
    metadata_path(p).write_text('{"eps_max": 2.0}')
    with pytest.raises(ValueError, match=fragment) as info:
        load_diagram_csv(p)
    assert "bad.csv:3" in str(info.value)


def test_load_requires_metadata(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("dim,birth,death\n")
    with pytest.raises(FileNotFoundError):
        load_diagram_csv(p)
