import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from segsolve.errors import ContractViolation, ValidationError
from segsolve.grid import (
    GridFunction,
    UniformGrid,
    classify,
    laplacian,
    laplacian_field,
    neighbor_average,
    neighbor_average_field,
    read_csv,
)


def test_classify_examples():
    assert classify(UniformGrid(2, 4), (0, 3)) == "boundary"
    assert classify(UniformGrid(2, 4), (2, 2)) == "interior"
    assert classify(UniformGrid(1, 2), 1) == "interior"


@pytest.mark.parametrize("alpha", [(5, 0), (-1, 2), (1,)])
def test_classify_rejects_bad_index(alpha):
    with pytest.raises(IndexError):
        classify(UniformGrid(2, 4), alpha)


@pytest.mark.parametrize("n", [1, 0, 2.5])
def test_grid_needs_two_cells(n):
    with pytest.raises(ValidationError):
        UniformGrid(2, n)


def test_grid_rejects_three_dimensions():
    with pytest.raises(ValidationError):
        UniformGrid(3, 4)


@pytest.mark.parametrize("dim,n", [(1, 7), (2, 10), (2, 160)])
def test_node_coordinates_are_exact(dim, n):
    g = UniformGrid(dim, n)
    h = 2.0 / n
    assert g.h == h
    for i in range(n):
        assert g.axis[i] == -1 + i * h
    assert g.axis[n] == 1.0
    assert g.node_count == (n + 1) ** dim


@pytest.mark.parametrize("dim,n", [(1, 5), (2, 4), (2, 7)])
def test_interior_and_boundary_partition_the_nodes(dim, n):
    g = UniformGrid(dim, n)
    nodes = list(g.nodes())
    assert len(nodes) == g.node_count
    interior = [a for a in nodes if g.is_interior(a)]
    assert len(interior) + len(g.boundary_nodes()) == len(nodes)
    assert int(g.interior_mask.sum()) == len(interior)
    for a in interior:
        nb = g.neighbors(a)
        assert len(nb) == g.K == 2 * dim
        assert all(0 <= k <= n for b in nb for k in b)


def test_neighbors_refused_on_boundary():
    with pytest.raises(ContractViolation):
        UniformGrid(2, 4).neighbors((0, 2))


def test_laplacian_constant_is_zero():
    g = UniformGrid(2, 6)
    v = GridFunction(g, np.full(g.shape, 3.7))
    assert all(laplacian(v, a) == 0 for a in g.nodes() if g.is_interior(a))


def test_laplacian_quadratic_is_four():
    g = UniformGrid(2, 8)
    v = GridFunction.from_function(g, lambda x, y: x**2 + y**2)
    vals = [laplacian(v, a) for a in g.nodes() if g.is_interior(a)]
    np.testing.assert_allclose(vals, 4.0, rtol=1e-12)


def test_laplacian_hand_value():
    v = GridFunction(UniformGrid(1, 2), [0.0, 5.0, 0.0])
    assert laplacian(v, 1) == -10.0


def test_laplacian_on_boundary_is_contract_violation():
    v = GridFunction.zeros(UniformGrid(1, 4))
    with pytest.raises(ContractViolation):
        laplacian(v, 0)
    with pytest.raises(ContractViolation):
        neighbor_average(v, 4)


def test_neighbor_average_examples():
    g = UniformGrid(2, 2)
    vals = np.zeros(g.shape)
    vals[0, 1], vals[2, 1], vals[1, 0], vals[1, 2] = 1, 2, 3, 4
    assert neighbor_average(GridFunction(g, vals), (1, 1)) == 2.5
    assert neighbor_average(GridFunction(g, np.full(g.shape, -2.0)), (1, 1)) == -2.0


@pytest.mark.parametrize("coeffs", [(1, 0, 0, 0, 0, 0), (0.5, -2, 3, 1, 4, -7), (0, 0, 0, 2, -1, 1)])
def test_quadratic_exactness(coeffs):
    a, b, c, d, e, f = coeffs
    g = UniformGrid(2, 12)
    v = a * g.mesh[0] ** 2 + b * g.mesh[0] * g.mesh[1] + c * g.mesh[1] ** 2 + d * g.mesh[0] + e * g.mesh[1] + f
    np.testing.assert_allclose(laplacian_field(v, 2, g.h), 2 * a + 2 * c, atol=1e-10)


def test_field_and_pointwise_stencils_agree():
    g = UniformGrid(2, 5)
    rng = np.random.default_rng(1)
    v = GridFunction(g, rng.normal(size=g.shape))
    lap = laplacian_field(v.values, 2, g.h)
    for a in g.nodes():
        if g.is_interior(a):
            assert lap[a[0] - 1, a[1] - 1] == pytest.approx(laplacian(v, a), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(dim=st.sampled_from((1, 2)), n=st.integers(2, 9), data=st.data())
def test_laplacian_average_identity(dim, n, data):
    g = UniformGrid(dim, n)
    v = data.draw(hnp.arrays(float, g.shape, elements=st.floats(-100, 100)))
    lap = laplacian_field(v, dim, g.h)
    avg = neighbor_average_field(v, dim)
    centre = v[g.interior]
    np.testing.assert_allclose(lap, g.K / g.h**2 * (avg - centre), rtol=1e-12, atol=1e-9)
    # maximum-principle primitive: L_h v >= 0 forces v <= neighbour average
    hit = lap >= 0
    assert np.all(centre[hit] <= avg[hit] + 1e-12 * (1 + np.abs(avg[hit])))


def test_gridfunction_is_read_only_and_finite():
    g = UniformGrid(1, 3)
    v = GridFunction(g, [0, 1, 2, 3])
    with pytest.raises(ValueError):
        v.values[0] = 1.0
    with pytest.raises(ValidationError):
        GridFunction(g, [0, np.nan, 0, 0])
    with pytest.raises(ValidationError):
        GridFunction(g, [0, 1])


def test_gridfunction_accepts_flat_row_major():
    g = UniformGrid(2, 2)
    v = GridFunction(g, np.arange(9.0))
    assert v[(0, 2)] == 2.0 and v[(2, 0)] == 6.0
    np.testing.assert_array_equal(v.flat, np.arange(9.0))


@pytest.mark.parametrize("dim", [1, 2])
def test_csv_round_trip(tmp_path, dim):
    g = UniformGrid(dim, 5)
    rng = np.random.default_rng(dim)
    v = GridFunction(g, rng.normal(size=g.shape) / 3)
    path = tmp_path / "v.csv"
    v.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == ("x,value" if dim == 1 else "x,y,value")
    assert len(lines) == g.node_count + 1
    assert read_csv(path) == v
    assert GridFunction.from_csv(path, g) == v


def test_csv_row_major_order(tmp_path):
    g = UniformGrid(2, 2)
    path = tmp_path / "v.csv"
    GridFunction(g, np.arange(9.0)).to_csv(path)
    rows = [r.split(",") for r in path.read_text().splitlines()[1:]]
    assert [float(r[0]) for r in rows[:3]] == [-1.0, -1.0, -1.0]
    assert [float(r[1]) for r in rows[:3]] == [-1.0, 0.0, 1.0]


def test_csv_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n")
    with pytest.raises(ValidationError):
        read_csv(path)
