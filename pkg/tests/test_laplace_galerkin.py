import numpy as np
import pytest
import scipy.sparse.linalg as spla

from graphheat import build_laplacian, laplacian_basis
from graphheat.errors import ValidationError
from graphheat.laplace_galerkin import (
    BoundarySpec,
    assemble,
    default_boundary,
    field_gradient,
    solve,
)
from helpers import cycle_graph, path_graph, random_graph, random_tree


def dirichlet_oracle(g, bd):
    """Direct solve of the interior rows of L f = 0 with the boundary pinned."""
    lap = build_laplacian(g).l.csr
    fixed = np.array(bd.g_plus + bd.g_minus)
    vals = np.r_[np.ones(len(bd.g_plus)), -np.ones(len(bd.g_minus))]
    free = np.setdiff1d(np.arange(g.n_nodes), fixed)
    f = np.zeros(g.n_nodes)
    f[fixed] = vals
    a = lap[free][:, free].tocsc()
    f[free] = spla.spsolve(a, -lap[free][:, fixed] @ vals)
    return f


class TestBoundarySpec:
    def test_overlap(self):
        with pytest.raises(ValidationError):
            BoundarySpec((0, 1), (1, 2))

    def test_empty(self):
        with pytest.raises(ValidationError):
            BoundarySpec((), (1,))

    def test_validate(self):
        with pytest.raises(ValidationError):
            BoundarySpec((0,), (5,)).validate(5)
        with pytest.raises(ValidationError):
            BoundarySpec((0,), (1,)).validate(2)

    def test_normalised(self):
        assert BoundarySpec([3, 1, 3], [0]).g_plus == (1, 3)


class TestAssemble:
    def test_p3_shape_and_order(self):
        b = laplacian_basis(path_graph(3))
        sys_ = assemble(b, BoundarySpec((0,), (2,)), interior_sample=[1], k=3)
        assert sys_.matrix.shape == (3, 3)
        np.testing.assert_array_equal(sys_.rhs, [0, 1, -1])
        np.testing.assert_allclose(sys_.matrix[0], b.eigenvalues * b.eigenvectors[1])
        np.testing.assert_allclose(sys_.matrix[1], b.eigenvectors[0])
        np.testing.assert_allclose(sys_.matrix[2], b.eigenvectors[2])

    def test_empty_interior(self):
        b = laplacian_basis(path_graph(5))
        sys_ = assemble(b, BoundarySpec((0, 1), (3, 4)), interior_sample=[], k=3)
        assert sys_.matrix.shape == (4, 3)
        assert sys_.metadata["interior_sampling"] == "given"

    def test_k_too_large(self):
        with pytest.raises(ValidationError):
            assemble(laplacian_basis(path_graph(3)), BoundarySpec((0,), (2,)), k=4)

    def test_insufficient_rows(self):
        with pytest.raises(ValidationError):
            assemble(laplacian_basis(path_graph(5)), BoundarySpec((0,), (4,)), interior_sample=[2], k=4)

    def test_interior_overlap(self):
        with pytest.raises(ValidationError):
            assemble(laplacian_basis(path_graph(5)), BoundarySpec((0,), (4,)), interior_sample=[0, 2])

    def test_subsampling(self, monkeypatch, rng):
        import graphheat.laplace_galerkin as lg

        monkeypatch.setattr(lg, "MAX_INTERIOR", 10)
        g = random_graph(rng, 40)
        b = laplacian_basis(g)
        s1 = assemble(b, BoundarySpec((0,), (1,)), k=5, seed=3)
        s2 = assemble(b, BoundarySpec((0,), (1,)), k=5, seed=3)
        assert s1.interior.size == 10 and s1.metadata["interior_sampling"] == "uniform"
        np.testing.assert_array_equal(s1.interior, s2.interior)

    def test_boundary_weight(self):
        b = laplacian_basis(path_graph(4))
        s = assemble(b, BoundarySpec((0,), (3,)), boundary_weight=2.0)
        np.testing.assert_array_equal(s.rhs, [0, 0, 2, -2])


class TestSolve:
    def test_p3(self):
        sol = solve(assemble(laplacian_basis(path_graph(3)), BoundarySpec((0,), (2,))))
        np.testing.assert_allclose(sol.values, [1, 0, -1], atol=1e-8)

    @pytest.mark.parametrize("n", [4, 10, 50, 100])
    def test_path_linear(self, n):
        sol = solve(assemble(laplacian_basis(path_graph(n)), BoundarySpec((0,), (n - 1,))))
        np.testing.assert_allclose(sol.values, np.linspace(1, -1, n), atol=1e-6)

    def test_matches_oracle(self, rng):
        for _ in range(10):
            n = int(rng.integers(5, 100))
            g = random_tree(rng, n) if rng.random() < 0.5 else random_graph(rng, n)
            bd = default_boundary(g)
            sol = solve(assemble(laplacian_basis(g), bd))
            f = dirichlet_oracle(g, bd)
            assert np.sqrt(np.mean((sol.values - f) ** 2)) <= 1e-5
            assert sol.boundary_error <= 1e-6
            assert sol.values.min() >= -1 - 1e-6 and sol.values.max() <= 1 + 1e-6

    def test_lstsq_residual_nonincreasing(self, rng):
        for g in (path_graph(30), random_tree(rng, 40), random_graph(rng, 40)):
            b = laplacian_basis(g)
            bd = default_boundary(g)
            res = [solve(assemble(b, bd, k=k)).lstsq_residual for k in range(1, g.n_nodes + 1)]
            assert np.all(np.diff(res) <= 1e-9)

    def test_pinv_matches_lstsq(self, rng):
        g = random_graph(rng, 30)
        sys_ = assemble(laplacian_basis(g), default_boundary(g), k=8)
        ref = np.linalg.lstsq(sys_.matrix, sys_.rhs, rcond=None)[0]
        np.testing.assert_allclose(solve(sys_).coefficients, ref, atol=1e-10)


class TestField:
    def test_constant(self, rng):
        g = random_graph(rng, 10)
        assert all(v == 0 for _, _, v in field_gradient(g, np.full(10, 4.0)))

    def test_p3(self):
        assert [v for _, _, v in field_gradient(path_graph(3), [1.0, 0.0, -1.0])] == [1.0, 1.0]

    def test_curl_free(self, rng):
        g = cycle_graph(7)
        f = rng.normal(size=7)
        vals = {(i, j): v for i, j, v in field_gradient(g, f)}
        loop = sum(vals[(i, i + 1)] for i in range(6)) - vals[(0, 6)]
        assert abs(loop) <= 1e-10


class TestDefaultBoundary:
    def test_path_endpoints(self):
        bd = default_boundary(path_graph(9))
        assert {bd.g_plus[0], bd.g_minus[0]} == {0, 8}

    def test_errors(self):
        with pytest.raises(ValidationError):
            default_boundary(path_graph(2))
        from graphheat import from_edge_list

        with pytest.raises(ValidationError):
            default_boundary(from_edge_list([(0, 1, 1.0)], 4))
