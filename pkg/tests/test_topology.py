import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beliefpool.errors import InvalidSpecError, NonPrimitiveError
from beliefpool.topology import (
    NONREGULAR_24_EDGES,
    CombinationMatrix,
    NetworkKind,
    NetworkSpec,
    build_d_regular,
    build_fully_connected_uniform,
    build_lazy_metropolis,
    build_rank_one,
    contraction_coefficient_estimate,
    dobrushin_coefficient,
    kl_simplex,
    perron_vector,
    primitivity_exponent,
    ring_neighbors,
    second_eigenvalue_modulus,
)

A22 = np.array([[0.9, 0.2], [0.1, 0.8]])


class TestBuilders:
    def test_ring_2_regular(self, ring2):
        W = ring2.weights
        np.testing.assert_allclose(np.diag(W), 0.05)
        assert W[1, 0] == pytest.approx(0.475) and W[9, 0] == pytest.approx(0.475)
        assert np.count_nonzero(W[:, 0]) == 3
        np.testing.assert_allclose(ring2.perron, 0.1, atol=1e-10)

    def test_complete_graph_on_three(self):
        A = build_d_regular(3, 2, 0.0)
        np.testing.assert_allclose(A.weights, (1 - np.eye(3)) / 2)
        np.testing.assert_allclose(A.weights.sum(axis=0), 1.0, atol=1e-12)

    def test_ring_3_regular_neighbors(self, ring3):
        assert ring_neighbors(10, 3, 0) == [9, 1, 2]
        W = ring3.weights
        for k in range(10):
            nbrs = ring_neighbors(10, 3, k)
            np.testing.assert_allclose(W[nbrs, k], 0.95 / 3)
        assert ring3.is_doubly_stochastic()
        np.testing.assert_allclose(ring3.perron, 0.1, atol=1e-10)

    def test_degree_too_large(self):
        with pytest.raises(InvalidSpecError):
            build_d_regular(5, 5, 0.1)

    def test_periodic_ring_is_rejected(self):
        with pytest.raises(NonPrimitiveError):
            build_d_regular(4, 2, 0.0)

    def test_metropolis_path_graph(self):
        A = build_lazy_metropolis([(0, 1), (1, 2)], 0.0)
        expected = np.array([[0.5, 0.5, 0.0], [0.5, 0.0, 0.5], [0.0, 0.5, 0.5]])
        np.testing.assert_allclose(A.weights, expected)

    def test_metropolis_lazy_diagonal(self):
        A = build_lazy_metropolis(NONREGULAR_24_EDGES, 0.5)
        assert np.all(np.diag(A.weights) >= 0.5)

    def test_metropolis_disconnected(self):
        with pytest.raises(NonPrimitiveError, match="disconnected"):
            build_lazy_metropolis([(0, 1), (2, 3)], 0.1)

    def test_nonregular_standin(self, nonregular):
        assert len(NONREGULAR_24_EDGES) == 24
        degrees = np.bincount(np.array(NONREGULAR_24_EDGES).ravel(), minlength=10)
        assert len(set(degrees)) > 1
        assert nonregular.is_doubly_stochastic()
        np.testing.assert_allclose(nonregular.perron, 0.1, atol=1e-10)
        assert dobrushin_coefficient(nonregular) == pytest.approx(0.81, abs=1e-12)

    def test_rank_one(self):
        pi = np.array([0.5, 0.3, 0.2])
        A = build_rank_one(pi)
        for k in range(3):
            np.testing.assert_allclose(A.weights[:, k], pi)
        np.testing.assert_allclose(A.weights @ A.weights, A.weights, atol=1e-15)
        np.testing.assert_allclose(A.perron, pi, atol=1e-12)
        assert dobrushin_coefficient(A) == 0.0

    def test_rank_one_uniform(self):
        np.testing.assert_allclose(build_fully_connected_uniform(10).weights, 0.1)

    @pytest.mark.parametrize("pi", [[1.0, 0.0, 0.0], [0.5, 0.6], [0.2, -0.1, 0.9]])
    def test_rank_one_rejects(self, pi):
        with pytest.raises(InvalidSpecError):
            build_rank_one(pi)

    def test_from_weights_validation(self):
        with pytest.raises(InvalidSpecError):
            CombinationMatrix.from_weights([[0.5, 0.5], [0.6, 0.5]])
        with pytest.raises(InvalidSpecError):
            CombinationMatrix.from_weights([[1.2, 0.5], [-0.2, 0.5]])
        with pytest.raises(NonPrimitiveError):
            CombinationMatrix.from_weights([[0.0, 1.0], [1.0, 0.0]])

    def test_weights_read_only(self, ring2):
        with pytest.raises(ValueError):
            ring2.weights[0, 0] = 1.0


class TestAnalysis:
    def test_perron_two_by_two(self):
        np.testing.assert_allclose(perron_vector(A22), [2 / 3, 1 / 3], atol=1e-10)

    def test_perron_matches_power_limit(self, nonregular):
        rng = np.random.default_rng(3)
        for _ in range(5):
            W = rng.random((6, 6)) ** 3
            W /= W.sum(axis=0)
            limit = np.linalg.matrix_power(W, 400)[:, 0]
            np.testing.assert_allclose(perron_vector(W), limit / limit.sum(), atol=1e-8)

    def test_perron_residual(self, ring3):
        pi = perron_vector(ring3)
        np.testing.assert_allclose(ring3.weights @ pi, pi, atol=1e-10)

    def test_perron_non_primitive(self):
        with pytest.raises(NonPrimitiveError):
            perron_vector(np.array([[0.0, 1.0], [1.0, 0.0]]))

    def test_dobrushin(self):
        assert dobrushin_coefficient(A22) == pytest.approx(0.7)
        assert dobrushin_coefficient(np.eye(4)) == 1.0

    def test_primitivity_exponent(self, ring2):
        assert primitivity_exponent(np.full((3, 3), 1 / 3)) == 1
        assert primitivity_exponent(np.array([[0.0, 1.0], [1.0, 0.0]])) is None
        n = primitivity_exponent(ring2)
        assert n is not None and n <= 82
        # brute-force oracle on the support pattern
        S = (ring2.weights > 0).astype(int)
        P = np.eye(10, dtype=int)
        for m in range(1, 83):
            P = np.minimum(P @ S, 1)
            if P.all():
                break
        assert n == m

    def test_kl_simplex_conventions(self):
        assert kl_simplex([0.5, 0.5, 0.0], [0.25, 0.25, 0.5]) == pytest.approx(np.log(2))
        assert kl_simplex([0.5, 0.5], [1.0, 0.0]) == np.inf

    def test_contraction_extremes(self, uniform10):
        rank = contraction_coefficient_estimate(uniform10, samples=200)
        assert rank.estimate == 0.0 and rank.dobrushin == 0.0
        ident = contraction_coefficient_estimate(np.eye(3), samples=200)
        assert ident.estimate == pytest.approx(1.0) and ident.dobrushin == 1.0

    def test_contraction_two_by_two(self):
        est = contraction_coefficient_estimate(A22, samples=2000)
        # grid-search oracle over pairs in the 1-simplex
        g = np.linspace(1e-4, 1 - 1e-4, 600)
        U, V = np.meshgrid(g, g)
        u = np.stack([U.ravel(), 1 - U.ravel()], axis=1)
        v = np.stack([V.ravel(), 1 - V.ravel()], axis=1)
        Au, Av = u @ A22.T, v @ A22.T
        num = np.sum(Au * np.log(Au / Av), axis=1)
        den = np.sum(u * np.log(u / v), axis=1)
        mask = den > 1e-8
        oracle = np.max(num[mask] / den[mask])
        lam2 = second_eigenvalue_modulus(A22)
        assert lam2 == pytest.approx(0.7)
        assert est.dobrushin == pytest.approx(0.7)
        assert lam2 ** 2 - 1e-9 <= est.estimate <= 0.7
        assert est.estimate == pytest.approx(oracle, abs=2e-3)


class TestSerialization:
    def test_csv_roundtrip(self, nonregular, tmp_path):
        p = tmp_path / "A.csv"
        nonregular.to_csv(p)
        assert p.read_text().splitlines()[0] == "10"
        back = CombinationMatrix.from_csv(p)
        np.testing.assert_array_equal(back.weights, nonregular.weights)

    @pytest.mark.parametrize("spec", [
        {"kind": "d_regular_with_self_weight", "K": 10, "degree": 2, "alpha": 0.05},
        {"kind": "lazy_metropolis", "K": 10, "alpha": 0.05, "edges": "nonregular_24"},
        {"kind": "rank_one", "K": 3, "perron": [0.5, 0.3, 0.2]},
        {"kind": "fully_connected_uniform", "K": 4},
        {"kind": "explicit", "K": 2, "weights": [[0.9, 0.2], [0.1, 0.8]]},
    ])
    def test_spec_roundtrip(self, spec):
        s = NetworkSpec.from_dict(spec)
        again = NetworkSpec.from_dict(s.to_dict())
        np.testing.assert_array_equal(s.build().weights, again.build().weights)

    def test_spec_errors(self):
        with pytest.raises(InvalidSpecError):
            NetworkSpec.from_dict({"kind": "torus", "K": 4})
        with pytest.raises(InvalidSpecError):
            NetworkSpec.from_dict({"kind": "d_regular_with_self_weight", "K": 4, "alpha": 0.1})
        with pytest.raises(InvalidSpecError):
            NetworkSpec.from_dict({"kind": "fully_connected_uniform", "K": 4, "colour": 1})
        assert NetworkKind("explicit") is NetworkKind.EXPLICIT


@settings(max_examples=40, deadline=None)
@given(K=st.integers(3, 12), data=st.data())
def test_constructors_are_stochastic(K, data):
    D = data.draw(st.integers(1, K - 1))
    alpha = data.draw(st.floats(0.01, 0.95))
    A = build_d_regular(K, D, alpha)
    np.testing.assert_allclose(A.weights.sum(axis=0), 1.0, atol=1e-12)
    assert np.all(A.weights >= 0)
    np.testing.assert_allclose(A.perron, 1.0 / K, atol=1e-10)
