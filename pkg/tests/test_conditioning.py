import itertools

import numpy as np
import pytest

from lrdpp.conditioning import (
    complete_basket,
    condition,
    elementary_symmetric,
    next_item_probabilities,
    projection,
)
from lrdpp.errors import ConditioningError
from lrdpp.oracle import brute_force_conditional, condition_by_inversion, condition_by_schur, dense_kernel


class TestProjection:
    def test_trace_matches_example(self):
        V = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
        Z = projection(V, [0])
        np.testing.assert_allclose(Z, [[0.0, 0.0], [0.0, 1.0]], atol=1e-15)
        cm = condition(V, [0])
        np.testing.assert_array_equal(cm.candidates, [1, 2])
        np.testing.assert_allclose(cm.v_cond, [[0.0, 1.0], [0.0, 1.0]], atol=1e-15)
        assert cm.normalizer_e1 == pytest.approx(2.0)

    def test_empty_basket_is_identity(self, rng):
        np.testing.assert_array_equal(projection(rng.normal(size=(5, 3)), []), np.eye(3))

    def test_symmetric_idempotent(self, rng):
        V = rng.normal(size=(9, 4))
        Z = projection(V, [1, 6])
        np.testing.assert_allclose(Z, Z.T, atol=1e-14)
        np.testing.assert_allclose(Z @ Z, Z, atol=1e-12)
        np.testing.assert_allclose(V[[1, 6]] @ Z, 0.0, atol=1e-12)

    def test_singular_basket(self):
        V = np.array([[1.0, 0.0], [2.0, 0.0], [0.0, 1.0]])
        with pytest.raises(ConditioningError, match="zero-probability"):
            projection(V, [0, 1])

    def test_basket_larger_than_rank(self, rng):
        with pytest.raises(ConditioningError):
            projection(rng.normal(size=(6, 2)), [0, 1, 2])


class TestCondition:
    def test_empty_basket_keeps_kernel(self, rng):
        V = rng.normal(size=(6, 3))
        cm = condition(V, [])
        np.testing.assert_allclose(cm.v_cond @ cm.v_cond.T, V @ V.T, atol=1e-12)

    def test_matches_full_rank_formulas(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            M = int(rng.integers(2, 21))
            K = int(rng.integers(1, 7))
            V = rng.normal(size=(M, K))
            size = int(rng.integers(0, min(K, 5, M - 1) + 1))
            A = sorted(rng.choice(M, size=size, replace=False))
            cm = condition(V, A)
            low_rank = cm.v_cond @ cm.v_cond.T
            L = dense_kernel(V)
            np.testing.assert_allclose(low_rank, condition_by_inversion(L, A), atol=1e-8)
            np.testing.assert_allclose(low_rank, condition_by_schur(L, A), atol=1e-8)

    def test_orthogonal_items_unchanged(self):
        V = np.array([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]])
        cm = condition(V, [0])
        np.testing.assert_allclose(cm.v_cond, V[1:], atol=1e-15)

    def test_items_in_span_vanish(self):
        V = np.array([[1.0, 0.0], [0.0, 1.0], [3.0, 0.0]])
        cm = condition(V, [0])
        probs = next_item_probabilities(cm)
        assert probs[list(cm.candidates).index(2)] == pytest.approx(0.0, abs=1e-15)

    def test_result_orthogonal_to_basket(self, rng):
        V = rng.normal(size=(10, 4))
        cm = condition(V, [2, 5])
        np.testing.assert_allclose(cm.v_cond @ V[[2, 5]].T, 0.0, atol=1e-12)

    def test_basket_order_irrelevant(self, rng):
        V = rng.normal(size=(8, 3))
        a = condition(V, [6, 1])
        b = condition(V, [1, 6])
        np.testing.assert_allclose(a.v_cond, b.v_cond, atol=1e-13)
        assert a.basket == b.basket == (1, 6)

    def test_read_only_snapshot(self, rng):
        cm = condition(rng.normal(size=(5, 2)), [0])
        with pytest.raises(ValueError):
            cm.v_cond[0, 0] = 1.0

    def test_no_candidates(self, rng):
        with pytest.raises(ConditioningError, match="no candidates"):
            condition(rng.normal(size=(2, 2)), [0, 1])


class TestNextItemProbabilities:
    def test_sum_to_one(self, rng):
        V = rng.normal(size=(12, 5))
        probs = next_item_probabilities(condition(V, [3, 7]))
        assert probs.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(probs >= 0)

    def test_matches_conditional_k_dpp(self, rng):
        for _ in range(10):
            V = rng.normal(size=(8, 4))
            A = sorted(rng.choice(8, size=2, replace=False))
            cm = condition(V, A)
            table = brute_force_conditional(dense_kernel(V), A, len(A) + 1)
            expected = [table[(int(b),)] for b in cm.candidates]
            np.testing.assert_allclose(next_item_probabilities(cm), expected, rtol=1e-9)

    def test_no_mass_left(self, rng):
        V = rng.normal(size=(5, 2))
        with pytest.raises(ConditioningError, match="no probability mass"):
            next_item_probabilities(condition(V, [0, 1]))


class TestElementarySymmetric:
    def test_examples(self):
        assert elementary_symmetric([1.0, 2.0, 3.0], 2) == pytest.approx(11.0)
        assert elementary_symmetric([1.0] * 6, 3) == pytest.approx(20.0)

    def test_edges(self):
        assert elementary_symmetric([4.0, 5.0], 0) == 1.0
        assert elementary_symmetric([4.0, 5.0], 3) == 0.0
        with pytest.raises(ValueError):
            elementary_symmetric([1.0], -1)

    def test_against_subset_products(self, rng):
        values = rng.uniform(0.0, 2.0, size=7)
        for k in range(8):
            expected = sum(np.prod(c) for c in itertools.combinations(values, k))
            assert elementary_symmetric(values, k) == pytest.approx(expected, rel=1e-12)

    def test_first_polynomial_is_trace(self, rng):
        V = rng.normal(size=(9, 3))
        cm = condition(V, [4])
        eig = np.linalg.eigvalsh(cm.v_cond @ cm.v_cond.T)
        assert elementary_symmetric(eig, 1) == pytest.approx(cm.normalizer_e1, rel=1e-10)


class TestCompleteBasket:
    def test_ranked_descending(self, rng):
        V = rng.normal(size=(15, 4))
        completions = complete_basket(V, [0, 3], top_n=5)
        assert len(completions) == 5
        probs = [c.probability for c in completions]
        assert probs == sorted(probs, reverse=True)
        assert all(c.item not in (0, 3) for c in completions)

    def test_ties_broken_by_index(self):
        V = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        completions = complete_basket(V, [1], top_n=2)
        assert [c.item for c in completions] == [0, 2]
        assert completions[0].probability == completions[1].probability

    def test_top_n_clamped(self, rng):
        V = rng.normal(size=(6, 3))
        assert len(complete_basket(V, [2], top_n=100)) == 5
        assert complete_basket(V, [2], top_n=0) == []

    def test_agrees_with_oracle_ranking(self, rng):
        V = rng.normal(size=(10, 4))
        A = [1, 8]
        table = brute_force_conditional(dense_kernel(V), A, 3)
        expected = sorted(table, key=lambda key: (-table[key], key[0]))[:3]
        assert [c.item for c in complete_basket(V, A, 3)] == [key[0] for key in expected]

    def test_probabilities_invariant_under_rotation(self, rng):
        V = rng.normal(size=(8, 3))
        Q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        a = complete_basket(V, [5], 7)
        b = complete_basket(V @ Q, [5], 7)
        np.testing.assert_allclose([c.probability for c in a], [c.probability for c in b], rtol=1e-9)
