"""Kernel tests: determinants/adjugates against a naive cofactor oracle,
and the fixed-step integrator against analytic solutions."""

import math

import numpy as np
import pytest

from dremsim.numkit import (
    DimensionError,
    IntegrationDivergedError,
    OdeProblem,
    TimeSeries,
    adjugate,
    adjugate_times,
    det,
    integrate,
)


def oracle_det(a: np.ndarray) -> float:
    """Textbook recursive cofactor expansion along the first row."""
    n = a.shape[0]
    if n == 1:
        return float(a[0, 0])
    total = 0.0
    for j in range(n):
        minor = np.delete(np.delete(a, 0, axis=0), j, axis=1)
        total += (-1.0) ** j * a[0, j] * oracle_det(minor)
    return total


def oracle_adjugate(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    cof = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(a, i, axis=0), j, axis=1)
            cof[i, j] = (-1.0) ** (i + j) * (oracle_det(minor) if n > 1 else 1.0)
    return cof.T


class TestDet:
    def test_identity(self):
        assert det(np.eye(3)) == 1.0

    def test_two_by_two(self):
        assert det(np.array([[1.0, 2.0], [3.0, 4.0]])) == pytest.approx(-2.0, abs=1e-14)

    def test_rank_deficient(self):
        assert det(np.ones((2, 2))) == pytest.approx(0.0, abs=1e-15)

    def test_matches_cofactor_oracle(self):
        rng = np.random.default_rng(11)
        for n in range(1, 9):
            for _ in range(6):
                a = rng.uniform(-1.0, 1.0, (n, n))
                scale = max(1.0, abs(oracle_det(a)))
                assert det(a) == pytest.approx(oracle_det(a), abs=1e-11 * scale)

    def test_product_rule(self):
        rng = np.random.default_rng(12)
        for n in range(1, 6):
            for _ in range(20):
                a = rng.uniform(-1.0, 1.0, (n, n))
                b = rng.uniform(-1.0, 1.0, (n, n))
                lhs = det(a @ b)
                rhs = det(a) * det(b)
                assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-12)

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            det(np.ones((2, 3)))

    def test_rejects_oversize(self):
        with pytest.raises(DimensionError):
            det(np.eye(9))

    def test_rejects_non_finite(self):
        with pytest.raises(DimensionError):
            det(np.array([[1.0, np.nan], [0.0, 1.0]]))


class TestAdjugate:
    def test_identity(self):
        assert np.array_equal(adjugate(np.eye(2)), np.eye(2))

    def test_two_by_two(self):
        out = adjugate(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert np.allclose(out, [[4.0, -2.0], [-3.0, 1.0]], atol=1e-14)

    def test_matches_cofactor_oracle(self):
        rng = np.random.default_rng(21)
        for n in range(1, 9):
            a = rng.uniform(-1.0, 1.0, (n, n))
            assert np.allclose(adjugate(a), oracle_adjugate(a), atol=1e-11)

    def test_fundamental_identity_random_5x5(self):
        rng = np.random.default_rng(22)
        for _ in range(50):
            a = rng.uniform(-1.0, 1.0, (5, 5))
            resid = adjugate(a) @ a - det(a) * np.eye(5)
            bound = 1e-9 * max(1.0, np.max(np.abs(a)) ** 5)
            assert np.max(np.abs(resid)) <= bound

    def test_identity_holds_for_singular(self):
        a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [1.0, 0.0, 1.0]])
        assert det(a) == pytest.approx(0.0, abs=1e-14)
        assert np.max(np.abs(adjugate(a) @ a)) <= 1e-12

    def test_rejects_non_square(self):
        with pytest.raises(DimensionError):
            adjugate(np.ones((3, 2)))


class TestAdjugateTimes:
    def test_matches_unfused_route(self):
        rng = np.random.default_rng(31)
        for n in range(1, 9):
            for _ in range(10):
                a = rng.uniform(-1.0, 1.0, (n, n))
                v = rng.uniform(-1.0, 1.0, n)
                fused_v, fused_d = adjugate_times(a, v)
                assert np.allclose(fused_v, adjugate(a) @ v, atol=1e-12)
                assert fused_d == pytest.approx(det(a), abs=1e-12)

    def test_rejects_wrong_vector_length(self):
        with pytest.raises(DimensionError):
            adjugate_times(np.eye(3), np.ones(2))


class TestIntegrate:
    def test_zero_rhs_holds_state(self):
        prob = OdeProblem(2, lambda t, x: np.zeros(2), 0.0, np.array([3.0, -1.0]))
        ts = integrate(prob, 1.0, 1e-2)
        assert np.allclose(ts.values, [3.0, -1.0])

    def test_exponential_decay(self):
        prob = OdeProblem(1, lambda t, x: -x, 0.0, np.array([1.0]))
        ts = integrate(prob, 1.0, 1e-3)
        assert ts.values[-1, 0] == pytest.approx(math.exp(-1.0), abs=1e-6)

    def test_rotation_preserves_norm(self):
        a = np.array([[0.0, -1.0], [1.0, 0.0]])
        prob = OdeProblem(2, lambda t, x: a @ x, 0.0, np.array([1.0, 0.0]))
        ts = integrate(prob, 10.0, 1e-3)
        norms = np.linalg.norm(ts.values, axis=1)
        assert np.max(np.abs(norms - 1.0)) <= 1e-8

    def test_fourth_order_convergence(self):
        def err(h):
            prob = OdeProblem(1, lambda t, x: -x, 0.0, np.array([1.0]))
            ts = integrate(prob, 1.0, h)
            return abs(ts.values[-1, 0] - math.exp(-1.0))

        e1, e2 = err(0.1), err(0.05)
        assert e1 / e2 >= 12.0

    def test_divergence_reports_first_bad_time(self):
        def rhs(t, x):
            v = float(x[0])
            return np.array([v * v])

        prob = OdeProblem(1, rhs, 0.0, np.array([1.0]))
        with pytest.raises(IntegrationDivergedError) as exc:
            integrate(prob, 10.0, 0.5)
        assert 0.0 < exc.value.t_bad <= 10.0

    def test_observer_sees_every_step(self):
        seen = []
        prob = OdeProblem(1, lambda t, x: -x, 0.0, np.array([1.0]))
        integrate(prob, 1.0, 0.1, observer=lambda t, x: seen.append(t))
        assert len(seen) == 11
        assert seen[0] == 0.0
        assert seen[-1] == pytest.approx(1.0)

    def test_post_step_can_mutate_state(self):
        prob = OdeProblem(1, lambda t, x: np.ones(1), 0.0, np.zeros(1))

        def clamp(t, x):
            x[0] = min(x[0], 0.25)

        ts = integrate(prob, 1.0, 0.1, post_step=clamp)
        assert ts.values[-1, 0] == pytest.approx(0.25)

    def test_rejects_bad_step(self):
        prob = OdeProblem(1, lambda t, x: -x, 0.0, np.array([1.0]))
        with pytest.raises(ValueError):
            integrate(prob, 1.0, -0.1)
        with pytest.raises(ValueError):
            integrate(prob, -1.0, 0.1)


class TestTimeSeries:
    def test_window_selects_inclusive(self):
        ts = TimeSeries(np.arange(5.0), np.arange(5.0)[:, None])
        sub = ts.window(1.0, 3.0)
        assert list(sub.times) == [1.0, 2.0, 3.0]

    def test_rejects_decreasing_times(self):
        with pytest.raises(DimensionError):
            TimeSeries(np.array([0.0, 2.0, 1.0]), np.zeros((3, 1)))

    def test_rejects_nonuniform_times(self):
        with pytest.raises(DimensionError):
            TimeSeries(np.array([0.0, 1.0, 3.0]), np.zeros((3, 1)))

    def test_rejects_length_mismatch(self):
        with pytest.raises(DimensionError):
            TimeSeries(np.arange(3.0), np.zeros((4, 1)))
