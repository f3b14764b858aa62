"""Loss functions: reductions, hand values, gradients, and the band-grid oracle."""

import math

import numpy as np
import pytest

from seqprof.errors import ConfigError, InfiniteLossError, InvalidDistribution, ShapeError
from seqprof.losses import (
    DiscreteDistribution,
    LossConfig,
    band_objective_values,
    cross_entropy,
    gaussian_band_distribution,
    imse,
    imse_minimizer,
    kernel_weight,
    kld,
    kld_regularized,
    mse,
)


class TestMse:
    def test_zero_on_equal(self):
        assert mse([1.0, -0.5], [1.0, -0.5]) == 0.0

    def test_hand_value(self):
        assert mse([0.0, 0.0], [3.0, 4.0]) == 12.5

    def test_quadratic_homogeneity(self):
        pred = np.array([0.2, -0.3, 0.9])
        target = np.array([-0.1, 0.4, 0.5])
        base = mse(pred, target)
        assert mse(target + 2 * (pred - target), target) == pytest.approx(4 * base, rel=1e-14)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse([1.0], [1.0, 2.0])


class TestKernelWeight:
    def test_peak(self):
        assert kernel_weight(0.3, 0.3) == 1.0

    def test_two_apart(self):
        assert kernel_weight(0.0, 2.0) == pytest.approx(math.exp(-2.0), abs=1e-15)

    def test_symmetry(self):
        rng = np.random.default_rng(0)
        s, sh = rng.uniform(-1, 1, 100), rng.uniform(-1, 1, 100)
        np.testing.assert_array_equal(kernel_weight(s, sh), kernel_weight(sh, s))

    def test_monotone_decay(self):
        deltas = np.linspace(0.0, 3.0, 50)
        w = kernel_weight(np.zeros_like(deltas), deltas)
        assert np.all(np.diff(w) < 0)


class TestImse:
    def setup_method(self):
        rng = np.random.default_rng(42)
        self.pred = rng.uniform(-1, 1, 64)
        self.human = rng.uniform(-1, 1, 64)
        self.pseudo = rng.uniform(-1, 1, 64)

    def test_rho_zero_is_mse(self):
        loss, _ = imse(self.pred, self.human, self.pseudo, LossConfig(rho=0.0))
        assert abs(loss - mse(self.pred, self.human)) < 1e-15

    def test_rho_one_is_weighted_term(self):
        loss, _ = imse(self.pred, self.human, self.pseudo, LossConfig(rho=1.0))
        w = kernel_weight(self.human, self.pseudo)
        expected = float(np.mean(w * (self.pred - self.pseudo) ** 2))
        assert abs(loss - expected) < 1e-15

    def test_matching_pseudo_is_mse_for_all_rho(self):
        for rho in (0.0, 0.1, 0.25, 0.5, 0.9, 1.0):
            loss, _ = imse(self.pred, self.human, self.human, LossConfig(rho=rho))
            assert abs(loss - mse(self.pred, self.human)) < 1e-15

    def test_hand_point_value(self):
        loss, _ = imse([0.5], [0.2], [0.8], LossConfig(rho=0.25))
        exact = 0.75 * 0.09 + 0.25 * math.exp(-0.18) * 0.09
        assert loss == pytest.approx(exact, abs=1e-15)
        assert round(loss, 6) == 0.086294

    def test_gradient_matches_finite_differences(self):
        cfg = LossConfig(rho=0.25)
        _, grad = imse(self.pred, self.human, self.pseudo, cfg)
        h = 1e-6
        for i in range(0, 64, 7):
            up = self.pred.copy()
            up[i] += h
            down = self.pred.copy()
            down[i] -= h
            num = (imse(up, self.human, self.pseudo, cfg)[0]
                   - imse(down, self.human, self.pseudo, cfg)[0]) / (2 * h)
            assert grad[i] == pytest.approx(num, rel=1e-8, abs=1e-12)

    def test_gradient_stationary_at_closed_form_minimizer(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            s, sh, rho = rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0, 1)
            y_star = imse_minimizer(s, sh, rho)
            _, grad = imse([y_star], [s], [sh], LossConfig(rho=rho))
            assert abs(grad[0]) < 1e-12

    def test_interpolation_bound(self):
        a = mse(self.pred, self.human)
        w = kernel_weight(self.human, self.pseudo)
        b = float(np.mean(w * (self.pred - self.pseudo) ** 2))
        for rho in (0.1, 0.25, 0.5, 0.75):
            loss, _ = imse(self.pred, self.human, self.pseudo, LossConfig(rho=rho))
            assert min(a, b) - 1e-12 <= loss <= max(a, b) + 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            imse([1.0], [1.0, 2.0], [0.0, 0.0], LossConfig())

    def test_bad_rho(self):
        with pytest.raises(ConfigError):
            LossConfig(rho=1.5)


class TestDiscreteDistribution:
    def test_validates_mass(self):
        with pytest.raises(InvalidDistribution):
            DiscreteDistribution([0.0, 1.0], [0.6, 0.6])

    def test_validates_grid(self):
        with pytest.raises(InvalidDistribution):
            DiscreteDistribution([1.0, 0.0], [0.5, 0.5])
        with pytest.raises(InvalidDistribution):
            DiscreteDistribution([1.0], [1.0])


class TestCrossEntropy:
    def test_one_hot_half(self):
        grid = [0.0, 1.0]
        target = DiscreteDistribution.one_hot(grid, 0)
        model = DiscreteDistribution(grid, [0.5, 0.5])
        assert cross_entropy(target, model) == pytest.approx(math.log(2), abs=1e-15)

    def test_uniform_self(self):
        for s in (2, 5, 9):
            grid = list(range(s))
            u = DiscreteDistribution(grid, np.full(s, 1.0 / s))
            assert cross_entropy(u, u) == pytest.approx(math.log(s), rel=1e-12)

    def test_hand_value(self):
        grid = [0.0, 1.0]
        target = DiscreteDistribution(grid, [1.0, 0.0])
        model = DiscreteDistribution(grid, [0.9, 0.1])
        assert cross_entropy(target, model) == pytest.approx(0.10536051565782628, abs=1e-15)

    def test_support_violation(self):
        grid = [0.0, 1.0]
        with pytest.raises(InfiniteLossError):
            cross_entropy(
                DiscreteDistribution(grid, [1.0, 0.0]),
                DiscreteDistribution(grid, [0.0, 1.0]),
            )


class TestKld:
    def test_zero_on_equal(self):
        p = DiscreteDistribution([0.0, 1.0], [0.3, 0.7])
        assert kld(p, p) == 0.0

    def test_hand_value(self):
        p = DiscreteDistribution([0.0, 1.0], [0.5, 0.5])
        q = DiscreteDistribution([0.0, 1.0], [0.25, 0.75])
        assert kld(p, q) == pytest.approx(0.14384103622589042, abs=1e-15)

    def test_non_negative(self):
        rng = np.random.default_rng(3)
        grid = np.arange(6.0)
        for _ in range(200):
            p = rng.dirichlet(np.ones(6))
            q = rng.dirichlet(np.ones(6))
            assert kld(DiscreteDistribution(grid, p), DiscreteDistribution(grid, q)) >= 0.0

    def test_support_violation(self):
        grid = [0.0, 1.0, 2.0]
        p = DiscreteDistribution(grid, [0.5, 0.5, 0.0])
        q = DiscreteDistribution(grid, [1.0, 0.0, 0.0])
        with pytest.raises(InfiniteLossError):
            kld(p, q)

    def test_mismatched_grids(self):
        p = DiscreteDistribution([0.0, 1.0], [0.5, 0.5])
        q = DiscreteDistribution([0.0, 2.0], [0.5, 0.5])
        with pytest.raises(ShapeError):
            kld(p, q)


class TestKldRegularized:
    def test_rho_zero_is_cross_entropy(self):
        grid = np.linspace(0.0, 1.0, 5)
        target = DiscreteDistribution.one_hot(grid, 2)
        rng = np.random.default_rng(4)
        model = DiscreteDistribution(grid, rng.dirichlet(np.ones(5)))
        anchor = DiscreteDistribution(grid, rng.dirichlet(np.ones(5)))
        assert kld_regularized(target, model, anchor, 0.0) == cross_entropy(target, model)

    def test_equal_model_anchor_is_cross_entropy(self):
        grid = np.linspace(0.0, 1.0, 5)
        target = DiscreteDistribution.one_hot(grid, 1)
        model = DiscreteDistribution(grid, [0.1, 0.4, 0.3, 0.1, 0.1])
        for rho in (0.1, 0.5, 1.0):
            assert kld_regularized(target, model, model, rho) == cross_entropy(target, model)


class TestBandGridReduction:
    """The band-wise discrete objective and the closed-form minimizer agree."""

    def test_band_distribution_is_normalized(self):
        edges = np.linspace(-5, 5, 1001)
        d = gaussian_band_distribution(0.3, edges)
        assert abs(float(d.probs.sum()) - 1.0) < 1e-12

    def test_grid_minimizer_matches_closed_form(self):
        rng = np.random.default_rng(5)
        step = 1e-3
        for _ in range(20):
            s = rng.uniform(-0.9, 0.9)
            sh = rng.uniform(-0.9, 0.9)
            rho = rng.uniform(0.05, 0.95)
            edges = np.arange(min(s, sh) - 5.0, max(s, sh) + 5.0 + step, step)
            centers = (edges[:-1] + edges[1:]) / 2
            obj = band_objective_values(centers, s, sh, rho, edges)
            y_grid = centers[int(np.argmin(obj))]
            assert abs(y_grid - imse_minimizer(s, sh, rho)) <= step
