import math

import numpy as np
import pytest

from alphagan.errors import UnsupportedOrderError
from alphagan.gradients import (
    DEFAULT_PR,
    DEFAULT_SCENARIOS,
    SWEEP_HEADER,
    default_alpha_grid,
    finite_difference_check,
    grad_wrt_discriminator,
    grad_wrt_generator,
    numeric_grad_discriminator,
    sweep_alpha,
    write_sweep_csv,
)
from alphagan.renyi import PairedSampleWeights, value_function
from alphagan.saddle import FiniteGanInstance, closed_form_discriminator

# reference curve values for the generator-gradient sweep at D = 0.4, first and last grid points
REFERENCE_PG02 = (14.5295789113423, 1.0)
REFERENCE_PG08 = (3.0019791139137, 0.206611570247934)


def d_star(alpha, pr, pg):
    return pr**alpha / (pr**alpha + pg**alpha)


class TestDiscriminatorGradient:
    def test_frozen_values(self):
        # hand formula: 0.8 * 0.4**(-1/a) - 0.2 * 0.6**(-1/a)
        assert grad_wrt_discriminator(0.1, 0.8, 0.2, 0.4) == pytest.approx(7596.318187874156, rel=1e-13)
        assert grad_wrt_discriminator(1, 0.8, 0.2, 0.4) == pytest.approx(0.8 / 0.4 - 0.2 / 0.6, rel=1e-14)
        assert grad_wrt_discriminator(10, 0.8, 0.2, 0.4) == pytest.approx(0.6662846252783887, rel=1e-13)

    def test_magnitude_ordering(self):
        g = [abs(grad_wrt_discriminator(a, 0.8, 0.2, 0.4)) for a in (0.1, 1, 10)]
        assert g[0] > g[1] > g[2]

    def test_zero_at_optimum_and_symmetry(self):
        assert grad_wrt_discriminator(0.7, 0.3, 0.3, 0.5) == 0.0
        for alpha in (0.3, 1.0, 3.0):
            assert grad_wrt_discriminator(alpha, 0.6, 0.1, d_star(alpha, 0.6, 0.1)) == pytest.approx(0, abs=1e-12)

    def test_infinite_order(self):
        assert grad_wrt_discriminator(math.inf, 0.6, 0.2, 0.3) == pytest.approx(0.5)

    def test_zero_order_rejected(self):
        with pytest.raises(UnsupportedOrderError):
            grad_wrt_discriminator(0, 0.5, 0.5, 0.5)

    def test_broadcasts(self):
        out = grad_wrt_discriminator(2, [0.1, 0.5], [0.4, 0.5], 0.5)
        assert out.shape == (2,)
        assert out[1] == 0.0

    def test_strictly_decreasing_off_optimum(self):
        # holds whenever d is not D*(alpha) for any alpha on the grid (d outside the D* path)
        rng = np.random.default_rng(1)
        grid = np.array([0.1, 0.25, 0.5, 1, 2, 4])
        checked = 0
        for _ in range(2000):
            pr, pg, d = rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.02, 0.98)
            path = [0.5, d_star(4.0, pr, pg)]
            if min(path) - 1e-3 <= d <= max(path) + 1e-3:
                continue
            g = np.abs([grad_wrt_discriminator(a, pr, pg, d) for a in grid])
            assert np.all(np.diff(g) < 0)
            checked += 1
        assert checked > 1000


class TestGeneratorGradient:
    def test_zero_at_half(self):
        for alpha in (0.2, 1, 3, math.inf):
            assert grad_wrt_generator(alpha, 0.3, 0.6, 0.5) == 0.0

    def test_antisymmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            alpha, pr, pg, d = rng.uniform(0.05, 20), rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 0.99)
            assert grad_wrt_generator(alpha, pr, pg, d) == pytest.approx(-grad_wrt_generator(alpha, pr, pg, 1 - d), rel=1e-12)

    def test_sign_flip_between_mirror_decisions(self):
        assert grad_wrt_generator(2, 0.5, 0.2, 0.4) > 0 > grad_wrt_generator(2, 0.5, 0.2, 0.6)

    def test_frozen_magnitudes(self):
        big = grad_wrt_generator(0.2, 0.5, 0.2, 0.4)
        small = grad_wrt_generator(2, 0.5, 0.2, 0.4)
        assert big == pytest.approx(7.996543524817333, rel=1e-12)
        assert small == pytest.approx(0.29008395348532146, rel=1e-12)
        assert abs(big) > abs(small)

    def test_direct_formula(self):
        a, pr, pg, d = 3.0, 0.4, 0.1, 0.3
        p = (a - 1) / a
        expected = a / (a - 1) * pr / (pr + pg) ** 2 * ((1 - d) ** p - d**p)
        assert grad_wrt_generator(a, pr, pg, d) == pytest.approx(expected, rel=1e-13)

    def test_near_one_continuity(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pr, pg, d = rng.uniform(0.01, 1), rng.uniform(0.01, 1), rng.uniform(0.01, 0.99)
            limit = grad_wrt_generator(1, pr, pg, d)
            assert limit == pytest.approx(pr / (pr + pg) ** 2 * math.log((1 - d) / d), rel=1e-13)
            for a in (1 - 1e-7, 1 + 1e-7):
                assert grad_wrt_generator(a, pr, pg, d) == pytest.approx(limit, rel=1e-5)

    def test_matches_derivative_of_value(self):
        # d/dpg of V at fixed D, divided by the positive chain-rule factor 1/(N * mean gain)
        pr = np.array([0.3, 0.5, 0.2])
        pg = np.array([0.2, 0.2, 0.6])
        d = np.array([0.35, 0.7, 0.55])
        for alpha in (0.4, 2.5):
            h = 1e-6
            numeric = []
            for j in range(3):
                up, dn = pg.copy(), pg.copy()
                up[j] += h
                dn[j] -= h
                numeric.append((value_function(alpha, (pr, up), d) - value_function(alpha, (pr, dn), d)) / (2 * h))
            analytic = grad_wrt_generator(alpha, pr, pg, d)
            cos = np.dot(numeric, analytic) / (np.linalg.norm(numeric) * np.linalg.norm(analytic))
            assert 1 - cos < 1e-8


class TestFiniteDifference:
    def test_at_optimum_zero_vectors_agree(self):
        inst = FiniteGanInstance([0.2, 0.5, 0.3], [0.4, 0.4, 0.2])
        d = closed_form_discriminator(2, inst)
        assert finite_difference_check(2, inst.weights, d) == 0.0

    @pytest.mark.parametrize("alpha, bound", [(2, 1e-6), (0.3, 1e-5), (1, 1e-6), (10, 1e-6)])
    def test_random_scenarios(self, alpha, bound):
        rng = np.random.default_rng(4)
        for _ in range(20):
            w = PairedSampleWeights(rng.uniform(0.01, 1, 5), rng.uniform(0.01, 1, 5))
            assert finite_difference_check(alpha, w, rng.uniform(0.05, 0.95, 5), h=1e-5) < bound

    def test_numeric_gradient_scaling(self):
        # the exact derivative equals the proportional form divided by N * mean gain
        w = PairedSampleWeights([0.3, 0.6], [0.5, 0.1])
        d = np.array([0.4, 0.8])
        alpha = 2.0
        p = 0.5
        mean_gain = np.mean(w.real_chance * d**p + w.fake_chance * (1 - d) ** p)
        expected = grad_wrt_discriminator(alpha, w.pr, w.pg, d) / (2 * mean_gain)
        np.testing.assert_allclose(numeric_grad_discriminator(alpha, w, d), expected, rtol=1e-8)

    def test_zero_against_nonzero(self):
        assert finite_difference_check(2, PairedSampleWeights([0.5], [0.5]), [0.5]) == 0.0
        # both perturbed points fall inside the clamp, so the numeric gradient vanishes
        assert finite_difference_check(2, PairedSampleWeights([0.6], [0.4]), [1 - 5e-8], h=1e-8) == 1.0

    def test_step_bounds(self):
        w = PairedSampleWeights([0.5], [0.5])
        with pytest.raises(ValueError):
            finite_difference_check(2, w, [0.3], h=1e-2)
        with pytest.raises(ValueError):
            finite_difference_check(2, w, [0.3], h=1e-9)


class TestSweep:
    def test_default_scenarios(self):
        assert DEFAULT_SCENARIOS == ((0.3, 0.2, 0.4), (0.3, 0.2, 0.6), (0.3, 0.8, 0.4), (0.3, 0.8, 0.6))
        grid = default_alpha_grid()
        assert grid[0] == pytest.approx(0.01) and grid[-1] == pytest.approx(99.01) and grid.size == 100

    def test_row_order_and_count(self):
        rows = sweep_alpha(alphas=[0.5, 2.0])
        assert len(rows) == 16
        assert [r.family for r in rows[:8]] == ["discriminator"] * 8
        assert (rows[0].pg, rows[0].d, rows[0].alpha) == (0.2, 0.4, 0.5)
        assert (rows[1].alpha, rows[2].d) == (2.0, 0.6)

    def test_mirrored_generator_series(self):
        rows = [r for r in sweep_alpha() if r.family == "generator"]
        by = {(r.pg, r.d, r.alpha): r.grad for r in rows}
        for (pg, d, a), g in by.items():
            if d == 0.4:
                assert by[(pg, 0.6, a)] == pytest.approx(-g, rel=1e-12)

    def test_series_ratio_matches_reference(self):
        # the two reference curves differ by the factor (0.3+0.8)^2/(0.3+0.2)^2 = 4.84 everywhere
        assert REFERENCE_PG02[0] / REFERENCE_PG08[0] == pytest.approx(4.84, rel=1e-12)
        assert REFERENCE_PG02[1] / REFERENCE_PG08[1] == pytest.approx(4.84, rel=1e-12)
        for alpha in default_alpha_grid():
            a = grad_wrt_generator(alpha, DEFAULT_PR, 0.2, 0.4)
            b = grad_wrt_generator(alpha, DEFAULT_PR, 0.8, 0.4)
            assert a / b == pytest.approx(4.84, rel=1e-12)

    def test_reference_terminal_values(self):
        # with P_r = 0.3 the terminal reference values are attained at alpha = 0.5
        assert grad_wrt_generator(0.5, DEFAULT_PR, 0.2, 0.4) == pytest.approx(REFERENCE_PG02[1], rel=1e-12)
        assert grad_wrt_generator(0.5, DEFAULT_PR, 0.8, 0.4) == pytest.approx(REFERENCE_PG08[1], rel=1e-12)

    def test_discriminator_row_matches_direct_call(self):
        rows = sweep_alpha([(0.8, 0.2, 0.4)], [1.0])
        assert rows[0].grad == grad_wrt_discriminator(1.0, 0.8, 0.2, 0.4)

    def test_grid_bounds(self):
        with pytest.raises(ValueError):
            sweep_alpha(alphas=[0.0])
        with pytest.raises(ValueError):
            sweep_alpha(alphas=[150.0])

    def test_all_finite(self):
        assert all(np.isfinite(r.grad) for r in sweep_alpha())

    def test_csv(self, tmp_path):
        path = write_sweep_csv(sweep_alpha([(0.8, 0.2, 0.4)], [1.0]), tmp_path / "g.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(SWEEP_HEADER)
        assert lines[1].startswith("discriminator,1,0.80000000000000004,0.20000000000000001,0.40000000000000002,")
