import math
import warnings

import numpy as np
import pytest

from alphagan.errors import InvalidInstanceError, UnsupportedOrderError
from alphagan.gradients import grad_wrt_discriminator
from alphagan.renyi import arimoto_conditional_entropy, value_function
from alphagan.saddle import (
    DSTAR_HEADER,
    ConvergenceWarning,
    FiniteGanInstance,
    brute_force_max_discriminator,
    closed_form_discriminator,
    decision_grid,
    dstar_monotonicity_scan,
    minimize_generator,
    optimal_value,
    project_to_simplex,
    random_instance,
    total_variation,
    write_dstar_csv,
)

LOG2 = math.log(2)


def projection_by_bisection(v, s):
    """Weighted simplex projection max(v - lam*s, 0), with lam found by bisection."""
    lo, hi = np.min(v / s) - 1.0, np.max(v / s)
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        if np.maximum(v - lam * s, 0).sum() > 1:
            lo = lam
        else:
            hi = lam
    return np.maximum(v - 0.5 * (lo + hi) * s, 0)


class TestInstance:
    def test_drops_empty_symbols(self):
        inst = FiniteGanInstance([0.5, 0.0, 0.5], [0.25, 0.0, 0.75])
        assert inst.alphabet_size == 2
        np.testing.assert_array_equal(inst.kept, [0, 2])

    def test_rejects_unnormalised(self):
        with pytest.raises(InvalidInstanceError):
            FiniteGanInstance([0.5, 0.6], [0.5, 0.5])
        with pytest.raises(InvalidInstanceError):
            FiniteGanInstance([1.0], [0.5, 0.5])

    def test_random_instance_is_seeded(self):
        a = random_instance(np.random.default_rng(3), 4)
        b = random_instance(np.random.default_rng(3), 4)
        np.testing.assert_array_equal(a.pr, b.pr)
        np.testing.assert_array_equal(a.pg, b.pg)


class TestClosedForm:
    def test_equal_mass_gives_half(self):
        d = closed_form_discriminator(2.5, FiniteGanInstance([0.3, 0.7], [0.3, 0.7]))
        np.testing.assert_array_equal(d.values, [0.5, 0.5])

    def test_zero_order_gives_half(self):
        d = closed_form_discriminator(0, FiniteGanInstance([0.9, 0.1], [0.2, 0.8]))
        np.testing.assert_array_equal(d.values, [0.5, 0.5])

    def test_order_one_is_posterior(self):
        d = closed_form_discriminator(1, FiniteGanInstance([0.2, 0.8], [0.8, 0.2]))
        np.testing.assert_allclose(d.values, [0.2, 0.8], rtol=1e-15)

    def test_matches_power_formula(self):
        inst = random_instance(np.random.default_rng(4), 5)
        for alpha in (0.3, 1.7, 4.0):
            expected = inst.pr**alpha / (inst.pr**alpha + inst.pg**alpha)
            np.testing.assert_allclose(closed_form_discriminator(alpha, inst).values, expected, rtol=1e-13)

    def test_disjoint_supports_clamped(self):
        d = closed_form_discriminator(2, FiniteGanInstance([1.0, 0.0], [0.0, 1.0]))
        np.testing.assert_allclose(d.values, [1 - 1e-7, 1e-7])
        assert optimal_value(2, FiniteGanInstance([1.0, 0.0], [0.0, 1.0])) == pytest.approx(0.0, abs=1e-6)

    def test_gradient_vanishes_at_optimum(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            inst = random_instance(rng, 4)
            for alpha in (0.5, 1.0, 2.0):
                d = closed_form_discriminator(alpha, inst).values
                ok = (d > 1e-6) & (d < 1 - 1e-6)
                g = grad_wrt_discriminator(alpha, inst.pr, inst.pg, d)
                np.testing.assert_allclose(g[ok], 0.0, atol=1e-9)


class TestBruteForce:
    def test_grid_nodes(self):
        g = decision_grid(5, 0.0)
        np.testing.assert_allclose(g, [0, 0.5 - 0.5 * math.sqrt(0.5), 0.5, 0.5 + 0.5 * math.sqrt(0.5), 1])
        assert np.all(np.diff(decision_grid(1001)) > 0)

    def test_uniform_instance(self):
        inst = FiniteGanInstance([0.25] * 4, [0.25] * 4)
        d, v = brute_force_max_discriminator(1.5, inst, grid=1001)
        np.testing.assert_allclose(d.values, 0.5, atol=1e-12)
        assert v == pytest.approx(-LOG2, abs=1e-12)

    def test_agrees_with_closed_form_order_two(self):
        inst = random_instance(np.random.default_rng(6), 4)
        d, v = brute_force_max_discriminator(2, inst, grid=10001)
        np.testing.assert_allclose(d.values, closed_form_discriminator(2, inst).values, atol=2e-4)
        assert v <= optimal_value(2, inst) + 1e-12

    def test_agrees_with_closed_form_order_half(self):
        inst = FiniteGanInstance([0.9, 0.1], [0.1, 0.9])
        d, v = brute_force_max_discriminator(0.5, inst, grid=10001)
        np.testing.assert_allclose(d.values, closed_form_discriminator(0.5, inst).values, atol=2e-4)
        assert v == pytest.approx(-arimoto_conditional_entropy(0.5, inst.weights), abs=1e-6)

    def test_cost_guard(self):
        inst = FiniteGanInstance(np.full(7, 1 / 7), np.full(7, 1 / 7))
        with pytest.raises(ValueError):
            brute_force_max_discriminator(1, inst, grid=1001)
        d, _ = brute_force_max_discriminator(1, inst, grid=51)
        assert len(d) == 7

    def test_ties_pick_lowest_point(self):
        # at alpha = inf with equal masses the gain is 1/2 for every D, so all nodes tie
        inst = FiniteGanInstance([0.5, 0.5], [0.5, 0.5])
        d, _ = brute_force_max_discriminator(math.inf, inst, grid=11)
        np.testing.assert_array_equal(d.values, decision_grid(11)[0])


class TestOptimalValue:
    @pytest.mark.parametrize("alpha", [0.1, 0.5, 1, 2, 5, 50])
    def test_saddle_value(self, alpha):
        inst = random_instance(np.random.default_rng(7), 5)
        equal = FiniteGanInstance(inst.pr, inst.pr)
        assert abs(optimal_value(alpha, equal) + LOG2) < 1e-12

    def test_equals_minus_arimoto(self):
        inst = random_instance(np.random.default_rng(8), 5)
        assert optimal_value(0.3, inst) == pytest.approx(-arimoto_conditional_entropy(0.3, inst.weights), abs=1e-9)

    def test_zero_rejected(self):
        with pytest.raises(UnsupportedOrderError):
            optimal_value(0, FiniteGanInstance([0.5, 0.5], [0.5, 0.5]))


class TestProjection:
    def test_euclidean_known_case(self):
        np.testing.assert_allclose(project_to_simplex([0.5, 0.5, 0.5]), [1 / 3] * 3)
        np.testing.assert_allclose(project_to_simplex([2.0, 0.0]), [1.0, 0.0])

    def test_weighted_matches_bisection(self):
        rng = np.random.default_rng(9)
        for _ in range(100):
            v = rng.normal(0, 1, 6)
            s = rng.uniform(0.1, 3, 6)
            np.testing.assert_allclose(project_to_simplex(v, s), projection_by_bisection(v, s), atol=1e-12)

    def test_fixed_point_on_simplex(self):
        p = np.random.default_rng(10).dirichlet(np.ones(5))
        np.testing.assert_allclose(project_to_simplex(p), p, atol=1e-15)


class TestMinimizeGenerator:
    def test_start_at_minimiser(self):
        pr = np.array([0.2, 0.3, 0.5])
        pg, v = minimize_generator(2, pr, start=pr)
        np.testing.assert_allclose(pg.probs, pr, atol=1e-15)
        assert v == pytest.approx(-LOG2, abs=1e-14)

    def test_uniform_three_symbols(self):
        pg, v = minimize_generator(1, [1 / 3] * 3, steps=5000, step_size=0.05, start=[0.7, 0.2, 0.1])
        # frozen from the reference run: gap at rounding level, TV about 1.2e-8
        assert abs(v + LOG2) < 1e-12
        assert total_variation(pg.probs, [1 / 3] * 3) < 1e-6

    def test_two_symbols_order_half(self):
        pg, v = minimize_generator(0.5, [0.5, 0.5], steps=5000, step_size=0.05, start=[0.99, 0.01])
        # frozen from the reference run: gap about 3e-15, TV about 1.2e-7
        assert abs(v + LOG2) < 1e-12
        np.testing.assert_allclose(pg.probs, [0.5, 0.5], atol=1e-6)

    def test_euclidean_variant(self):
        pg, v = minimize_generator(2, [0.4, 0.6], start=[0.9, 0.1], preconditioned=False)
        assert abs(v + LOG2) < 1e-10
        assert total_variation(pg.probs, [0.4, 0.6]) < 1e-5

    def test_warns_when_out_of_steps(self):
        with pytest.warns(ConvergenceWarning):
            minimize_generator(2, [0.1, 0.2, 0.7], steps=2, start=[0.8, 0.1, 0.1])

    def test_rejects_bad_inputs(self):
        with pytest.raises(UnsupportedOrderError):
            minimize_generator(0, [0.5, 0.5])
        with pytest.raises(UnsupportedOrderError):
            minimize_generator(math.inf, [0.5, 0.5])
        with pytest.raises(InvalidInstanceError):
            minimize_generator(1, [1.0, 0.0])

    def test_value_never_increases(self):
        pr = np.array([0.1, 0.6, 0.3])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ConvergenceWarning)
            values = [minimize_generator(2, pr, steps=k, start=[0.05, 0.05, 0.9])[1] for k in (1, 5, 25, 125)]
        assert all(b <= a + 1e-15 for a, b in zip(values, values[1:]))


class TestMonotonicityScan:
    def test_examples(self):
        inst = FiniteGanInstance([0.8, 0.2, 0.0], [0.2, 0.8, 0.0])
        rows = dstar_monotonicity_scan(inst, [0.5, 1, 2, 4])
        first = [r.d_star for r in rows if r.symbol == 0]
        second = [r.d_star for r in rows if r.symbol == 1]
        assert all(b > a for a, b in zip(first, first[1:]))
        assert all(b < a for a, b in zip(second, second[1:]))
        assert first[1] == pytest.approx(0.8)

    def test_equal_symbol_constant(self):
        rows = dstar_monotonicity_scan(FiniteGanInstance([0.5, 0.5], [0.5, 0.5]), [0.1, 1, 10])
        assert {r.d_star for r in rows} == {0.5}

    def test_random_instances_monotone(self):
        rng = np.random.default_rng(11)
        alphas = np.sort(rng.uniform(0.05, 20, 30))
        for _ in range(50):
            inst = random_instance(rng, 5)
            table = np.array([r.d_star for r in dstar_monotonicity_scan(inst, alphas)]).reshape(5, -1)
            for j in range(5):
                steps = np.diff(table[j])
                if inst.pg[j] < inst.pr[j]:
                    assert np.all(steps >= 0)
                elif inst.pg[j] > inst.pr[j]:
                    assert np.all(steps <= 0)

    def test_requires_ascending(self):
        with pytest.raises(ValueError):
            dstar_monotonicity_scan(FiniteGanInstance([0.5, 0.5], [0.5, 0.5]), [2, 1])

    def test_csv(self, tmp_path):
        rows = dstar_monotonicity_scan(FiniteGanInstance([0.8, 0.2], [0.2, 0.8]), [1, 2])
        path = write_dstar_csv(rows, tmp_path / "dstar.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == ",".join(DSTAR_HEADER)
        assert lines[1] == "0,1,0.80000000000000004"
        assert len(lines) == 5
