# -*- coding: utf-8 -*-
import unittest

import numpy as np
from numpy.testing import assert_array_equal

import stats_engine
from errors import DegenerateWindow, InsufficientSamples, ShapeMismatch
from hyperbolic_model import Point2, step
from stats_engine import (birkhoff_halves, constant, coordinate, correlation_mc, correlation_spectral,
                          discretize_observable, fit_slope, holder_seminorm, integrated_time, large_deviation,
                          make_observable, sample_pairs, simulate_orbit, trigonometric)
from tower import invariant_density, ulam_discretize
from utils import spawnSeeds

from .fixtures import affine_model, default_model


class TestFitSlope(unittest.TestCase):

    def test_power_law(self):
        n = np.arange(10, 1001)
        fit = fit_slope(n, n ** -2.0)
        self.assertAlmostEqual(fit.slope, -2.0, places=10)
        self.assertEqual(fit.points, len(n))

    def test_constant(self):
        n = np.arange(1, 50)
        self.assertAlmostEqual(fit_slope(n, np.full(len(n), 3.0)).slope, 0.0, places=12)

    def test_noisy_power_law(self):
        n = np.unique(np.logspace(1, 3, 100).astype(int))
        z = np.random.default_rng(7).normal(size=len(n))
        quiet = fit_slope(n, n ** -1.5 * np.exp(0.05 * z), seed=3)
        loud = fit_slope(n, n ** -1.5 * np.exp(0.3 * z), seed=3)
        self.assertLess(abs(quiet.slope + 1.5), 0.03)
        self.assertLessEqual(quiet.ci[0], quiet.slope)
        self.assertGreaterEqual(quiet.ci[1], quiet.slope)
        self.assertLess(quiet.ci[1] - quiet.ci[0], 0.1)
        self.assertAlmostEqual(loud.slope + 1.5, 6.0 * (quiet.slope + 1.5), places=9)
        self.assertAlmostEqual((loud.ci[1] - loud.ci[0]) / (quiet.ci[1] - quiet.ci[0]), 6.0, places=6)

    def test_window(self):
        n = np.arange(1, 200)
        values = np.where(n < 50, n ** -1.0, n ** -3.0)
        self.assertAlmostEqual(fit_slope(n, values, window=(60, 190)).slope, -3.0, places=10)

    def test_too_few_points(self):
        with self.assertRaises(DegenerateWindow):
            fit_slope(np.arange(1, 8), np.ones(7))

    def test_non_positive(self):
        with self.assertRaises(DegenerateWindow):
            fit_slope(np.arange(1, 20), np.zeros(19))


class TestObservables(unittest.TestCase):

    def setUp(self):
        self.m = default_model()
        self.pairs = sample_pairs(self.m, 300, np.random.default_rng(5))

    def test_constant_seminorm(self):
        self.assertEqual(holder_seminorm(constant(2.0), 1.0, self.pairs, self.m).value, 0.0)

    def test_coordinate_seminorm(self):
        self.assertAlmostEqual(holder_seminorm(coordinate('a'), 1.0, self.pairs, self.m).value, 1.0, places=9)

    def test_factory(self):
        self.assertEqual(make_observable('constant:2.5', self.m).value(Point2(1, 0.3, 0.3)), 2.5)
        self.assertEqual(make_observable('cos1', self.m).name, 'cos1')
        with self.assertRaises(ValueError):
            make_observable('nope', self.m)

    def test_estimate(self):
        phi = trigonometric(1).estimate(self.m, np.random.default_rng(0), n_pairs=200)
        self.assertLessEqual(phi.sup_norm, 1.0)
        self.assertGreater(phi.seminorm_estimate, 0.0)
        self.assertLessEqual(phi.seminorm_estimate, 2.0 * np.pi + 1e-9)


class TestOrbits(unittest.TestCase):

    def test_simulate_orbit(self):
        m = default_model()
        p0 = Point2(1, 0.3, 0.4)
        summary = simulate_orbit(0, p0, 3, m, observables=[coordinate('a')])
        self.assertEqual(summary.start, p0)
        self.assertEqual(summary.values['coord_a'][0], 0.3)
        expected = step(step(step(p0, m), m), m)
        self.assertEqual(summary.final.cell, expected.cell)
        self.assertAlmostEqual(summary.final.a, expected.a, places=12)
        self.assertAlmostEqual(summary.final.b, expected.b, places=12)

    def test_trivial_orbits(self):
        m = default_model()
        summary = simulate_orbit(1, Point2(0, 0.0, 0.0), 0, m, observables=[coordinate('a')])
        self.assertEqual(len(summary.values['coord_a']), 0)
        self.assertTrue(np.isnan(summary.mean('coord_a')))
        summary = simulate_orbit(1, Point2(0, 0.0, 0.0), 50, m, observables=[coordinate('a'), coordinate('b')])
        assert_array_equal(summary.values['coord_a'], 0.0)
        assert_array_equal(summary.values['coord_b'], 0.0)
        self.assertEqual(summary.final, Point2(0, 0.0, 0.0))

    def test_running_sums(self):
        m = default_model()
        phi = trigonometric(1)
        summary = simulate_orbit(3, None, 1000, m, observables=[phi], walkers=4, chunk=64, lags=(1, 5, 70))
        v = summary.values[phi.name]
        self.assertEqual(v.shape, (1000, 4))
        self.assertEqual(summary.count, 4000)
        self.assertAlmostEqual(summary.mean(phi.name), v.mean(), places=12)
        self.assertAlmostEqual(summary.variance(phi.name), v.var(), places=12)
        for k in (1, 5, 70):
            direct = (v[:-k] * v[k:]).mean() - v.mean() ** 2
            self.assertAlmostEqual(summary.autocovariance(phi.name, k), direct, places=12)
        self.assertEqual(len(summary.batch_means[phi.name]), 16)

    def test_chunk_size_irrelevant(self):
        m = default_model()
        phi = trigonometric(1)
        small = simulate_orbit(4, None, 500, m, observables=[phi], walkers=3, chunk=7, lags=(2, 9), keep=False)
        large = simulate_orbit(4, None, 500, m, observables=[phi], walkers=3, chunk=1000, lags=(2, 9), keep=False)
        self.assertIsNone(small.values)
        self.assertEqual(small.final, large.final)
        self.assertAlmostEqual(small.mean(phi.name), large.mean(phi.name), places=12)
        for k in (2, 9):
            self.assertAlmostEqual(small.autocovariance(phi.name, k), large.autocovariance(phi.name, k), places=12)

    def test_birkhoff_halves_streaming(self):
        m = affine_model()
        phi = trigonometric(1)
        summary = simulate_orbit(5, None, 200000, m, observables=[phi], chunk=2000, burn_in=100, keep=False)
        halves = summary.halves(phi.name)
        self.assertLess(halves['z'], 4.0)
        self.assertAlmostEqual(0.5 * (halves['mean_first'] + halves['mean_second']), summary.mean(phi.name), places=12)
        with self.assertRaises(InsufficientSamples):
            simulate_orbit(5, None, 30, m, observables=[phi], chunk=10).halves(phi.name)

    def test_birkhoff_constant(self):
        halves = birkhoff_halves(np.full(400, 1.5))
        self.assertEqual(halves['mean_first'], halves['mean_second'])
        self.assertEqual(halves['z'], 0.0)

    def test_integrated_time(self):
        self.assertEqual(integrated_time(np.ones(100)), 1.0)
        self.assertGreaterEqual(integrated_time(np.random.default_rng(0).normal(size=1000)), 1.0)


class TestCorrelations(unittest.TestCase):

    def setUp(self):
        self.m = default_model()

    def test_constant_psi(self):
        series = correlation_mc(trigonometric(1), constant(1.0), [0, 1, 5], self.m, walkers=8, length=64,
                                burn_in=10, shards=2)
        assert_array_equal(series.c_values, 0.0)

    def test_lag_zero_is_variance(self):
        a = coordinate('a')
        series = correlation_mc(a, a, [0], self.m, walkers=6, length=50, burn_in=5, seed=3, shards=1)
        psi_s, _ = stats_engine._correlation_shard(6, spawnSeeds(3, 1)[0], self.m, a, a, np.array([0]), 50, 5, 1)
        self.assertAlmostEqual(series.c_values[0], np.var(psi_s), places=12)

    def test_walkers(self):
        with self.assertRaises(InsufficientSamples):
            correlation_mc(constant(1.0), constant(1.0), [0], self.m, walkers=1)

    def test_spectral(self):
        m = affine_model()
        T = ulam_discretize(m, bins=64, max_level=10)
        rho = invariant_density(T).rho
        phi = discretize_observable(trigonometric(1), T, m)
        self.assertEqual(phi.shape, (T.n_states,))
        series = correlation_spectral(T, rho, phi, np.ones(T.n_states), [0, 1, 2])
        np.testing.assert_allclose(series.c_values, 0.0, atol=1e-14)
        with self.assertRaises(ShapeMismatch):
            correlation_spectral(T, rho, phi[:-1], phi, [0])

    def test_monte_carlo_matches_spectral(self):
        m = affine_model()
        T = ulam_discretize(m, bins=64, max_level=30)
        rho = invariant_density(T).rho
        a = coordinate('a')
        values = discretize_observable(a, T, m)
        n_values = [0, 1, 2, 4]
        spectral = correlation_spectral(T, rho, values, values, n_values)
        mc = correlation_mc(a, a, n_values, m, walkers=256, length=512, burn_in=50, seed=11, shards=4)
        self.assertGreater(spectral.c_values[0], 0.0)
        gap = np.abs(mc.signed - spectral.signed)
        self.assertTrue(np.all(gap <= 3.0 * mc.ci + 2e-3), gap)


class TestLargeDeviations(unittest.TestCase):

    def setUp(self):
        self.m = default_model()

    def test_constant(self):
        series = large_deviation(constant(1.0), [0.1], [5, 10], self.m, ensemble=200, burn_in=5)
        assert_array_equal(series.ld, 0.0)
        self.assertEqual(len(series.table()), 2)

    def test_beyond_range(self):
        series = large_deviation(trigonometric(1), [2.5], [5, 10], self.m, ensemble=200, burn_in=5)
        assert_array_equal(series.hits, 0)
        self.assertTrue(np.all(series.ci_lo <= series.ld))

    def test_wilson_coverage(self):
        phi = trigonometric(1)
        eps, n_values = [0.1, 0.2], [5, 10, 20]
        reference = large_deviation(phi, eps, n_values, self.m, ensemble=20000, burn_in=20, seed=1, shards=4)
        covered = []
        for seed in range(2, 12):
            series = large_deviation(phi, eps, n_values, self.m, ensemble=500, burn_in=20, seed=seed, shards=2,
                                     mean=reference.mean)
            self.assertTrue(np.all(series.ci_lo <= series.ld) and np.all(series.ld <= series.ci_hi))
            covered.append((series.ci_lo <= reference.ld) & (reference.ld <= series.ci_hi))
        self.assertGreaterEqual(np.mean(covered), 0.7)

    def test_ensemble_size(self):
        with self.assertRaises(InsufficientSamples):
            large_deviation(constant(1.0), [0.1], [5], self.m, ensemble=50)
