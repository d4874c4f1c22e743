# -*- coding: utf-8 -*-
import unittest
from types import SimpleNamespace

import numpy as np
from numpy.testing import assert_allclose

from errors import ConfigError, DomainError, LeafMismatch, NotAperiodic
from hyperbolic_model import (Point2, aperiodicity_index, build_model, check_contraction, distance,
                              fixed_point_derivatives, markov_crossing_check, step, step_array, step_inverse,
                              unstable_quotient_map, unstable_step_array)
from intermittent import IntermittentParams

from .fixtures import affine_model, default_model


class TestBuildModel(unittest.TestCase):

    def test_default(self):
        m = default_model()
        self.assertEqual(m.n0, 1)
        self.assertEqual(m.d, 3)
        self.assertEqual(markov_crossing_check(m), [])

    def test_not_aperiodic(self):
        cyclic = [[0, 1, 0], [0, 0, 1], [1, 0, 0]]
        with self.assertRaises(NotAperiodic):
            build_model({'cells': 2, 'transition': cyclic, 'lambda': 0.4})
        self.assertTrue(issubclass(NotAperiodic, ConfigError))

    def test_aperiodicity_index(self):
        self.assertEqual(aperiodicity_index([[1, 1], [1, 0]]), 2)
        self.assertEqual(aperiodicity_index(np.ones((4, 4))), 1)

    def test_bad_lambda(self):
        with self.assertRaises(ConfigError):
            build_model({'cells': 3, 'lambda': 1.5})

    def test_lambda_too_small_for_geometry(self):
        with self.assertRaises(ConfigError):
            build_model({'cells': 2, 'transition': [[1, 1, 0], [1, 0, 1], [0, 1, 1]],
                         'lambda': 0.3, 'affine_only': True})

    def test_affine_crossing(self):
        self.assertEqual(markov_crossing_check(affine_model()), [])


class TestStep(unittest.TestCase):

    def test_fixed_point(self):
        m = default_model()
        self.assertEqual(step(Point2(0, 0.0, 0.0), m), Point2(0, 0.0, 0.0))

    def test_central_strip(self):
        m = default_model()
        q = step(Point2(0, 0.25, 0.375), m)
        self.assertEqual(q.cell, 0)
        self.assertEqual(q.a, 0.375)
        self.assertAlmostEqual(q.b, 0.25, places=13)

    def test_affine_slope_two(self):
        q = step(Point2(1, 0.1, 0.1), affine_model())
        self.assertEqual(q.cell, 0)
        self.assertAlmostEqual(q.a, -0.3, places=15)
        self.assertAlmostEqual(q.b, 0.05, places=15)

    def test_round_trip(self):
        m = default_model()
        rng = np.random.default_rng(3)
        for _ in range(200):
            cell = int(rng.integers(len(m.cells)))
            c = m.cells[cell]
            p = Point2(cell, rng.uniform(c.u_lo, c.u_hi), rng.uniform(c.s_lo, c.s_hi))
            q = step_inverse(step(p, m), m)
            self.assertEqual(q.cell, p.cell)
            self.assertAlmostEqual(q.a, p.a, places=10)
            self.assertAlmostEqual(q.b, p.b, places=10)

    def test_outside_cell(self):
        with self.assertRaises(DomainError):
            step(Point2(1, 1.5, 0.5), default_model())

    def test_strict_boundary(self):
        m = affine_model()
        with self.assertRaises(DomainError):
            step(Point2(1, 0.5, 0.5), m, strict=True)

    def test_array_matches_scalar(self):
        m = default_model()
        rng = np.random.default_rng(5)
        cells = rng.integers(0, len(m.cells), 300)
        a = np.array([rng.uniform(m.cells[c].u_lo, m.cells[c].u_hi) for c in cells])
        b = np.array([rng.uniform(m.cells[c].s_lo, m.cells[c].s_hi) for c in cells])
        nc, na, nb = step_array(m, cells, a, b)
        for k in range(len(cells)):
            q = step(Point2(cells[k], a[k], b[k]), m)
            self.assertEqual(q.cell, nc[k])
            self.assertAlmostEqual(q.a, na[k], places=13)
            self.assertAlmostEqual(q.b, nb[k], places=12)

    def test_quotient_map(self):
        m = default_model()
        self.assertEqual(unstable_quotient_map((0, 0.25), m), (0, 0.375))
        cells = np.array([0, 1, 2, 3])
        a = np.array([0.25, 0.1, 0.55, 0.9])
        target, new_a, _, _ = unstable_step_array(m, cells, a)
        for k in range(4):
            self.assertEqual(unstable_quotient_map((cells[k], a[k]), m), (target[k], new_a[k]))

    def test_strip_mask(self):
        m = default_model()
        a = np.linspace(-0.5, 0.5, 101)
        mask = m.strip_mask(np.zeros(101, dtype=np.int64), a)
        self.assertEqual(list(mask), [m.in_strip(0, v) for v in a])

    def test_fixed_point_derivatives(self):
        forward, backward = fixed_point_derivatives(default_model())
        self.assertAlmostEqual(forward, 1.001, places=12)
        self.assertLess(backward, 1.0)
        self.assertGreater(backward, 1.0 - 1e-3)
        forward, backward = fixed_point_derivatives(default_model(), h=1e-12)
        self.assertAlmostEqual(forward, 1.0 + 1e-6, places=12)
        self.assertAlmostEqual(backward, 1.0, places=5)

    def test_fixed_point_derivatives_small_theta(self):
        forward, backward = fixed_point_derivatives(SimpleNamespace(intermittent=IntermittentParams(0.02)))
        self.assertTrue(np.isfinite(forward) and np.isfinite(backward))
        self.assertAlmostEqual(forward, 1.0 + 1e-6 ** 0.02, places=12)
        self.assertAlmostEqual(forward * backward, 1.0, delta=0.3)


class TestContraction(unittest.TestCase):

    def test_same_point(self):
        m = default_model()
        x = Point2(1, 0.3, 0.4)
        self.assertEqual(distance(x, x, m), 0.0)
        report = check_contraction(x, x, 20, m)
        self.assertTrue(np.all(report.distances == 0.0))
        self.assertEqual(report.envelope, 0.0)

    def test_affine_halving(self):
        m = affine_model()
        x, y = Point2(2, 1.0, 0.2), Point2(2, 1.0, 0.6)
        report = check_contraction(x, y, 20, m, alpha=1.0)
        self.assertEqual(report.direction, 'forward')
        assert_allclose(report.distances / report.d0, 0.5 ** np.arange(1, 21), rtol=1e-7)
        self.assertLess(report.ratios[-1], 1e-4)

    def test_unstable_pair_goes_backward(self):
        m = default_model()
        report = check_contraction(Point2(1, 0.3, 0.4), Point2(1, 0.31, 0.4), 10, m)
        self.assertEqual(report.direction, 'backward')

    def test_leaf_mismatch(self):
        m = default_model()
        with self.assertRaises(LeafMismatch):
            check_contraction(Point2(1, 0.3, 0.4), Point2(1, 0.5, 0.6), 5, m)
