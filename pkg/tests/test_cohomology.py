# -*- coding: utf-8 -*-
import unittest
import warnings

import numpy as np

from cohomology import (chi, hat, psi, sample_psi_pairs, separation_distance_envelope, stable_pair_gaps,
                        tail_bound, verify_gtheta)
from errors import ConvergenceWarning, DomainError
from hyperbolic_model import Point2
from stats_engine import constant, mixed
from tower import TowerPoint, sample_base_pairs

from .fixtures import default_model


class TestChi(unittest.TestCase):

    def setUp(self):
        self.m = default_model()

    def test_constant_observable(self):
        t = TowerPoint(Point2(1, 0.31, 0.9), 0, self.m)
        value, bound = chi(t, constant(2.0), 32, self.m)
        self.assertEqual(value, 0.0)
        self.assertGreater(bound, 0.0)
        self.assertEqual(psi(t, constant(2.0), 32, self.m).value, 2.0)

    def test_reference_leaf(self):
        t = TowerPoint(Point2(1, 0.31, self.m.reference_b), 0, self.m)
        self.assertEqual(hat(t, self.m).base, t.base)
        self.assertEqual(chi(t, mixed(), 16, self.m)[0], 0.0)

    def test_tail_bound(self):
        phi = mixed()
        self.assertLess(tail_bound(phi, 200, self.m), tail_bound(phi, 10, self.m))
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always')
            self.assertEqual(tail_bound(phi, 10, self.m, alpha=0.5), float('inf'))
        self.assertTrue(any(issubclass(w.category, ConvergenceWarning) for w in caught))


class TestPsi(unittest.TestCase):

    def setUp(self):
        self.m = default_model()

    def test_coboundary_identity(self):
        rng = np.random.default_rng(8)
        phi = mixed()
        for _ in range(10):
            t = TowerPoint(Point2(1, rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0)), 0, self.m)
            value = psi(t, phi, 24, self.m)
            self.assertLessEqual(value.residual, 1e-12)
            self.assertLessEqual(value.mismatch, 1e-10)

    def test_forgets_stable_coordinate(self):
        phi = mixed()
        x = TowerPoint(Point2(1, 0.5, 0.2), 0, self.m)
        y = TowerPoint(Point2(1, 0.5, 0.8), 0, self.m)
        self.assertLess(abs(psi(x, phi, 64, self.m).value - psi(y, phi, 64, self.m).value), 1e-9)

    def test_stable_pairs_converge(self):
        pairs = sample_base_pairs(self.m, 5, np.random.default_rng(3), 'stable')
        gaps = stable_pair_gaps(pairs, mixed(), [2, 8, 64], self.m)
        self.assertEqual(len(gaps), 3)
        self.assertGreater(gaps[0], gaps[2])
        self.assertLess(gaps[2], 1e-3)

    def test_needs_terms(self):
        with self.assertRaises(DomainError):
            psi(TowerPoint(Point2(1, 0.3, 0.3), 0, self.m), mixed(), 0, self.m)

    def test_sampled_pairs(self):
        px, py, s = sample_psi_pairs(self.m, mixed(), 3, 8, np.random.default_rng(2))
        self.assertEqual((len(px), len(py), len(s)), (3, 3, 3))
        self.assertTrue(np.all(s >= 0))


class TestModulus(unittest.TestCase):

    def test_gtheta(self):
        report = verify_gtheta([1.0, 2.0], [1.0, 1.5], [0, 4], 1.0)
        self.assertEqual((report.D, report.argmax), (2.0, 1))
        self.assertEqual(verify_gtheta([], [], [], 1.0).D, 0.0)
        self.assertEqual(verify_gtheta([0.7, 0.7], [0.7, 0.7], [0, 3], 0.5).D, 0.0)
        with self.assertRaises(DomainError):
            verify_gtheta([1.0], [1.0], [1], 0.0)

    def test_envelope(self):
        m = default_model()
        x = Point2(1, 0.3, 0.5)
        self.assertEqual(separation_distance_envelope([(x, x)], m), 0.0)
        self.assertEqual(separation_distance_envelope([(Point2(1, 0.5, 0.5), Point2(1, 0.7, 0.5))], m), 0.0)
