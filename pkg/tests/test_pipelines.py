# -*- coding: utf-8 -*-
import unittest

from pipelines import (FAIL, INCONCLUSIVE, PASS, band_criterion, bound_criterion, envelope_stable, exponent_targets,
                       relative_gap)


class TestCriteria(unittest.TestCase):

    def test_band(self):
        self.assertEqual(band_criterion('x', -2.1, (-2.3, -1.9), -2.0, 0.3).status, PASS)
        self.assertEqual(band_criterion('x', -2.5, (-2.9, -2.2), -2.0, 0.3).status, INCONCLUSIVE)
        self.assertEqual(band_criterion('x', -3.0, (-3.2, -2.8), -2.0, 0.3).status, FAIL)

    def test_bound(self):
        self.assertEqual(bound_criterion('x', -3.0, (-3.5, -2.5), -1.0, 0.4).status, PASS)
        self.assertEqual(bound_criterion('x', -0.5, (-0.7, -0.3), -1.0, 0.4).status, INCONCLUSIVE)
        self.assertEqual(bound_criterion('x', 0.0, (-0.1, 0.1), -1.0, 0.4).status, FAIL)

    def test_relative_gap(self):
        self.assertEqual(relative_gap([2.0, 2.0, 2.0]), 0.0)
        self.assertAlmostEqual(relative_gap([1.0, 0.95, 0.9]), 0.1, places=14)
        self.assertEqual(relative_gap([1.0, float('nan')]), float('inf'))
        self.assertEqual(relative_gap([1.0, float('inf')]), float('inf'))
        self.assertEqual(relative_gap([0.0, 0.0]), 0.0)
        self.assertGreater(relative_gap([1.0, 0.8]), 0.1)

    def test_envelopes(self):
        self.assertTrue(envelope_stable([1.0, 2.0, 3.0], 10.0))
        self.assertFalse(envelope_stable([1.0, 1.0, 30.0], 10.0))
        self.assertFalse(envelope_stable([], 10.0))


class TestTargets(unittest.TestCase):

    def test_tail_bound(self):
        targets = exponent_targets(2.0, 'tail_bound')
        self.assertEqual(targets, {'zeta': 3.0, 'tail': -3.0, 'correlation': -2.0, 'ld': -2.0, 'coupling': -2.0})

    def test_level_set(self):
        targets = exponent_targets(2.0, 'level_set')
        self.assertEqual(targets, {'zeta': 2.0, 'tail': -2.0, 'correlation': -1.0, 'ld': -1.0, 'coupling': -1.0})
