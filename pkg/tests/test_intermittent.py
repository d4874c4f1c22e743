# -*- coding: utf-8 -*-
import unittest

import numpy as np
from numpy.testing import assert_allclose

from errors import ConfigError, DomainError, SequenceExhausted
from intermittent import (IntermittentParams, asymptotic_ratio, boundary_sequence, derivative_product,
                          distortion_constant, distortion_ratio, gap_profile, phi, phi_array, phi_inverse,
                          phi_inverse_array)


class TestPhi(unittest.TestCase):

    def test_values(self):
        self.assertEqual(phi(0.5, IntermittentParams(1.0)), 0.75)
        self.assertEqual(phi(0.25, IntermittentParams(0.5)), 0.375)
        for theta in (0.3, 0.5, 1.0):
            self.assertEqual(phi(0.0, IntermittentParams(theta)), 0.0)

    def test_odd(self):
        p = IntermittentParams(0.5)
        self.assertEqual(phi(-0.25, p), -0.375)

    def test_domain(self):
        with self.assertRaises(DomainError):
            phi(0.7, IntermittentParams(0.5))

    def test_inverse(self):
        self.assertAlmostEqual(phi_inverse(0.75, IntermittentParams(1.0)), 0.5, places=13)
        self.assertEqual(phi_inverse(0.0, IntermittentParams(0.5)), 0.0)

    def test_inverse_round_trip(self):
        p = IntermittentParams(0.5)
        for b in np.linspace(-0.8, 0.8, 33):
            self.assertLessEqual(abs(phi(phi_inverse(b, p), p) - b), 1e-13)

    def test_vectorized(self):
        p = IntermittentParams(0.7)
        b = np.linspace(-0.8, 0.8, 41)
        assert_allclose(phi_inverse_array(b, p.theta), [phi_inverse(v, p) for v in b], atol=1e-13)
        a = np.linspace(-0.5, 0.5, 41)
        assert_allclose(phi_array(a, p.theta), [phi(v, p) for v in a], rtol=1e-15)

    def test_bad_parameters(self):
        with self.assertRaises(ConfigError):
            IntermittentParams(1.5)
        with self.assertRaises(ConfigError):
            IntermittentParams(0.0)
        with self.assertRaises(ConfigError):
            IntermittentParams(0.5, a0=0.5, a0_prime=0.2)


class TestBoundarySequence(unittest.TestCase):

    def test_empty(self):
        seq = boundary_sequence(IntermittentParams(0.5), 'right', 0)
        assert_allclose(seq.values, [0.5])

    def test_monotone(self):
        p = IntermittentParams(0.5)
        right = boundary_sequence(p, 'right', 200)
        left = boundary_sequence(p, 'left', 200)
        self.assertTrue(np.all(np.diff(right.values) < 0))
        self.assertTrue(np.all(np.diff(left.values) > 0))
        self.assertTrue(np.all(right.values > 0))
        self.assertTrue(np.all(left.values < 0))

    def test_recursion(self):
        p = IntermittentParams(0.5)
        seq = boundary_sequence(p, 'right', 50)
        for n in range(1, 51):
            self.assertAlmostEqual(phi(seq.values[n], p), seq.values[n - 1], places=13)

    def test_levels(self):
        p = IntermittentParams(0.5)
        seq = boundary_sequence(p, 'right', 20)
        mid = 0.5 * (seq.values[6] + seq.values[5])
        self.assertEqual(seq.level(mid), 5)
        with self.assertRaises(SequenceExhausted):
            seq.level(0.5 * seq.values[-1])

    def test_too_long(self):
        p = IntermittentParams(0.5, max_seq_len=10)
        with self.assertRaises(SequenceExhausted):
            boundary_sequence(p, 'right', 11)

    def test_asymptotics(self):
        for theta in (0.5, 1.0):
            p = IntermittentParams(theta)
            seq = boundary_sequence(p, 'right', 20000)
            ratio = asymptotic_ratio(seq, theta)
            self.assertLess(abs(ratio[-1] - 1.0), 0.02)

    def test_asymptotics_long(self):
        p = IntermittentParams(0.5)
        seq = boundary_sequence(p, 'right', 10 ** 6)
        self.assertTrue(np.all(np.diff(seq.values) < 0))
        ratio = asymptotic_ratio(seq, 0.5)
        self.assertLess(abs(ratio[10 ** 5 - 1] - 1.0), 0.02)
        self.assertLess(abs(ratio[-1] - 1.0), 0.02)

    def test_inverse_tiny(self):
        p = IntermittentParams(0.5)
        b = 1e-12
        x = phi_inverse(b, p)
        self.assertLess(x, b)
        self.assertLessEqual(abs(phi(x, p) - b), 1e-14 * b)
        assert_allclose(phi_inverse_array([b], 0.5), [x], rtol=1e-13)

    def test_gap_profile_bounded(self):
        p = IntermittentParams(0.5)
        profile = gap_profile(boundary_sequence(p, 'right', 5000), 0.5)
        self.assertLess(profile[-1] / profile[len(profile) // 2], 1.1)


class TestDerivatives(unittest.TestCase):

    def test_empty_product(self):
        self.assertEqual(derivative_product(0.3, 0, IntermittentParams(0.5)), 1.0)

    def test_one_step(self):
        self.assertAlmostEqual(derivative_product(0.5, 1, IntermittentParams(1.0)), 2.0, places=14)

    def test_distortion_trivial(self):
        p = IntermittentParams(0.5)
        seq = boundary_sequence(p, 'right', 10)
        a = 0.5 * (seq.values[4] + seq.values[5])
        b = 0.3 * seq.values[4] + 0.7 * seq.values[5]
        self.assertEqual(distortion_ratio(a, a, 3, 4, p), 0.0)
        self.assertEqual(distortion_ratio(a, b, 0, 4, p), 0.0)
        self.assertGreater(distortion_ratio(a, b, 3, 4, p), 0.0)

    def test_distortion_outside_level(self):
        p = IntermittentParams(0.5)
        seq = boundary_sequence(p, 'right', 10)
        with self.assertRaises(DomainError):
            distortion_ratio(seq.values[2], seq.values[7], 1, 4, p)

    def test_distortion_constant_bounded(self):
        p = IntermittentParams(0.5)
        values = []
        for n in (10, 40, 160):
            seq = boundary_sequence(p, 'right', n + 1)
            a = 0.75 * seq.values[n] + 0.25 * seq.values[n + 1]
            b = 0.25 * seq.values[n] + 0.75 * seq.values[n + 1]
            values.append(distortion_constant(a, b, n // 2, n, p))
        self.assertTrue(np.all(np.isfinite(values)))
        self.assertLess(max(values), 10.0)
