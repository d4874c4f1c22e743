# -*- coding: utf-8 -*-
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from walkers import DRAIN, QuotientWalkers, uniform_on_fiber

from .fixtures import default_model


class TestQuotientWalkers(unittest.TestCase):

    def setUp(self):
        self.m = default_model()

    def test_identical_walkers_share_keys(self):
        walkers = QuotientWalkers(self.m, np.ones(2, dtype=np.int64), np.array([0.123, 0.123]))
        for _ in range(30):
            walkers.advance()
        self.assertEqual(walkers.return_key[0], walkers.return_key[1])
        self.assertEqual(walkers.log_jacobian[0], walkers.log_jacobian[1])

    def test_direct_return(self):
        walkers = QuotientWalkers(self.m, np.ones(1, dtype=np.int64), np.array([0.5]))
        checked, returned = walkers.advance()
        self.assertTrue(checked[0] and returned[0])
        self.assertEqual(walkers.level[0], 0)

    def test_strip_entry_drains(self):
        # lands in the central strip of W_0 after one step
        left = self.m.left_sequence.values
        a = (0.5 * (left[3] + left[4]) + 0.5) / 5.0
        walkers = QuotientWalkers(self.m, np.ones(1, dtype=np.int64), np.array([a]))
        checked, returned = walkers.advance()
        self.assertTrue(checked[0])
        self.assertFalse(returned[0])
        self.assertEqual(walkers.phase[0], DRAIN)

    def test_keep(self):
        walkers = QuotientWalkers(self.m, np.ones(3, dtype=np.int64), np.array([0.1, 0.5, 0.9]))
        walkers.keep(np.array([True, False, True]))
        self.assertEqual(len(walkers), 2)
        assert_array_equal(walkers.index, [0, 2])

    def test_uniform_on_fiber(self):
        a = uniform_on_fiber(self.m, 1, 100, np.random.default_rng(0))
        w1 = self.m.cells[1]
        self.assertTrue(np.all((a >= w1.u_lo) & (a <= w1.u_hi)))
