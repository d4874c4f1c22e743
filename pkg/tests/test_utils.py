# -*- coding: utf-8 -*-
import os
import shutil
import tempfile
import unittest

import numpy as np
from numpy.testing import assert_array_equal

from utils import formatSlope, logGrid, readTable, runShards, saveTable, shardSizes, spawnSeeds


def _draw(size, seed_seq, scale):
    return scale * np.random.default_rng(seed_seq).uniform(size=size)


class TestUtils(unittest.TestCase):

    def test_shard_sizes(self):
        self.assertEqual(shardSizes(10, 3), [4, 3, 3])
        self.assertEqual(shardSizes(2, 8), [1, 1])
        self.assertEqual(sum(shardSizes(1001, 8)), 1001)

    def test_seeds_do_not_depend_on_count(self):
        first = spawnSeeds(42, 4)[2].generate_state(2)
        again = spawnSeeds(42, 4)[2].generate_state(2)
        assert_array_equal(first, again)

    def test_shards_serial_and_parallel(self):
        serial = np.concatenate(runShards(_draw, 100, 9, 4, 1, 2.0))
        parallel = np.concatenate(runShards(_draw, 100, 9, 4, 2, 2.0))
        assert_array_equal(serial, parallel)
        self.assertEqual(len(serial), 100)

    def test_log_grid(self):
        grid = logGrid(10, 200)
        self.assertEqual(grid[0], 10)
        self.assertEqual(grid[-1], 200)
        self.assertTrue(np.all(np.diff(grid) > 0))

    def test_table_trailer(self):
        folder = tempfile.mkdtemp()
        try:
            path = saveTable({'n': [1, 2], 'survival': [1.0, 0.5]}, os.path.join(folder, 't.csv'), 'abc', 7)
            with open(path) as f:
                lines = f.read().splitlines()
            table = readTable(path)
        finally:
            shutil.rmtree(folder)
        self.assertEqual(lines[0], 'n,survival')
        self.assertEqual(lines[-1], '# config_hash=abc seed=7')
        self.assertEqual(len(table), 2)

    def test_format_slope(self):
        self.assertEqual(formatSlope('R_tail', -2.5, (-2.6, -2.4)), 'R_tail=-2.5000[-2.6000,-2.4000]')
