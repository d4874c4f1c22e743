# -*- coding: utf-8 -*-
import os
import shutil
import tempfile
import unittest
from unittest.mock import patch

import main
from pipelines import PASS, Criterion
from utils import readTable

SMALL = """[tails]
samples = 2000
min_samples = 1000
window_lo = 2
window_hi = 40
bootstrap = 20

[run]
shards = 4
"""


class TestMain(unittest.TestCase):

    def setUp(self):
        self.folder = tempfile.mkdtemp()
        self.ini = os.path.join(self.folder, 'small.ini')
        with open(self.ini, 'w') as out:
            out.write(SMALL)

    def tearDown(self):
        main.setup_logging(False)
        shutil.rmtree(self.folder)

    def run_tails(self, name, *extra):
        out = os.path.join(self.folder, name)
        code = main.main(['tails', '--config', self.ini, '--seed', '5', '--outDir', out, '--exactDir'] + list(extra))
        return code, out

    def read(self, path):
        with open(path, 'rb') as f:
            return f.read()

    def test_missing_config(self):
        self.assertEqual(main.main(['tails', '--config', os.path.join(self.folder, 'absent.ini')]), main.EXIT_CONFIG)

    def test_zero_samples(self):
        code, out = self.run_tails('zero', '--samples', '0')
        self.assertEqual(code, main.EXIT_CONFIG)
        self.assertTrue(os.path.isfile(os.path.join(out, 'summary.txt')))
        self.assertTrue(os.path.isfile(os.path.join(out, 'config.ini')))

    def test_deterministic_outputs(self):
        code, first = self.run_tails('first', '--workers', '1')
        self.assertIn(code, (main.EXIT_OK, main.EXIT_NUMERICAL, main.EXIT_INCONCLUSIVE))
        _, second = self.run_tails('second', '--workers', '2')
        for name in ('conditional.csv', 'increments.csv', 'tails.csv'):
            self.assertEqual(self.read(os.path.join(first, name)), self.read(os.path.join(second, name)))

    def test_outputs(self):
        _, out = self.run_tails('outputs')
        conditional = os.path.join(out, 'conditional.csv')
        with open(conditional) as f:
            last = f.read().splitlines()[-1]
        self.assertTrue(last.startswith('# config_hash='))
        self.assertTrue(last.endswith('seed=5'))
        self.assertEqual(list(readTable(conditional).columns), ['i', 'count', 'frac'])
        with open(os.path.join(out, 'summary.txt')) as f:
            summary = f.read()
        self.assertIn('command=tails', summary)
        self.assertIn('observed_gcd=', summary)
        self.assertTrue(os.path.isfile(os.path.join(out, 'report.txt')))


STATS = """[tower]
bins = 64
max_level = 40

[stats]
walkers = 16
length = 256
burn_in = 50
ensemble = 500
n_list = 10,12,14,17,20,24,28,33,40
compare_points = 3

[run]
shards = 2
"""

COUPLE = """[tower]
bins = 64
max_level = 40

[tails]
min_samples = 100
bootstrap = 20

[coupling]
grid = 64
k_max = 10
cap = 10000
pairs = 2000
window_lo = 10
window_hi = 100
increment_samples = 500

[run]
shards = 2
"""

VALIDATE = """[validate]
pairs = 40
horizon = 50
diameter_k = 10,20,40

[cohomology]
terms = 16
pairs = 40
"""

FINISHED = (main.EXIT_OK, main.EXIT_NUMERICAL, main.EXIT_INCONCLUSIVE)


class TestCommands(unittest.TestCase):

    def setUp(self):
        self.folder = tempfile.mkdtemp()

    def tearDown(self):
        main.setup_logging(False)
        shutil.rmtree(self.folder)

    def run_command(self, command, text, *extra):
        ini = os.path.join(self.folder, '%s.ini' % command)
        with open(ini, 'w') as out:
            out.write(text)
        out = os.path.join(self.folder, command)
        code = main.main([command, '--config', ini, '--seed', '3', '--outDir', out, '--exactDir'] + list(extra))
        with open(os.path.join(out, 'summary.txt')) as f:
            summary = f.read()
        return code, out, summary

    def test_exit_ok(self):
        def passing(run):
            run.criteria.append(Criterion('always', PASS))
            return run
        with patch.dict(main.PIPELINES, {'validate': [passing]}):
            code, _, summary = self.run_command('validate', '')
        self.assertEqual(code, main.EXIT_OK)
        self.assertIn('PASS always', summary)

    def test_validate(self):
        code, out, summary = self.run_command('validate', VALIDATE)
        self.assertIn(code, FINISHED)
        self.assertIn('PASS markov_crossing', summary)
        self.assertIn('decomposition_residual', summary)
        self.assertIn('psi_stable_gaps=', summary)
        for name in ('validate.csv', 'distortion.csv', 'cohomology.csv'):
            self.assertTrue(os.path.isfile(os.path.join(out, name)))
        self.assertEqual(list(readTable(os.path.join(out, 'validate.csv')).columns), ['check', 'horizon', 'envelope'])

    def test_correlations(self):
        code, out, summary = self.run_command('correlations', STATS)
        self.assertIn(code, FINISHED)
        self.assertIn('birkhoff_halves', summary)
        table = readTable(os.path.join(out, 'correlations.csv'))
        self.assertEqual(list(table.columns), ['n', 'C_n', 'ci'])
        self.assertEqual(len(table), 9)

    def test_correlations_ci_too_wide(self):
        text = STATS.replace('compare_points = 3', 'compare_points = 3\nci_tolerance = 1e-12')
        code, _, summary = self.run_command('correlations', text)
        self.assertEqual(code, main.EXIT_INCONCLUSIVE)
        self.assertIn('INCONCLUSIVE correlation_ci', summary)

    def test_ld(self):
        code, out, _ = self.run_command('ld', STATS)
        self.assertIn(code, FINISHED)
        table = readTable(os.path.join(out, 'ld.csv'))
        self.assertEqual(list(table.columns), ['n', 'eps', 'LD', 'ci_lo', 'ci_hi', 'hits'])
        self.assertEqual(len(table), 18)
        self.assertTrue((table['ci_lo'] <= table['LD']).all())

    def test_spectra(self):
        code, out, summary = self.run_command('spectra', STATS)
        self.assertIn(code, FINISHED)
        self.assertIn('PASS row_sums', summary)
        self.assertIn('spectral_matches_mc', summary)
        self.assertEqual(len(readTable(os.path.join(out, 'spectra_vs_mc.csv'))), 3)

    def test_couple(self):
        code, out, summary = self.run_command('couple', COUPLE)
        self.assertIn(code, FINISHED)
        self.assertIn('PASS marginal_residual', summary)
        steps = readTable(os.path.join(out, 'coupling_steps.csv'))
        self.assertTrue(steps['marginal_residual'].dropna().le(1e-10).all())
        table = readTable(os.path.join(out, 'coupling.csv'))
        self.assertEqual(list(table.columns), ['n', 'prop_c_bound', 'p_T_gt_n', 'direct_tv', 'holds'])
