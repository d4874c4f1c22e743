# -*- coding: utf-8 -*-
"""
Command-line entry point.

    python src/main.py validate --config experiments/default.ini --seed 1
    python src/main.py tails --theta 0.5 --samples 1000000 --workers 8

Exit codes: 0 success, 1 configuration error or sample-size precondition,
2 numerical failure or failed criterion, 3 inconclusive result.
"""

import argparse
import logging
import os
import sys
import warnings
from datetime import datetime

from config import Config
from errors import ConfigError, ConvergenceWarning, InconclusiveResult, InsufficientSamples, LabError
from pipelines import FAIL, INCONCLUSIVE, PIPELINES, Run
from utils import makeRunDir

logger = logging.getLogger('main')

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_INCONCLUSIVE = 0, 1, 2, 3

DEFAULT_CONFIG = os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'experiments', 'default.ini')


def seed_type(value):
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser():
    ap = argparse.ArgumentParser(description='Numerical experiments on an intermittent hyperbolic torus map and its tower.')
    ap.add_argument('command', choices=sorted(PIPELINES), help='Pipeline to run.')
    ap.add_argument('--config', help='Experiment INI file. Default: experiments/default.ini', action='store',
                    default=DEFAULT_CONFIG)
    ap.add_argument('--seed', help='Master seed (unsigned 64-bit).', action='store', type=seed_type)
    ap.add_argument('--theta', help='Intermittency exponent in (0, 1].', action='store', type=float)
    ap.add_argument('--outDir', '--out-dir', dest='out_dir', help='Folder where the run directory is created.',
                    action='store')
    ap.add_argument('--exactDir', '--exact-dir', dest='exact_dir',
                    help='Write directly into --out-dir instead of a time-stamped subfolder.', action='store_true')
    ap.add_argument('--workers', '--nJobs', dest='workers', help='Number of parallel jobs.', action='store', type=int)
    ap.add_argument('--samples', help='Number of return-time samples for tails.', action='store', type=int)
    ap.add_argument('--verbose', help='Debug logging.', action='store_true')
    return ap


def overrides(args):
    return {
        ('run', 'seed'): args['seed'],
        ('run', 'workers'): args['workers'],
        ('run', 'out_dir'): args['out_dir'],
        ('intermittent', 'theta'): args['theta'],
        ('tails', 'samples'): args['samples'],
    }


def setup_logging(verbose, run_dir=None):
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    for handler in list(root.handlers):
        root.removeHandler(handler)
        handler.close()
    formatter = logging.Formatter('%(asctime)s %(levelname)s %(name)s: %(message)s')
    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(formatter)
    root.addHandler(console)
    if run_dir is not None:
        report = logging.FileHandler(os.path.join(run_dir, 'report.txt'), mode='w')
        report.setFormatter(formatter)
        root.addHandler(report)
    logging.captureWarnings(True)
    warnings.simplefilter('always', ConvergenceWarning)


def main(argv=None):
    args = vars(build_parser().parse_args(argv))
    setup_logging(args['verbose'])
    try:
        cfg = Config(args['config'], overrides(args))
    except ConfigError as e:
        logger.error("configuration error: %s", e)
        return EXIT_CONFIG

    run_dir = makeRunDir(cfg.get('run', 'out_dir'), args['command'], args['exact_dir'])
    setup_logging(args['verbose'], run_dir)
    logger.info(args)
    for section, key, value in cfg.items():
        logger.debug("%s.%s = %s", section, key, value)
    cfg.save(os.path.join(run_dir, 'config.ini'))

    starting_time = datetime.now()
    run = None
    code = EXIT_OK
    try:
        run = Run(cfg, run_dir, args['command'])
        for pipeline in PIPELINES[args['command']]:
            logger.info("running %s", pipeline.__name__)
            pipeline(run)
    except (ConfigError, InsufficientSamples) as e:
        logger.error("%s: %s", type(e).__name__, e)
        code = EXIT_CONFIG
    except InconclusiveResult as e:
        logger.error("inconclusive: %s", e)
        code = EXIT_INCONCLUSIVE
    except LabError as e:
        logger.error("numerical failure (%s): %s", type(e).__name__, e)
        code = EXIT_NUMERICAL

    if run is not None:
        run.write_summary()
        for criterion in run.criteria:
            logger.info("%r", criterion)
        if code == EXIT_OK:
            status = run.status()
            code = EXIT_NUMERICAL if status == FAIL else EXIT_INCONCLUSIVE if status == INCONCLUSIVE else EXIT_OK
    logger.info("finished in %s with exit code %d", datetime.now() - starting_time, code)
    return code


if __name__ == '__main__':
    sys.exit(main())
