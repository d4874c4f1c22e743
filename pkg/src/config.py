# -*- coding: utf-8 -*-
"""
Experiment configuration: INI files with bracketed sections, every key
backed by a default. Command-line flags are applied as overrides.
"""

import configparser
import hashlib
import logging
import os

from errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULTS = {
    'model': {
        'cells': '3',
        'transition': 'ones',
        'lambda': '0.4',
        'affine_only': 'false',
        'cell_sizes': '',
        'sequence_length': '4096',
    },
    'intermittent': {
        'theta': '0.5',
        'a0': '0.5',
        'a0_prime': '-0.5',
        'newton_tol': '1e-14',
        'max_seq_len': '2000000',
    },
    'run': {
        'seed': '0',
        'workers': '1',
        'shards': '8',
        'out_dir': 'results',
    },
    'tails': {
        'samples': '100000',
        'min_samples': '10000',
        'cap': '1000000',
        'window_lo': '20',
        'window_hi': '500',
        'bootstrap': '200',
        'max_stages': '20',
    },
    'tower': {
        'bins': '128',
        'max_level': '200',
        'strip_levels': '',
        'tol': '1e-10',
        'maxiter': '5000',
        'export': 'false',
    },
    'stats': {
        'phi': 'cos1',
        'psi': 'cos1',
        'walkers': '256',
        'length': '4096',
        'burn_in': '1000',
        'stride': '1',
        'ensemble': '100000',
        'eps_list': '0.1,0.2',
        'n_list': '',
        'n_lo': '10',
        'n_hi': '200',
        'ci_tolerance': '',
        'ld_floor': '1e-4',
        'compare_points': '10',
        'spectral_slack': '2e-3',
    },
    'cohomology': {
        'observable': 'mixed',
        'terms': '64',
        'pairs': '200',
        'delta': '1e-3',
        'separation_cap': '16',
    },
    'coupling': {
        'k_margin': '1.05',
        'rho': '',
        'beta': '',
        'theta': '',
        'i0': '',
        'i0_auto': 'true',
        'grid': '64',
        'k_max': '20',
        'i_max': '',
        'cap': '100000',
        'pairs': '100000',
        'regularity_pairs': '400',
        'density_x': 'uniform',
        'density_y': 'tilted',
        'window_lo': '10',
        'window_hi': '500',
        'tolerance': '1e-6',
        'increment_samples': '100000',
    },
    'targets': {
        'convention': 'tail_bound',
        'tail_tol': '0.35',
        'corr_tol': '0.4',
        'ld_tol': '0.5',
        'coupling_tol': '0.4',
        'cohomology_tol': '0.3',
    },
    'validate': {
        'pairs': '1000',
        'horizon': '200',
        'diameter_k': '50,100,200',
        'envelope_factor': '10',
        'delta': '1e-6',
    },
}

CONVENTIONS = ('level_set', 'tail_bound')

# [model] spellings of keys stored under another section
ALIASES = {
    ('model', 'theta'): ('intermittent', 'theta'),
    ('model', 'a0'): ('intermittent', 'a0'),
    ('model', 'a0_prime'): ('intermittent', 'a0_prime'),
}

# keys that change where and how fast a run happens, not its results
EXECUTION_KEYS = (('run', 'workers'), ('run', 'out_dir'))


def _parse_list(text, kind=float):
    text = text.strip()
    if not text:
        return []
    return [kind(v) for v in text.replace(';', ',').split(',') if v.strip()]


class Config(object):
    """ Effective configuration of a run.

    Parameters:
        filename: INI file; None uses the defaults only.
        overrides: dict mapping (section, key) to a value, applied last.
    """

    def __init__(self, filename=None, overrides=None):
        self.filename = filename
        self.parser = configparser.ConfigParser(interpolation=None)
        self.parser.read_dict(DEFAULTS)
        if filename is not None:
            if not os.path.isfile(filename):
                raise ConfigError("config file %s not found" % filename)
            given = configparser.ConfigParser(interpolation=None)
            try:
                given.read(filename)
            except configparser.Error as e:
                raise ConfigError("cannot parse %s: %s" % (filename, e))
            for section in given.sections():
                if section not in DEFAULTS:
                    raise ConfigError("unknown section [%s] in %s" % (section, filename))
                for key, value in given.items(section):
                    self.set(section, key, value)
        for (section, key), value in sorted((overrides or {}).items()):
            if value is not None:
                self.set(section, key, value)
        if self.get('targets', 'convention') not in CONVENTIONS:
            raise ConfigError("convention must be one of %s" % ", ".join(CONVENTIONS))

    def set(self, section, key, value):
        key = key.lower()
        section, key = ALIASES.get((section, key), (section, key))
        if section not in DEFAULTS or key not in DEFAULTS[section]:
            raise ConfigError("unknown key %s.%s" % (section, key))
        self.parser.set(section, key, str(value))

    def get(self, section, key):
        section, key = ALIASES.get((section, key.lower()), (section, key))
        return self.parser.get(section, key)

    def _typed(self, section, key, kind):
        try:
            return kind(self.get(section, key))
        except ValueError:
            raise ConfigError("%s.%s=%r is not a valid %s" % (section, key, self.get(section, key), kind.__name__))

    def getint(self, section, key):
        return self._typed(section, key, int)

    def getfloat(self, section, key):
        return self._typed(section, key, float)

    def getboolean(self, section, key):
        try:
            return self.parser.getboolean(section, key)
        except ValueError:
            raise ConfigError("%s.%s is not a boolean" % (section, key))

    def optional(self, section, key, kind=float):
        """ None for an empty value. """
        if not self.get(section, key).strip():
            return None
        return self._typed(section, key, kind)

    def getlist(self, section, key, kind=float):
        try:
            return _parse_list(self.get(section, key), kind)
        except ValueError:
            raise ConfigError("%s.%s must be a comma separated list" % (section, key))

    def items(self):
        for section in sorted(DEFAULTS):
            for key in sorted(DEFAULTS[section]):
                yield section, key, self.get(section, key)

    def digest(self):
        """ Stable hash of the effective configuration, execution keys left out. """
        text = "\n".join("%s.%s=%s" % item for item in self.items() if item[:2] not in EXECUTION_KEYS)
        return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]

    def model_settings(self):
        transition = self.get('model', 'transition').strip()
        if transition != 'ones':
            try:
                transition = _parse_list(transition, int)
            except ValueError:
                raise ConfigError("model.transition must be 'ones' or a list of 0/1 entries")
        return {
            'cells': self.getint('model', 'cells'),
            'transition': transition,
            'lambda': self.getfloat('model', 'lambda'),
            'affine_only': self.getboolean('model', 'affine_only'),
            'cell_sizes': self.getlist('model', 'cell_sizes') or None,
            'sequence_length': self.getint('model', 'sequence_length'),
            'theta': self.getfloat('intermittent', 'theta'),
            'a0': self.getfloat('intermittent', 'a0'),
            'a0_prime': self.getfloat('intermittent', 'a0_prime'),
            'newton_tol': self.getfloat('intermittent', 'newton_tol'),
            'max_seq_len': self.getint('intermittent', 'max_seq_len'),
        }

    def save(self, filename):
        with open(filename, 'w') as out:
            self.parser.write(out)
        return filename
