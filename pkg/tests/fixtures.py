# -*- coding: utf-8 -*-
from hyperbolic_model import build_model

_cache = {}


def default_model(theta=0.5):
    key = ('default', theta)
    if key not in _cache:
        _cache[key] = build_model({'cells': 3, 'transition': 'ones', 'lambda': 0.4, 'theta': theta,
                                   'sequence_length': 4096})
    return _cache[key]


def affine_model():
    """ Three unit cells, every affine branch of slope 2 and stable ratio 1/2. """
    if 'affine' not in _cache:
        _cache['affine'] = build_model({'cells': 2, 'transition': [[1, 1, 0], [1, 0, 1], [0, 1, 1]],
                                        'lambda': 0.5, 'affine_only': True})
    return _cache['affine']
