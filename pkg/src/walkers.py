# -*- coding: utf-8 -*-
"""
Lock-step ensembles of points of the unstable factor.

Each walker carries the phase of the return construction:

    DRAIN        the point sits in the central strip of W_0 and keeps
                 iterating until it leaves it (R_hat - 1 steps);
    c = 1..n0    c unconditional steps remain before the W_1 check.

A walker on the base starts with phase n0. When a countdown reaches zero
the walker either lands in W_1 (a return: level resets to 0) or starts
the next stage, draining if it fell into the strip.
"""

import numpy as np

from hyperbolic_model import unstable_step_array

DRAIN = 0

_M1, _A1 = 2147483647, 48271
_M2, _A2 = 2147483629, 69621


class QuotientWalkers(object):

    def __init__(self, model, cells, a, phase=None):
        self.model = model
        self.n0 = model.n0
        self.cells = np.asarray(cells, dtype=np.int64).copy()
        self.a = np.asarray(a, dtype=float).copy()
        n = len(self.a)
        self.phase = np.full(n, self.n0, dtype=np.int64) if phase is None else np.asarray(phase).copy()
        self.level = np.zeros(n, dtype=np.int64)
        self.log_jacobian = np.zeros(n)
        self.hash1 = np.zeros(n, dtype=np.int64)
        self.hash2 = np.zeros(n, dtype=np.int64)
        self.index = np.arange(n)
        self.time = 0

    def __len__(self):
        return len(self.a)

    @property
    def return_key(self):
        return self.hash1 * _M2 + self.hash2

    def advance(self):
        """ One step of every walker.

        Returns (checked, returned): walkers that just finished a stage and,
        among them, those that landed in W_1.
        """
        m = self.model
        self.time += 1
        cells, a, _, logd = unstable_step_array(m, self.cells, self.a)
        in_strip = m.strip_mask(cells, a)
        draining = self.phase == DRAIN
        remaining = self.phase - 1
        checked = ~draining & (remaining == 0)
        returned = checked & (cells == 1)

        phase = np.where(draining, np.where(in_strip, DRAIN, self.n0), remaining)
        restart = checked & ~returned
        phase[restart] = np.where(in_strip[restart], DRAIN, self.n0)
        phase[returned] = self.n0

        self.level += 1
        self.level[returned] = 0
        self.log_jacobian += logd
        if returned.any():
            self.hash1[returned] = (self.hash1[returned] * _A1 + self.time) % _M1
            self.hash2[returned] = (self.hash2[returned] * _A2 + self.time) % _M2
        self.cells, self.a, self.phase = cells, a, phase
        return checked, returned

    def keep(self, mask):
        """ Drops the walkers where mask is False. """
        for name in ('cells', 'a', 'phase', 'level', 'log_jacobian', 'hash1', 'hash2', 'index'):
            setattr(self, name, getattr(self, name)[mask])


def uniform_on_fiber(model, cell, size, rng):
    c = model.cells[cell]
    return rng.uniform(c.u_lo, c.u_hi, size)
