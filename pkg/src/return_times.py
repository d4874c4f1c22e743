# -*- coding: utf-8 -*-
"""
Return times to the base Lambda = W_1.

R_hat is the time needed to leave the central strip of W_0 (1 elsewhere);
the stage times R_hat_1 < R_hat_2 < ... add n0 unconditional steps after
each exit, and R is the first stage time whose iterate lies in W_1.
"""

import logging

import numpy as np
import statsmodels.api as sm

from errors import CapExceeded, DegenerateSupport, DomainError, InsufficientSamples, LeafMismatch, SequenceExhausted
from hyperbolic_model import Point2, distance, step, unstable_log_derivative
from utils import logGrid, runShards
from walkers import QuotientWalkers, uniform_on_fiber

logger = logging.getLogger(__name__)


class ReturnRecord(object):

    def __init__(self, rhat_sequence, visits, itinerary, landing, log_derivative):
        self.rhat_sequence = np.asarray(rhat_sequence, dtype=np.int64)
        self.visits = np.asarray(visits, dtype=np.int64)
        self.itinerary = tuple(itinerary)
        self.landing = landing
        self.log_derivative = log_derivative

    @property
    def R(self):
        return int(self.rhat_sequence[-1])

    def __repr__(self):
        return "ReturnRecord(R=%d, stages=%d)" % (self.R, len(self.rhat_sequence))


def rhat(p, m):
    """ 1 off the central strip; n + 1 on the level set J_n or J'_n. """
    if p.cell != 0 or m.affine_only:
        return 1
    if p.a == 0.0:
        raise SequenceExhausted("the fixed point never leaves the strip", length=len(m.right_sequence) - 1)
    seq = m.right_sequence if p.a > 0 else m.left_sequence
    return seq.level(p.a) + 1


def _drain_length(p, m):
    try:
        return rhat(p, m) - 1
    except SequenceExhausted:
        # deeper than the table: count the strip steps directly
        n, q = 0, p
        while m.in_strip(q.cell, q.a):
            q = step(q, m)
            n += 1
        return n


def return_time(p, m, cap=10 ** 6):
    """ Follows the stage recursion from a point of W_1 until it lands in W_1 again. """
    if p.cell != 1:
        raise DomainError("return times are taken from points of W_1, got cell %d" % p.cell)
    t = 0
    y = p
    stages, visits, itinerary = [], [], []
    logd = 0.0
    while True:
        k = _drain_length(y, m) + m.n0
        for _ in range(k):
            br = m.branch_at(y.cell, y.a)
            itinerary.append(br.index)
            logd += unstable_log_derivative(y.cell, y.a, m)
            y = step(y, m)
            t += 1
            if t > cap:
                partial = ReturnRecord(stages or [t], visits or [y.cell], itinerary, y, logd)
                raise CapExceeded("no return to W_1 within %d steps" % cap, cap=cap, partial=partial)
        stages.append(t)
        visits.append(y.cell)
        if y.cell == 1:
            return ReturnRecord(stages, visits, itinerary, y, logd)


def return_cylinder(p, m, cap=10 ** 6):
    """ Label of the return partition element containing p. """
    return return_time(p, m, cap).itinerary


def separation_time(x, y, m, cap=64, return_cap=10 ** 6):
    """ Number of synchronized return-map iterations before x and y fall in
    distinct return cylinders. Returns (s, at_cap).
    """
    if x.cell != 1 or y.cell != 1:
        raise DomainError("separation times are defined on W_1")
    if x == y:
        return cap, True
    for k in range(cap):
        rx = return_time(x, m, return_cap)
        ry = return_time(y, m, return_cap)
        if rx.itinerary != ry.itinerary:
            return k, False
        x, y = rx.landing, ry.landing
        if x == y:
            return cap, True
    return cap, True


class TailEstimate(object):

    def __init__(self, n, survival, counts, slope, slope_ci, window, sample_size, censored):
        self.n = n
        self.survival = survival
        self.counts = counts
        self.slope = slope
        self.slope_ci = slope_ci
        self.window = window
        self.sample_size = sample_size
        self.censored = censored

    def table(self):
        return {'n': self.n, 'survival': self.survival, 'count': self.counts}

    def __repr__(self):
        return "TailEstimate(slope=%.4f, ci=[%.4f, %.4f], samples=%d, censored=%d)" % (
            self.slope, self.slope_ci[0], self.slope_ci[1], self.sample_size, self.censored)


def _slopes(x, Y):
    """ Least-squares slopes of each row of Y against x. """
    xc = x - x.mean()
    Yc = Y - Y.mean(axis=-1, keepdims=True)
    return (Yc * xc).sum(axis=-1) / (xc * xc).sum()


def tail_histogram(samples, window, censored=0, min_samples=10 ** 4, bootstrap=200, seed=0, points=40):
    """ Survival function of a sample of return times and its log-log slope.

    Parameters:
        samples: array of return times, or ReturnRecords.
        window: (n_lo, n_hi) fitting window.
        censored: number of samples known only to exceed every n in the window.
        bootstrap: multinomial resamples of the histogram for the CI.
    """
    if len(samples) and isinstance(samples[0], ReturnRecord):
        samples = [r.R for r in samples]
    values = np.asarray(samples, dtype=float)
    total = len(values) + int(censored)
    if total < min_samples:
        raise InsufficientSamples("tail fit needs at least %d samples, got %d" % (min_samples, total))
    lo, hi = window
    inside = values[(values >= lo) & (values <= hi)]
    if len(np.unique(inside)) < 10:
        raise DegenerateSupport("fewer than 10 distinct values in window [%g, %g]" % (lo, hi))

    grid = logGrid(lo, hi, points).astype(float)
    values = np.sort(values)
    exceed = len(values) - np.searchsorted(values, grid, side='right') + int(censored)
    keep = exceed > 0
    grid, exceed = grid[keep], exceed[keep]
    survival = exceed / float(total)
    logn, logs = np.log(grid), np.log(survival)
    fit = sm.OLS(logs, sm.add_constant(logn)).fit()
    slope = float(fit.params[1])

    # resampling the sample is the same as a multinomial draw on the bins cut by the grid
    rng = np.random.default_rng(seed)
    bins = np.concatenate([[total - exceed[0]], -np.diff(exceed), [exceed[-1]]])
    draws = rng.multinomial(total, bins / float(total), size=bootstrap)
    tails = np.cumsum(draws[:, ::-1], axis=1)[:, ::-1][:, 1:]
    ok = np.all(tails > 0, axis=1)
    if ok.any():
        boot = _slopes(logn, np.log(tails[ok] / float(total)))
        ci = (min(float(np.percentile(boot, 2.5)), slope), max(float(np.percentile(boot, 97.5)), slope))
    else:
        ci = (slope, slope)
    logger.debug("tail fit on %d points: slope %.4f", len(grid), slope)
    return TailEstimate(grid, survival, exceed, slope, ci, (lo, hi), total, int(censored))


def level_set_survival(m, n_max):
    """ Exact Leb{R_hat > n} / Leb(W_0 fiber) from the boundary tables, n = 0..n_max. """
    right = m.right_sequence.values
    left = m.left_sequence.values
    n_max = min(n_max, len(right) - 2, len(left) - 2)
    n = np.arange(n_max + 1)
    w0 = m.cells[0]
    return n, (right[n + 1] - left[n + 1]) / w0.width


class DistortionResult(object):

    def __init__(self, log_ratio, separation, at_cap, distance_ratio, same_cylinder):
        self.log_ratio = log_ratio
        self.separation = separation
        self.at_cap = at_cap
        self.distance_ratio = distance_ratio
        self.same_cylinder = same_cylinder


def distortion_check(x, y, m, cap=10 ** 6, separation_cap=32):
    """ |log (f_u^R)'(x) / (f_u^R)'(y)| for two points of one unstable leaf in W_1,
    paired with the separation time and distance of their images.
    """
    if x.cell != 1 or y.cell != 1 or x.b != y.b:
        raise LeafMismatch("distortion pairs must share an unstable leaf of W_1")
    if x == y:
        return DistortionResult(0.0, separation_cap, True, 0.0, True)
    rx = return_time(x, m, cap)
    ry = return_time(y, m, cap)
    log_ratio = abs(rx.log_derivative - ry.log_derivative)
    same = rx.itinerary == ry.itinerary
    s, at_cap = separation_time(rx.landing, ry.landing, m, separation_cap, cap)
    d = distance(rx.landing, ry.landing, m)
    return DistortionResult(log_ratio, s, at_cap, log_ratio / d if d > 0 else 0.0, same)


def fit_distortion_rate(results):
    """ Fits log(log_ratio) = log C + s log beta over pairs in a common cylinder.

    Returns (C, beta); beta is nan when too few pairs carry a positive ratio.
    """
    pairs = [(r.separation, r.log_ratio) for r in results
             if r.same_cylinder and r.log_ratio > 0 and not r.at_cap]
    if len(set(s for s, v in pairs)) < 2:
        return float('nan'), float('nan')
    s = np.array([p[0] for p in pairs], dtype=float)
    v = np.log([p[1] for p in pairs])
    fit = sm.OLS(v, sm.add_constant(s)).fit()
    beta = float(np.exp(fit.params[1]))
    C = float(np.max(np.exp(v) / beta ** s))
    return C, beta


class ReturnSample(object):
    """ Vectorized return-time draws from Lebesgue measure on the reference leaf of W_1. """

    def __init__(self, R, stages, censored):
        self.R = R
        self.stages = stages
        self.censored = censored

    @property
    def size(self):
        return len(self.R) + self.censored


def _return_shard(size, seed_seq, m, cap, max_stages):
    rng = np.random.default_rng(seed_seq)
    a = uniform_on_fiber(m, 1, size, rng)
    walkers = QuotientWalkers(m, np.ones(size, dtype=np.int64), a)
    R = np.full(size, -1, dtype=np.int64)
    stages = np.full((size, max_stages), -1, dtype=np.int64)
    count = np.zeros(size, dtype=np.int64)
    while len(walkers) and walkers.time < cap:
        checked, returned = walkers.advance()
        if checked.any():
            idx = walkers.index[checked]
            col = count[idx]
            record = col < max_stages
            stages[idx[record], col[record]] = walkers.time
            count[idx] += 1
        if returned.any():
            R[walkers.index[returned]] = walkers.time
            walkers.keep(~returned)
    return R[R > 0], stages[R > 0], int(np.sum(R < 0))


def sample_return_times(m, samples, seed=0, cap=10 ** 6, workers=1, shards=8, max_stages=20):
    """ Draws `samples` return times; results depend on (seed, shards) only. """
    if samples < 1:
        raise InsufficientSamples("need a positive number of samples")
    parts = runShards(_return_shard, samples, seed, shards, workers, m, cap, max_stages)
    R = np.concatenate([p[0] for p in parts])
    stages = np.concatenate([p[1] for p in parts])
    censored = sum(p[2] for p in parts)
    if censored:
        logger.info("%d of %d return times exceeded the cap %d", censored, samples, cap)
    return ReturnSample(R, stages, censored)


def conditional_return_profile(sample, max_i=20):
    """ For i = 1..max_i, the fraction of draws with R equal to the i-th stage time
    among those still out at stage i - 1.
    """
    stages, R = sample.stages, sample.R
    rows = []
    for i in range(1, min(max_i, stages.shape[1]) + 1):
        alive = stages[:, i - 1] >= 0
        count = int(alive.sum())
        frac = float(np.mean(R[alive] == stages[alive, i - 1])) if count else float('nan')
        rows.append((i, count, frac))
    return np.array(rows, dtype=float)


def increment_profile(sample, m, window):
    """ P{R_hat_{i+1} - R_hat_i > n0 + n} against the exact Leb{R_hat > n}.

    Returns (n, empirical, level_set) over the integer log grid of the window.
    """
    stages = sample.stages
    first, second = stages[:, :-1], stages[:, 1:]
    both = (first >= 0) & (second >= 0)
    inc = (second - first)[both] - m.n0
    grid = logGrid(window[0], window[1])
    if len(inc) == 0:
        return grid, np.full(len(grid), np.nan), np.full(len(grid), np.nan)
    inc = np.sort(inc)
    empirical = (len(inc) - np.searchsorted(inc, grid, side='right')) / float(len(inc))
    n, level = level_set_survival(m, int(grid[-1]))
    return grid, empirical, level[np.minimum(grid, n[-1])]


def observed_gcd(R):
    values = np.unique(np.asarray(R, dtype=np.int64))
    if len(values) == 0:
        return 0
    return int(np.gcd.reduce(values))
