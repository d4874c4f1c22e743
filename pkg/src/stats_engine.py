# -*- coding: utf-8 -*-
"""
Estimators of correlation decay and large deviations along orbits of the
model, plus Hölder observables and log-log slope fitting.
"""

import logging
import math

import numpy as np
import pandas as pd
import statsmodels.api as sm
from sklearn.utils import resample
from statsmodels.stats.proportion import proportion_confint

from errors import DegenerateWindow, InsufficientSamples, ShapeMismatch
from hyperbolic_model import Point2, distance, step_array
from utils import runShards

logger = logging.getLogger(__name__)


class Observable(object):
    """ A real function of the model evaluated on arrays (cells, a, b).

    quotient=True marks functions of the unstable coordinate only, which
    can be handed to the transfer-matrix estimators.
    """

    def __init__(self, evaluator, eta=1.0, name='observable', quotient=False, sup_norm=None):
        self.evaluator = evaluator
        self.eta = eta
        self.name = name
        self.quotient = quotient
        self.sup_norm = sup_norm
        self.seminorm_estimate = None

    def __call__(self, cells, a, b):
        cells = np.asarray(cells)
        out = self.evaluator(cells, np.asarray(a, dtype=float), np.asarray(b, dtype=float))
        return np.broadcast_to(np.asarray(out, dtype=float), cells.shape).copy()

    def value(self, p):
        return float(self(np.array([p.cell]), np.array([p.a]), np.array([p.b]))[0])

    def estimate(self, m, rng, n_pairs=2000, scales=(1e-1, 1e-2, 1e-3)):
        """ Fills sup_norm and seminorm_estimate from random points and pairs. """
        pairs = sample_pairs(m, n_pairs, rng, scales)
        points = [p for pair in pairs for p in pair]
        sup = max(abs(self.value(p)) for p in points)
        self.sup_norm = sup if self.sup_norm is None else max(self.sup_norm, sup)
        self.seminorm_estimate = holder_seminorm(self, self.eta, pairs, m).value
        return self

    def __repr__(self):
        return "Observable(%s, eta=%g)" % (self.name, self.eta)


def coordinate(which='a'):
    if which == 'a':
        return Observable(lambda c, a, b: a, 1.0, 'coord_a', quotient=True)
    if which == 'b':
        return Observable(lambda c, a, b: b, 1.0, 'coord_b')
    raise ValueError("which must be 'a' or 'b'")


def constant(value):
    return Observable(lambda c, a, b: value, 1.0, 'constant', quotient=True, sup_norm=abs(value))


def trigonometric(k=1, length=1.0):
    return Observable(lambda c, a, b: np.cos(2.0 * np.pi * k * a / length), 1.0,
                      'cos%d' % k, quotient=True, sup_norm=1.0)


def smoothed_indicator(m, cell, width=0.1):
    """ 1 deep inside a cell, falling linearly to 0 within `width` of its edges. """
    c = m.cells[cell]

    def evaluate(cells, a, b):
        edge = np.minimum.reduce([a - c.u_lo, c.u_hi - a, b - c.s_lo, c.s_hi - b])
        return np.where(cells == cell, np.clip(edge / width, 0.0, 1.0), 0.0)

    return Observable(evaluate, 1.0, 'indicator%d' % cell, sup_norm=1.0)


def mixed(weight=0.5, k=1, length=1.0):
    """ cos(2 pi k a / L) + weight * b; depends on both coordinates. """
    return Observable(lambda c, a, b: np.cos(2.0 * np.pi * k * a / length) + weight * b, 1.0, 'mixed')


def make_observable(name, m):
    factories = {
        'coord_a': lambda: coordinate('a'),
        'coord_b': lambda: coordinate('b'),
        'cos1': lambda: trigonometric(1, m.cells[1].width),
        'cos2': lambda: trigonometric(2, m.cells[1].width),
        'indicator0': lambda: smoothed_indicator(m, 0),
        'indicator1': lambda: smoothed_indicator(m, 1),
        'mixed': lambda: mixed(0.5, 1, m.cells[1].width),
    }
    if name.startswith('constant'):
        return constant(float(name.split(':')[1]) if ':' in name else 1.0)
    if name not in factories:
        raise ValueError("unknown observable %r" % name)
    return factories[name]()


def sample_pairs(m, n, rng, scales=(1e-1, 1e-2, 1e-3)):
    """ Random pairs inside random cells, displaced by each scale in turn. """
    pairs = []
    for k in range(n):
        cell = m.cells[int(rng.integers(len(m.cells)))]
        a = rng.uniform(cell.u_lo, cell.u_hi)
        b = rng.uniform(cell.s_lo, cell.s_hi)
        da, db = scales[k % len(scales)] * rng.uniform(-1.0, 1.0, size=2)
        partner = Point2(cell.index, min(max(a + da, cell.u_lo), cell.u_hi),
                         min(max(b + db, cell.s_lo), cell.s_hi))
        pairs.append((Point2(cell.index, a, b), partner))
    return pairs


class HolderEstimate(object):

    def __init__(self, value, argmax):
        self.value = value
        self.argmax = argmax


def holder_seminorm(phi, eta, pairs, m):
    """ max |phi(x) - phi(y)| / d(x, y)^eta over the pairs. """
    evaluate = phi.value if isinstance(phi, Observable) else phi
    best, where = 0.0, None
    for k, (x, y) in enumerate(pairs):
        d = distance(x, y, m)
        if d <= 0.0:
            continue
        ratio = abs(evaluate(x) - evaluate(y)) / d ** eta
        if ratio > best:
            best, where = ratio, k
    return HolderEstimate(best, where)


class OrbitSummary(object):
    """ Running sums of observables along the orbits of simulate_orbit.

    values holds the raw evaluations only when they were kept; means, lag
    products and batch means are always available.
    """

    def __init__(self, names, walkers, lags, keep, n):
        self.walkers = walkers
        self.lags = tuple(sorted(set(int(k) for k in lags if int(k) > 0)))
        self.count = 0
        self.sums = dict((name, 0.0) for name in names)
        self.squares = dict((name, 0.0) for name in names)
        self.lag_sums = dict(((name, k), 0.0) for name in names for k in self.lags)
        self.lag_counts = dict((k, 0) for k in self.lags)
        self.batch_means = dict((name, []) for name in names)
        self.values = None
        if keep:
            shape = (n,) if walkers == 1 else (n, walkers)
            self.values = dict((name, np.empty(shape)) for name in names)
        self._tail = dict((name, np.empty((0, walkers))) for name in names)
        self.start = None
        self.final = None

    def add(self, name, block, offset):
        """ block: (rows, walkers) evaluations for times offset..offset+rows-1. """
        self.sums[name] += float(block.sum())
        self.squares[name] += float(np.square(block).sum())
        self.batch_means[name].append(float(block.mean()))
        if self.values is not None:
            rows = self.values[name][offset:offset + len(block)]
            rows[...] = block[:, 0] if self.walkers == 1 else block
        if not self.lags:
            return
        tail = self._tail[name]
        joined = np.concatenate([tail, block])
        old = len(tail)
        for k in self.lags:
            first = max(old, k)
            if first < len(joined):
                self.lag_sums[(name, k)] += float((joined[first - k:len(joined) - k] * joined[first:]).sum())
        self._tail[name] = joined[-max(self.lags):]

    def close_block(self, rows):
        self.count += rows * self.walkers
        for k in self.lags:
            seen = self.count // self.walkers
            self.lag_counts[k] = max(seen - k, 0) * self.walkers

    def mean(self, name):
        if self.count == 0:
            return float('nan')
        return self.sums[name] / self.count

    def variance(self, name):
        if self.count == 0:
            return float('nan')
        return self.squares[name] / self.count - self.mean(name) ** 2

    def autocovariance(self, name, k):
        """ Mean of f(x_t) f(x_{t+k}) minus the squared mean. """
        if k == 0:
            return self.variance(name)
        if self.lag_counts[k] == 0:
            return float('nan')
        return self.lag_sums[(name, k)] / self.lag_counts[k] - self.mean(name) ** 2

    def halves(self, name, batches=20):
        """ birkhoff_halves applied to the chunk means. """
        means = np.asarray(self.batch_means[name])
        if len(means) < 4:
            raise InsufficientSamples("need at least four chunks for batch means, have %d" % len(means))
        return birkhoff_halves(means, min(batches, len(means) // 2))


def simulate_orbit(seed, p0, n, m, observables=(), burn_in=0, walkers=1, chunk=4096, lags=(), keep=True):
    """ Iterates p0 (or walkers random points of W_1 drawn from seed) for n steps.

    The orbit advances chunk steps at a time through step_array; each chunk
    of evaluations is folded into the running sums and dropped unless keep.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if chunk < 1:
        raise ValueError("chunk must be positive")
    rng = np.random.default_rng(seed)
    if p0 is None:
        w1 = m.cells[1]
        cells = np.ones(walkers, dtype=np.int64)
        a = rng.uniform(w1.u_lo, w1.u_hi, walkers)
        b = rng.uniform(w1.s_lo, w1.s_hi, walkers)
    else:
        walkers = 1
        cells = np.array([p0.cell], dtype=np.int64)
        a = np.array([p0.a])
        b = np.array([p0.b])
    for _ in range(burn_in):
        cells, a, b = step_array(m, cells, a, b)
    summary = OrbitSummary([o.name for o in observables], walkers, lags, keep, n)
    summary.start = Point2(cells[0], a[0], b[0])
    block = dict((o.name, np.empty((chunk, walkers))) for o in observables)
    done = 0
    while done < n:
        rows = min(chunk, n - done)
        for t in range(rows):
            for o in observables:
                block[o.name][t] = o(cells, a, b)
            cells, a, b = step_array(m, cells, a, b)
        for o in observables:
            summary.add(o.name, block[o.name][:rows], done)
        summary.close_block(rows)
        done += rows
    summary.final = Point2(cells[0], a[0], b[0])
    return summary


def birkhoff_halves(values, batches=20):
    """ Means of the two halves of a series with batch-means standard errors
    and the z-score of their difference.
    """
    values = np.asarray(values, dtype=float)
    half = len(values) // 2
    out = []
    for part in (values[:half], values[half:2 * half]):
        size = len(part) // batches
        means = part[:size * batches].reshape(batches, size).mean(axis=1)
        out.append((float(part.mean()), float(means.std(ddof=1) / math.sqrt(batches))))
    (m1, s1), (m2, s2) = out
    spread = math.sqrt(s1 ** 2 + s2 ** 2)
    z = abs(m1 - m2) / spread if spread > 0 else 0.0
    return {'mean_first': m1, 'se_first': s1, 'mean_second': m2, 'se_second': s2, 'z': z}


def integrated_time(x, c=5.0):
    """ Integrated autocorrelation time with an automatic window M >= c tau(M). """
    x = np.asarray(x, dtype=float) - np.mean(x)
    n = len(x)
    if n < 2 or not np.any(x):
        return 1.0
    f = np.fft.rfft(x, n=2 * n)
    acf = np.fft.irfft(f * np.conjugate(f))[:n]
    acf /= acf[0]
    taus = 2.0 * np.cumsum(acf) - 1.0
    window = np.arange(n) >= c * taus
    M = int(np.argmax(window)) if window.any() else n - 1
    return float(max(taus[M], 1.0))


def srb_start(m, size, burn_in, rng):
    """ Uniform points of W_1 pushed forward burn_in steps. """
    w1 = m.cells[1]
    cells = np.ones(size, dtype=np.int64)
    a = rng.uniform(w1.u_lo, w1.u_hi, size)
    b = rng.uniform(w1.s_lo, w1.s_hi, size)
    for _ in range(burn_in):
        cells, a, b = step_array(m, cells, a, b)
    return cells, a, b


class CorrelationSeries(object):

    def __init__(self, n_values, c_values, method, ci=None, signed=None):
        self.n_values = np.asarray(n_values)
        self.c_values = np.asarray(c_values, dtype=float)
        self.method = method
        self.ci = ci
        self.signed = signed

    def table(self):
        out = pd.DataFrame({'n': self.n_values, 'C_n': self.c_values})
        out['ci'] = self.ci if self.ci is not None else np.nan
        return out


def _correlation_shard(size, seed_seq, m, phi, psi, n_values, length, burn_in, stride):
    rng = np.random.default_rng(seed_seq)
    cells, a, b = srb_start(m, size, burn_in, rng)
    horizon = length + int(max(n_values))
    phiv = np.empty((size, horizon))
    psiv = np.empty((size, length))
    for t in range(horizon):
        phiv[:, t] = phi(cells, a, b)
        if t < length:
            psiv[:, t] = psi(cells, a, b)
        cells, a, b = step_array(m, cells, a, b)
    starts = np.arange(0, length, stride)
    lagged = np.stack([phiv[:, starts + n] for n in n_values], axis=-1)
    return psiv[:, starts], lagged


def sampling_stride(m, psi, seed, burn_in, walkers=16, length=2048):
    rng = np.random.default_rng(seed)
    cells, a, b = srb_start(m, walkers, burn_in, rng)
    trace = np.empty((walkers, length))
    for t in range(length):
        trace[:, t] = psi(cells, a, b)
        cells, a, b = step_array(m, cells, a, b)
    return max(1, int(math.ceil(np.mean([integrated_time(row) for row in trace]))))


def correlation_mc(phi, psi, n_values, m, walkers=256, length=4096, burn_in=1000, stride=1,
                   seed=0, shards=8, workers=1, tolerance=None):
    """ C_n = |Cov(phi o f^n, psi)| along orbits of an ensemble, each walker one
    batch for the 95% half-widths.
    """
    n_values = np.asarray(n_values, dtype=np.int64)
    if walkers < 2:
        raise InsufficientSamples("correlation estimates need at least two walkers")
    if stride == 'auto':
        stride = sampling_stride(m, psi, seed, burn_in)
        logger.info("sampling stride set to %d from the integrated autocorrelation time", stride)
    parts = runShards(_correlation_shard, walkers, seed, shards, workers,
                      m, phi, psi, n_values, length, burn_in, int(stride))
    psi_s = np.concatenate([p[0] for p in parts])
    lagged = np.concatenate([p[1] for p in parts])
    psi_c = psi_s - psi_s.mean()
    phi_c = lagged - lagged.mean(axis=(0, 1))
    per_walker = (psi_c[:, :, None] * phi_c).mean(axis=1)
    signed = per_walker.mean(axis=0)
    ci = 1.96 * per_walker.std(axis=0, ddof=1) / math.sqrt(per_walker.shape[0])
    if tolerance is not None and np.any(ci > tolerance):
        raise InsufficientSamples("correlation CI half-width %.3g exceeds %.3g" % (ci.max(), tolerance))
    return CorrelationSeries(n_values, np.abs(signed), 'monte_carlo', ci, signed)


def discretize_observable(phi, T, m):
    """ Values of phi at the bin midpoints of the transfer-matrix states. """
    bins = T.bins
    mid = 0.5 * (bins['lo'].values + bins['hi'].values)
    cells = bins['cell'].values
    b = np.array([0.5 * (m.cells[c].s_lo + m.cells[c].s_hi) for c in cells])
    return phi(cells, mid, b)[T.states['bin'].values]


def correlation_spectral(T, rho, phi_values, psi_values, n_values):
    """ C_n = |<phi, (rho (psi - <psi>)) P^n>| by repeated multiplication. """
    n_states = T.n_states
    phi_values = np.asarray(phi_values, dtype=float)
    psi_values = np.asarray(psi_values, dtype=float)
    for name, v in (('rho', rho), ('phi', phi_values), ('psi', psi_values)):
        if np.shape(v) != (n_states,):
            raise ShapeMismatch("%s has shape %r, expected (%d,)" % (name, np.shape(v), n_states))
    n_values = np.asarray(n_values, dtype=np.int64)
    wanted = set(int(n) for n in n_values)
    PT = T.P.T.tocsr()
    w = rho * (psi_values - rho.dot(psi_values))
    found = {}
    for n in range(int(n_values.max()) + 1):
        if n in wanted:
            found[n] = w.dot(phi_values)
        w = PT.dot(w)
    signed = np.array([found[int(n)] for n in n_values])
    return CorrelationSeries(n_values, np.abs(signed), 'spectral', None, signed)


class LDSeries(object):

    def __init__(self, n_values, eps, ld, ci_lo, ci_hi, hits, ensemble, mean):
        self.n_values = n_values
        self.eps = eps
        self.ld = ld
        self.ci_lo = ci_lo
        self.ci_hi = ci_hi
        self.hits = hits
        self.ensemble = ensemble
        self.mean = mean

    def table(self):
        rows = []
        for i, e in enumerate(self.eps):
            for k, n in enumerate(self.n_values):
                rows.append((int(n), e, self.ld[i, k], self.ci_lo[i, k], self.ci_hi[i, k], int(self.hits[i, k])))
        return pd.DataFrame(rows, columns=['n', 'eps', 'LD', 'ci_lo', 'ci_hi', 'hits'])

    def above_floor(self, i, noise_hits=100):
        return self.hits[i] >= noise_hits


def _ld_shard(size, seed_seq, m, phi, n_values, burn_in):
    rng = np.random.default_rng(seed_seq)
    cells, a, b = srb_start(m, size, burn_in, rng)
    checkpoints = dict((int(n), k) for k, n in enumerate(n_values))
    averages = np.empty((size, len(n_values)))
    total = np.zeros(size)
    for t in range(1, int(max(n_values)) + 1):
        total += phi(cells, a, b)
        cells, a, b = step_array(m, cells, a, b)
        if t in checkpoints:
            averages[:, checkpoints[t]] = total / t
    return averages, total.sum()


def large_deviation(phi, eps, n_values, m, ensemble=10000, burn_in=1000, seed=0, shards=8, workers=1,
                    mean=None, min_ensemble=100):
    """ Fraction of an ensemble whose Birkhoff average over n steps misses the
    space mean by more than eps, with Wilson 95% intervals.
    """
    if ensemble < min_ensemble:
        raise InsufficientSamples("large deviations need an ensemble of at least %d" % min_ensemble)
    n_values = np.asarray(n_values, dtype=np.int64)
    eps = [float(e) for e in np.atleast_1d(eps)]
    parts = runShards(_ld_shard, ensemble, seed, shards, workers, m, phi, n_values, burn_in)
    averages = np.concatenate([p[0] for p in parts])
    if mean is None:
        mean = sum(p[1] for p in parts) / (ensemble * float(n_values.max()))
    deviation = np.abs(averages - mean)
    hits = np.array([(deviation > e).sum(axis=0) for e in eps])
    ld = hits / float(ensemble)
    lo, hi = proportion_confint(hits, ensemble, alpha=0.05, method='wilson')
    return LDSeries(n_values, eps, ld, np.asarray(lo), np.asarray(hi), hits, ensemble, mean)


class SlopeFit(object):

    def __init__(self, slope, ci, intercept, points):
        self.slope = slope
        self.ci = ci
        self.intercept = intercept
        self.points = points

    def __repr__(self):
        return "SlopeFit(%.4f [%.4f, %.4f] on %d points)" % (self.slope, self.ci[0], self.ci[1], self.points)


def fit_slope(n_values, values, window=None, bootstrap=200, seed=0):
    """ OLS slope of log(values) on log(n) with a pairs-bootstrap 95% interval. """
    n = np.asarray(n_values, dtype=float)
    v = np.asarray(values, dtype=float)
    mask = np.ones(len(n), dtype=bool) if window is None else (n >= window[0]) & (n <= window[1])
    if mask.sum() < 8:
        raise DegenerateWindow("slope fit needs 8 points in the window, got %d" % mask.sum())
    if np.any(v[mask] <= 0) or np.any(n[mask] <= 0):
        raise DegenerateWindow("slope fit needs positive values in the window")
    x, y = np.log(n[mask]), np.log(v[mask])
    fit = sm.OLS(y, sm.add_constant(x)).fit()
    slope = float(fit.params[1])
    state = np.random.RandomState(seed)
    index = np.arange(len(x))
    boot = []
    for _ in range(bootstrap):
        idx = resample(index, replace=True, n_samples=len(x), random_state=state)
        xs, ys = x[idx], y[idx]
        xc = xs - xs.mean()
        denom = (xc * xc).sum()
        if denom > 0:
            boot.append((xc * (ys - ys.mean())).sum() / denom)
    if boot:
        ci = (min(float(np.percentile(boot, 2.5)), slope), max(float(np.percentile(boot, 97.5)), slope))
    else:
        ci = (slope, slope)
    return SlopeFit(slope, ci, float(fit.params[0]), int(mask.sum()))
