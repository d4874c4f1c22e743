# -*- coding: utf-8 -*-
"""
Coupling of two densities on the base of the tower.

Two orbits are watched alternately: tau_1 is the first return of x after
n0 steps, tau_2 the first return of x' at least n0 steps after tau_1, and
so on; T is the first tau_i (i >= 2) at which the other coordinate is on
the base too. At the i-th simultaneous return a fraction eps_i of the
minimal normalized density of each matched block is removed from the
product density; the removed masses have equal marginals, and the
uncoupled remainder bounds the total variation distance.
"""

import logging
import math

import numpy as np
import pandas as pd

from errors import CapExceeded, ConfigError, DomainError, InsufficientSamples, NegativeDensity
from tower import tower_step
from utils import logGrid, runShards
from walkers import QuotientWalkers

logger = logging.getLogger(__name__)


class CouplingConfig(object):

    def __init__(self, K, rho, beta, theta, zeta, i0=None, C_F=0.0):
        if not 0.0 < beta < 1.0:
            raise ConfigError("beta must lie in (0, 1), got %r" % beta)
        if zeta <= 1.0:
            raise ConfigError("zeta must exceed 1, got %r" % zeta)
        if K <= 0.0 or rho <= 0.0:
            raise ConfigError("K and rho must be positive")
        self.C_F = float(C_F)
        self.C_hat = 2.0 * self.C_F
        if K <= self.C_hat + self.C_hat / (1.0 - beta):
            raise ConfigError("K=%g must exceed C + C/(1 - beta) = %g with C = 2 C_F"
                              % (K, self.C_hat + self.C_hat / (1.0 - beta)))
        self.K = float(K)
        self.rho = float(rho)
        self.beta = float(beta)
        self.theta = float(theta)
        self.zeta = float(zeta)
        self.i0 = int(i0) if i0 else first_index_below_one(self)
        if epsilon_schedule(self, self.i0) >= 1.0:
            raise ConfigError("eps_i0 = %g must be below 1" % epsilon_schedule(self, self.i0))

    @classmethod
    def from_regularity(cls, C_F, beta, zeta, rho=None, theta=None, margin=1.05, i0=None, K_floor=0.05):
        """ K = margin (C + C/(1 - beta)), C = 2 C_F; rho and theta default to
        values satisfying zeta + 1 < rho < theta / e^K and theta > 2 e^K.
        """
        C_hat = 2.0 * C_F
        K = max(margin * (C_hat + C_hat / (1.0 - beta)), K_floor)
        if rho is None:
            rho = zeta + 1.5
        if theta is None:
            theta = 1.05 * max(2.0, rho) * math.exp(K)
        return cls(K, rho, beta, theta, zeta, i0=i0, C_F=C_F)

    def constraint_report(self):
        eK = math.exp(self.K)
        return {
            'c1': self.K > self.C_hat + self.C_hat / (1.0 - self.beta),
            'gamma': self.zeta + 1.0 < self.rho < self.theta / eK,
            'theta_gt_2eK': self.theta > 2.0 * eK,
            'eps_i0_lt_1': epsilon_schedule(self, self.i0) < 1.0,
        }

    def __repr__(self):
        return "CouplingConfig(K=%.4g, rho=%g, beta=%g, theta=%g, zeta=%g, i0=%d)" % (
            self.K, self.rho, self.beta, self.theta, self.zeta, self.i0)


def epsilon_schedule(cfg, i):
    """ eps_i = e^K (1 - ((i - 1) / i)^rho). """
    if i < 1:
        raise DomainError("the schedule starts at i = 1")
    if i == 1:
        return math.exp(cfg.K)
    return math.exp(cfg.K) * -math.expm1(cfg.rho * math.log1p(-1.0 / i))


def first_index_below_one(cfg, limit=10 ** 7):
    i = 1
    while epsilon_schedule(cfg, i) >= 1.0:
        i += 1
        if i > limit:
            raise ConfigError("eps_i stays above 1 up to i=%d" % limit)
    return i


class StoppingTimes(object):

    def __init__(self, taus, T):
        self.taus = taus
        self.T = T


def stopping_times(x, x_prime, m, cap=10 ** 5):
    """ The alternating tau sequence of two tower points and their first
    simultaneous return T.
    """
    t = 0
    taus = []
    pair = [x, x_prime]
    designated = 0
    while True:
        earliest = t + m.n0
        while t < earliest or pair[designated].level != 0:
            pair = [tower_step(pair[0], m), tower_step(pair[1], m)]
            t += 1
            if t > cap:
                raise CapExceeded("no simultaneous return within %d steps" % cap, cap=cap, partial=taus)
        taus.append(t)
        if len(taus) >= 2 and pair[1 - designated].level == 0:
            return StoppingTimes(taus, t)
        designated = 1 - designated


class PairRun(object):
    """ Successive simultaneous returns T_1 < T_2 < ... of many pairs.

    T[k, i] is T_{i+1} of pair k (-1 if not reached before the cap);
    log_jacobian, key_x, key_y and the landing coordinates of both copies
    are read off at those times.
    """

    def __init__(self, T, log_jacobian, key_x, key_y, taus, landing_x=None, landing_y=None):
        self.T = T
        self.log_jacobian = log_jacobian
        self.key_x = key_x
        self.key_y = key_y
        self.taus = taus
        self.landing_x = np.zeros(T.shape) if landing_x is None else landing_x
        self.landing_y = np.zeros(T.shape) if landing_y is None else landing_y

    @property
    def first(self):
        return self.T[:, 0]

    @property
    def censored(self):
        return int(np.sum(self.T[:, 0] < 0))

    @classmethod
    def concatenate(cls, runs):
        return cls(*[np.concatenate([getattr(r, name) for r in runs])
                     for name in ('T', 'log_jacobian', 'key_x', 'key_y', 'taus', 'landing_x', 'landing_y')])


def run_pairs(m, xa, ya, cap, k_max):
    """ Lock-step simulation of pairs of base points of W_1 given by their
    unstable coordinates.
    """
    n = len(xa)
    n0 = m.n0
    X = QuotientWalkers(m, np.ones(n, dtype=np.int64), xa)
    Y = QuotientWalkers(m, np.ones(n, dtype=np.int64), ya)
    T = np.full((n, k_max), -1, dtype=np.int64)
    logj = np.zeros((n, k_max))
    key_x = np.zeros((n, k_max), dtype=np.int64)
    key_y = np.zeros((n, k_max), dtype=np.int64)
    landing_x = np.zeros((n, k_max))
    landing_y = np.zeros((n, k_max))
    taus = np.zeros(n, dtype=np.int64)
    earliest = np.full(n, n0, dtype=np.int64)
    designated = np.zeros(n, dtype=np.int64)
    stage = np.zeros(n, dtype=np.int64)
    found = np.zeros(n, dtype=np.int64)
    while len(X) and X.time < cap:
        _, rx = X.advance()
        _, ry = Y.advance()
        t = X.time
        i = X.index
        on_x = designated[i] == 0
        hit = np.where(on_x, rx, ry) & (t >= earliest[i])
        if not hit.any():
            continue
        other = np.where(on_x, ry, rx)
        stage[i[hit]] += 1
        taus[i[hit & (found[i] == 0)]] += 1
        sim = hit & (stage[i] >= 2) & other
        if sim.any():
            j = i[sim]
            k = found[j]
            T[j, k] = t
            logj[j, k] = X.log_jacobian[sim] + Y.log_jacobian[sim]
            key_x[j, k] = X.return_key[sim]
            key_y[j, k] = Y.return_key[sim]
            landing_x[j, k] = X.a[sim]
            landing_y[j, k] = Y.a[sim]
            found[j] += 1
            stage[j] = 0
            designated[j] = 0
        flip = hit & ~sim
        designated[i[flip]] = 1 - designated[i[flip]]
        earliest[i[hit]] = t + n0
        done = found[i] >= k_max
        if done.any():
            X.keep(~done)
            Y.keep(~done)
    return PairRun(T, logj, key_x, key_y, taus, landing_x, landing_y)


def make_density(name, m):
    """ Positive densities on the unstable fiber of W_1, up to normalization. """
    w1 = m.cells[1]
    L = w1.width
    if name == 'uniform':
        return lambda a: np.ones_like(np.asarray(a, dtype=float))
    if name == 'tilted':
        return lambda a: 1.0 + 0.5 * np.cos(2.0 * np.pi * (np.asarray(a, dtype=float) - w1.u_lo) / L)
    if name == 'ramp':
        return lambda a: 1.0 + (np.asarray(a, dtype=float) - w1.u_lo) / L
    raise ConfigError("unknown density %r" % name)


def sample_density(density, size, rng, m, resolution=4096):
    """ Draws from a density on the unstable fiber of W_1 by inverse CDF on a fine grid. """
    w1 = m.cells[1]
    edges = np.linspace(w1.u_lo, w1.u_hi, resolution + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    weights = np.asarray(density(mid), dtype=float)
    weights = weights / weights.sum()
    k = rng.choice(resolution, size=size, p=weights)
    return edges[k] + rng.uniform(size=size) * (edges[1] - edges[0])


def _pair_shard(size, seed_seq, m, density_x, density_y, cap, k_max):
    rng = np.random.default_rng(seed_seq)
    xa = sample_density(density_x, size, rng, m)
    ya = sample_density(density_y, size, rng, m)
    return run_pairs(m, xa, ya, cap, k_max)


def sample_stopping_times(m, density_x, density_y, pairs, seed=0, cap=10 ** 5, k_max=10,
                          shards=8, workers=1):
    """ Monte Carlo T_1..T_kmax for pairs drawn from the product of two densities. """
    if pairs < 1:
        raise InsufficientSamples("need a positive number of pairs")
    runs = runShards(_pair_shard, pairs, seed, shards, workers, m, density_x, density_y, cap, k_max)
    run = PairRun.concatenate(runs)
    if run.censored:
        logger.info("%d of %d pairs had no simultaneous return within %d steps", run.censored, pairs, cap)
    return run


class CouplingGrid(object):
    """ G x G midpoint grid on the product of the unstable fibers of W_1 with
    the initial product density and the simultaneous-return data per point.
    """

    def __init__(self, m, density_x, density_y, G=64, k_max=40, cap=10 ** 5):
        w1 = m.cells[1]
        self.G = G
        self.h = w1.width / G
        self.base_length = w1.width
        self.lo = w1.u_lo
        mid = w1.u_lo + (np.arange(G) + 0.5) * self.h
        fx = np.asarray(density_x(mid), dtype=float)
        fy = np.asarray(density_y(mid), dtype=float)
        fx = fx / (fx.sum() * self.h)
        fy = fy / (fy.sum() * self.h)
        self.x = np.repeat(mid, G)
        self.y = np.tile(mid, G)
        self.phi = np.outer(fx, fy).ravel()
        self.run = run_pairs(m, self.x, self.y, cap, k_max)
        self.k_max = k_max

    @property
    def cell_area(self):
        return self.h * self.h

    @property
    def fiber(self):
        return self.lo, self.lo + self.base_length

    def iteration_data(self, i):
        """ (active mask, log Jacobian of the i-th simultaneous return, block
        labels, landing coordinates of both copies) on the active points.
        """
        col = i - 1
        active = self.run.T[:, col] > 0
        log_jacobian = self.run.log_jacobian[active, col]
        keys = np.stack([self.run.key_x[active, col], self.run.key_y[active, col]], axis=1)
        labels = np.unique(keys, axis=0, return_inverse=True)[1].ravel() if len(keys) else np.zeros(0, dtype=np.int64)
        landing = (self.run.landing_x[active, col], self.run.landing_y[active, col])
        return active, log_jacobian, labels, landing


class CouplingState(object):

    def __init__(self, phi_hat, iteration=0, history=None, T_samples=None, i0=None):
        self.phi_hat = phi_hat
        self.iteration = iteration
        self.history = history if history is not None else []
        self.T_samples = T_samples
        self.i0 = i0
        self.ratios = []

    def table(self):
        return pd.DataFrame(self.history)


def _block_min(values, labels, n_cells):
    lows = np.full(n_cells, np.inf)
    np.minimum.at(lows, labels, values)
    return lows


def _block_max(values, labels, n_cells):
    highs = np.full(n_cells, -np.inf)
    np.maximum.at(highs, labels, values)
    return highs


def _log_normalized(phi_hat, log_jacobian):
    """ log(Phi / J); -inf where the density vanishes. """
    with np.errstate(divide='ignore'):
        return np.log(phi_hat) - log_jacobian


def marginal_residual(removed, log_jacobian, labels, landing, fiber, bins=16, area=1.0):
    """ Largest gap, in mass per bin, between the two marginals of the
    removed mass pushed forward to the base.

    Every block is carried onto the whole product of fibers; the pushed
    density of a point is removed / J, and a block's marginal on a bin is
    the mean of that density over the points whose landing coordinate falls
    into the bin (the block mean where none does), scaled to the block mass.
    """
    removed = np.asarray(removed, dtype=float)
    n_cells = int(labels.max()) + 1 if len(labels) else 0
    if n_cells == 0:
        return 0.0
    lo, hi = fiber
    width = (hi - lo) / bins
    log_q = _log_normalized(removed, log_jacobian)
    top = _block_max(log_q, labels, n_cells)
    alive = np.isfinite(top)
    with np.errstate(invalid='ignore'):
        q = np.where(np.isfinite(log_q), np.exp(log_q - top[labels]), 0.0)
    mass = np.bincount(labels, weights=removed * area, minlength=n_cells)
    count = np.bincount(labels, minlength=n_cells)
    mean = np.bincount(labels, weights=q, minlength=n_cells) / np.maximum(count, 1)

    def marginal(coords):
        b = np.clip(((np.asarray(coords) - lo) / width).astype(np.int64), 0, bins - 1)
        flat = labels * bins + b
        sums = np.bincount(flat, weights=q, minlength=n_cells * bins).reshape(n_cells, bins)
        hits = np.bincount(flat, minlength=n_cells * bins).reshape(n_cells, bins)
        local = np.where(hits > 0, sums / np.maximum(hits, 1), mean[:, None])
        with np.errstate(invalid='ignore', divide='ignore'):
            share = np.where(alive[:, None] & (mean[:, None] > 0), local / mean[:, None], 0.0)
        return (share * (mass / bins)[:, None]).sum(axis=0)

    return float(np.max(np.abs(marginal(landing[0]) - marginal(landing[1]))))


def density_step(state, cfg, i, log_jacobian, labels, active, area=1.0, landing=None, fiber=(0.0, 1.0), bins=16):
    """ Phi_i = (Phi_{i-1} / J - eps_i min over the block of Phi_{i-1} / J) J on
    active points, evaluated as Phi_{i-1} (1 - eps_i e^(min log g - log g)).
    """
    old = state.phi_hat
    eps = epsilon_schedule(cfg, i)
    n_cells = int(labels.max()) + 1 if len(labels) else 0
    log_g = _log_normalized(old[active], log_jacobian)
    lows = _block_min(log_g, labels, n_cells)
    with np.errstate(invalid='ignore'):
        share = np.where(np.isfinite(log_g), np.exp(lows[labels] - log_g), 0.0)
    keep = 1.0 - eps * share
    worst = int(np.argmin(keep)) if len(keep) else 0
    if len(keep) and keep[worst] < -1e-12:
        raise NegativeDensity("eps_%d overshoots in block %d" % (i, labels[worst]),
                              cell=int(labels[worst]), value=float(keep[worst] * old[active][worst]))
    new = old.copy()
    new[active] = old[active] * np.maximum(keep, 0.0)

    factor = ((i - 1.0) / i) ** cfg.rho
    decrease_ok = bool(np.all(new[active] <= factor * old[active] * (1.0 + 1e-12)))
    removed = old[active] - new[active]
    if landing is None:
        residual = float('nan')
    else:
        residual = marginal_residual(removed, log_jacobian, labels, landing, fiber, bins, area)
    entry = {'i': i, 'eps': eps, 'cells': n_cells, 'active': int(active.sum()),
             'removed_mass': float((old - new).sum() * area), 'remaining_mass': float(new.sum() * area),
             'decrease_ok': decrease_ok, 'marginal_residual': residual}
    return CouplingState(new, i, state.history + [entry], state.T_samples)


class RatioReport(object):

    def __init__(self, max_ratio, violations, cells, worst):
        self.max_ratio = max_ratio
        self.violations = violations
        self.cells = cells
        self.worst = worst


def ratio_bound_check(state, cfg, log_jacobian, labels, active, slack=1e-6):
    """ Largest max/min of Phi_{i-1} / J over the blocks; violations exceed e^K (1 + slack). """
    log_g = _log_normalized(state.phi_hat[active], log_jacobian)
    n_cells = int(labels.max()) + 1 if len(labels) else 0
    if n_cells == 0:
        return RatioReport(1.0, 0, 0, None)
    highs = _block_max(log_g, labels, n_cells)
    lows = _block_min(log_g, labels, n_cells)
    with np.errstate(invalid='ignore'):
        spread = np.where(np.isneginf(highs), 0.0, highs - lows)
    worst = int(np.argmax(spread))
    violations = int(np.sum(spread > cfg.K + math.log1p(slack)))
    with np.errstate(over='ignore'):
        max_ratio = float(np.exp(spread[worst]))
    return RatioReport(max_ratio, violations, n_cells, worst)


def run_recursion(grid, cfg, i_max=None, auto_i0=True, bins=16):
    """ Phi_i for i = 1..i_max; below i0 nothing is removed. With auto_i0 the
    start moves past every i whose ratio check fails.
    """
    i_max = grid.k_max if i_max is None else min(i_max, grid.k_max)
    state = CouplingState(grid.phi.copy(), 0, [], grid.run.first)
    i0 = cfg.i0
    ratios = []
    for i in range(1, i_max + 1):
        active, log_jacobian, labels, landing = grid.iteration_data(i)
        if i >= i0:
            report = ratio_bound_check(state, cfg, log_jacobian, labels, active)
            ratios.append((i, report.max_ratio, report.violations))
            if report.violations and auto_i0 and i == i0:
                i0 = i + 1
                logger.info("ratio check fails at i=%d (max ratio %.4g), starting the recursion later",
                            i, report.max_ratio)
        if i < i0:
            state = CouplingState(state.phi_hat, i, state.history + [
                {'i': i, 'eps': 0.0, 'cells': 0, 'active': int(active.sum()), 'removed_mass': 0.0,
                 'remaining_mass': float(state.phi_hat.sum() * grid.cell_area),
                 'decrease_ok': True, 'marginal_residual': 0.0}], state.T_samples)
            continue
        state = density_step(state, cfg, i, log_jacobian, labels, active, grid.cell_area, landing,
                             grid.fiber, bins)
    state.i0 = i0
    state.ratios = ratios
    return state


def coupling_weights(i0, rho, k_max):
    """ Fraction of the product density still uncoupled after the i-th simultaneous return. """
    i = np.arange(1, k_max + 1, dtype=float)
    return np.where(i < i0, 1.0, ((i0 - 1.0) / i) ** rho)


def tv_bound(run, cfg, n_values, i0=None):
    """ 2 P{T > n} + 2 sum_i c_i P{T_i <= n < T_{i+1}} from simultaneous-return samples;
    unreached T_i count as infinite.
    """
    if cfg.rho <= cfg.zeta + 1.0:
        raise ConfigError("rho=%g must exceed zeta + 1 = %g" % (cfg.rho, cfg.zeta + 1.0))
    i0 = cfg.i0 if i0 is None else i0
    T = np.where(run.T > 0, run.T, np.iinfo(np.int64).max).astype(float)
    k_max = T.shape[1]
    c = coupling_weights(i0, cfg.rho, k_max)
    bound = []
    for n in n_values:
        reached = T <= n
        p_out = np.mean(~reached[:, 0])
        count = reached.sum(axis=1)
        between = np.array([np.mean(count == i) for i in range(1, k_max + 1)])
        bound.append(2.0 * p_out + 2.0 * np.dot(c, between))
    return np.array(bound)


def direct_tv(Tm, m, density_x, density_y, n_values):
    """ || lambda P^n - lambda' P^n ||_1 on the Ulam tower, lambda and lambda' the
    two densities put on the level-0 states.
    """
    states = Tm.states
    bins = Tm.bins
    base = Tm.base_states()
    b = states['bin'].values[base]
    mid = 0.5 * (bins['lo'].values[b] + bins['hi'].values[b])
    width = bins['hi'].values[b] - bins['lo'].values[b]
    v = np.zeros(Tm.n_states)
    for density, sign in ((density_x, 1.0), (density_y, -1.0)):
        w = np.asarray(density(mid), dtype=float) * width
        v[base] += sign * w / w.sum()
    PT = Tm.P.T.tocsr()
    wanted = set(int(n) for n in n_values)
    out = {}
    for n in range(int(max(n_values)) + 1):
        if n in wanted:
            out[n] = float(np.abs(v).sum())
        v = PT.dot(v)
    return np.array([out[int(n)] for n in n_values])


def proposition_c_assemble(run, cfg, n_values, direct=None, tolerance=1e-6, i0=None):
    """ Bound series next to the directly computed total variation. """
    n_values = np.asarray(n_values, dtype=np.int64)
    bound = tv_bound(run, cfg, n_values, i0)
    T1 = np.where(run.T[:, 0] > 0, run.T[:, 0], np.iinfo(np.int64).max)
    p_T = np.array([np.mean(T1 > n) for n in n_values])
    out = pd.DataFrame({'n': n_values, 'prop_c_bound': bound, 'p_T_gt_n': p_T})
    out['direct_tv'] = direct if direct is not None else np.nan
    if direct is not None:
        out['holds'] = out['direct_tv'].values <= out['prop_c_bound'].values * (1.0 + tolerance)
    return out


def k1_constant(cfg, i0=None):
    i0 = cfg.i0 if i0 is None else i0
    return 2.0 * max(i0 - 1, 1) ** cfg.rho


def increment_domination_check(run, min_samples=10 ** 5, i_max=10, window=(1, 1000), floor_hits=100):
    """ k2_i = max_n P{T_{i+1} - T_i > n} / P{T > n} per i, over n where the
    denominator rests on at least floor_hits samples.
    """
    total = run.T.shape[0]
    if total < min_samples:
        raise InsufficientSamples("increment check needs %d pairs, got %d" % (min_samples, total))
    T1 = np.where(run.T[:, 0] > 0, run.T[:, 0], np.iinfo(np.int64).max)
    grid = logGrid(window[0], window[1])
    p_T = np.array([np.mean(T1 > n) for n in grid])
    usable = p_T * total >= floor_hits
    rows = []
    for i in range(1, min(i_max, run.T.shape[1])):
        both = (run.T[:, i - 1] > 0) & (run.T[:, i] > 0)
        if not both.any():
            rows.append({'i': i, 'samples': 0, 'k2': np.nan, 'note': 'skipped: no samples'})
            continue
        inc = np.sort(run.T[both, i] - run.T[both, i - 1])
        p_inc = (len(inc) - np.searchsorted(inc, grid, side='right')) / float(len(inc))
        ratio = p_inc[usable] / p_T[usable] if usable.any() else np.array([np.nan])
        rows.append({'i': i, 'samples': int(both.sum()), 'k2': float(np.nanmax(ratio)), 'note': ''})
    return pd.DataFrame(rows)
