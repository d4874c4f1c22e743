# -*- coding: utf-8 -*-
"""
The tower over the return map to W_1, its quotient along stable leaves and
an Ulam discretization of the quotient tower map.

A tower point is a base point of W_1 together with a level below its
return time. The discretized quotient tower has states
(level, phase, bin): `phase` is the stage of the return construction the
orbit is in (see walkers), `bin` an interval of an unstable fiber. Levels
at or above `max_level` are pooled into one censored level.
"""

import logging
import warnings

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy import sparse
from scipy.sparse.linalg import factorized

import return_times
from errors import (ConfigError, ConvergenceWarning, DomainError, InsufficientSamples, InvalidLevel, MassLeak,
                    NoConvergence)
from hyperbolic_model import INTERMITTENT, Point2, distance, step, unstable_log_derivative
from intermittent import phi_array, phi_inverse_array
from walkers import DRAIN

logger = logging.getLogger(__name__)


class TowerPoint(object):

    def __init__(self, base, level, m, record=None, cap=10 ** 6):
        if base.cell != 1:
            raise DomainError("tower bases lie in W_1, got cell %d" % base.cell)
        self.base = base
        self.level = int(level)
        self.record = record if record is not None else return_times.return_time(base, m, cap)
        if not 0 <= self.level < self.record.R:
            raise InvalidLevel("level %d outside [0, %d)" % (self.level, self.record.R))

    @property
    def height(self):
        return self.record.R

    def __repr__(self):
        return "TowerPoint(%r, level=%d/%d)" % (self.base, self.level, self.height)


def tower_step(t, m, cap=10 ** 6):
    if t.level + 1 < t.height:
        return TowerPoint(t.base, t.level + 1, m, record=t.record)
    return TowerPoint(t.record.landing, 0, m, cap=cap)


def project(t, m):
    """ (x, l) -> f^l(x). """
    y = t.base
    for _ in range(t.level):
        y = step(y, m)
    return y


def partition_cylinder(t, n, m, cap=10 ** 6):
    """ Labels (level, return cylinder of the base) of t, Ft, ..., F^n t. """
    labels = []
    for k in range(n + 1):
        labels.append((t.level, t.record.itinerary))
        if k < n:
            t = tower_step(t, m, cap)
    return tuple(labels)


class DiameterReport(object):

    def __init__(self, k, values, skipped):
        self.k = k
        self.values = np.asarray(values, dtype=float)
        self.skipped = skipped

    @property
    def envelope(self):
        return float(self.values.max()) if len(self.values) else 0.0


def diameter_check(k, pairs, m, alpha=None):
    """ k^alpha d(pi F^k x, pi F^k y) over pairs sharing a cylinder of depth 2k. """
    if alpha is None:
        alpha = m.intermittent.tau + 1.0
    values, skipped = [], 0
    for x, y in pairs:
        if partition_cylinder(x, 2 * k, m) != partition_cylinder(y, 2 * k, m):
            skipped += 1
            continue
        for _ in range(k):
            x, y = tower_step(x, m), tower_step(y, m)
        values.append(distance(project(x, m), project(y, m), m) * k ** alpha)
    return DiameterReport(k, values, skipped)


def sample_base_pairs(m, n_pairs, rng, kind='stable', delta=1e-6):
    """ Pairs of tower points at level 0 on a common stable leaf
    (kind='stable') or unstable leaf at distance delta (kind='unstable').
    """
    w1 = m.cells[1]
    pairs = []
    for _ in range(n_pairs):
        a = rng.uniform(w1.u_lo + delta, w1.u_hi - delta)
        b = rng.uniform(w1.s_lo, w1.s_hi)
        x = Point2(1, a, b)
        if kind == 'stable':
            y = Point2(1, a, rng.uniform(w1.s_lo, w1.s_hi))
        else:
            y = Point2(1, a + delta, b)
        pairs.append((TowerPoint(x, 0, m), TowerPoint(y, 0, m)))
    return pairs


def reference_measure_partials(x, N, m, log_jacobian=None):
    """ Partial sums S_0..S_N of log det Df^u(f^n x) - log det Df^u(f^n x_hat),
    x_hat the point of the reference leaf on the stable leaf of x.

    log_jacobian(n, p, q) replaces the term for synthetic weights.
    """
    if x.cell != 1:
        raise DomainError("reference weights are defined on W_1")
    p, q = x, Point2(1, x.a, m.reference_b)
    partial = np.zeros(N + 1)
    for n in range(N):
        if log_jacobian is None:
            term = unstable_log_derivative(p.cell, p.a, m) - unstable_log_derivative(q.cell, q.a, m)
        else:
            term = log_jacobian(n, p, q)
        partial[n + 1] = partial[n] + term
        if n < N - 1:
            p, q = step(p, m), step(q, m)
    return partial


def reference_measure_weight(x, N, m, log_jacobian=None, tol=1e-8):
    partial = reference_measure_partials(x, N, m, log_jacobian)
    cauchy = abs(partial[N] - partial[N // 2])
    if cauchy > tol:
        warnings.warn("reference weight not settled: |S_N - S_N/2| = %.3g" % cauchy, ConvergenceWarning)
    return float(np.exp(partial[N]))


class TransferMatrix(object):
    """ Row-stochastic Ulam matrix of the quotient tower map.

    rows/cols/probs are the COO triplets of P; log_jacobian and roof are
    aligned with them.
    """

    def __init__(self, P, rows, cols, probs, log_jacobian, roof, states, bins, max_level):
        self.P = P
        self.rows = rows
        self.cols = cols
        self.probs = probs
        self.log_jacobian = log_jacobian
        self.roof = roof
        self.states = states
        self.bins = bins
        self.max_level = max_level

    @property
    def n_states(self):
        return self.P.shape[0]

    def row_sums(self):
        return np.asarray(self.P.sum(axis=1)).ravel()

    def base_states(self):
        return np.flatnonzero(self.states['level'].values == 0)

    def censored_mass(self, rho):
        return float(rho[self.states['level'].values == self.max_level].sum())

    def __repr__(self):
        return "TransferMatrix(states=%d, nnz=%d, max_level=%d)" % (self.n_states, self.P.nnz, self.max_level)


def _merge_edges(edges, anchors, tol=1e-12):
    e = np.sort(np.asarray(edges, dtype=float))
    e = e[np.concatenate([[True], np.diff(e) > tol])]
    for anchor in anchors:
        e[np.argmin(np.abs(e - anchor))] = anchor
    return e


def fiber_edges(m, cell, bins, strip_levels):
    """ Bin edges of the unstable fiber of a cell; branch edges are always edges.
    In W_0 the central strip is cut along the boundary sequences.
    """
    c = m.cells[cell]
    anchors = m.unstable_edges[cell]
    if cell == 0 and not m.affine_only:
        outer = max(8, bins // 8)
        K = min(strip_levels, len(m.right_sequence) - 1, len(m.left_sequence) - 1)
        central = np.concatenate([m.left_sequence.values[1:K + 1], [0.0],
                                  m.right_sequence.values[K:0:-1]])
        edges = np.concatenate([np.linspace(c.u_lo, m.strip[0], outer + 1), central,
                                np.linspace(m.strip[1], c.u_hi, outer + 1), anchors])
    else:
        edges = np.concatenate([np.linspace(c.u_lo, c.u_hi, bins + 1), anchors])
    return _merge_edges(edges, anchors)


def _bin_table(m, bins, strip_levels):
    edges, rows = [], []
    for cell in range(len(m.cells)):
        e = fiber_edges(m, cell, bins, strip_levels)
        edges.append(e)
        lo, hi = e[:-1], e[1:]
        branch = np.array([m.branch_at(cell, 0.5 * (u + v)).index for u, v in zip(lo, hi)], dtype=np.int64)
        rows.append(pd.DataFrame({'cell': cell, 'lo': lo, 'hi': hi, 'branch': branch}))
    table = pd.concat(rows, ignore_index=True)
    central = -1 if m.central_branch is None else m.central_branch
    table['in_strip'] = table['branch'].values == central
    offsets = np.concatenate([[0], np.cumsum([len(e) - 1 for e in edges])])
    return table, edges, offsets


def _kernel(m, table, edges, offsets):
    """ Ulam kernel of the unstable factor on the bins: exact interval overlaps. """
    theta = m.intermittent.theta
    tol = m.intermittent.newton_tol
    rows, cols, probs, logj = [], [], [], []
    for g, (cell, u, v, b) in enumerate(zip(table['cell'].values, table['lo'].values,
                                            table['hi'].values, table['branch'].values)):
        br = m.branches[b]
        tgt = m.cells[br.target]
        E = edges[br.target]
        if br.kind == INTERMITTENT:
            iu, iv = phi_array([u, v], theta)
        else:
            s = m.br_slope[b]
            iu, iv = tgt.u_lo + (u - br.u_lo) * s, tgt.u_lo + (v - br.u_lo) * s
        iu, iv = max(iu, tgt.u_lo), min(iv, tgt.u_hi)
        k0 = max(int(np.searchsorted(E, iu, side='right')) - 1, 0)
        k1 = min(int(np.searchsorted(E, iv, side='left')), len(E) - 1)
        ks = np.arange(k0, k1)
        lo, hi = np.maximum(E[ks], iu), np.minimum(E[ks + 1], iv)
        if br.kind == INTERMITTENT:
            pre = phi_inverse_array(hi, theta, tol) - phi_inverse_array(lo, theta, tol)
            p = pre / (v - u)
            with np.errstate(divide='ignore', invalid='ignore'):
                lj = np.log((hi - lo) / pre)
        else:
            p = (hi - lo) / (iv - iu)
            lj = np.full(len(ks), m.br_log_slope[b])
        mass = p.sum()
        if abs(mass - 1.0) > 1e-8:
            raise MassLeak("bin %d of cell %d keeps mass %.12g" % (g, cell, mass), row=g, mass=mass)
        keep = p > 1e-12
        p = p[keep] / p[keep].sum()
        rows.append(np.full(len(p), g))
        cols.append(offsets[br.target] + ks[keep])
        probs.append(p)
        logj.append(lj[keep])
    return np.concatenate(rows), np.concatenate(cols), np.concatenate(probs), np.concatenate(logj)


def ulam_discretize(m, bins=128, max_level=200, strip_levels=None):
    """ Builds the TransferMatrix of the quotient tower map.

    Parameters:
        bins: uniform bins per unstable fiber (at least 64).
        max_level: first pooled level.
        strip_levels: boundary-sequence bins on each side of the fixed
            point (defaults to bins).
    """
    if bins < 64:
        raise ConfigError("ulam_discretize needs at least 64 bins per fiber, got %d" % bins)
    if max_level < 1:
        raise ConfigError("max_level must be positive")
    strip_levels = bins if strip_levels is None else strip_levels
    table, edges, offsets = _bin_table(m, bins, strip_levels)
    k_src, k_dst, k_prob, k_logj = _kernel(m, table, edges, offsets)

    nb = len(table)
    n0 = m.n0
    strip = table['in_strip'].values
    on_base = table['cell'].values == 1

    # lift the kernel to (phase, bin) pairs
    src, dst, prob, logj, roof = [], [], [], [], []
    for phase in range(n0 + 1):
        sel = strip[k_src] if phase == DRAIN else np.ones(len(k_src), dtype=bool)
        target_bins = k_dst[sel]
        into_strip = strip[target_bins]
        if phase == DRAIN:
            nxt = np.where(into_strip, DRAIN, n0)
            hit = np.zeros(len(target_bins), dtype=bool)
        elif phase > 1:
            nxt = np.full(len(target_bins), phase - 1)
            hit = np.zeros(len(target_bins), dtype=bool)
        else:
            hit = on_base[target_bins]
            nxt = np.where(hit, n0, np.where(into_strip, DRAIN, n0))
        src.append(phase * nb + k_src[sel])
        dst.append(nxt * nb + target_bins)
        prob.append(k_prob[sel])
        logj.append(k_logj[sel])
        roof.append(hit)
    src, dst = np.concatenate(src), np.concatenate(dst)
    prob, logj, roof = np.concatenate(prob), np.concatenate(logj), np.concatenate(roof)

    n_combo = (n0 + 1) * nb
    climb = ~roof
    active = [np.zeros(n_combo, dtype=bool)]
    active[0][n0 * nb + np.flatnonzero(on_base)] = True
    for level in range(1, max_level + 1):
        reach = np.zeros(n_combo, dtype=bool)
        reach[dst[climb & active[-1][src]]] = True
        active.append(reach)
    pooled = active[-1]
    while True:
        grown = pooled.copy()
        grown[dst[climb & pooled[src]]] = True
        if np.array_equal(grown, pooled):
            break
        pooled = grown
    active[-1] = pooled

    ids, start, frames = [], 0, []
    for level, mask in enumerate(active):
        combos = np.flatnonzero(mask)
        lookup = np.full(n_combo, -1, dtype=np.int64)
        lookup[combos] = start + np.arange(len(combos))
        ids.append(lookup)
        frames.append(pd.DataFrame({'level': level, 'phase': combos // nb, 'bin': combos % nb}))
        start += len(combos)
    states = pd.concat(frames, ignore_index=True)

    rows, cols, probs, jac, roofs = [], [], [], [], []
    for level, mask in enumerate(active):
        sel = mask[src]
        up = min(level + 1, max_level)
        r = ids[level][src[sel]]
        c = np.where(roof[sel], ids[0][dst[sel]], ids[up][dst[sel]])
        rows.append(r)
        cols.append(c)
        probs.append(prob[sel])
        jac.append(logj[sel])
        roofs.append(roof[sel])
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    probs, jac, roofs = np.concatenate(probs), np.concatenate(jac), np.concatenate(roofs)
    if np.any(cols < 0):
        raise MassLeak("transition into an unenumerated state", row=int(rows[cols < 0][0]))
    P = sparse.csr_matrix((probs, (rows, cols)), shape=(start, start))
    logger.info("Ulam tower: %d bins, %d states, %d transitions", nb, start, len(probs))
    return TransferMatrix(P, rows, cols, probs, jac, roofs, states, table, max_level)


class InvariantDensity(object):

    def __init__(self, rho, residual, floor, history, method):
        self.rho = rho
        self.residual = residual
        self.floor = floor
        self.history = history
        self.method = method

    def __repr__(self):
        return "InvariantDensity(residual=%.3g, floor=%.3g, method=%s)" % (self.residual, self.floor, self.method)


def _backward_iteration(P, eps=1e-15, maxiter=100, tol=1e-14):
    """ Inverse iteration on P^T - (1 - eps) I for the left Perron vector. """
    n = P.shape[0]
    solve = factorized((P.T - (1.0 - eps) * sparse.eye(n)).tocsc())
    y = np.ones(n) / np.sqrt(n)
    for _ in range(maxiter):
        x = solve(y)
        r = 1.0 / np.linalg.norm(x)
        y = x * r
        if r <= tol:
            break
    y = np.abs(y)
    return y / y.sum()


def invariant_density(T, tol=1e-10, maxiter=5000, fallback=True):
    """ Stationary vector of T.P by power iteration from the uniform vector,
    then by sparse inverse iteration if the power iteration stalls.
    """
    PT = T.P.T.tocsr()
    n = T.n_states
    rho = np.ones(n) / n
    history = []
    residual = np.inf
    for _ in range(maxiter):
        nxt = PT.dot(rho)
        nxt /= nxt.sum()
        residual = float(np.abs(nxt - rho).sum())
        history.append(residual)
        rho = nxt
        if residual <= tol:
            break
    method = 'power'
    if residual > tol and fallback:
        logger.info("power iteration stopped at residual %.3g, switching to inverse iteration", residual)
        rho = _backward_iteration(T.P)
        residual = float(np.abs(PT.dot(rho) - rho).sum())
        history.append(residual)
        method = 'inverse'
    if residual > tol:
        raise NoConvergence("stationary vector residual %.3g > %.3g" % (residual, tol), history=history)
    support = T.states['level'].values < T.max_level
    floor = float(rho[support].min()) if support.any() else float(rho.min())
    return InvariantDensity(rho, residual, floor, history, method)


def second_eigenvalue(T, rho, tol=1e-6, maxiter=5000):
    """ Modulus of the leading eigenvalue of P^T restricted to zero-sum vectors. """
    PT = T.P.T.tocsr()
    n = T.n_states
    x = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    x -= x.sum() * rho
    x /= np.linalg.norm(x)
    estimate = 0.0
    for _ in range(maxiter):
        y = PT.dot(x)
        y -= y.sum() * rho
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 0.0
        previous, estimate = estimate, norm
        x = y / norm
        if abs(estimate - previous) < tol:
            break
    return float(estimate)


def project_density(T, rho):
    """ Mass and density per fiber bin after summing over levels and phases. """
    bins = T.bins
    mass = np.bincount(T.states['bin'].values, weights=rho, minlength=len(bins))
    out = bins[['cell', 'lo', 'hi']].copy()
    out['mass'] = mass
    out['density'] = mass / (bins['hi'].values - bins['lo'].values)
    return out


def matrix_table(T):
    """ Nonzero transitions as (row, col, prob), duplicates not merged. """
    return pd.DataFrame({'row': T.rows, 'col': T.cols, 'prob': T.probs})


def density_table(T, density):
    out = T.states.copy()
    out['mass'] = density.rho
    return out


def jacobian_regularity(m, n_pairs, rng, deltas=(1e-3, 1e-4, 1e-5, 1e-6), cap=10 ** 5, separation_cap=24):
    """ Fits |J(x)/J(y) - 1| <= C_F beta^s over pairs of one return cylinder,
    J the derivative of the return map and s the separation time of the images.

    Returns (C_F, beta); affine-only models give C_F = 0.
    Raises InsufficientSamples when the pairs show fewer than two distinct separation times.
    """
    w1 = m.cells[1]
    b = m.reference_b
    s_values, ratios = [], []
    compared = 0
    for k in range(n_pairs):
        delta = deltas[k % len(deltas)]
        a = rng.uniform(w1.u_lo, w1.u_hi - delta)
        x, y = Point2(1, a, b), Point2(1, a + delta, b)
        rx, ry = return_times.return_time(x, m, cap), return_times.return_time(y, m, cap)
        if rx.itinerary != ry.itinerary:
            continue
        compared += 1
        ratio = abs(np.expm1(rx.log_derivative - ry.log_derivative))
        if ratio <= 0.0:
            continue
        s, _ = return_times.separation_time(rx.landing, ry.landing, m, separation_cap, cap)
        s_values.append(s)
        ratios.append(ratio)
    if compared and not ratios:
        return 0.0, 0.5
    if len(set(s_values)) < 2:
        raise InsufficientSamples("%d usable pairs with %d distinct separation times, need two"
                                  % (len(ratios), len(set(s_values))))
    s = np.asarray(s_values, dtype=float)
    logr = np.log(ratios)
    fit = sm.OLS(logr, sm.add_constant(s)).fit()
    beta = float(min(max(np.exp(fit.params[1]), 1e-3), 0.999))
    C_F = float(np.max(np.asarray(ratios) / beta ** s))
    return C_F, beta


class ModulusEstimate(object):

    def __init__(self, value, argmax, family):
        self.value = value
        self.argmax = argmax
        self.family = family


def modulus_estimate(values_x, values_y, separations, family='polynomial', exponent=1.0):
    """ Least constant C with |v(x) - v(y)| <= C beta^s (family='geometric',
    exponent=beta) or <= C / max(s, 1)^exponent (family='polynomial').
    """
    diff = np.abs(np.asarray(values_x, dtype=float) - np.asarray(values_y, dtype=float))
    s = np.asarray(separations, dtype=float)
    if len(diff) == 0:
        return ModulusEstimate(0.0, None, family)
    if family == 'geometric':
        weighted = diff / exponent ** s
    elif family == 'polynomial':
        weighted = diff * np.maximum(s, 1.0) ** exponent
    else:
        raise ValueError("family must be 'geometric' or 'polynomial'")
    k = int(np.argmax(weighted))
    return ModulusEstimate(float(weighted[k]), k, family)
