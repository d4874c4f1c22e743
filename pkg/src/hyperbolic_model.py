# -*- coding: utf-8 -*-
"""
Piecewise "intermittent baker" realization of the example map.

W_0 carries the product form (phi(a), phi^{-1}(b)) on its central strip;
its outer parts and the cells W_1..W_d are affine hyperbolic branches
routed by an aperiodic 0/1 transition matrix. Every branch maps a
vertical strip of its source cell onto the full unstable extent of its
target, and the stable slots of each target tile its stable extent, so
the map is a bijection up to a null set of boundary ties.
"""

import logging

import numpy as np

import intermittent
from errors import ConfigError, DomainError, LeafMismatch, NotAperiodic
from intermittent import IntermittentParams

logger = logging.getLogger(__name__)

AFFINE = 'affine'
INTERMITTENT = 'intermittent'


class Cell(object):

    def __init__(self, index, u_lo, u_hi, s_lo, s_hi):
        self.index = index
        self.u_lo = float(u_lo)
        self.u_hi = float(u_hi)
        self.s_lo = float(s_lo)
        self.s_hi = float(s_hi)

    @property
    def width(self):
        return self.u_hi - self.u_lo

    @property
    def height(self):
        return self.s_hi - self.s_lo

    def contains(self, a, b):
        return self.u_lo <= a <= self.u_hi and self.s_lo <= b <= self.s_hi

    def edge_distance(self, a, b):
        return min(a - self.u_lo, self.u_hi - a, b - self.s_lo, self.s_hi - b)


class Branch(object):
    """ A vertical strip [u_lo, u_hi] x (stable fiber of source) sent onto
    (unstable fiber of target) x [s_lo, s_hi].
    """

    def __init__(self, index, source, target, u_lo, u_hi, kind=AFFINE, copy=None):
        self.index = index
        self.source = source
        self.target = target
        self.u_lo = float(u_lo)
        self.u_hi = float(u_hi)
        self.kind = kind
        self.copy = copy  # 'lower' / 'upper' remainder of W_0 for returns into W_0
        self.s_lo = None
        self.s_hi = None

    @property
    def width(self):
        return self.u_hi - self.u_lo

    def __repr__(self):
        return "Branch(%d: %d->%d [%g, %g] %s)" % (self.index, self.source, self.target,
                                                  self.u_lo, self.u_hi, self.kind)


class Point2(object):

    def __init__(self, cell, a, b):
        self.cell = int(cell)
        self.a = float(a)
        self.b = float(b)

    def __eq__(self, other):
        return (self.cell, self.a, self.b) == (other.cell, other.a, other.b)

    def __ne__(self, other):
        return not self.__eq__(other)

    def __hash__(self):
        return hash((self.cell, self.a, self.b))

    def __repr__(self):
        return "Point2(cell=%d, a=%.17g, b=%.17g)" % (self.cell, self.a, self.b)


class HyperbolicModel(object):

    def __init__(self, cells, transition, lam, n0, params, affine_only=False, sequence_length=4096):
        self.cells = cells
        self.transition = transition
        self.lam = lam
        self.n0 = n0
        self.intermittent = params
        self.affine_only = affine_only
        self.branches = []
        self.strip = None
        self.V0 = None
        self.central_branch = None
        self.right_sequence = None
        self.left_sequence = None
        if not affine_only:
            self.right_sequence = intermittent.boundary_sequence(params, 'right', sequence_length)
            self.left_sequence = intermittent.boundary_sequence(params, 'left', sequence_length)
            self.strip = (self.left_sequence.values[1], self.right_sequence.values[1])
            w0 = cells[0]
            self.V0 = ((self.strip[0], self.strip[1]), (w0.s_lo, w0.s_hi))
        self.__build_branches()
        self.__build_slots()
        self.__build_tables()
        lam_cells = self.cell_contractions()
        logger.debug("model built: %d cells, %d branches, n0=%d, cell factors %s",
                     len(cells), len(self.branches), n0, lam_cells)

    @property
    def d(self):
        return len(self.cells) - 1

    @property
    def reference_b(self):
        """ Stable coordinate of the reference unstable leaf through the center of W_1. """
        w1 = self.cells[1]
        return 0.5 * (w1.s_lo + w1.s_hi)

    def __targets(self, i):
        targets = []
        for j in range(len(self.cells)):
            if not self.transition[i, j]:
                continue
            if j == 0 and i != 0 and not self.affine_only:
                targets.append((0, 'lower'))
                targets.append((0, 'upper'))
            else:
                targets.append((j, None))
        return targets

    def __split(self, source, lo, hi, targets):
        weights = np.array([self.cells[j].width for j, copy in targets])
        edges = lo + (hi - lo) * np.concatenate([[0.0], np.cumsum(weights) / weights.sum()])
        edges[-1] = hi
        for k, (j, copy) in enumerate(targets):
            self.branches.append(Branch(len(self.branches), source, j, edges[k], edges[k + 1], copy=copy))

    def __build_branches(self):
        for i, cell in enumerate(self.cells):
            if i == 0 and not self.affine_only:
                outer = [(j, None) for j in range(1, len(self.cells)) if self.transition[0, j]]
                self.__split(0, cell.u_lo, self.strip[0], outer)
                central = Branch(len(self.branches), 0, 0, self.strip[0], self.strip[1], kind=INTERMITTENT)
                self.branches.append(central)
                self.central_branch = central.index
                self.__split(0, self.strip[1], cell.u_hi, outer)
            else:
                self.__split(i, cell.u_lo, cell.u_hi, self.__targets(i))

    def __tile(self, branches, lo, hi):
        edges = np.linspace(lo, hi, len(branches) + 1)
        edges[0], edges[-1] = lo, hi
        for k, br in enumerate(branches):
            br.s_lo, br.s_hi = edges[k], edges[k + 1]

    def __build_slots(self):
        for j, cell in enumerate(self.cells):
            incoming = [br for br in self.branches if br.target == j]
            if j == 0 and not self.affine_only:
                b1_lo = intermittent.phi_inverse(cell.s_lo, self.intermittent)
                b1_hi = intermittent.phi_inverse(cell.s_hi, self.intermittent)
                central = self.branches[self.central_branch]
                central.s_lo, central.s_hi = b1_lo, b1_hi
                self.__tile([br for br in incoming if br.copy == 'lower'], cell.s_lo, b1_lo)
                self.__tile([br for br in incoming if br.copy == 'upper'], b1_hi, cell.s_hi)
            else:
                self.__tile(incoming, cell.s_lo, cell.s_hi)

    def __build_tables(self):
        """ Sorted edge arrays per cell (unstable lookup) and per target (stable lookup),
        plus flat per-branch parameter arrays for the vectorized steppers.
        """
        self.unstable_edges = []
        self.unstable_ids = []
        self.stable_edges = []
        self.stable_ids = []
        for j, cell in enumerate(self.cells):
            own = sorted([br for br in self.branches if br.source == j], key=lambda br: br.u_lo)
            self.unstable_edges.append(np.array([br.u_lo for br in own] + [own[-1].u_hi]))
            self.unstable_ids.append(np.array([br.index for br in own], dtype=np.int64))
            inc = sorted([br for br in self.branches if br.target == j], key=lambda br: br.s_lo)
            self.stable_edges.append(np.array([br.s_lo for br in inc] + [inc[-1].s_hi]))
            self.stable_ids.append(np.array([br.index for br in inc], dtype=np.int64))

        n = len(self.branches)
        self.br_target = np.array([br.target for br in self.branches], dtype=np.int64)
        self.br_u_lo = np.array([br.u_lo for br in self.branches])
        self.br_intermittent = np.array([br.kind == INTERMITTENT for br in self.branches])
        self.br_slope = np.ones(n)
        self.br_ratio = np.ones(n)
        for br in self.branches:
            src, tgt = self.cells[br.source], self.cells[br.target]
            if br.kind == AFFINE:
                self.br_slope[br.index] = tgt.width / br.width
                self.br_ratio[br.index] = (br.s_hi - br.s_lo) / src.height
        self.br_target_u_lo = np.array([self.cells[j].u_lo for j in self.br_target])
        self.br_target_u_hi = np.array([self.cells[j].u_hi for j in self.br_target])
        self.br_source_s_lo = np.array([self.cells[br.source].s_lo for br in self.branches])
        self.br_s_lo = np.array([br.s_lo for br in self.branches])
        self.br_s_hi = np.array([br.s_hi for br in self.branches])
        self.br_log_slope = np.log(self.br_slope)

    def cell_contractions(self):
        """ Largest 1/slope and stable ratio over the affine branches of each cell. """
        out = []
        for i in range(len(self.cells)):
            ids = [br.index for br in self.branches if br.source == i and br.kind == AFFINE]
            if not ids:
                out.append(0.0)
                continue
            out.append(float(max(np.max(1.0 / self.br_slope[ids]), np.max(self.br_ratio[ids]))))
        return out

    def branch_at(self, cell, a, strict=False):
        edges = self.unstable_edges[cell]
        k = int(np.searchsorted(edges, a, side='left')) - 1
        k = min(max(k, 0), len(edges) - 2)
        if strict and a in edges[1:-1]:
            raise DomainError("a=%r is a branch boundary of cell %d" % (a, cell))
        return self.branches[self.unstable_ids[cell][k]]

    def slot_at(self, cell, b, strict=False):
        edges = self.stable_edges[cell]
        k = int(np.searchsorted(edges, b, side='left')) - 1
        k = min(max(k, 0), len(edges) - 2)
        if strict and b in edges[1:-1]:
            raise DomainError("b=%r is a slot boundary of cell %d" % (b, cell))
        return self.branches[self.stable_ids[cell][k]]

    def in_strip(self, cell, a):
        if self.affine_only or cell != 0:
            return False
        return self.branch_at(0, a).index == self.central_branch

    def strip_mask(self, cells, a):
        if self.affine_only:
            return np.zeros(np.shape(cells), dtype=bool)
        return (cells == 0) & (a > self.strip[0]) & (a <= self.strip[1])


def aperiodicity_index(A):
    """ Smallest n with A^n entrywise positive, searched up to dim^2. """
    M = np.asarray(A)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigError("transition matrix must be square, got shape %r" % (M.shape,))
    if np.any(~M.astype(bool).any(axis=1)):
        raise ConfigError("every row of the transition matrix needs at least one 1")
    M = (M > 0).astype(np.int64)
    cap = M.shape[0] ** 2
    power = M.copy()
    for n in range(1, cap + 1):
        if np.all(power > 0):
            return n
        power = ((power @ M) > 0).astype(np.int64)
    raise NotAperiodic("transition matrix is not aperiodic (no positive power up to %d)" % cap, cap=cap)


def build_model(settings):
    """ Builds a HyperbolicModel from a dict of model settings.

    Parameters:
        settings: keys theta, lambda, cells (d), transition ((d+1)x(d+1) 0/1),
            a0, a0_prime and optionally newton_tol, max_seq_len,
            sequence_length, cell_sizes, affine_only.
    """
    d = int(settings.get('cells', 3))
    if d < 2:
        raise ConfigError("need at least two cells besides W_0, got d=%d" % d)
    transition = settings.get('transition')
    if transition is None or (isinstance(transition, str) and transition == 'ones'):
        transition = np.ones((d + 1, d + 1), dtype=np.int64)
    transition = np.asarray(transition, dtype=np.int64)
    if transition.size == (d + 1) ** 2:
        transition = transition.reshape(d + 1, d + 1)
    if transition.shape != (d + 1, d + 1):
        raise ConfigError("transition must be %dx%d, got %r" % (d + 1, d + 1, transition.shape))
    if np.any((transition != 0) & (transition != 1)):
        raise ConfigError("transition entries must be 0 or 1")
    lam = float(settings.get('lambda', 0.4))
    if not 0.0 < lam < 1.0:
        raise ConfigError("lambda must lie in (0, 1), got %r" % lam)
    n0 = aperiodicity_index(transition)

    params = IntermittentParams(float(settings.get('theta', 0.5)),
                                a0=float(settings.get('a0', 0.5)),
                                a0_prime=float(settings.get('a0_prime', -0.5)),
                                newton_tol=float(settings.get('newton_tol', 1e-14)),
                                max_seq_len=int(settings.get('max_seq_len', 2000000)))
    affine_only = bool(settings.get('affine_only', False))
    if not affine_only:
        if not transition[0, 0]:
            raise ConfigError("geometry inconsistent: W_0 must map its central strip onto itself")
        if not transition[0, 1:].any() or not transition[1:, 0].any():
            raise ConfigError("geometry inconsistent: W_0 needs exits and entries through affine branches")

    sizes = settings.get('cell_sizes') or [1.0] * d
    if len(sizes) != d or min(sizes) <= 0:
        raise ConfigError("cell_sizes must list %d positive lengths" % d)
    cells = [Cell(0, params.a0_prime, params.a0, params.a0_prime, params.a0)]
    for i, size in enumerate(sizes):
        cells.append(Cell(i + 1, 0.0, size, 0.0, size))

    sequence_length = min(int(settings.get('sequence_length', 4096)), params.max_seq_len)
    model = HyperbolicModel(cells, transition, lam, n0, params,
                            affine_only=affine_only, sequence_length=sequence_length)
    worst = max(model.cell_contractions())
    if worst > lam + 1e-12:
        raise ConfigError("geometry inconsistent: affine branches contract/expand by %.4g > lambda=%g"
                          % (worst, lam))
    problems = markov_crossing_check(model)
    if problems:
        raise ConfigError("geometry inconsistent: %s" % "; ".join(problems))
    return model


def markov_crossing_check(m, tol=1e-12):
    """ Interval-arithmetic check of the Markov crossing property.

    Returns a list of human-readable problems, empty when the model is fine.
    """
    problems = []
    for br in m.branches:
        tgt = m.cells[br.target]
        if br.kind == AFFINE:
            lo = tgt.u_lo
            hi = tgt.u_lo + br.width * m.br_slope[br.index]
        else:
            lo = intermittent.phi(br.u_lo, m.intermittent)
            hi = intermittent.phi(br.u_hi, m.intermittent)
        if abs(lo - tgt.u_lo) > tol or abs(hi - tgt.u_hi) > tol:
            problems.append("branch %d does not cross cell %d" % (br.index, br.target))
    n = len(m.cells)
    for i in range(n):
        for j in range(n):
            if m.transition[i, j] and not any(br.source == i and br.target == j for br in m.branches):
                problems.append("transition %d->%d has no branch" % (i, j))
    for j, cell in enumerate(m.cells):
        edges = m.stable_edges[j]
        if abs(edges[0] - cell.s_lo) > tol or abs(edges[-1] - cell.s_hi) > tol:
            problems.append("stable slots do not tile cell %d" % j)
        ids = m.stable_ids[j]
        for k in range(len(ids) - 1):
            if abs(m.br_s_hi[ids[k]] - m.br_s_lo[ids[k + 1]]) > tol:
                problems.append("stable slots of cell %d overlap or leave a gap" % j)
    return problems


def _clip(x, lo, hi):
    return min(max(x, lo), hi)


def _check_point(p, m):
    if not 0 <= p.cell < len(m.cells):
        raise DomainError("no cell %r" % p.cell)
    if not m.cells[p.cell].contains(p.a, p.b):
        raise DomainError("%r lies outside its cell" % p)


def step(p, m, strict=False):
    """ One application of the map.

    Boundary ties go to the lower branch; with strict=True they raise DomainError.
    """
    _check_point(p, m)
    br = m.branch_at(p.cell, p.a, strict=strict)
    tgt = m.cells[br.target]
    if br.kind == INTERMITTENT:
        a = intermittent.phi(p.a, m.intermittent)
        b = intermittent.phi_inverse(p.b, m.intermittent)
    else:
        src = m.cells[p.cell]
        a = tgt.u_lo + (p.a - br.u_lo) * m.br_slope[br.index]
        b = br.s_lo + (p.b - src.s_lo) * m.br_ratio[br.index]
    return Point2(br.target, _clip(a, tgt.u_lo, tgt.u_hi), _clip(b, br.s_lo, br.s_hi))


def step_inverse(p, m, strict=False):
    _check_point(p, m)
    br = m.slot_at(p.cell, p.b, strict=strict)
    src = m.cells[br.source]
    if br.kind == INTERMITTENT:
        a = intermittent.phi_inverse(p.a, m.intermittent)
        b = intermittent.phi(p.b, m.intermittent)
    else:
        tgt = m.cells[p.cell]
        a = br.u_lo + (p.a - tgt.u_lo) / m.br_slope[br.index]
        b = src.s_lo + (p.b - br.s_lo) / m.br_ratio[br.index]
    return Point2(br.source, _clip(a, br.u_lo, br.u_hi), _clip(b, src.s_lo, src.s_hi))


def unstable_quotient_map(u, m):
    """ The expanding Markov factor: (cell, a) -> (cell', a'). """
    cell, a = u
    if not m.cells[cell].u_lo <= a <= m.cells[cell].u_hi:
        raise DomainError("a=%r outside the unstable fiber of cell %d" % (a, cell))
    br = m.branch_at(cell, a)
    tgt = m.cells[br.target]
    if br.kind == INTERMITTENT:
        image = intermittent.phi(a, m.intermittent)
    else:
        image = tgt.u_lo + (a - br.u_lo) * m.br_slope[br.index]
    return (br.target, _clip(image, tgt.u_lo, tgt.u_hi))


def unstable_log_derivative(cell, a, m):
    br = m.branch_at(cell, a)
    if br.kind == INTERMITTENT:
        return float(intermittent.log_phi_prime(a, m.intermittent.theta))
    return float(m.br_log_slope[br.index])


def unstable_step_array(m, cells, a):
    """ Vectorized unstable factor.

    Returns (new cells, new a, branch ids, log of the unstable derivative).
    """
    ids = np.empty(len(a), dtype=np.int64)
    for c in range(len(m.cells)):
        mask = cells == c
        if not mask.any():
            continue
        edges = m.unstable_edges[c]
        k = np.clip(np.searchsorted(edges, a[mask], side='left') - 1, 0, len(edges) - 2)
        ids[mask] = m.unstable_ids[c][k]
    target = m.br_target[ids]
    inter = m.br_intermittent[ids]
    new_a = m.br_target_u_lo[ids] + (a - m.br_u_lo[ids]) * m.br_slope[ids]
    logd = m.br_log_slope[ids].copy()
    if inter.any():
        new_a[inter] = intermittent.phi_array(a[inter], m.intermittent.theta)
        logd[inter] = intermittent.log_phi_prime(a[inter], m.intermittent.theta)
    new_a = np.clip(new_a, m.br_target_u_lo[ids], m.br_target_u_hi[ids])
    return target, new_a, ids, logd


def step_array(m, cells, a, b):
    """ Vectorized step for ensembles; same tie rule as step. """
    target, new_a, ids, logd = unstable_step_array(m, cells, a)
    inter = m.br_intermittent[ids]
    new_b = m.br_s_lo[ids] + (b - m.br_source_s_lo[ids]) * m.br_ratio[ids]
    if inter.any():
        new_b[inter] = intermittent.phi_inverse_array(b[inter], m.intermittent.theta,
                                                      tol=m.intermittent.newton_tol)
    new_b = np.clip(new_b, m.br_s_lo[ids], m.br_s_hi[ids])
    return target, new_a, new_b


def distance(p, q, m):
    """ Max-norm distance inside a chart; across cells, the two distances to the
    nearest cell edge are chained.
    """
    if p.cell == q.cell:
        return max(abs(p.a - q.a), abs(p.b - q.b))
    return m.cells[p.cell].edge_distance(p.a, p.b) + m.cells[q.cell].edge_distance(q.a, q.b)


class ContractionReport(object):

    def __init__(self, direction, distances, d0, alpha):
        self.direction = direction
        self.distances = np.asarray(distances)
        self.d0 = d0
        n = np.arange(1, len(self.distances) + 1)
        if d0 > 0:
            self.ratios = self.distances * n ** alpha / d0
        else:
            self.ratios = np.zeros(len(self.distances))
        self.running_sup = np.maximum.accumulate(self.ratios) if len(self.ratios) else self.ratios

    @property
    def envelope(self):
        return float(self.running_sup[-1]) if len(self.running_sup) else 0.0


def check_contraction(x, y, n, m, alpha=None):
    """ r_k = d(iterate_k x, iterate_k y) k^alpha / d(x, y) for k = 1..n.

    Forward iterates for a pair on a common stable leaf (same cell and a),
    backward iterates for a pair on a common unstable leaf (same cell and b).
    alpha defaults to tau + 1.
    """
    if alpha is None:
        alpha = m.intermittent.tau + 1.0
    if x.cell != y.cell:
        raise LeafMismatch("points lie in different cells")
    if x.a == y.a:
        direction, mover = 'forward', step
    elif x.b == y.b:
        direction, mover = 'backward', step_inverse
    else:
        raise LeafMismatch("points share neither a stable nor an unstable leaf")
    d0 = distance(x, y, m)
    distances = []
    for k in range(n):
        x, y = mover(x, m), mover(y, m)
        distances.append(distance(x, y, m))
    return ContractionReport(direction, distances, d0, alpha)


def fixed_point_derivatives(m, h=1e-6):
    """ One-sided difference quotients of phi and psi = phi^{-1} at the fixed point.

    The forward quotient is exactly 1 + h^theta, so both approach 1 only as fast as h^theta.
    """
    p = m.intermittent
    return intermittent.phi(h, p) / h, intermittent.phi_inverse(h, p) / h
