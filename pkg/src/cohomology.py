# -*- coding: utf-8 -*-
"""
Coboundary decomposition phi o pi = psi + chi - chi o F of a Hölder
observable on the tower.

chi(p) = sum_j phi(pi F^j p) - phi(pi F^j p_hat), where p_hat moves the base
of p along its stable leaf to the reference unstable leaf; psi then depends
only on future coordinates.
"""

import logging
import math
import warnings

import numpy as np
from scipy.special import zeta

import stats_engine
from errors import ConvergenceWarning, DomainError
from hyperbolic_model import Point2, distance, step
from return_times import return_time, separation_time
from tower import TowerPoint, project, tower_step

logger = logging.getLogger(__name__)


def hat(t, m):
    """ Same level, base moved to the reference leaf along its stable leaf. """
    base = Point2(1, t.base.a, m.reference_b)
    record = t.record if base == t.base else None
    return TowerPoint(base, t.level, m, record=record)


def _orbit_values(y, phi, N, m):
    out = np.empty(N)
    for j in range(N):
        out[j] = phi.value(y)
        if j < N - 1:
            y = step(y, m)
    return out


def tail_bound(phi, N, m, alpha=None, contraction=1.0, seminorm=None):
    """ |phi|_eta C^eta sum_{j > N} j^(-alpha eta); infinite when the series diverges. """
    if alpha is None:
        alpha = m.intermittent.tau + 1.0
    exponent = alpha * phi.eta
    if exponent <= 1.0:
        warnings.warn("alpha * eta = %.3g <= 1: the stable-leaf series need not converge" % exponent,
                      ConvergenceWarning)
        return float('inf')
    seminorm = phi.seminorm_estimate if seminorm is None else seminorm
    if seminorm is None:
        seminorm = 1.0
    return float(seminorm * contraction ** phi.eta * zeta(exponent, N + 1))


def chi(t, phi, N, m, alpha=None):
    """ N-term partial sum of chi at t, and the bound on the remaining tail. """
    bound = tail_bound(phi, N, m, alpha)
    h = hat(t, m)
    if h.base == t.base or N == 0:
        return 0.0, bound
    y, yhat = project(t, m), project(h, m)
    value = math.fsum(_orbit_values(y, phi, N, m) - _orbit_values(yhat, phi, N, m))
    return value, bound


class PsiValue(object):

    def __init__(self, value, closed_form, phi_value, chi_here, chi_next):
        self.value = value
        self.closed_form = closed_form
        self.phi_value = phi_value
        self.chi_here = chi_here
        self.chi_next = chi_next

    @property
    def residual(self):
        """ |phi o pi - (psi + chi - chi o F)| with the same truncation throughout. """
        return abs(self.phi_value - (self.value + self.chi_here - self.chi_next))

    @property
    def mismatch(self):
        return abs(self.value - self.closed_form)


def psi(t, phi, N, m):
    """ psi(t) = phi(pi t) - chi(t) + chi(F t), evaluated next to the closed form
    phi(pi F^N t) + sum_{j<N} phi(pi F^j t_hat) - phi(pi F^j (F t)_hat).
    """
    if N < 1:
        raise DomainError("psi needs at least one term")
    y = project(t, m)
    nxt = tower_step(t, m)
    A = _orbit_values(y, phi, N + 1, m)
    h, hn = hat(t, m), hat(nxt, m)
    B = _orbit_values(project(h, m), phi, N, m)
    Z = _orbit_values(project(hn, m), phi, N, m)
    chi_here = math.fsum(np.concatenate([A[:N], -B]))
    chi_next = math.fsum(np.concatenate([A[1:], -Z]))
    value = A[0] - chi_here + chi_next
    closed = math.fsum(np.concatenate([[A[N]], B, -Z]))
    return PsiValue(value, closed, A[0], chi_here, chi_next)


def chi_cauchy_rate(t, phi, Ns, m):
    """ Fits |chi_N - chi_2N| ~ c N^r over the truncations Ns. """
    diffs = []
    for N in Ns:
        diffs.append(abs(chi(t, phi, 2 * N, m)[0] - chi(t, phi, N, m)[0]))
    return stats_engine.fit_slope(Ns, diffs)


class GThetaReport(object):

    def __init__(self, D, argmax, theta_prime):
        self.D = D
        self.argmax = argmax
        self.theta_prime = theta_prime


def verify_gtheta(psi_x, psi_y, separations, theta_prime):
    """ D = max |psi(x) - psi(y)| max(s, 1)^theta' over the pairs. """
    if theta_prime <= 0:
        raise DomainError("theta' = alpha eta - 1 must be positive, got %g" % theta_prime)
    diff = np.abs(np.asarray(psi_x, dtype=float) - np.asarray(psi_y, dtype=float))
    weights = np.maximum(np.asarray(separations, dtype=float), 1.0) ** theta_prime
    if len(diff) == 0:
        return GThetaReport(0.0, None, theta_prime)
    k = int(np.argmax(diff * weights))
    return GThetaReport(float(diff[k] * weights[k]), k, theta_prime)


def sample_psi_pairs(m, phi, n_pairs, N, rng, delta=1e-3, separation_cap=16):
    """ psi on base pairs of one unstable leaf of W_1 with their separation times.

    Returns (psi_x, psi_y, s) arrays.
    """
    w1 = m.cells[1]
    px, py, sep = [], [], []
    for _ in range(n_pairs):
        a = rng.uniform(w1.u_lo, w1.u_hi - delta)
        b = rng.uniform(w1.s_lo, w1.s_hi)
        x, y = Point2(1, a, b), Point2(1, a + delta * rng.uniform(), b)
        s, _ = separation_time(x, y, m, separation_cap)
        tx, ty = TowerPoint(x, 0, m), TowerPoint(y, 0, m)
        px.append(psi(tx, phi, N, m).value)
        py.append(psi(ty, phi, N, m).value)
        sep.append(s)
    return np.array(px), np.array(py), np.array(sep)


def separation_distance_envelope(pairs, m, alpha=None, separation_cap=16):
    """ max over pairs and 0 <= k < R of d(f^k x, f^k y) s(x, y)^alpha, pairs on
    common unstable leaves of W_1.
    """
    if alpha is None:
        alpha = m.intermittent.tau + 1.0
    best = 0.0
    for x, y in pairs:
        s, _ = separation_time(x, y, m, separation_cap)
        if s == 0:
            continue
        R = min(return_time(x, m).R, return_time(y, m).R)
        for _ in range(R):
            best = max(best, distance(x, y, m) * s ** alpha)
            x, y = step(x, m), step(y, m)
    return best


def stable_pair_gaps(pairs, phi, Ns, m):
    """ max over pairs on common stable leaves of |psi(p) - psi(q)|, one value per truncation in Ns. """
    gaps = []
    for N in Ns:
        gaps.append(max([abs(psi(p, phi, N, m).value - psi(q, phi, N, m).value) for p, q in pairs] or [0.0]))
    return np.array(gaps)
