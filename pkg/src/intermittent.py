# -*- coding: utf-8 -*-
"""
The one-dimensional intermittent map phi(a) = a(1 + |a|^theta), its
inverse, the boundary sequences a_n and the derivative estimates used by
the return-time and distortion checks.
"""

import math

import numpy as np

from errors import ConfigError, ConvergenceError, DomainError, SequenceExhausted


class IntermittentParams(object):

    def __init__(self, theta, a0=0.5, a0_prime=-0.5, newton_tol=1e-14, max_seq_len=2000000):
        if not 0.0 < theta <= 1.0:
            raise ConfigError("theta must lie in (0, 1], got %r" % theta)
        if not (a0_prime < 0.0 < a0 and a0 < 1.0 and a0_prime > -1.0):
            raise ConfigError("need -1 < a0_prime < 0 < a0 < 1, got (%r, %r)" % (a0_prime, a0))
        if not 0.0 < newton_tol <= 1e-12:
            raise ConfigError("newton_tol must lie in (0, 1e-12], got %r" % newton_tol)
        if int(max_seq_len) < 1:
            raise ConfigError("max_seq_len must be positive")
        self.theta = float(theta)
        self.tau = 1.0 / self.theta
        self.a0 = float(a0)
        self.a0_prime = float(a0_prime)
        self.newton_tol = float(newton_tol)
        self.max_seq_len = int(max_seq_len)

    @property
    def radius(self):
        return max(abs(self.a0), abs(self.a0_prime))

    def __repr__(self):
        return "IntermittentParams(theta=%g, a0=%g, a0_prime=%g)" % (self.theta, self.a0, self.a0_prime)


class BoundarySequence(object):
    """ Points a_0 > a_1 > ... > a_N > 0 (side 'right') or
    a'_0 < a'_1 < ... < 0 (side 'left') with phi(a_{n+1}) = a_n.

    J_n = [a_{n+1}, a_n] and J'_n = [a'_n, a'_{n+1}] are the level sets of
    the first return to the outer part of W_0.
    """

    def __init__(self, values, side):
        if side not in ('right', 'left'):
            raise ValueError("side must be 'right' or 'left'")
        self.values = np.asarray(values, dtype=float)
        self.side = side

    def __len__(self):
        return len(self.values)

    def gaps(self):
        """ Delta a_n = |a_n - a_{n+1}| for n = 0..N-1. """
        return np.abs(np.diff(self.values))

    def level(self, a):
        return int(self.levels(np.array([a], dtype=float))[0])

    def levels(self, a):
        """ Index n of the level set J_n (or J'_n) containing each point.

        Raises SequenceExhausted when a point sits deeper than the table.
        """
        a = np.asarray(a, dtype=float)
        inner = self.values[1:]
        if self.side == 'right':
            ascending = inner[::-1]
            n = len(ascending) - np.searchsorted(ascending, a, side='left')
            deep = a < self.values[-1]
        else:
            n = np.searchsorted(inner, a, side='left')
            deep = a > self.values[-1]
        if np.any(deep):
            raise SequenceExhausted("point %r lies beyond the %d-term boundary table"
                                    % (float(a[deep][0]), len(self.values) - 1),
                                    length=len(self.values) - 1)
        return n.astype(np.int64)


def phi(a, p):
    if abs(a) > p.radius:
        raise DomainError("phi is defined on |a| <= %g, got %r" % (p.radius, a))
    return a * (1.0 + abs(a) ** p.theta)


def phi_prime(a, p):
    return 1.0 + (1.0 + p.theta) * abs(a) ** p.theta


def phi_inverse(b, p, max_iter=100):
    """ Solve phi(x) = b by Newton's method kept inside the bracket [0, |b|].

    phi is convex and increasing on [0, a0], so the Newton iterates started at
    |b| decrease monotonically; bisection only takes over when round-off
    pushes an iterate out of the bracket.
    """
    bound = p.radius * (1.0 + p.radius ** p.theta)
    if abs(b) > bound:
        raise DomainError("phi_inverse is defined on |b| <= %g, got %r" % (bound, b))
    if b == 0.0:
        return 0.0
    target = abs(b)
    lo, hi = 0.0, target
    x = target
    residual = None
    for it in range(max_iter):
        xt = x ** p.theta
        residual = x * (1.0 + xt) - target
        if abs(residual) <= p.newton_tol * target:
            return math.copysign(x, b)
        if residual > 0.0:
            hi = x
        else:
            lo = x
        candidate = x - residual / (1.0 + (1.0 + p.theta) * xt)
        if not lo < candidate < hi:
            candidate = 0.5 * (lo + hi)
        x = candidate
    raise ConvergenceError("phi_inverse(%r) did not reach relative tolerance %g" % (b, p.newton_tol),
                           residual=residual, iterations=max_iter)


def phi_array(a, theta):
    a = np.asarray(a, dtype=float)
    return a * (1.0 + np.abs(a) ** theta)


def log_phi_prime(a, theta):
    return np.log1p((1.0 + theta) * np.abs(np.asarray(a, dtype=float)) ** theta)


def phi_inverse_array(b, theta, tol=1e-14, max_iter=100):
    """ Vectorized phi^{-1}; plain Newton from the right of every root. """
    b = np.asarray(b, dtype=float)
    target = np.abs(b)
    x = target.copy()
    for it in range(max_iter):
        xt = x ** theta
        residual = x * (1.0 + xt) - target
        if np.all(np.abs(residual) <= tol * target):
            return np.copysign(x, b)
        x = np.maximum(x - residual / (1.0 + (1.0 + theta) * xt), 0.0)
    raise ConvergenceError("vectorized phi_inverse did not reach tolerance %g" % tol,
                           residual=float(np.max(np.abs(residual))), iterations=max_iter)


def boundary_sequence(p, side, N):
    """ Returns the first N+1 terms of a_n = phi^{-1}(a_{n-1}).

    Parameters:
        p: IntermittentParams
        side: 'right' starts from a0, 'left' from a0_prime.
        N: number of inverse iterations.
    """
    if N < 0:
        raise ValueError("N must be nonnegative")
    if N > p.max_seq_len:
        raise SequenceExhausted("requested %d terms, max_seq_len is %d" % (N, p.max_seq_len),
                                length=p.max_seq_len)
    start = p.a0 if side == 'right' else p.a0_prime
    values = np.empty(N + 1)
    values[0] = start
    x = start
    for n in range(1, N + 1):
        x = phi_inverse(x, p)
        values[n] = x
    return BoundarySequence(values, side)


def _check_orbit(x, p):
    if abs(x) > p.radius * (1.0 + 1e-12):
        raise DomainError("orbit left the domain of phi at %r" % x)


def log_derivative_product(x, n, p):
    total = 0.0
    for j in range(n):
        _check_orbit(x, p)
        total += math.log1p((1.0 + p.theta) * abs(x) ** p.theta)
        if j < n - 1:
            x = x * (1.0 + abs(x) ** p.theta)
    return total


def derivative_product(x, n, p):
    """ (phi^n)'(x), accumulated in log space. """
    if n < 0:
        raise ValueError("n must be nonnegative")
    return math.exp(log_derivative_product(x, n, p))


def _in_level(a, seq, n, tol):
    left, right = sorted((seq.values[n], seq.values[n + 1]))
    return left - tol <= a <= right + tol


def _level_table(a, n, p):
    side = 'right' if a >= 0 else 'left'
    return boundary_sequence(p, side, n + 1)


def distortion_ratio(a, b, i, n, p):
    """ |log (phi^i)'(a) - log (phi^i)'(b)| for a, b in the same level set J_n. """
    if i < 0 or i > n:
        raise DomainError("need 0 <= i <= n, got i=%r n=%r" % (i, n))
    seq = _level_table(a, n, p)
    if not (_in_level(a, seq, n, p.newton_tol) and _in_level(b, seq, n, p.newton_tol)):
        raise DomainError("points %r, %r are not in the level set of index %d" % (a, b, n))
    if a == b or i == 0:
        return 0.0
    return abs(log_derivative_product(a, i, p) - log_derivative_product(b, i, p))


def distortion_constant(a, b, i, n, p):
    """ distortion_ratio / (|phi^i a - phi^i b| / Delta a_{n-i}); stays bounded in n and i. """
    ratio = distortion_ratio(a, b, i, n, p)
    if ratio == 0.0:
        return 0.0
    seq = _level_table(a, n, p)
    x, y = a, b
    for j in range(i):
        x, y = phi(x, p), phi(y, p)
    gap = abs(seq.values[n - i] - seq.values[n - i + 1])
    return ratio / (abs(x - y) / gap)


def asymptotic_ratio(seq, theta):
    """ a_n (theta n)^(1/theta) for n = 1..N; tends to 1. """
    n = np.arange(1, len(seq.values))
    return np.abs(seq.values[1:]) * (theta * n) ** (1.0 / theta)


def gap_profile(seq, theta):
    """ Delta a_n n^(1 + 1/theta) for n = 1..N-1. """
    gaps = seq.gaps()[1:]
    n = np.arange(1, len(gaps) + 1)
    return gaps * n ** (1.0 + 1.0 / theta)
