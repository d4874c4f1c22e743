# -*- coding: utf-8 -*-
"""
The experiment pipelines behind each subcommand. Every pipeline writes its
CSV files into the run directory and appends slopes, summary entries and
PASS/FAIL/INCONCLUSIVE criteria to the Run.
"""

import logging
import math
import os

import numpy as np
import pandas as pd

import cohomology
import coupling
import return_times
import stats_engine
import tower
from errors import (ConfigError, DegenerateSupport, DegenerateWindow, DomainError, InconclusiveResult,
                    InsufficientSamples)
from hyperbolic_model import build_model, check_contraction, markov_crossing_check
from utils import formatSlope, logGrid, saveTable, spawnSeeds, writeSummary

logger = logging.getLogger(__name__)

PASS, FAIL, INCONCLUSIVE = 'PASS', 'FAIL', 'INCONCLUSIVE'

# child seed index of each pipeline
TAILS, CORRELATIONS, LD, SPECTRA, COUPLE, VALIDATE, COHOMOLOGY = range(7)


class Criterion(object):

    def __init__(self, name, status, detail=''):
        self.name = name
        self.status = status
        self.detail = detail

    def __repr__(self):
        return "%s %s %s" % (self.status, self.name, self.detail)


def check(name, ok, detail=''):
    return Criterion(name, PASS if ok else FAIL, detail)


def band_criterion(name, slope, ci, target, tol):
    """ PASS when the slope lies within tol of the target; INCONCLUSIVE when
    only its interval reaches the band.
    """
    detail = 'slope=%.4f target=%.4f tol=%.2f' % (slope, target, tol)
    if abs(slope - target) <= tol:
        return Criterion(name, PASS, detail)
    if ci[0] <= target + tol and ci[1] >= target - tol:
        return Criterion(name, INCONCLUSIVE, detail)
    return Criterion(name, FAIL, detail)


def bound_criterion(name, slope, ci, target, tol):
    """ Upper-bound check: the decay must be at least as fast as target + tol. """
    detail = 'slope=%.4f bound=%.4f' % (slope, target + tol)
    if slope <= target + tol:
        return Criterion(name, PASS, detail)
    if ci[0] <= target + tol:
        return Criterion(name, INCONCLUSIVE, detail)
    return Criterion(name, FAIL, detail)


def exponent_targets(tau, convention):
    """ Target log-log slopes under the level-set or the tail-bound exponent convention. """
    zeta = tau if convention == 'level_set' else tau + 1.0
    decay = -(tau - 1.0) if convention == 'level_set' else -tau
    return {'zeta': zeta, 'tail': -zeta, 'correlation': decay, 'ld': decay, 'coupling': -(zeta - 1.0)}


def relative_gap(values):
    """ (max - min) / max of two or more estimates; infinite when one is not finite. """
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        return float('inf')
    top = float(np.max(np.abs(values)))
    return float(np.ptp(values)) / top if top > 0 else 0.0


def envelope_stable(values, factor):
    """ No envelope exceeds factor times the median envelope. """
    values = np.asarray(values, dtype=float)
    if len(values) == 0 or not np.all(np.isfinite(values)):
        return False
    return float(values.max()) <= factor * float(np.median(values))


class Run(object):
    """ State shared by the pipelines of one command-line invocation. """

    def __init__(self, cfg, run_dir, command):
        self.cfg = cfg
        self.run_dir = run_dir
        self.command = command
        self.seed = cfg.getint('run', 'seed')
        self.workers = cfg.getint('run', 'workers')
        self.shards = cfg.getint('run', 'shards')
        try:
            self.model = build_model(cfg.model_settings())
        except DomainError as e:
            raise ConfigError(str(e))
        self.theta = self.model.intermittent.theta
        self.tau = self.model.intermittent.tau
        self.convention = cfg.get('targets', 'convention')
        self.targets = exponent_targets(self.tau, self.convention)
        self.other_targets = exponent_targets(self.tau, 'tail_bound' if self.convention == 'level_set' else 'level_set')
        self.entries = []
        self.slopes = []
        self.criteria = []
        self._transfer = None
        self._density = None
        self._seeds = spawnSeeds(self.seed, 8)

    def child_seed(self, k):
        return int(self._seeds[k].generate_state(1)[0])

    def rng(self, k):
        return np.random.default_rng(self._seeds[k])

    def save(self, table, name, float_format='%.12g'):
        path = os.path.join(self.run_dir, name)
        saveTable(table, path, self.cfg.digest(), self.seed, float_format)
        logger.info("wrote %s", path)
        return path

    def add_slope(self, name, slope, ci):
        self.slopes.append(formatSlope(name, slope, ci))
        logger.info("slope %s", self.slopes[-1])

    def n_values(self):
        listed = self.cfg.getlist('stats', 'n_list', int)
        if listed:
            return np.array(sorted(set(listed)), dtype=np.int64)
        return logGrid(self.cfg.getint('stats', 'n_lo'), self.cfg.getint('stats', 'n_hi'))

    def transfer(self):
        if self._transfer is None:
            cfg = self.cfg
            self._transfer = tower.ulam_discretize(self.model, cfg.getint('tower', 'bins'),
                                                   cfg.getint('tower', 'max_level'),
                                                   cfg.optional('tower', 'strip_levels', int))
        return self._transfer

    def density(self):
        if self._density is None:
            self._density = tower.invariant_density(self.transfer(), self.cfg.getfloat('tower', 'tol'),
                                                    self.cfg.getint('tower', 'maxiter'))
        return self._density

    def summary_entries(self):
        entries = [('command', self.command), ('seed', self.seed), ('theta', self.theta),
                   ('convention', self.convention), ('zeta_target', self.targets['zeta']),
                   ('zeta_target_other', self.other_targets['zeta']),
                   ('config_hash', self.cfg.digest()), ('slopes', ', '.join(self.slopes))]
        return entries + self.entries

    def write_summary(self):
        path = os.path.join(self.run_dir, 'summary.txt')
        writeSummary(path, self.summary_entries(), self.criteria)
        return path

    def status(self):
        statuses = set(c.status for c in self.criteria)
        if FAIL in statuses:
            return FAIL
        if INCONCLUSIVE in statuses:
            return INCONCLUSIVE
        return PASS


def run_tails(run):
    cfg, m = run.cfg, run.model
    seed = run.child_seed(TAILS)
    window = (cfg.getint('tails', 'window_lo'), cfg.getint('tails', 'window_hi'))
    sample = return_times.sample_return_times(m, cfg.getint('tails', 'samples'), seed,
                                              cfg.getint('tails', 'cap'), run.workers, run.shards,
                                              cfg.getint('tails', 'max_stages'))
    tol = cfg.getfloat('targets', 'tail_tol')
    try:
        est = return_times.tail_histogram(sample.R, window, sample.censored, cfg.getint('tails', 'min_samples'),
                                          cfg.getint('tails', 'bootstrap'), seed)
    except DegenerateSupport as e:
        run.criteria.append(Criterion('return_tail', INCONCLUSIVE, str(e)))
    else:
        run.save(est.table(), 'tails.csv')
        run.add_slope('R_tail', est.slope, est.slope_ci)
        run.entries += [('window', '%d-%d' % window), ('censored_count', est.censored),
                        ('tail_target_other', run.other_targets['tail'])]
        run.criteria.append(band_criterion('return_tail', est.slope, est.slope_ci, run.targets['tail'], tol))

    if not m.affine_only:
        n, survival = return_times.level_set_survival(m, window[1])
        level = stats_engine.fit_slope(n[1:], survival[1:], window, cfg.getint('tails', 'bootstrap'), seed)
        run.add_slope('Rhat_level_set', level.slope, level.ci)
        run.criteria.append(band_criterion('level_set_tail', level.slope, level.ci, -run.tau, tol))

    profile = return_times.conditional_return_profile(sample)
    run.save(pd.DataFrame(profile, columns=['i', 'count', 'frac']), 'conditional.csv')
    grid, empirical, level = return_times.increment_profile(sample, m, window)
    run.save(pd.DataFrame({'n': grid, 'increment_survival': empirical, 'level_set_survival': level}),
             'increments.csv')
    run.entries.append(('observed_gcd', return_times.observed_gcd(sample.R)))
    return run


def _stride(cfg):
    stride = cfg.get('stats', 'stride').strip()
    return 'auto' if stride == 'auto' else int(stride)


def _birkhoff_criterion(run, phi):
    """ Two halves of the streamed orbit averages must agree within 3 batch-means standard errors. """
    cfg = run.cfg
    length = cfg.getint('stats', 'length')
    summary = stats_engine.simulate_orbit(run.child_seed(CORRELATIONS) + 1, None, length, run.model, [phi],
                                          cfg.getint('stats', 'burn_in'), min(cfg.getint('stats', 'walkers'), 16),
                                          chunk=max(1, length // 40), keep=False)
    try:
        halves = summary.halves(phi.name)
    except InsufficientSamples as e:
        run.criteria.append(Criterion('birkhoff_halves', INCONCLUSIVE, str(e)))
        return
    run.entries.append(('birkhoff_z', halves['z']))
    status = PASS if halves['z'] <= 3.0 else INCONCLUSIVE
    run.criteria.append(Criterion('birkhoff_halves', status, 'z=%.3f' % halves['z']))


def run_correlations(run):
    cfg, m = run.cfg, run.model
    phi = stats_engine.make_observable(cfg.get('stats', 'phi'), m)
    psi = stats_engine.make_observable(cfg.get('stats', 'psi'), m)
    series = stats_engine.correlation_mc(phi, psi, run.n_values(), m, cfg.getint('stats', 'walkers'),
                                         cfg.getint('stats', 'length'), cfg.getint('stats', 'burn_in'),
                                         _stride(cfg), run.child_seed(CORRELATIONS), run.shards, run.workers)
    run.save(series.table(), 'correlations.csv')
    _birkhoff_criterion(run, phi)
    limit = cfg.optional('stats', 'ci_tolerance')
    if limit is not None and np.any(series.ci > limit):
        detail = 'max CI %.3g > %.3g' % (series.ci.max(), limit)
        run.criteria.append(Criterion('correlation_ci', INCONCLUSIVE, detail))
        raise InconclusiveResult("correlation CI too wide to judge the decay: %s" % detail)
    above = series.c_values > series.ci
    try:
        fit = stats_engine.fit_slope(series.n_values[above], series.c_values[above])
    except DegenerateWindow as e:
        run.criteria.append(Criterion('correlation_decay_mc', INCONCLUSIVE, str(e)))
        return run
    run.add_slope('C_n_mc', fit.slope, fit.ci)
    run.criteria.append(bound_criterion('correlation_decay_mc', fit.slope, fit.ci, run.targets['correlation'],
                                        cfg.getfloat('targets', 'corr_tol')))
    return run


def run_ld(run):
    cfg, m = run.cfg, run.model
    phi = stats_engine.make_observable(cfg.get('stats', 'phi'), m)
    eps = cfg.getlist('stats', 'eps_list')
    if not eps:
        raise ConfigError("stats.eps_list is empty")
    series = stats_engine.large_deviation(phi, eps, run.n_values(), m, cfg.getint('stats', 'ensemble'),
                                          cfg.getint('stats', 'burn_in'), run.child_seed(LD),
                                          run.shards, run.workers)
    run.save(series.table(), 'ld.csv')
    floor = cfg.getfloat('stats', 'ld_floor')
    for i, e in enumerate(series.eps):
        usable = series.above_floor(i) & (series.ld[i] >= floor)
        name = 'ld_decay_eps=%g' % e
        try:
            fit = stats_engine.fit_slope(series.n_values[usable], series.ld[i][usable])
        except DegenerateWindow as err:
            run.criteria.append(Criterion(name, INCONCLUSIVE, 'above the noise floor: %s' % err))
            continue
        run.add_slope('LD_eps=%g' % e, fit.slope, fit.ci)
        run.criteria.append(bound_criterion(name, fit.slope, fit.ci, run.targets['ld'],
                                            cfg.getfloat('targets', 'ld_tol')))
    return run


def run_spectra(run):
    cfg, m = run.cfg, run.model
    T = run.transfer()
    row_error = float(np.max(np.abs(T.row_sums() - 1.0)))
    run.criteria.append(check('row_sums', row_error <= 1e-10, 'max |row sum - 1| = %.3g' % row_error))
    density = run.density()
    run.criteria.append(check('density_residual', density.residual <= cfg.getfloat('tower', 'tol'),
                              'residual=%.3g method=%s' % (density.residual, density.method)))
    run.criteria.append(check('density_floor', density.floor > 0.0, 'floor=%.3g' % density.floor))
    run.entries += [('states', T.n_states), ('censored_mass', T.censored_mass(density.rho)),
                    ('second_eigenvalue', tower.second_eigenvalue(T, density.rho))]
    run.save(tower.project_density(T, density.rho), 'density.csv')
    if cfg.getboolean('tower', 'export'):
        run.save(tower.matrix_table(T), 'matrix.csv', '%.17g')
        run.save(tower.density_table(T, density), 'tower_density.csv', '%.17g')

    phi = stats_engine.make_observable(cfg.get('stats', 'phi'), m)
    psi = stats_engine.make_observable(cfg.get('stats', 'psi'), m)
    if not (phi.quotient and psi.quotient):
        raise ConfigError("spectral correlations need observables of the unstable coordinate only")
    n_values = run.n_values()
    series = stats_engine.correlation_spectral(T, density.rho, stats_engine.discretize_observable(phi, T, m),
                                               stats_engine.discretize_observable(psi, T, m), n_values)
    run.save(series.table(), 'spectra.csv')
    positive = series.c_values > 1e-14
    try:
        fit = stats_engine.fit_slope(n_values[positive], series.c_values[positive])
    except DegenerateWindow as e:
        run.criteria.append(Criterion('correlation_decay_spectral', INCONCLUSIVE, str(e)))
    else:
        run.add_slope('C_n_spectral', fit.slope, fit.ci)
        run.criteria.append(bound_criterion('correlation_decay_spectral', fit.slope, fit.ci,
                                            run.targets['correlation'], cfg.getfloat('targets', 'corr_tol')))

    points = cfg.getint('stats', 'compare_points')
    if points > 0:
        idx = np.unique(np.linspace(0, len(n_values) - 1, points).astype(int))
        mc = stats_engine.correlation_mc(phi, psi, n_values[idx], m, cfg.getint('stats', 'walkers'),
                                         cfg.getint('stats', 'length'), cfg.getint('stats', 'burn_in'),
                                         _stride(cfg), run.child_seed(SPECTRA), run.shards, run.workers)
        slack = cfg.getfloat('stats', 'spectral_slack')
        gap = np.abs(mc.signed - series.signed[idx])
        agree = gap <= mc.ci + slack
        run.save(pd.DataFrame({'n': n_values[idx], 'spectral': series.signed[idx], 'monte_carlo': mc.signed,
                               'ci': mc.ci, 'agree': agree}), 'spectra_vs_mc.csv')
        run.criteria.append(check('spectral_matches_mc', bool(agree.all()),
                                  '%d of %d points within CI + %g' % (agree.sum(), len(agree), slack)))
    return run


def run_couple(run):
    cfg, m = run.cfg, run.model
    rng = run.rng(COUPLE)
    C_F, beta = tower.jacobian_regularity(m, cfg.getint('coupling', 'regularity_pairs'), rng)
    beta = cfg.optional('coupling', 'beta') or beta
    ccfg = coupling.CouplingConfig.from_regularity(C_F, beta, run.targets['zeta'],
                                                   rho=cfg.optional('coupling', 'rho'),
                                                   theta=cfg.optional('coupling', 'theta'),
                                                   margin=cfg.getfloat('coupling', 'k_margin'),
                                                   i0=cfg.optional('coupling', 'i0', int))
    constraints = ccfg.constraint_report()
    logger.info("%r constraints %s", ccfg, constraints)
    run.entries += [('C_F', C_F), ('beta', beta), ('K', ccfg.K), ('rho', ccfg.rho), ('i0', ccfg.i0)]
    run.entries += [('constraint_%s' % key, value) for key, value in sorted(constraints.items())]

    density_x = coupling.make_density(cfg.get('coupling', 'density_x'), m)
    density_y = coupling.make_density(cfg.get('coupling', 'density_y'), m)
    k_max = cfg.getint('coupling', 'k_max')
    cap = cfg.getint('coupling', 'cap')
    grid = coupling.CouplingGrid(m, density_x, density_y, cfg.getint('coupling', 'grid'), k_max, cap)
    state = coupling.run_recursion(grid, ccfg, cfg.optional('coupling', 'i_max', int),
                                   cfg.getboolean('coupling', 'i0_auto'))
    steps = state.table()
    run.save(steps, 'coupling_steps.csv')
    run.entries.append(('i0_used', state.i0))
    coupled = steps[steps['cells'] > 0]
    dirty = set(i for i, _, violations in state.ratios if violations) & set(coupled['i'])
    clean = coupled[~coupled['i'].isin(dirty)]
    run.criteria.append(check('density_decrease', bool(clean['decrease_ok'].all()),
                              '%d recursion steps with a clean ratio check' % len(clean)))
    if dirty:
        listed = ','.join(str(i) for i in sorted(dirty))
        run.criteria.append(Criterion('ratio_bound', INCONCLUSIVE, 'violations at i=%s' % listed))
    else:
        run.criteria.append(Criterion('ratio_bound', PASS, '%d coupled steps checked' % len(coupled)))
    residual = float(coupled['marginal_residual'].max()) if len(coupled) else 0.0
    run.criteria.append(check('marginal_residual', residual <= 1e-10, 'max residual %.3g' % residual))

    pairs = coupling.sample_stopping_times(m, density_x, density_y, cfg.getint('coupling', 'pairs'),
                                           run.child_seed(COUPLE), cap, k_max, run.shards, run.workers)
    window = (cfg.getint('coupling', 'window_lo'), cfg.getint('coupling', 'window_hi'))
    first = pairs.first
    try:
        est = return_times.tail_histogram(first[first > 0], window, pairs.censored,
                                          cfg.getint('tails', 'min_samples'), cfg.getint('tails', 'bootstrap'),
                                          run.child_seed(COUPLE))
    except (DegenerateSupport, InsufficientSamples) as e:
        run.criteria.append(Criterion('T_tail', INCONCLUSIVE, str(e)))
    else:
        run.save(est.table(), 'T_tail.csv')
        run.add_slope('T_tail', est.slope, est.slope_ci)
        run.criteria.append(band_criterion('T_tail', est.slope, est.slope_ci, run.targets['coupling'],
                                           cfg.getfloat('targets', 'coupling_tol')))

    n_values = logGrid(window[0], window[1])
    direct = coupling.direct_tv(run.transfer(), m, density_x, density_y, n_values)
    table = coupling.proposition_c_assemble(pairs, ccfg, n_values, direct, cfg.getfloat('coupling', 'tolerance'),
                                            state.i0)
    run.save(table, 'coupling.csv')
    run.criteria.append(check('tv_below_bound', bool(table['holds'].all()),
                              '%d of %d n' % (table['holds'].sum(), len(table))))
    try:
        k2 = coupling.increment_domination_check(pairs, cfg.getint('coupling', 'increment_samples'))
    except InsufficientSamples as e:
        logger.info("increment domination check skipped: %s", e)
    else:
        run.save(k2, 'increments_T.csv')
        run.entries.append(('k2_max', float(k2['k2'].max())))
    return run


def _contraction_curve(pairs, horizon, m):
    reports = [check_contraction(x.base, y.base, horizon, m) for x, y in pairs]
    return np.max([r.running_sup for r in reports], axis=0)


def _checkpoints(curve):
    n = len(curve)
    return [curve[max(k, 1) - 1] for k in (n // 8, n // 4, n // 2, n)]


def run_validate(run):
    cfg, m = run.cfg, run.model
    rng = run.rng(VALIDATE)
    factor = cfg.getfloat('validate', 'envelope_factor')
    n_pairs = cfg.getint('validate', 'pairs')
    horizon = cfg.getint('validate', 'horizon')

    problems = markov_crossing_check(m)
    run.criteria.append(check('markov_crossing', not problems, '; '.join(problems)))

    stable = tower.sample_base_pairs(m, n_pairs, rng, 'stable')
    unstable = tower.sample_base_pairs(m, n_pairs, rng, 'unstable', cfg.getfloat('validate', 'delta'))
    rows = []
    for name, pairs in (('contraction_stable', stable), ('contraction_unstable', unstable)):
        values = _contraction_curve(pairs, horizon, m)
        points = _checkpoints(values)
        rows += [(name, k, v) for k, v in zip(('1/8', '1/4', '1/2', '1'), points)]
        run.criteria.append(check(name, envelope_stable(points, factor), 'envelope=%.4g' % values[-1]))

    results = [return_times.distortion_check(x.base, y.base, m) for x, y in unstable]
    C, beta = return_times.fit_distortion_rate(results)
    run.save(pd.DataFrame({'separation': [r.separation for r in results],
                           'log_ratio': [r.log_ratio for r in results],
                           'same_cylinder': [r.same_cylinder for r in results]}), 'distortion.csv')
    if math.isnan(beta):
        run.criteria.append(Criterion('distortion_rate', INCONCLUSIVE, 'too few separated pairs'))
    else:
        run.entries += [('distortion_C', C), ('distortion_beta', beta)]
        run.criteria.append(check('distortion_rate', beta < 1.0, 'C=%.4g beta=%.4f' % (C, beta)))

    envelopes = []
    for k in cfg.getlist('validate', 'diameter_k', int):
        report = tower.diameter_check(k, unstable, m)
        envelopes.append(report.envelope)
        rows.append(('diameter', k, report.envelope))
    run.criteria.append(check('diameter', envelope_stable(envelopes, factor),
                              'envelopes=%s' % ','.join('%.4g' % e for e in envelopes)))
    run.save(pd.DataFrame(rows, columns=['check', 'horizon', 'envelope']), 'validate.csv')
    return run_cohomology(run)


def run_cohomology(run):
    cfg, m = run.cfg, run.model
    rng = run.rng(COHOMOLOGY)
    phi = stats_engine.make_observable(cfg.get('cohomology', 'observable'), m).estimate(m, rng)
    N = cfg.getint('cohomology', 'terms')
    n_pairs = cfg.getint('cohomology', 'pairs')
    delta = cfg.getfloat('cohomology', 'delta')
    sep_cap = cfg.getint('cohomology', 'separation_cap')

    stable = tower.sample_base_pairs(m, min(n_pairs, 50), rng, 'stable')
    points = [x for x, _ in stable]
    values = [cohomology.psi(t, phi, N, m) for t in points]
    residual = max(v.residual for v in values)
    mismatch = max(v.mismatch for v in values)
    run.save(pd.DataFrame({'a': [t.base.a for t in points], 'b': [t.base.b for t in points],
                           'psi': [v.value for v in values], 'chi': [v.chi_here for v in values],
                           'tail_bound': cohomology.tail_bound(phi, N, m)}), 'cohomology.csv')
    run.criteria.append(check('decomposition_residual', residual <= 1e-12,
                              'residual=%.3g closed_form_gap=%.3g' % (residual, mismatch)))

    Ns = sorted(set(max(1, N // k) for k in (8, 4, 2, 1)))
    gaps = cohomology.stable_pair_gaps(stable[:10], phi, Ns, m)
    listed = ','.join('%.3g' % g for g in gaps)
    run.entries.append(('psi_stable_gaps', listed))
    run.criteria.append(check('psi_future_coordinates', bool(gaps[-1] <= gaps[0]), 'gaps=%s' % listed))

    alpha = run.tau + 1.0
    theta_prime = alpha * phi.eta - 1.0
    D = []
    for _ in range(2):
        px, py, s = cohomology.sample_psi_pairs(m, phi, n_pairs, N, rng, delta, sep_cap)
        D.append(cohomology.verify_gtheta(px, py, s, theta_prime).D)
    gap = relative_gap(D)
    run.entries += [('D_psi', '%.6g,%.6g' % tuple(D)), ('D_psi_gap', gap)]
    run.criteria.append(check('psi_regularity', gap <= 0.1, 'D=%.4g,%.4g gap=%.3f' % (D[0], D[1], gap)))

    start = next((t for t in points if t.base.b != m.reference_b), None)
    if start is not None:
        try:
            fit = cohomology.chi_cauchy_rate(start, phi, logGrid(4, N), m)
        except DegenerateWindow as e:
            run.criteria.append(Criterion('chi_truncation_rate', INCONCLUSIVE, str(e)))
        else:
            run.add_slope('chi_cauchy', fit.slope, fit.ci)
            run.criteria.append(band_criterion('chi_truncation_rate', fit.slope, fit.ci, 1.0 - alpha * phi.eta,
                                               cfg.getfloat('targets', 'cohomology_tol')))
    leaf_pairs = [(x.base, y.base) for x, y in tower.sample_base_pairs(m, min(n_pairs, 50), rng, 'unstable', delta)]
    run.entries.append(('separation_envelope', cohomology.separation_distance_envelope(leaf_pairs, m, alpha, sep_cap)))
    return run


PIPELINES = {
    'validate': [run_validate],
    'tails': [run_tails],
    'correlations': [run_correlations],
    'ld': [run_ld],
    'spectra': [run_spectra],
    'couple': [run_couple],
    'all': [run_validate, run_tails, run_correlations, run_ld, run_spectra, run_couple],
}
