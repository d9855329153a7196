#!python3

## Import General Tools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from math import comb
from pathlib import Path
from warnings import warn
import numpy as np
from scipy import stats
from astropy.table import Table

from .numerics import logdet2_capacity
from .channel import realize_channels
from .beamspace import bases_for, to_virtual
from .rate import CapacityError, best_submatrix_exhaustive
from .fastsel import issa_select
from .analysis import GaussianRateModel

logger = logging.getLogger(__name__)


class SimLabError(Exception): pass


class SimLabWarning(UserWarning): pass


selector_names = ['fast', 'exhaustive']
state_rule_names = ['max', 'determinant']
report_schema = 1


##-------------------------------------------------------------------------
## Simulation
##-------------------------------------------------------------------------
def _simulate_trial(cfg, trial, psi, exhaustive):
    '''Per state ISSA rate, full channel log-det and (optionally) exhaustive
    rate of one realization.
    '''
    channels = realize_channels(cfg, trial, psi=psi)
    basis_rx, basis_tx = bases_for(cfg)
    scale = cfg.rho / cfg.l_t
    issa = np.zeros(psi)
    logdet = np.zeros(psi)
    best = np.full(psi, np.nan)
    for state, h in enumerate(channels.matrices):
        hv = to_virtual(h, basis_rx, basis_tx)
        issa[state] = issa_select(hv, cfg, state=state).rate_bits
        logdet[state] = logdet2_capacity(h, scale)
        if exhaustive:
            best[state] = best_submatrix_exhaustive(hv, cfg.l_r, cfg.l_t,
                                                    cfg.rho,
                                                    enum_cap=cfg.enum_cap
                                                    ).rate_bits
    return issa, logdet, best


def simulate(cfg, selectors=('fast',), psi_max=None, workers=1):
    '''Simulate cfg.trials realizations of psi_max states each and return
    the `RateTable` every later statistic is computed from.

    Trials are independent; with workers > 1 they are spread over a process
    pool and merged in trial order, so the table does not depend on the
    number of workers.
    '''
    unknown = [s for s in selectors if s not in selector_names]
    if unknown:
        raise SimLabError(f'Unknown selector "{unknown[0]}"')
    psi_max = cfg.psi if psi_max is None else int(psi_max)
    if psi_max < 1:
        raise SimLabError(f'psi_max must be >= 1, got {psi_max}')
    exhaustive = 'exhaustive' in selectors
    if exhaustive:
        count = comb(cfg.n_r, cfg.l_r) * comb(cfg.n_t, cfg.l_t)
        if count > cfg.enum_cap:
            raise CapacityError(f'Exhaustive search over {count} submatrices '
                                f'exceeds enum_cap={cfg.enum_cap}; use desk '
                                f'scale parameters (e.g. n_r=n_t=9, '
                                f'l_r=l_t=2) or the fast selector')
    logger.info(f'Simulating {cfg.trials} trials x {psi_max} states of '
                f'{cfg.name} (selectors: {", ".join(selectors)})')
    run_trial = partial(_simulate_trial, cfg, psi=psi_max,
                        exhaustive=exhaustive)
    trials = range(cfg.trials)
    if workers is not None and workers > 1:
        chunksize = max(1, cfg.trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(run_trial, trials,
                                        chunksize=chunksize))
    else:
        results = []
        for trial in trials:
            results.append(run_trial(trial))
            if (trial + 1) % max(1, cfg.trials // 10) == 0:
                logger.debug(f'  {trial+1}/{cfg.trials} trials done')
    issa = np.array([r[0] for r in results])
    logdet = np.array([r[1] for r in results])
    best = np.array([r[2] for r in results]) if exhaustive else None
    logger.info(f'Simulation done: mean single state ISSA rate '
                f'{issa[:, 0].mean():.4f} bits/s/Hz')
    return RateTable(cfg, issa, logdet, exhaustive=best)


##-------------------------------------------------------------------------
## RateTable
##-------------------------------------------------------------------------
class RateTable():
    '''Per trial, per state rates of one simulation.

    Attributes
    ----------
    cfg : `SystemConfig`
        The simulated configuration.

    issa : ndarray (trials x psi)
        Rate of the ISSA beams of each state.

    logdet : ndarray (trials x psi)
        Full channel log-det of each state, the fast state selection metric.

    exhaustive : ndarray (trials x psi) or None
        Exhaustive search rate of each state, if simulated.
    '''
    def __init__(self, cfg, issa, logdet, exhaustive=None):
        self.cfg = cfg
        self.issa = np.atleast_2d(np.asarray(issa, dtype=float))
        self.logdet = np.atleast_2d(np.asarray(logdet, dtype=float))
        self.exhaustive = None if exhaustive is None else \
                          np.atleast_2d(np.asarray(exhaustive, dtype=float))
        self.validate()


    def validate(self):
        if self.issa.shape != self.logdet.shape:
            raise SimLabError('issa and logdet tables differ in shape')
        if self.exhaustive is not None and \
           self.exhaustive.shape != self.issa.shape:
            raise SimLabError('exhaustive and issa tables differ in shape')


    @property
    def trials(self):
        return self.issa.shape[0]


    @property
    def psi(self):
        return self.issa.shape[1]


    def _check(self, selector, psi):
        if selector not in selector_names:
            raise SimLabError(f'Unknown selector "{selector}"')
        if selector == 'exhaustive' and self.exhaustive is None:
            raise SimLabError('This table was simulated without the '
                              'exhaustive selector')
        if not 1 <= psi <= self.psi:
            raise SimLabError(f'psi={psi} outside the simulated 1..{self.psi}')


    def single(self, selector='fast'):
        '''Per trial rate of state 0.'''
        self._check(selector, 1)
        rates = self.exhaustive if selector == 'exhaustive' else self.issa
        return rates[:, 0].copy()


    def best(self, selector='fast', psi=None, state_rule='max'):
        '''Per trial rate of the selected state among the first psi.

        For the fast selector `state_rule` is 'max' (best ISSA rate) or
        'determinant' (the state of largest full channel log-det).
        '''
        psi = self.psi if psi is None else psi
        self._check(selector, psi)
        if state_rule not in state_rule_names:
            raise SimLabError(f'Unknown state rule "{state_rule}"')
        if selector == 'exhaustive':
            return self.exhaustive[:, :psi].max(axis=1)
        if state_rule == 'max':
            return self.issa[:, :psi].max(axis=1)
        chosen = np.argmax(self.logdet[:, :psi], axis=1)
        return self.issa[np.arange(self.trials), chosen]


    def samples(self, selector='fast', psi=None, state_rule='max'):
        psi = self.psi if psi is None else psi
        return RateSamples(self.single(selector),
                           self.best(selector, psi, state_rule),
                           selector=selector, psi=psi, state_rule=state_rule)


    def samples_table(self, selector='fast'):
        '''Long format table with columns trial, state, rate_bits.'''
        self._check(selector, 1)
        rates = self.exhaustive if selector == 'exhaustive' else self.issa
        trial, state = np.meshgrid(np.arange(self.trials),
                                   np.arange(self.psi), indexing='ij')
        return Table([trial.ravel(), state.ravel(), rates.ravel()],
                     names=['trial', 'state', 'rate_bits'])


    def __repr__(self):
        kind = 'fast' if self.exhaustive is None else 'fast+exhaustive'
        return f'RateTable({self.trials} trials x {self.psi} states, {kind})'


##-------------------------------------------------------------------------
## RateSamples
##-------------------------------------------------------------------------
class RateSamples():
    '''Per trial single state and best state rates under one selector.

    Attributes
    ----------
    single : ndarray
        Rate of state 0 per trial.

    best : ndarray
        Rate of the selected state among the first `psi` per trial.

    selector : str
        'fast' or 'exhaustive'.

    psi : int
        Number of states the best state was chosen from.

    state_rule : str
        How the fast selector picked the state.
    '''
    def __init__(self, single, best=None, selector='fast', psi=1,
                 state_rule='max'):
        self.single = np.asarray(single, dtype=float).ravel()
        self.best = self.single.copy() if best is None else \
                    np.asarray(best, dtype=float).ravel()
        self.selector = selector
        self.psi = psi
        self.state_rule = state_rule
        self.validate()


    def validate(self):
        if self.best.shape != self.single.shape:
            raise SimLabError('single and best samples differ in length')
        if self.selector == 'exhaustive' or self.state_rule == 'max':
            if np.any(self.best < self.single - 1e-12):
                raise SimLabError('best state rate below the single state '
                                  'rate')


    @property
    def trials(self):
        return len(self.single)


    def __repr__(self):
        return (f'RateSamples({self.trials} trials, {self.selector}, '
                f'psi={self.psi})')


def _values(samples):
    if isinstance(samples, RateSamples):
        return samples.single
    return np.asarray(samples, dtype=float).ravel()


##-------------------------------------------------------------------------
## Statistics
##-------------------------------------------------------------------------
def fit_rate_model(samples):
    '''Gaussian model from the single state rates: sample mean and unbiased
    sample variance.
    '''
    values = _values(samples)
    if len(values) < 2:
        raise SimLabError(f'Need at least 2 samples to fit a rate model, got '
                          f'{len(values)}')
    return GaussianRateModel(np.mean(values), np.var(values, ddof=1))


def moments(samples):
    '''Sample skewness and excess kurtosis of the single state rates.'''
    values = _values(samples)
    if np.ptp(values) == 0:
        return {'skewness': 0.0, 'excess_kurtosis': 0.0}
    return {'skewness': float(stats.skew(values)),
            'excess_kurtosis': float(stats.kurtosis(values, fisher=True))}


def empirical_quantile(values, eps):
    '''Lower eps-quantile: the k-th smallest value with k = floor(eps n).
    '''
    values = np.sort(np.asarray(values, dtype=float).ravel())
    k = int(np.floor(eps * len(values)))
    if k < 1:
        raise SimLabError(f'{len(values)} samples are too few for the '
                          f'eps={eps} quantile')
    return float(values[k - 1])


def _table_for(cfg, selector, psi_list, table, workers):
    psi_list = [int(p) for p in psi_list]
    if len(psi_list) == 0:
        raise SimLabError('Empty psi list')
    if table is None:
        chosen = ('fast', 'exhaustive') if selector == 'exhaustive' else \
                 ('fast',)
        table = simulate(cfg, selectors=chosen, psi_max=max(psi_list),
                         workers=workers)
    return psi_list, table


def empirical_avg_gain(cfg, selector, psi_list, table=None, workers=1,
                       state_rule='max'):
    '''Mean best-of-psi rate over the mean single state rate, for each psi
    in psi_list.  All psi share one simulation.
    '''
    psi_list, table = _table_for(cfg, selector, psi_list, table, workers)
    single = table.single(selector).mean()
    if not single > 0:
        raise SimLabError('Mean single state rate is zero')
    gains = {}
    for psi in psi_list:
        gains[psi] = float(table.best(selector, psi, state_rule).mean()
                           / single)
    return gains


def empirical_outage_gain(cfg, selector, psi_list, eps, table=None,
                          workers=1, state_rule='max'):
    '''Ratio of the best-of-psi and single state eps-outage rates for each
    psi in psi_list.
    '''
    if not 0 < eps < 1:
        raise SimLabError(f'eps must be in (0, 1), got {eps}')
    trials = cfg.trials if table is None else table.trials
    if trials * eps < 20:
        raise SimLabError(f'trials * eps = {trials * eps:g} < 20: too few '
                          f'trials for the eps={eps} outage rate')
    if trials * eps < 50:
        warn(f'Outage rate at eps={eps} rests on {int(trials * eps)} '
             f'order statistics', category=SimLabWarning)
    psi_list, table = _table_for(cfg, selector, psi_list, table, workers)
    single = empirical_quantile(table.single(selector), eps)
    if not single > 0:
        raise SimLabError(f'Single state outage rate at eps={eps} is zero')
    gains = {}
    for psi in psi_list:
        best = table.best(selector, psi, state_rule)
        gains[psi] = empirical_quantile(best, eps) / single
    return gains


def loss_ratio(cfg, psi_list, table=None, workers=1,
               state_rule='determinant'):
    '''(mean exhaustive rate - mean fast rate) / mean exhaustive rate.

    With the default state_rule the fast selector chooses its state by the
    full channel log-det.  state_rule='max' keeps the best ISSA state, which
    isolates the loss of the beam selection alone.
    '''
    psi_list, table = _table_for(cfg, 'exhaustive', psi_list, table, workers)
    ratios = {}
    for psi in psi_list:
        best = table.best('exhaustive', psi).mean()
        fast = table.best('fast', psi, state_rule=state_rule).mean()
        ratios[psi] = float((best - fast) / best)
    return ratios


def pdf_export(samples, bins=50):
    '''Density histogram of the single state rates and the fitted Gaussian
    density at the bin centers.
    '''
    if bins < 5:
        raise SimLabError(f'bins must be >= 5, got {bins}')
    values = _values(samples)
    model = fit_rate_model(values)
    density, edges = np.histogram(values, bins=bins, density=True)
    centers = (edges[:-1] + edges[1:]) / 2
    if model.var > 0:
        fit = stats.norm.pdf(centers, loc=model.mu, scale=model.sigma)
    else:
        fit = np.zeros_like(centers)
    return Table([centers, density, fit],
                 names=['bin_center', 'density', 'fit_density'])


##-------------------------------------------------------------------------
## ExperimentReport
##-------------------------------------------------------------------------
class ExperimentReport():
    '''A JSON report of one experiment.

    Attributes
    ----------
    experiment : str
        The experiment name, e.g. "gain-avg".

    cfg : `SystemConfig` or None
        Config echo; None for pure formula evaluations.

    results : dict
        Experiment specific numbers (models, gains, quantiles, ratios).

    notes : list of str
        Free text caveats carried into the report.

    runtime : float or None
        Wall time in seconds; left out of the report when None.
    '''
    def __init__(self, experiment, cfg, results=None, notes=None,
                 runtime=None):
        self.experiment = experiment
        self.cfg = cfg
        self.results = {} if results is None else results
        self.notes = [] if notes is None else list(notes)
        self.runtime = runtime


    def validate(self):
        def check(value, path):
            if isinstance(value, dict):
                for k, v in value.items():
                    check(v, f'{path}.{k}')
            elif isinstance(value, (list, tuple)):
                for i, v in enumerate(value):
                    check(v, f'{path}[{i}]')
            elif isinstance(value, float) and not np.isfinite(value):
                raise SimLabError(f'Non-finite value in report at {path}')
        check(self.results, 'results')


    def to_dict(self):
        self.validate()
        d = {'schema': report_schema,
             'experiment': self.experiment,
             'seed': None if self.cfg is None else int(self.cfg.seed),
             'config': None if self.cfg is None else self.cfg.to_dict(),
             'results': self.results,
             'notes': self.notes}
        if self.runtime is not None:
            d['runtime_s'] = float(self.runtime)
        return d


    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


    def write(self, file):
        p = Path(file).expanduser().absolute()
        if p.exists(): p.unlink()
        with open(p, 'w') as FO:
            FO.write(self.to_json() + '\n')


    def __repr__(self):
        return f'ExperimentReport({self.experiment}, {self.cfg})'
