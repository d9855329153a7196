#!python3

## Import General Tools
import numpy as np
from scipy import special

from .numerics import erf_inv, integrate_to_infinity


class AnalysisError(ValueError): pass


euler_gamma = 0.577215664901533


##-------------------------------------------------------------------------
## GaussianRateModel
##-------------------------------------------------------------------------
class GaussianRateModel():
    '''Gaussian approximation N(mu, var) of the single state rate.

    Attributes
    ----------
    mu : float
        Mean rate in bits/s/Hz.

    var : float
        Variance of the rate.
    '''
    def __init__(self, mu, var):
        self.mu = float(mu)
        self.var = float(var)
        self.validate()


    def validate(self):
        if not np.isfinite(self.mu) or not np.isfinite(self.var):
            raise AnalysisError(f'Non-finite rate model ({self.mu}, '
                                f'{self.var})')
        if self.var < 0:
            raise AnalysisError(f'var must be >= 0, got {self.var}')


    @property
    def sigma(self):
        return np.sqrt(self.var)


    def quantile(self, p):
        '''Inverse CDF, mu - sqrt(2 var) erf_inv(1 - 2p).'''
        if not 0 < p < 1:
            raise AnalysisError(f'p must be in (0, 1), got {p}')
        return self.mu - np.sqrt(2 * self.var) * erf_inv(1 - 2 * p)


    def to_dict(self):
        return {'mu': self.mu, 'var': self.var}


    def __repr__(self):
        return f'GaussianRateModel(mu={self.mu:.4g}, var={self.var:.4g})'


def _check_mu(model):
    if not model.mu > 0:
        raise AnalysisError(f'Throughput gains need mu > 0, got {model.mu}')


def _check_psi(psi, minimum=1):
    if isinstance(psi, bool) or int(psi) != psi or psi < minimum:
        raise AnalysisError(f'psi must be an integer >= {minimum}, got {psi}')
    return int(psi)


def _check_eps(eps):
    if not 0 < eps < 1:
        raise AnalysisError(f'eps must be in (0, 1), got {eps}')


##-------------------------------------------------------------------------
## Average throughput gain
##-------------------------------------------------------------------------
def avg_gain_integral(model, psi, abs_tol=1e-8):
    '''Average gain of the best of psi i.i.d. states,
    integral over x >= 0 of (1/mu)(1 - Phi((x - mu)/sigma)^psi).

    The lower limit 0 drops the mass of the rate model below zero, so for
    small mu/sigma this differs from E[max]/mu by a term of order
    Phi(-mu/sigma).
    '''
    _check_mu(model)
    psi = _check_psi(psi)
    mu, sigma = model.mu, model.sigma
    if sigma == 0:
        return 1.0

    def integrand(x):
        # 1 - Phi^psi, formed from log Phi to keep precision in the tails
        return -np.expm1(psi * special.log_ndtr((x - mu) / sigma)) / mu

    points = [mu]
    if psi > 1:
        points.append(mu + sigma * np.sqrt(2 * np.log(psi)))
    value, error = integrate_to_infinity(integrand, 0.0, abs_tol=abs_tol,
                                         points=points,
                                         initial_span=mu + sigma)
    return value


def gauss_max_mean_exact(n):
    '''Mean of the maximum of n standard normals in closed form, n = 1..5.
    '''
    values = {1: 0.0,
              2: np.pi**-0.5,
              3: 1.5 * np.pi**-0.5,
              4: 3 * np.pi**-1.5 * np.arccos(-1 / 3),
              5: 2.5 * np.pi**-1.5 * np.arccos(-23 / 27),
              }
    if n not in values or isinstance(n, bool):
        raise AnalysisError(f'Closed form only for n in 1..5, got {n}')
    return float(values[n])


def gauss_max_mean(n, abs_tol=1e-10):
    '''Mean of the maximum of n standard normals by quadrature,
    E = int_0^inf (1 - Phi^n) dx - int_0^inf Phi(-x)^n dx.
    '''
    n = _check_psi(n)
    if n == 1:
        return 0.0
    upper, _ = integrate_to_infinity(
                    lambda x: -np.expm1(n * special.log_ndtr(x)), 0.0,
                    abs_tol=abs_tol, points=[np.sqrt(2 * np.log(n))])
    lower, _ = integrate_to_infinity(
                    lambda x: np.exp(n * special.log_ndtr(-x)), 0.0,
                    abs_tol=abs_tol)
    return upper - lower


def avg_gain_small(model, psi):
    '''1 + (sigma/mu) E_psi for psi = 1..5.'''
    _check_mu(model)
    if psi not in (1, 2, 3, 4, 5):
        raise AnalysisError(f'avg_gain_small needs psi in 1..5, got {psi}')
    return 1 + model.sigma / model.mu * gauss_max_mean_exact(psi)


def avg_gain_large(model, psi):
    '''Gumbel approximation of the average gain for large psi.'''
    _check_mu(model)
    psi = _check_psi(psi, minimum=2)
    spread = np.sqrt(2 * model.var) / model.mu
    return 1 + spread * ((1 - euler_gamma) * erf_inv(1 - 2 / psi)
                         + euler_gamma * erf_inv(1 - 2 / (np.e * psi)))


def avg_gain_asymptotic(model, psi):
    '''Leading sqrt(ln psi) growth of the average gain.'''
    _check_mu(model)
    psi = _check_psi(psi, minimum=2)
    return np.sqrt(2 * model.var) / model.mu * np.sqrt(np.log(psi))


##-------------------------------------------------------------------------
## Outage throughput gain
##-------------------------------------------------------------------------
def outage_rate(model, eps, psi=1):
    '''eps-quantile of the best of psi states, F^-1(eps^(1/psi)).'''
    _check_eps(eps)
    psi = _check_psi(psi)
    return model.mu - np.sqrt(2 * model.var) * erf_inv(1 - 2 * eps**(1 / psi))


def _outage_denominator(model, eps):
    _check_eps(eps)
    denominator = outage_rate(model, eps, psi=1)
    if not denominator > 0:
        raise AnalysisError(f'Single state outage rate at eps={eps} is '
                            f'{denominator:.4g} <= 0 for {model}')
    return denominator


def outage_gain(model, psi, eps):
    '''Ratio of the best-of-psi and single state eps-outage rates.'''
    denominator = _outage_denominator(model, eps)
    return outage_rate(model, eps, psi=psi) / denominator


def outage_gain_asymptotic(model, psi, eps):
    '''sqrt(2 var) sqrt(ln psi) over the single state outage rate.'''
    denominator = _outage_denominator(model, eps)
    psi = _check_psi(psi, minimum=2)
    return np.sqrt(2 * model.var) * np.sqrt(np.log(psi)) / denominator


##-------------------------------------------------------------------------
## states_for_target_gain
##-------------------------------------------------------------------------
def states_for_target_gain(model, target, eps=None, psi_max=1024):
    '''Smallest number of states whose average gain (eps None) or eps
    outage gain reaches `target`.  Returns None if psi_max states are not
    enough.
    '''
    psi_max = _check_psi(psi_max)
    for psi in range(1, psi_max + 1):
        if eps is None:
            gain = avg_gain_integral(model, psi)
        else:
            gain = outage_gain(model, psi, eps)
        if gain >= target:
            return psi
    return None
