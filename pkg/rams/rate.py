#!python3

## Import General Tools
from itertools import combinations
from math import comb, log2
import numpy as np

from .numerics import logdet2_capacity, logdet2_capacity_batch
from .beamspace import BeamMask, bases_for, to_virtual, extract


class RateError(Exception): pass


class CapacityError(RateError):
    '''Raised when an exhaustive search would enumerate more candidate
    masks than the configured cap.
    '''
    pass


##-------------------------------------------------------------------------
## SelectionOutcome
##-------------------------------------------------------------------------
class SelectionOutcome():
    '''The result of a state and beam selection.

    Attributes
    ----------
    state : int or None
        0-based reconfiguration state, None for a single matrix search.

    mask : `BeamMask`
        Selected receive and transmit beams.

    sub_channel : ndarray (l_r x l_t), complex
        The low dimensional virtual channel inside the mask.

    rate_bits : float
        Achievable rate of the sub-channel in bits/s/Hz.
    '''
    def __init__(self, state, mask, sub_channel, rate_bits):
        self.state = state
        self.mask = mask
        self.sub_channel = sub_channel
        self.rate_bits = float(rate_bits)


    def with_state(self, state):
        return SelectionOutcome(state, self.mask, self.sub_channel,
                                self.rate_bits)


    def to_dict(self):
        return {'state': self.state,
                'mask': self.mask.to_dict(),
                'rate_bits': self.rate_bits}


    def __repr__(self):
        return (f'SelectionOutcome(state={self.state}, {self.mask}, '
                f'rate={self.rate_bits:.4f})')


##-------------------------------------------------------------------------
## rate_of
##-------------------------------------------------------------------------
def rate_of(sub, rho, l_t):
    '''log2|I + (rho/l_t) sub sub^H| with equal power on the l_t streams.
    '''
    if l_t < 1:
        raise RateError(f'l_t must be >= 1, got {l_t}')
    return logdet2_capacity(sub, rho / l_t)


def search_space_size(cfg):
    '''Number of (state, receive set, transmit set) candidates an
    exhaustive selection has to consider.
    '''
    return cfg.psi * comb(cfg.n_t, cfg.l_t) * comb(cfg.n_r, cfg.l_r)


def feedback_bits(cfg):
    '''Bits needed to report the selected state and beam sets.'''
    return log2(search_space_size(cfg))


##-------------------------------------------------------------------------
## Exhaustive search
##-------------------------------------------------------------------------
def best_submatrix_exhaustive(hv, l_r, l_t, rho, enum_cap=10**7):
    '''Search every l_r x l_t submatrix of `hv` for the largest rate.

    Row sets are enumerated lexicographically in the outer loop and column
    sets in the inner loop; the first maximum found is kept, so ties go to
    the lexicographically smallest mask.
    '''
    hv = np.asarray(hv, dtype=np.complex128)
    n_r, n_t = hv.shape
    if not 1 <= l_r <= n_r or not 1 <= l_t <= n_t:
        raise RateError(f'Cannot select {l_r}x{l_t} beams from a '
                        f'{n_r}x{n_t} matrix')
    count = comb(n_r, l_r) * comb(n_t, l_t)
    if count > enum_cap:
        raise CapacityError(f'Exhaustive search over {count} submatrices '
                            f'exceeds enum_cap={enum_cap}; use desk scale '
                            f'parameters (e.g. n_r=n_t=9, l_r=l_t=2) or the '
                            f'fast selector')
    scale = rho / l_t
    col_sets = np.array(list(combinations(range(n_t), l_t)), dtype=int)
    best_rate = -np.inf
    best_mask = None
    for rows in combinations(range(n_r), l_r):
        # (l_r, K, l_t) -> (K, l_r, l_t)
        stack = np.moveaxis(hv[list(rows), :][:, col_sets], 1, 0)
        rates = logdet2_capacity_batch(stack, scale)
        k = int(np.argmax(rates))
        if rates[k] > best_rate:
            best_rate = float(rates[k])
            best_mask = BeamMask(rows, col_sets[k])
    sub = extract(hv, best_mask)
    return SelectionOutcome(None, best_mask, sub, best_rate)


def per_state_exhaustive(channels, cfg):
    '''best_submatrix_exhaustive on the virtual channel of every state.'''
    basis_rx, basis_tx = bases_for(cfg)
    outcomes = []
    for state, h in enumerate(channels.matrices):
        hv = to_virtual(h, basis_rx, basis_tx)
        outcome = best_submatrix_exhaustive(hv, cfg.l_r, cfg.l_t, cfg.rho,
                                            enum_cap=cfg.enum_cap)
        outcomes.append(outcome.with_state(state))
    return outcomes


def best_state_exhaustive(channels, cfg):
    '''The best state and mask over all states; ties go to the lowest
    state.
    '''
    outcomes = per_state_exhaustive(channels, cfg)
    best = outcomes[0]
    for outcome in outcomes[1:]:
        if outcome.rate_bits > best.rate_bits:
            best = outcome
    return best
