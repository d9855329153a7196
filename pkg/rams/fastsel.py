#!python3

## Import General Tools
import numpy as np

from .numerics import as_cmatrix, logdet2_capacity, quadratic_forms
from .beamspace import BeamMask, bases_for, to_virtual, extract
from .rate import RateError, SelectionOutcome, rate_of


##-------------------------------------------------------------------------
## State selection
##-------------------------------------------------------------------------
def full_channel_logdets(channels, rho, l_t):
    '''log2|I + (rho/l_t) H H^H| of every full channel matrix.'''
    return np.array([logdet2_capacity(h, rho / l_t)
                     for h in channels.matrices])


def select_state_fast(channels, rho, l_t):
    '''Index of the state whose full channel has the largest log-det.
    Ties go to the lowest index.
    '''
    return int(np.argmax(full_channel_logdets(channels, rho, l_t)))


##-------------------------------------------------------------------------
## ISSA
##-------------------------------------------------------------------------
def receive_gains(hv, selected, scale):
    '''g_j = h_j (I + scale Hs^H Hs)^-1 h_j^H for every row h_j of `hv`,
    where Hs stacks the rows in `selected`.
    '''
    n_t = hv.shape[1]
    hs = hv[list(selected), :]
    gram = np.eye(n_t) + scale * (hs.conj().T @ hs)
    return quadratic_forms(gram, hv.conj().T)


def transmit_gains(hsub, selected, scale):
    '''h_j^H (I + scale Hs Hs^H)^-1 h_j for every column h_j of `hsub`,
    where Hs holds the columns in `selected`.
    '''
    l_r = hsub.shape[0]
    hs = hsub[:, list(selected)]
    gram = np.eye(l_r) + scale * (hs @ hs.conj().T)
    return quadratic_forms(gram, hsub)


def _greedy(gains_for, power, count):
    selected = []
    for step in range(count):
        if step == 0:
            gains = np.array(power, dtype=float)
        else:
            gains = np.array(gains_for(selected), dtype=float)
        gains[selected] = -np.inf
        selected.append(int(np.argmax(gains)))
    return selected


def issa_receive(hv, l_r, rho, n_t):
    '''Select l_r receive beams one at a time.  The first is the row of
    largest power; each later pick maximizes the rate increment
    h_j (I + (rho/n_t) Hs^H Hs)^-1 h_j^H over the unselected rows.

    Returns the row indices in selection order.
    '''
    hv = as_cmatrix(hv, name='hv')
    if not 1 <= l_r <= hv.shape[0]:
        raise RateError(f'Cannot select {l_r} of {hv.shape[0]} receive beams')
    scale = rho / n_t
    power = np.sum(np.abs(hv)**2, axis=1)
    return _greedy(lambda sel: receive_gains(hv, sel, scale), power, l_r)


def issa_transmit(hsub, l_t, rho):
    '''Select l_t transmit beams of the l_r x n_t matrix `hsub` one at a
    time with scale rho/l_t.

    Returns the column indices in selection order.
    '''
    hsub = as_cmatrix(hsub, name='hsub')
    if not 1 <= l_t <= hsub.shape[1]:
        raise RateError(f'Cannot select {l_t} of {hsub.shape[1]} transmit '
                        f'beams')
    scale = rho / l_t
    power = np.sum(np.abs(hsub)**2, axis=0)
    return _greedy(lambda sel: transmit_gains(hsub, sel, scale), power, l_t)


def receive_scale_antennas(cfg):
    '''The antenna count dividing rho in the receive stage.'''
    return cfg.n_t if cfg.issa_scale == 'antennas' else cfg.l_t


def issa_select(hv, cfg, state=None):
    '''Receive then transmit ISSA on one virtual channel.'''
    rows = issa_receive(hv, cfg.l_r, cfg.rho, receive_scale_antennas(cfg))
    cols = issa_transmit(hv[rows, :], cfg.l_t, cfg.rho)
    mask = BeamMask(rows, cols)
    sub = extract(hv, mask)
    return SelectionOutcome(state, mask, sub, rate_of(sub, cfg.rho, cfg.l_t))


##-------------------------------------------------------------------------
## fast_select
##-------------------------------------------------------------------------
def fast_select(channels, cfg):
    '''Pick the state by its full channel log-det, then its beams by ISSA.
    '''
    state = select_state_fast(channels, cfg.rho, cfg.l_t)
    basis_rx, basis_tx = bases_for(cfg)
    hv = to_virtual(channels.matrices[state], basis_rx, basis_tx)
    return issa_select(hv, cfg, state=state)
