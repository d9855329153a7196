#!python3

## Import General Tools
from functools import lru_cache
import numpy as np

from .numerics import as_cmatrix


class BeamspaceError(ValueError): pass


##-------------------------------------------------------------------------
## DFT basis
##-------------------------------------------------------------------------
def grid_angles(n, spacing_ratio=0.5):
    '''Return the virtual grid (normalized spatial angles) and the physical
    angles of the n DFT beams.

    The grid is (i - (n-1)/2)/n for i = 0..n-1 and beam i points at
    arcsin(grid_i / spacing_ratio).
    '''
    if n < 1:
        raise BeamspaceError(f'n must be >= 1, got {n}')
    if not spacing_ratio > 0:
        raise BeamspaceError(f'spacing_ratio must be positive, got '
                             f'{spacing_ratio}')
    grid = (np.arange(n) - (n - 1) / 2) / n
    sines = grid / spacing_ratio
    bad = np.flatnonzero(np.abs(sines) > 1)
    if len(bad) > 0:
        raise BeamspaceError(f'Beam {bad[0]} of {n} has no physical angle at '
                             f'spacing_ratio={spacing_ratio} '
                             f'(|sin| = {abs(sines[bad[0]]):.3f} > 1)')
    return grid, np.arcsin(sines)


def dft_basis(n, spacing_ratio=0.5):
    '''Unitary DFT basis whose column i is the steering vector of beam i
    divided by sqrt(n).  With this orientation H = A_R H_V A_T^H.
    '''
    grid, angles = grid_angles(n, spacing_ratio)
    k = np.arange(n).reshape(n, 1)
    return np.exp(-2j * np.pi * k * grid) / np.sqrt(n)


@lru_cache(maxsize=16)
def _cached_basis(n, spacing_ratio):
    basis = dft_basis(n, spacing_ratio)
    basis.flags.writeable = False
    return basis


def bases_for(cfg):
    '''Read-only (A_R, A_T) for a config, computed once per process.'''
    return (_cached_basis(cfg.n_r, float(cfg.spacing_ratio)),
            _cached_basis(cfg.n_t, float(cfg.spacing_ratio)))


##-------------------------------------------------------------------------
## Transforms
##-------------------------------------------------------------------------
def _check_conformable(h, basis_rx, basis_tx):
    n_r, n_t = h.shape
    if basis_rx.shape != (n_r, n_r) or basis_tx.shape != (n_t, n_t):
        raise BeamspaceError(f'Bases {basis_rx.shape}, {basis_tx.shape} do '
                             f'not conform to a {n_r}x{n_t} matrix')


def to_virtual(h, basis_rx, basis_tx):
    '''H_V = A_R^H H A_T'''
    h = as_cmatrix(h, name='h')
    _check_conformable(h, basis_rx, basis_tx)
    return basis_rx.conj().T @ h @ basis_tx


def from_virtual(hv, basis_rx, basis_tx):
    '''H = A_R H_V A_T^H'''
    hv = as_cmatrix(hv, name='hv')
    _check_conformable(hv, basis_rx, basis_tx)
    return basis_rx @ hv @ basis_tx.conj().T


class VirtualChannel():
    '''A channel in its beamspace representation.

    Attributes
    ----------
    full : ndarray (n_r x n_t), complex
        The virtual channel matrix H_V.

    basis_rx, basis_tx : ndarray, complex
        The DFT bases A_R and A_T used for the transform.
    '''
    def __init__(self, full, basis_rx, basis_tx):
        self.full = as_cmatrix(full, name='full')
        self.basis_rx = basis_rx
        self.basis_tx = basis_tx
        _check_conformable(self.full, basis_rx, basis_tx)


    @classmethod
    def from_channel(cls, h, basis_rx, basis_tx):
        return cls(to_virtual(h, basis_rx, basis_tx), basis_rx, basis_tx)


    def to_antenna(self):
        return from_virtual(self.full, self.basis_rx, self.basis_tx)


    @property
    def shape(self):
        return self.full.shape


    def __repr__(self):
        return f'VirtualChannel({self.shape[0]}x{self.shape[1]})'


##-------------------------------------------------------------------------
## BeamMask
##-------------------------------------------------------------------------
class BeamMask():
    '''The receive and transmit beams kept by the beam selector.

    Attributes
    ----------
    rx_beams : tuple of int
        Distinct 0-based receive beam indices, in selection order.

    tx_beams : tuple of int
        Distinct 0-based transmit beam indices, in selection order.
    '''
    def __init__(self, rx_beams, tx_beams):
        self.rx_beams = tuple(int(i) for i in rx_beams)
        self.tx_beams = tuple(int(j) for j in tx_beams)
        self.validate()


    def validate(self):
        for name, beams in [('rx_beams', self.rx_beams),
                            ('tx_beams', self.tx_beams)]:
            if len(set(beams)) != len(beams):
                raise BeamspaceError(f'{name} has duplicate indices: {beams}')
            if any([b < 0 for b in beams]):
                raise BeamspaceError(f'{name} has negative indices: {beams}')


    @property
    def shape(self):
        return (len(self.rx_beams), len(self.tx_beams))


    def to_dict(self):
        return {'rx_beams': list(self.rx_beams),
                'tx_beams': list(self.tx_beams)}


    def __eq__(self, other):
        if not isinstance(other, BeamMask):
            return NotImplemented
        return (self.rx_beams == other.rx_beams
                and self.tx_beams == other.tx_beams)


    def __hash__(self):
        return hash((self.rx_beams, self.tx_beams))


    def __repr__(self):
        return f'BeamMask(rx={list(self.rx_beams)}, tx={list(self.tx_beams)})'


def _top_indices(values, count):
    '''Indices of the `count` largest values; ties go to the lower index.'''
    order = np.argsort(-np.asarray(values), kind='stable')
    return [int(i) for i in order[:count]]


def magnitude_mask(hv, l_r, l_t):
    '''Keep the l_r rows of largest power, then the l_t columns of largest
    power restricted to those rows.
    '''
    hv = as_cmatrix(hv, name='hv')
    n_r, n_t = hv.shape
    if not 1 <= l_r <= n_r or not 1 <= l_t <= n_t:
        raise BeamspaceError(f'Cannot keep {l_r}x{l_t} beams of a '
                             f'{n_r}x{n_t} matrix')
    power = np.abs(hv)**2
    rows = _top_indices(power.sum(axis=1), l_r)
    cols = _top_indices(power[rows, :].sum(axis=0), l_t)
    return BeamMask(rows, cols)


def threshold_mask(hv, gamma):
    '''Entrywise mask {(i, j): |hv(i,j)|^2 >= gamma * max |hv|^2}.'''
    if not 0 <= gamma <= 1:
        raise BeamspaceError(f'gamma must be in [0, 1], got {gamma}')
    power = np.abs(as_cmatrix(hv, name='hv'))**2
    return power >= gamma * power.max()


def extract(hv, mask):
    '''The sub-channel [hv(i, j)] for i in mask.rx_beams, j in
    mask.tx_beams, in mask order.
    '''
    hv = np.asarray(hv)
    n_r, n_t = hv.shape
    if any([i >= n_r for i in mask.rx_beams]) or \
       any([j >= n_t for j in mask.tx_beams]):
        raise BeamspaceError(f'{mask} is out of range for a {n_r}x{n_t} '
                             f'matrix')
    return hv[np.ix_(mask.rx_beams, mask.tx_beams)]


def captured_power_fraction(hv, mask):
    '''Fraction of ||hv||_F^2 inside the mask (0 for a zero matrix).'''
    total = float(np.sum(np.abs(hv)**2))
    if total == 0:
        return 0.0
    return float(np.sum(np.abs(extract(hv, mask))**2)) / total
