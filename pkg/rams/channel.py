#!python3

## Import General Tools
import json
from pathlib import Path
import numpy as np

from .numerics import RandomStream, as_cmatrix


class ChannelError(Exception): pass


##-------------------------------------------------------------------------
## steering_vector
##-------------------------------------------------------------------------
def steering_vector(angle, n, spacing_ratio=0.5):
    '''Return the n x 1 ULA response with entry k = exp(-j 2 pi v k), where
    v = spacing_ratio * sin(angle) is the normalized spatial angle.
    '''
    if n < 1:
        raise ChannelError(f'n must be >= 1, got {n}')
    v = spacing_ratio * np.sin(angle)
    k = np.arange(n)
    return np.exp(-2j * np.pi * v * k).reshape(n, 1)


def steering_matrix(angles, n, spacing_ratio=0.5):
    '''Steering vectors for a 1D array of angles, one per column.
    '''
    v = spacing_ratio * np.sin(np.asarray(angles, dtype=float).ravel())
    k = np.arange(n).reshape(n, 1)
    return np.exp(-2j * np.pi * k * v)


##-------------------------------------------------------------------------
## ClusterGeometry
##-------------------------------------------------------------------------
class ClusterGeometry():
    '''The multipath parameters of one reconfiguration state.

    Attributes
    ----------
    cluster_aoa, cluster_aod : ndarray (n_cl,)
        Mean angle of arrival/departure of each cluster in radians.

    cluster_power : ndarray (n_cl,)
        Average power of the ray gains in each cluster.

    ray_aoa, ray_aod : ndarray (n_cl, n_ray)
        Per ray angles in radians, within [-pi/2, pi/2].

    gains : ndarray (n_cl, n_ray), complex
        Per ray complex gains.
    '''
    def __init__(self, cluster_aoa, cluster_aod, cluster_power, ray_aoa,
                 ray_aod, gains):
        self.cluster_aoa = np.asarray(cluster_aoa, dtype=float)
        self.cluster_aod = np.asarray(cluster_aod, dtype=float)
        self.cluster_power = np.asarray(cluster_power, dtype=float)
        self.ray_aoa = np.atleast_2d(np.asarray(ray_aoa, dtype=float))
        self.ray_aod = np.atleast_2d(np.asarray(ray_aod, dtype=float))
        self.gains = np.atleast_2d(np.asarray(gains, dtype=np.complex128))
        self.validate()


    def validate(self):
        shape = self.gains.shape
        if self.ray_aoa.shape != shape or self.ray_aod.shape != shape:
            raise ChannelError(f'ray angle arrays must match the gain array '
                               f'shape {shape}')
        for name in ['ray_aoa', 'ray_aod']:
            if np.any(np.abs(getattr(self, name)) > np.pi / 2 + 1e-12):
                raise ChannelError(f'{name} outside [-pi/2, pi/2]')


    @property
    def n_cl(self):
        return self.gains.shape[0]


    @property
    def n_ray(self):
        return self.gains.shape[1]


    def __repr__(self):
        return f'ClusterGeometry({self.n_cl} clusters x {self.n_ray} rays)'


def cluster_powers(cfg):
    '''Per cluster ray power sigma^2_{alpha,i}.  The powers sum to
    1/n_ray so that E||H||_F^2 = n_r * n_t.
    '''
    if cfg.cluster_power == 'equal':
        weights = np.ones(cfg.n_cl)
    else:
        weights = np.exp(-cfg.cluster_decay * np.arange(cfg.n_cl))
    return weights / weights.sum() / cfg.n_ray


##-------------------------------------------------------------------------
## draw_geometry
##-------------------------------------------------------------------------
def draw_geometry(cfg, stream):
    '''Draw the cluster geometry of one state.

    Cluster means are uniform on [-pi/2, pi/2].  Ray angles are uniform
    around the mean with half width sqrt(3)*sigma, which gives a standard
    deviation of sigma, and are clipped to [-pi/2, pi/2].  Gains are
    CN(0, sigma^2_{alpha,i}).
    '''
    half = np.pi / 2
    cluster_aoa = stream.uniform(-half, half, size=cfg.n_cl)
    cluster_aod = stream.uniform(-half, half, size=cfg.n_cl)
    shape = (cfg.n_cl, cfg.n_ray)
    width_r = np.sqrt(3) * cfg.sigma_aoa
    width_t = np.sqrt(3) * cfg.sigma_aod
    offsets_r = stream.uniform(-1.0, 1.0, size=shape) * width_r
    offsets_t = stream.uniform(-1.0, 1.0, size=shape) * width_t
    ray_aoa = np.clip(cluster_aoa[:, None] + offsets_r, -half, half)
    ray_aod = np.clip(cluster_aod[:, None] + offsets_t, -half, half)
    power = cluster_powers(cfg)
    gains = stream.complex_normal(size=shape, variance=power[:, None])
    return ClusterGeometry(cluster_aoa, cluster_aod, power, ray_aoa, ray_aod,
                           gains)


def synthesize(geometry, n_r, n_t, spacing_ratio=0.5):
    '''H = sum over rays of gain * a_R(aoa) a_T(aod)^H.
    '''
    a_r = steering_matrix(geometry.ray_aoa, n_r, spacing_ratio)
    a_t = steering_matrix(geometry.ray_aod, n_t, spacing_ratio)
    return (a_r * geometry.gains.ravel()) @ a_t.conj().T


##-------------------------------------------------------------------------
## ChannelSet
##-------------------------------------------------------------------------
class ChannelSet():
    '''The channel matrices of all reconfiguration states for one
    realization.

    Attributes
    ----------
    matrices : list of ndarray (n_r x n_t)
        One complex matrix per state, state 0 first.

    trial_index : int or None
        The realization these channels belong to.
    '''
    def __init__(self, matrices, trial_index=None):
        self.matrices = [as_cmatrix(h, name=f'H[{i}]')
                         for i, h in enumerate(matrices)]
        self.trial_index = trial_index
        self.validate()


    def validate(self):
        if len(self.matrices) == 0:
            raise ChannelError('a ChannelSet needs at least one state')
        shape = self.matrices[0].shape
        for i, h in enumerate(self.matrices):
            if h.shape != shape:
                raise ChannelError(f'State {i} has shape {h.shape}, expected '
                                   f'{shape}')


    @property
    def psi(self):
        return len(self.matrices)


    def prefix(self, psi):
        '''The channel set restricted to the first `psi` states.'''
        return ChannelSet(self.matrices[:psi], trial_index=self.trial_index)


    def to_dict(self, cfg=None):
        states = []
        for i, h in enumerate(self.matrices):
            states.append({'state': i,
                           'matrix': [[[float(z.real), float(z.imag)]
                                       for z in row] for row in h]})
        return {'schema': 1,
                'config': None if cfg is None else cfg.to_dict(),
                'trial_index': self.trial_index,
                'states': states}


    def to_json(self, cfg=None):
        return json.dumps(self.to_dict(cfg=cfg))


    def write(self, file, cfg=None):
        p = Path(file).expanduser().absolute()
        if p.exists(): p.unlink()
        with open(p, 'w') as FO:
            FO.write(self.to_json(cfg=cfg) + '\n')


    def __len__(self):
        return len(self.matrices)


    def __getitem__(self, i):
        return self.matrices[i]


    def __repr__(self):
        n_r, n_t = self.matrices[0].shape
        return (f'ChannelSet(trial={self.trial_index}, {self.psi} states, '
                f'{n_r}x{n_t})')


##-------------------------------------------------------------------------
## realize_channels
##-------------------------------------------------------------------------
def realize_channels(cfg, trial_index, psi=None):
    '''Generate the channel matrices of the first `psi` states (default
    cfg.psi) for realization `trial_index`.  State i draws from the stream
    keyed by (cfg.seed, trial_index, i), so the result does not depend on
    `psi` or on the order of calls.
    '''
    psi = cfg.psi if psi is None else psi
    matrices = []
    for state in range(psi):
        stream = RandomStream.for_state(cfg.seed, trial_index, state)
        geometry = draw_geometry(cfg, stream)
        matrices.append(synthesize(geometry, cfg.n_r, cfg.n_t,
                                   cfg.spacing_ratio))
    return ChannelSet(matrices, trial_index=trial_index)
