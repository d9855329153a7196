#!python3

## Import General Tools
import json
from pathlib import Path
from warnings import warn
import numpy as np
import yaml
from astropy import units as u


class SystemConfigError(Exception): pass


class SystemConfigWarning(UserWarning): pass


issa_scales = ['antennas', 'streams']
cluster_power_profiles = ['equal', 'exponential']


##-------------------------------------------------------------------------
## SystemConfig
##-------------------------------------------------------------------------
class SystemConfig():
    '''An object to hold all parameters of a simulated reconfigurable antenna
    mmWave MIMO link.

    Attributes
    ----------
    n_r, n_t : int
        Number of receive and transmit antennas (ULA elements).

    l_r, l_t : int
        Number of receive and transmit RF chains.  Must satisfy
        l_t <= l_r <= n_r and l_t <= n_t.

    psi : int
        Number of reconfiguration states.

    rho_db : float
        Transmit power to noise ratio in dB.

    n_cl, n_ray : int
        Clusters per state and rays per cluster.

    sigma_aoa_deg, sigma_aod_deg : float or `u.Quantity`
        Angular spread (standard deviation) of the rays around their
        cluster mean.  Floats are taken as degrees.

    spacing_ratio : float
        Antenna spacing in wavelengths, d/lambda.

    trials : int
        Number of Monte Carlo channel realizations.

    seed : int
        Master seed for all random streams.

    issa_scale : str
        'antennas' divides rho by n_t in the receive beam stage of the fast
        selection; 'streams' divides by l_t in every stage.

    cluster_power : str
        'equal' splits the power evenly over clusters, 'exponential'
        weights cluster i by exp(-cluster_decay * i).

    cluster_decay : float
        Decay rate of the exponential cluster power profile.

    enum_cap : int
        Largest number of (row set, column set) pairs the exhaustive
        search may enumerate per state.
    '''
    def __init__(self, n_r=17, n_t=17, l_r=5, l_t=5, psi=1, rho_db=0.0,
                 n_cl=10, n_ray=8, sigma_aoa_deg=3.0, sigma_aod_deg=3.0,
                 spacing_ratio=0.5, trials=5000, seed=0,
                 issa_scale='antennas', cluster_power='equal',
                 cluster_decay=1.0, enum_cap=10**7, name=None):
        self.n_r = n_r
        self.n_t = n_t
        self.l_r = l_r
        self.l_t = l_t
        self.psi = psi
        self.rho_db = rho_db
        self.n_cl = n_cl
        self.n_ray = n_ray
        self.sigma_aoa_deg = sigma_aoa_deg
        self.sigma_aod_deg = sigma_aod_deg
        self.spacing_ratio = spacing_ratio
        self.trials = trials
        self.seed = seed
        self.issa_scale = issa_scale
        self.cluster_power = cluster_power
        self.cluster_decay = cluster_decay
        self.enum_cap = enum_cap
        self.standardize_units()
        self.validate()
        if name is None:
            self.set_name()
        else:
            self.name = name


    def set_name(self):
        self.name = (f'{self.n_r}x{self.n_t} L={self.l_r}/{self.l_t} '
                     f'psi={self.psi} rho={self.rho_db:g}dB '
                     f'({self.n_cl}cl x {self.n_ray}ray)')


    ##-------------------------------------------------------------------------
    ## Validate
    def validate(self):
        '''Check values and verify that they meet assumptions.

        Check:
        - all counts are positive integers
        - l_t <= l_r <= n_r and l_t <= n_t
        - spacing_ratio > 0, angular spreads >= 0
        - issa_scale and cluster_power are known values

        Warn:
        - n_r or n_t is even (the virtual angle grid assumes odd sizes)
        '''
        for field in ['n_r', 'n_t', 'l_r', 'l_t', 'psi', 'n_cl', 'n_ray',
                      'trials', 'enum_cap']:
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise SystemConfigError(f'{field} must be an integer, '
                                        f'got {value!r}')
            if value < 1:
                raise SystemConfigError(f'{field} must be >= 1, got {value}')
        for field in ['rho_db', 'spacing_ratio', 'cluster_decay']:
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, (int, float, np.number)):
                raise SystemConfigError(f'{field} must be a number, '
                                        f'got {value!r}')
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)):
            raise SystemConfigError(f'seed must be an integer, got {self.seed!r}')
        if not self.l_t <= self.l_r <= self.n_r:
            raise SystemConfigError(f'l_r must satisfy l_t <= l_r <= n_r '
                                    f'(l_t={self.l_t}, l_r={self.l_r}, '
                                    f'n_r={self.n_r})')
        if self.l_t > self.n_t:
            raise SystemConfigError(f'l_t must be <= n_t (l_t={self.l_t}, '
                                    f'n_t={self.n_t})')
        if not np.isfinite(self.rho_db):
            raise SystemConfigError(f'rho_db must be finite, got {self.rho_db}')
        if not self.spacing_ratio > 0:
            raise SystemConfigError(f'spacing_ratio must be positive, got '
                                    f'{self.spacing_ratio}')
        for field in ['sigma_aoa_deg', 'sigma_aod_deg']:
            if getattr(self, field) < 0*u.deg:
                raise SystemConfigError(f'{field} must be >= 0')
        if not self.cluster_decay > 0:
            raise SystemConfigError(f'cluster_decay must be positive, got '
                                    f'{self.cluster_decay}')
        if self.issa_scale not in issa_scales:
            raise SystemConfigError(f'issa_scale "{self.issa_scale}" is not '
                                    f'one of {issa_scales}')
        if self.cluster_power not in cluster_power_profiles:
            raise SystemConfigError(f'cluster_power "{self.cluster_power}" is '
                                    f'not one of {cluster_power_profiles}')
        if not 0 <= self.seed < 2**64:
            raise SystemConfigError(f'seed must be a 64 bit unsigned integer')
        if self.n_r % 2 == 0 or self.n_t % 2 == 0:
            warn(f'Even array size ({self.n_r}x{self.n_t}): the virtual angle '
                 f'grid assumes odd sizes', category=SystemConfigWarning)


    def standardize_units(self):
        '''Store the angular spreads as `u.Quantity` in degrees.
        '''
        for field in ['sigma_aoa_deg', 'sigma_aod_deg']:
            value = getattr(self, field)
            try:
                if not isinstance(value, u.Quantity):
                    value = float(value) * u.deg
                setattr(self, field, value.to(u.deg))
            except (TypeError, ValueError, u.UnitConversionError):
                raise SystemConfigError(f'{field} must be an angle, '
                                        f'got {value}')


    ##-------------------------------------------------------------------------
    ## Derived values
    @property
    def rho(self):
        '''Linear transmit power to noise ratio.'''
        return 10**(self.rho_db / 10)


    @property
    def sigma_aoa(self):
        return self.sigma_aoa_deg.to(u.rad).value


    @property
    def sigma_aod(self):
        return self.sigma_aod_deg.to(u.rad).value


    def replace(self, **kwargs):
        '''Return a copy with some fields overridden.
        '''
        d = self.to_dict()
        d.pop('name')
        d.update(kwargs)
        return SystemConfig(**d)


    ##-------------------------------------------------------------------------
    ## Input/Output
    def to_dict(self):
        return {'name': self.name,
                'n_r': int(self.n_r),
                'n_t': int(self.n_t),
                'l_r': int(self.l_r),
                'l_t': int(self.l_t),
                'psi': int(self.psi),
                'rho_db': float(self.rho_db),
                'n_cl': int(self.n_cl),
                'n_ray': int(self.n_ray),
                'sigma_aoa_deg': float(self.sigma_aoa_deg.value),
                'sigma_aod_deg': float(self.sigma_aod_deg.value),
                'spacing_ratio': float(self.spacing_ratio),
                'trials': int(self.trials),
                'seed': int(self.seed),
                'issa_scale': self.issa_scale,
                'cluster_power': self.cluster_power,
                'cluster_decay': float(self.cluster_decay),
                'enum_cap': int(self.enum_cap),
                }


    @classmethod
    def from_dict(cls, d):
        unknown = sorted(set(d.keys()) - _field_names)
        if unknown:
            raise SystemConfigError(f'Unknown config field "{unknown[0]}"')
        return cls(**d)


    def to_yaml(self):
        return yaml.dump(self.to_dict(), sort_keys=False)


    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


    def write(self, file):
        '''Write the config to a JSON (.json) or YAML (anything else) file.
        '''
        self.validate()
        p = Path(file).expanduser().absolute()
        if p.exists(): p.unlink()
        with open(p, 'w') as FO:
            if p.suffix.lower() == '.json':
                FO.write(self.to_json() + '\n')
            else:
                FO.write(self.to_yaml())


    @classmethod
    def read(cls, file, **overrides):
        '''Read a flat key/value config document (.json files as JSON, any
        other file as YAML).  Keyword overrides take precedence over file
        values.
        '''
        p = Path(file).expanduser().absolute()
        if p.exists() is False:
            raise FileNotFoundError(f'Config file "{p}" not found')
        with open(p, 'r') as FO:
            if p.suffix.lower() == '.json':
                contents = json.load(FO)
            else:
                contents = yaml.safe_load(FO)
        if contents is None:
            contents = {}
        if not isinstance(contents, dict):
            raise SystemConfigError(f'Config file "{p}" must hold a flat '
                                    f'key/value document')
        contents.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_dict(contents)


    def __str__(self):
        return f'{self.name}'


    def __repr__(self):
        return f'{self.name}'


_field_names = {'name', 'n_r', 'n_t', 'l_r', 'l_t', 'psi', 'rho_db', 'n_cl',
                'n_ray', 'sigma_aoa_deg', 'sigma_aod_deg', 'spacing_ratio',
                'trials', 'seed', 'issa_scale', 'cluster_power',
                'cluster_decay', 'enum_cap'}


##-------------------------------------------------------------------------
## Pre-Defined Configs
##-------------------------------------------------------------------------
def default_link(psi=1, rho_db=0.0, **kwargs):
    '''The 17x17 array, 5 RF chain, 10 cluster x 8 ray scenario.
    '''
    return SystemConfig(psi=psi, rho_db=rho_db, **kwargs)


def small_cluster(psi=1, rho_db=0.0, **kwargs):
    '''The sparse scenario with 4 clusters of 2 rays.
    '''
    return SystemConfig(psi=psi, rho_db=rho_db, n_cl=4, n_ray=2, **kwargs)


def desk_scale(psi=8, rho_db=0.0, **kwargs):
    '''A 9x9 array with 2 RF chains, small enough for exhaustive search.
    '''
    return SystemConfig(n_r=9, n_t=9, l_r=2, l_t=2, psi=psi, rho_db=rho_db,
                        **kwargs)
