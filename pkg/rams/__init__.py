import json
from pathlib import Path
import numpy as np
import yaml

from .system_config import (SystemConfig, SystemConfigError,
                            SystemConfigWarning, default_link, small_cluster,
                            desk_scale)
from .channel import (ChannelSet, ClusterGeometry, steering_vector,
                      draw_geometry, synthesize, realize_channels)
from .beamspace import (BeamMask, VirtualChannel, dft_basis, to_virtual,
                        from_virtual, magnitude_mask, extract)
from .rate import (SelectionOutcome, CapacityError, rate_of,
                   best_submatrix_exhaustive, best_state_exhaustive)
from .fastsel import (select_state_fast, issa_receive, issa_transmit,
                      fast_select)
from .analysis import GaussianRateModel
from .simlab import RateTable, RateSamples, ExperimentReport, simulate


##-------------------------------------------------------------------------
## parse_document
##-------------------------------------------------------------------------
def parse_document(contents):
    '''Build the object a config or channel dump document describes.

    A channel dump (it has a "states" list) returns (ChannelSet,
    SystemConfig or None); anything else is a flat config document and
    returns (None, SystemConfig).
    '''
    if not isinstance(contents, dict):
        raise SystemConfigError('Expected a key/value document')
    if 'states' in contents.keys():
        matrices = []
        for entry in contents['states']:
            pairs = np.asarray(entry['matrix'], dtype=float)
            matrices.append(pairs[..., 0] + 1j * pairs[..., 1])
        cfg = None
        if contents.get('config', None) is not None:
            cfg = SystemConfig.from_dict(contents['config'])
        return ChannelSet(matrices,
                          trial_index=contents.get('trial_index', None)), cfg
    return None, SystemConfig.from_dict(contents)


def load(file):
    '''Read a YAML or JSON document from disk with `parse_document`.'''
    p = Path(file).expanduser().absolute()
    if p.exists() is False:
        raise FileNotFoundError(f'"{p}" not found')
    with open(p, 'r') as FO:
        if p.suffix.lower() == '.json':
            contents = json.load(FO)
        else:
            contents = yaml.safe_load(FO)
    return parse_document(contents)
