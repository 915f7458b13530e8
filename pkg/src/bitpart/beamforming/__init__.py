from bitpart.beamforming.rates import gain, network_sinrs, sinr_delayed, sinr_perfect, sum_rate
from bitpart.beamforming.zero_forcing import (
    Beamformer,
    InterferenceMatrix,
    interference_directions,
    nullspace_direction,
    stack_interference,
    zero_forcing_beamformers,
)
