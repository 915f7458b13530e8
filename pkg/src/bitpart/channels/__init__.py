from bitpart.channels.bessel import bessel_j0, correlation_coefficient
from bitpart.channels.gauss_markov import (
    ChannelState,
    CorrelationTable,
    channel_trajectory,
    complex_normal,
    correlation_table,
    evolve,
    init_channels,
)
