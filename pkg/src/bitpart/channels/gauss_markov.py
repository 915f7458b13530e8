from dataclasses import dataclass
from typing import TYPE_CHECKING

import torch

from bitpart.channels.bessel import correlation_coefficient

if TYPE_CHECKING:
    from bitpart.scenario import NetworkConfig


@dataclass(frozen=True)
class CorrelationTable:
    """Temporal correlation ε_ij of every link over one subframe, a K×K float64 tensor."""

    eps: torch.Tensor

    def __post_init__(self):
        if self.eps.ndim != 2 or self.eps.shape[0] != self.eps.shape[1]:
            raise ValueError(f"Correlation table must be square, got shape {tuple(self.eps.shape)}")
        if (self.eps.abs() > 1).any():
            raise ValueError("Correlation coefficients must lie in [-1, 1]")


@dataclass(frozen=True)
class ChannelState:
    """
    Channels of every link at one time instant.

    h: Complex tensor of shape (K, K, M); h[i, j] is the channel from base station j to the user of cell i.
    n: Time index.
    """

    h: torch.Tensor
    n: int = 0

    def __post_init__(self):
        if self.h.ndim != 3 or self.h.shape[0] != self.h.shape[1]:
            raise ValueError(f"Channel state must have shape (K, K, M), got {tuple(self.h.shape)}")
        if not torch.isfinite(torch.view_as_real(self.h)).all():
            raise ValueError("Channel state contains non-finite entries")

    @property
    def num_cells(self) -> int:
        return self.h.shape[0]

    @property
    def num_antennas(self) -> int:
        return self.h.shape[-1]


def complex_normal(shape: tuple[int, ...], rng: torch.Generator) -> torch.Tensor:
    """Draw i.i.d. CN(0, 1) entries (variance ½ per real and imaginary part)."""
    return torch.randn(shape, dtype=torch.complex128, generator=rng)


def correlation_table(cfg: "NetworkConfig") -> CorrelationTable:
    """Clarke-model correlations for every link of a scenario."""
    eps = torch.tensor(
        [[correlation_coefficient(cfg.v[i][j], cfg.fc, cfg.c, cfg.Ts) for j in range(cfg.K)] for i in range(cfg.K)],
        dtype=torch.float64,
    )
    return CorrelationTable(eps=eps)


def init_channels(rng: torch.Generator, M: int, K: int) -> ChannelState:
    """Draw the stationary starting state, every entry i.i.d. CN(0, 1)."""
    if M < 2 or K < 2:
        raise ValueError(f"Need M, K >= 2, got M={M}, K={K}")
    return ChannelState(h=complex_normal((K, K, M), rng), n=0)


def evolve(state: ChannelState, corr: CorrelationTable, rng: torch.Generator) -> ChannelState:
    """
    Advance every link one subframe with the first-order Gauss-Markov recursion
    h[n] = ε h[n - 1] + √(1 - ε²) w[n], w[n] ~ CN(0, I).
    """
    if corr.eps.shape != state.h.shape[:2]:
        raise ValueError(
            f"Correlation table of shape {tuple(corr.eps.shape)} does not match {state.num_cells} cells"
        )
    eps = corr.eps[..., None]
    innovation = complex_normal(tuple(state.h.shape), rng)
    h = eps * state.h + torch.sqrt(1 - eps**2) * innovation
    return ChannelState(h=h, n=state.n + 1)


def channel_trajectory(
    state: ChannelState, corr: CorrelationTable, rng: torch.Generator, steps: int
) -> torch.Tensor:
    """
    Evolve `steps` subframes from `state`.

    Returns:
        Complex tensor of shape (steps, K, K, M) holding h[n + 1], ..., h[n + steps].
    """
    trajectory = []
    for _ in range(steps):
        state = evolve(state, corr, rng)
        trajectory.append(state.h)
    return torch.stack(trajectory, dim=0)
