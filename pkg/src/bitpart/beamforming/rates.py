from typing import Sequence, Union

import torch

from bitpart.beamforming.zero_forcing import Beamformer

BeamLike = Union[Beamformer, torch.Tensor]


def _vector(beam: BeamLike) -> torch.Tensor:
    return beam.b if isinstance(beam, Beamformer) else beam


def gain(h: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """|hᴴb|² along the last dimension."""
    return ((h.conj() * b).sum(dim=-1).abs()) ** 2


def sinr_perfect(h_ii: torch.Tensor, b_i: BeamLike, mu_ii: float) -> float:
    """SINR when the interference is nulled exactly: μ_ii |h_iiᴴ b_i|²."""
    return float(mu_ii * gain(h_ii, _vector(b_i)))


def sinr_delayed(
    h_row: torch.Tensor, bhat: Union[torch.Tensor, Sequence[BeamLike]], mu_row: Sequence[float], i: int
) -> float:
    """
    SINR of user `i` under beamformers built from outdated or quantized directions,
    μ_ii |h_iiᴴ b̂_i|² / (1 + Σ_{j≠i} μ_ij |h_ijᴴ b̂_j|²).

    Args:
        h_row: Tensor of shape (K, M); row j is the true channel from station j to user i.
        bhat: Beamformers of all K stations, as a (K, M) tensor or a sequence.
        mu_row: Powers μ_ij of the K stations at user i.
        i: User index.
    """
    beams = bhat if isinstance(bhat, torch.Tensor) else torch.stack([_vector(beam) for beam in bhat], dim=0)
    if h_row.shape != beams.shape or len(mu_row) != h_row.shape[0]:
        raise ValueError(
            f"Inconsistent shapes: channels {tuple(h_row.shape)}, beamformers {tuple(beams.shape)}, "
            f"{len(mu_row)} powers"
        )
    powers = torch.as_tensor(mu_row, dtype=torch.float64)
    gains = powers * gain(h_row, beams)
    interference = gains.sum() - gains[i]
    return float(gains[i] / (1 + interference))


def network_sinrs(h: torch.Tensor, beams: torch.Tensor, mu: torch.Tensor, perfect: bool = False) -> torch.Tensor:
    """
    SINR of every user for a batch of instants.

    Args:
        h: True channels of shape (..., K, K, M); h[..., i, j] links station j to user i.
        beams: Beamformers of shape (..., K, M).
        mu: Powers of shape (K, K).
        perfect: Drop the interference term, as when every station nulls the true channels.

    Returns:
        Tensor of shape (..., K).
    """
    gains = mu * torch.einsum("...ijm,...jm->...ij", h.conj(), beams).abs() ** 2
    signal = torch.diagonal(gains, dim1=-2, dim2=-1)
    if perfect:
        return signal
    interference = gains.sum(dim=-1) - signal
    return signal / (1 + interference)


def sum_rate(sinrs: Union[torch.Tensor, Sequence[float]]) -> torch.Tensor:
    """Σ_j log2(1 + SINR_j) in bits/s/Hz over the last dimension."""
    sinrs = torch.as_tensor(sinrs, dtype=torch.float64)
    if (sinrs < 0).any():
        raise ValueError("SINR values must be nonnegative")
    return torch.log2(1 + sinrs).sum(dim=-1)
