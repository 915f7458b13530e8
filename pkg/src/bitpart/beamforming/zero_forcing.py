from dataclasses import dataclass
from typing import Sequence, Union

import torch

UNIT_NORM_TOLERANCE = 1e-9
PHASE_REFERENCE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class InterferenceMatrix:
    """
    Conjugated unit directions of the channels a base station must null, one row per interfered user.

    rows: Complex tensor of shape (..., K - 1, M), ordered by ascending user index with the serving cell skipped.
    """

    rows: torch.Tensor

    def __post_init__(self):
        if self.rows.ndim < 2:
            raise ValueError(f"Interference matrix needs shape (..., K - 1, M), got {tuple(self.rows.shape)}")
        norms = torch.linalg.vector_norm(self.rows, dim=-1)
        if ((norms - 1).abs() > UNIT_NORM_TOLERANCE).any():
            raise ValueError("Every interference row must have unit norm")

    @property
    def num_interferers(self) -> int:
        return self.rows.shape[-2]

    @property
    def num_antennas(self) -> int:
        return self.rows.shape[-1]


@dataclass(frozen=True)
class Beamformer:
    """
    A unit-norm transmit direction in the null space of an interference matrix.

    b: Complex tensor of shape (..., M).
    residual: Largest leakage |row · b| over the rows the beamformer was built from, shape (...).
    """

    b: torch.Tensor
    residual: torch.Tensor


def stack_interference(directions: Union[torch.Tensor, Sequence[torch.Tensor]], i: int, K: int) -> InterferenceMatrix:
    """
    Stack the unit directions seen by the users served by the other cells into the matrix nulled by station `i`.

    Args:
        directions: K - 1 unit vectors (or a tensor of shape (..., K - 1, M)) ordered by ascending user index,
            skipping user `i`.
        i: Index of the base station building its beamformer.
        K: Number of cells.
    """
    if not 0 <= i < K:
        raise ValueError(f"Station index {i} outside [0, {K})")
    stacked = directions if isinstance(directions, torch.Tensor) else torch.stack(list(directions), dim=0)
    if stacked.ndim < 2 or stacked.shape[-2] != K - 1:
        raise ValueError(f"Expected {K - 1} interference directions, got shape {tuple(stacked.shape)}")
    return InterferenceMatrix(rows=stacked.conj())


def nullspace_direction(H: InterferenceMatrix) -> Beamformer:
    """
    Zero-forcing beamformer: the right singular vector of `H` with the smallest singular value.

    The phase is fixed so that the first component with magnitude above 1e-12 is real and positive, which makes the
    result a deterministic function of `H`.
    """
    if H.num_antennas != H.num_interferers + 1:
        raise ValueError(
            f"Unsupported configuration: {H.num_antennas} antennas against {H.num_interferers} interferers, "
            "zero-forcing requires M = K"
        )
    _, _, Vh = torch.linalg.svd(H.rows, full_matrices=True)
    b = Vh[..., -1, :].conj()
    b = b / torch.linalg.vector_norm(b, dim=-1, keepdim=True)

    magnitudes = b.abs()
    reference = (magnitudes > PHASE_REFERENCE_TOLERANCE).to(torch.int64).argmax(dim=-1, keepdim=True)
    pivot = b.gather(-1, reference)
    b = b * (pivot.conj() / pivot.abs())

    residual = (H.rows @ b[..., None]).squeeze(-1).abs().amax(dim=-1)
    return Beamformer(b=b, residual=residual)


def interference_directions(directions: torch.Tensor, i: int) -> torch.Tensor:
    """
    Select the directions station `i` must null from a full per-link grid.

    Args:
        directions: Tensor of shape (..., K, K, M) with directions[..., l, j] the direction of the channel from
            station j to user l.
        i: Station index.

    Returns:
        Tensor of shape (..., K - 1, M) holding directions[..., l, i] for every l != i in ascending order.
    """
    K = directions.shape[-2]
    others = [l for l in range(K) if l != i]
    return directions[..., others, i, :]


def zero_forcing_beamformers(directions: torch.Tensor) -> torch.Tensor:
    """
    Beamformers of every station from a grid of (true or quantized) unit directions.

    Args:
        directions: Tensor of shape (..., K, K, M), see `interference_directions`.

    Returns:
        Tensor of shape (..., K, M) with the beamformer of station i in position i.
    """
    K = directions.shape[-2]
    beams = [
        nullspace_direction(stack_interference(interference_directions(directions, i), i, K)).b for i in range(K)
    ]
    return torch.stack(beams, dim=-2)
