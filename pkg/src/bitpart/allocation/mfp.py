"""
Minimal feedback period (MFP) bit partitioning: every interfering link is fed back every subframe and only the split of
the per-user budget across links is chosen.
"""
import math
from dataclasses import dataclass
from typing import Sequence, Union

import torch

from bitpart.quantization.bounds import quantization_error_bound
from bitpart.schemes import SchemeId

MAX_BITS_PER_LINK = 16

Reals = Union[torch.Tensor, Sequence[float]]


@dataclass(frozen=True)
class LinkStats:
    """
    Statistics of the K - 1 interfering links of one user, ordered by station index with the serving cell skipped.

    mu: Linear powers μ_ij, shape (K - 1,).
    eps: Temporal correlations ε_ij, shape (K - 1,).
    """

    mu: torch.Tensor
    eps: torch.Tensor

    def __post_init__(self):
        if self.mu.shape != self.eps.shape or self.mu.ndim != 1:
            raise ValueError(f"Powers {tuple(self.mu.shape)} and correlations {tuple(self.eps.shape)} must be 1d and match")
        if (self.mu <= 0).any():
            raise ValueError("Link powers must be positive")
        if (self.eps.abs() > 1).any():
            raise ValueError("Link correlations must lie in [-1, 1]")

    @classmethod
    def from_values(cls, mu: Sequence[float], eps: Sequence[float]) -> "LinkStats":
        return cls(mu=torch.tensor(mu, dtype=torch.float64), eps=torch.tensor(eps, dtype=torch.float64))

    @property
    def count(self) -> int:
        return self.mu.shape[0]

    @property
    def weights(self) -> torch.Tensor:
        """μ_ij ε_ij², the weight of each link in the MFP objective."""
        return self.mu * self.eps**2


@dataclass(frozen=True)
class BitAllocation:
    """Integer feedback bits of each interfering link of one user, summing to the user's budget."""

    bits: tuple[int, ...]
    scheme: SchemeId

    def __post_init__(self):
        if any(b < 0 or b > MAX_BITS_PER_LINK for b in self.bits):
            raise ValueError(f"Bits per link must lie in [0, {MAX_BITS_PER_LINK}], got {self.bits}")

    @property
    def total(self) -> int:
        return sum(self.bits)


def mfp_objective(bits: Reals, stats: LinkStats, M: int) -> float:
    """Σ_j μ_ij ε_ij² 2^(-B_ij / (M - 1)), the bit-dependent part of the MFP rate-loss bound."""
    return float(mfp_link_costs(torch.as_tensor(bits, dtype=torch.float64), stats, M).sum())


def mfp_link_costs(bits: torch.Tensor, stats: LinkStats, M: int) -> torch.Tensor:
    """Per-link terms of `mfp_objective`."""
    if bits.shape != stats.mu.shape:
        raise ValueError(f"Expected {stats.count} bit counts, got shape {tuple(bits.shape)}")
    return stats.weights * torch.exp2(-bits / (M - 1))


def mfp_allocate_real(stats: LinkStats, M: int, Bs: float) -> torch.Tensor:
    """
    Closed-form real bit split minimizing `mfp_objective` under Σ B_ij = Bs,
    B_ij = Bs / (M - 1) + (M - 1) log2(μ_ij ε_ij² / Π_l (μ_il ε_il²)^(1 / (M - 1))).

    Links with μ ε² = 0 do not depend on their bits; they get none and the formula is applied to the remaining links
    (with the geometric mean taken over those links). If every link is degenerate the budget is split equally.
    """
    if stats.count != M - 1:
        raise ValueError(f"Unsupported configuration: {stats.count} interfering links with M={M}, requires M = K")
    weights = stats.weights
    active = weights > 0
    num_active = int(active.sum())
    if num_active == 0:
        return torch.full_like(weights, Bs / stats.count)

    log_weights = torch.log2(weights[active])
    bits = torch.zeros_like(weights)
    bits[active] = Bs / num_active + (M - 1) * (log_weights - log_weights.mean())
    return bits


def equal_allocate(Bs: int, K: int) -> BitAllocation:
    """Split the budget as evenly as possible, leftover bits going to the lowest-index links."""
    if K < 2:
        raise ValueError(f"Need at least 2 cells, got K={K}")
    if Bs < 0:
        raise ValueError(f"Bit budget must be nonnegative, got Bs={Bs}")
    share, leftover = divmod(Bs, K - 1)
    return BitAllocation(bits=tuple(share + (1 if j < leftover else 0) for j in range(K - 1)), scheme=SchemeId.MFP_EQUAL)


def mfp_rate_loss_bound(bits: Reals, stats: LinkStats, M: int) -> float:
    """Upper bound on a user's expected rate loss, log2(1 + Σ_j μ_ij E|h_ijᴴ b̂_j|²) with the exact beta bound."""
    bits = torch.as_tensor(bits, dtype=torch.float64)
    leakage = sum(
        float(mu) * quantization_error_bound(float(b), M, float(eps)) for mu, eps, b in zip(stats.mu, stats.eps, bits)
    )
    return math.log2(1 + leakage)
