from typing import Callable, Optional, Sequence

import torch

from bitpart.allocation.mfp import MAX_BITS_PER_LINK, BitAllocation, LinkStats, Reals, mfp_link_costs
from bitpart.schemes import SchemeId

LinkCosts = Callable[[torch.Tensor], torch.Tensor]

# Relative improvement an exchange must achieve
EXCHANGE_TOLERANCE = 1e-12


def integer_split(raw: Reals, link_costs: LinkCosts, total: int, caps: Sequence[int]) -> tuple[int, ...]:
    """
    Turn a real bit split into nonnegative integers summing to `total` for a separable convex cost.

    Negative entries are clamped to zero and the rest floored. Bits are then added (or removed) one at a time where
    the cost drops the most (or rises the least), and finally single bits are moved between links while that lowers
    the cost. For a separable convex cost no single move improving the cost means the split is optimal.

    Args:
        raw: Real bits per link.
        link_costs: Maps an integer bit vector (float64) to the cost of every link.
        total: Required sum.
        caps: Largest number of bits of each link.
    """
    raw = torch.as_tensor(raw, dtype=torch.float64)
    cap = torch.as_tensor(list(caps), dtype=torch.float64)
    if total < 0 or total > int(cap.sum()):
        raise ValueError(f"Cannot split {total} bits over links with caps {list(caps)}")
    bits = torch.minimum(torch.floor(raw.clamp(min=0)), cap)

    while bits.sum() < total:
        gains = _add_gains(bits, link_costs, cap)
        bits[int(torch.argmax(gains))] += 1
    while bits.sum() > total:
        losses = _remove_losses(bits, link_costs)
        bits[int(torch.argmin(losses))] -= 1

    for _ in range(total * len(bits) + 1):
        gains = _add_gains(bits, link_costs, cap)
        losses = _remove_losses(bits, link_costs)
        receiver = int(torch.argmax(gains))
        donor_losses = losses.clone()
        donor_losses[receiver] = torch.inf
        donor = int(torch.argmin(donor_losses))
        scale = float(link_costs(bits).abs().sum())
        if not torch.isfinite(donor_losses[donor]) or gains[receiver] - donor_losses[donor] <= EXCHANGE_TOLERANCE * scale:
            break
        bits[receiver] += 1
        bits[donor] -= 1
    return tuple(int(b) for b in bits)


def _add_gains(bits: torch.Tensor, link_costs: LinkCosts, cap: torch.Tensor) -> torch.Tensor:
    """Cost decrease of adding one bit to each link, -inf where the link is full."""
    gains = link_costs(bits) - link_costs(bits + 1)
    return torch.where(bits < cap, gains, torch.full_like(gains, -torch.inf))


def _remove_losses(bits: torch.Tensor, link_costs: LinkCosts) -> torch.Tensor:
    """Cost increase of removing one bit from each link, +inf where the link is empty."""
    losses = link_costs((bits - 1).clamp(min=0)) - link_costs(bits)
    return torch.where(bits > 0, losses, torch.full_like(losses, torch.inf))


def integerize(
    raw: Reals, stats: LinkStats, M: int, Bs: int, caps: Optional[Sequence[int]] = None
) -> BitAllocation:
    """Integer MFP allocation from the real closed-form split, minimizing `mfp_objective` over integer splits of Bs."""
    caps = caps if caps is not None else [MAX_BITS_PER_LINK] * stats.count
    bits = integer_split(raw, lambda b: mfp_link_costs(b, stats, M), Bs, caps)
    return BitAllocation(bits=bits, scheme=SchemeId.MFP_ADAPTIVE)
