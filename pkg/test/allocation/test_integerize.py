import itertools

import pytest
import torch

from bitpart.allocation import LinkStats, integer_split, integerize, mfp_allocate_real, mfp_link_costs, mfp_objective
from bitpart.schemes import SchemeId


def _best_split(stats: LinkStats, M: int, Bs: int, cap: int = 16) -> float:
    splits = (bits for bits in itertools.product(range(cap + 1), repeat=stats.count) if sum(bits) == Bs)
    return min(mfp_objective(list(bits), stats, M) for bits in splits)


@pytest.mark.parametrize(
    ("raw", "mu", "Bs", "expected"),
    [([10.0, 10.0], [1.0, 1.0], 20, (10, 10)), ([12.4, 7.6], [4.0, 1.0], 20, (12, 8)), ([2.0, -2.0], [4.0, 1.0], 0, (0, 0))],
)
def test_integerize_examples(raw, mu, Bs, expected):
    allocation = integerize(raw, LinkStats.from_values(mu, [0.9, 0.9]), 3, Bs)
    assert allocation.bits == expected
    assert allocation.scheme == SchemeId.MFP_ADAPTIVE


def test_integerize_symmetric_instance():
    stats = LinkStats.from_values([7.0, 7.0], [0.93, 0.93])
    assert integerize(mfp_allocate_real(stats, 3, 20), stats, 3, 20).bits == (10, 10)


def test_integerize_near_exhaustive_optimum():
    rng = torch.Generator().manual_seed(0)
    for _ in range(100):
        stats = LinkStats(
            mu=10 ** (2 * torch.rand(2, generator=rng, dtype=torch.float64)),
            eps=0.05 + 0.95 * torch.rand(2, generator=rng, dtype=torch.float64),
        )
        allocation = integerize(mfp_allocate_real(stats, 3, 20), stats, 3, 20)
        assert allocation.total == 20
        assert mfp_objective(list(allocation.bits), stats, 3) <= 1.05 * _best_split(stats, 3, 20)


def test_integerize_beats_naive_rounding():
    rng = torch.Generator().manual_seed(1)
    compared = 0
    for _ in range(200):
        stats = LinkStats(
            mu=1 + 9 * torch.rand(3, generator=rng, dtype=torch.float64),
            eps=0.5 + 0.5 * torch.rand(3, generator=rng, dtype=torch.float64),
        )
        raw = mfp_allocate_real(stats, 4, 24)
        naive = [int(bits) for bits in torch.round(raw)]
        allocation = integerize(raw, stats, 4, 24)
        assert allocation.total == 24
        if sum(naive) != 24 or not all(0 <= bits <= 16 for bits in naive):
            continue
        compared += 1
        assert mfp_objective(list(allocation.bits), stats, 4) <= mfp_objective(naive, stats, 4) * (1 + 1e-9)
    assert compared > 0


def test_integer_split_respects_caps():
    stats = LinkStats.from_values([100.0, 1.0], [1.0, 1.0])
    bits = integer_split([30.0, -10.0], lambda b: mfp_link_costs(b, stats, 3), 20, [16, 16])
    assert bits == (16, 4)


def test_integer_split_rejects_infeasible_total():
    with pytest.raises(ValueError):
        integer_split([10.0, 10.0], lambda b: b, 40, [16, 16])
    with pytest.raises(ValueError):
        integer_split([0.0, 0.0], lambda b: b, -1, [16, 16])
