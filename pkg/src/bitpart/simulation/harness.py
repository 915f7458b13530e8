"""
Monte Carlo sum-rate harness.

A trial evolves the channels of every link over the feedback horizon, lets each user feed back quantized channel
directions on the schedule of the scheme under test, rebuilds the zero-forcing beamformers from the latest feedback and
records the sum rate of every subframe. A sweep repeats this for every power point of a scenario.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
import torch

from bitpart.allocation import (
    AfpPlan,
    BitAllocation,
    ConvergenceError,
    LinkStats,
    afp_optimize,
    equal_allocate,
    integerize,
    mfp_allocate_real,
)
from bitpart.beamforming import (
    interference_directions,
    network_sinrs,
    nullspace_direction,
    stack_interference,
    sum_rate,
    zero_forcing_beamformers,
)
from bitpart.channels import CorrelationTable, channel_trajectory, correlation_table, init_channels
from bitpart.quantization import Codebook, generate_codebook, normalize, quantize_many
from bitpart.scenario import NetworkConfig
from bitpart.schemes import SchemeId
from bitpart.simulation.random_streams import channel_generator, codebook_generator

logger = logging.getLogger(__name__)

Allocation = Union[BitAllocation, AfpPlan]


@dataclass(frozen=True)
class TrialResult:
    """
    Outcome of one trial of one scheme.

    scheme: The scheme simulated.
    sum_rates: Sum rate of every subframe in bits/s/Hz, shape (T,).
    mean: Mean of `sum_rates`.
    """

    scheme: SchemeId
    sum_rates: torch.Tensor
    mean: float


@dataclass(frozen=True)
class SweepRow:
    """Mean sum rate of one scheme at one power point, over all trials."""

    mu11_db: float
    scheme: SchemeId
    mean_rate: float
    std_err: float
    trials: int


class SweepPointError(RuntimeError):
    """Allocating feedback at one sweep point failed."""

    def __init__(self, mu11_db: float, message: str):
        super().__init__(f"Sweep point mu11={mu11_db:g} dB: {message}")
        self.mu11_db = mu11_db


class CodebookBank:
    """
    The codebooks of one refresh block, drawn on first use.

    A codebook is identified by its link and size, so schemes that give a link the same number of bits quantize it
    against the same codewords.
    """

    def __init__(self, M: int, streams: Callable[[int, int, int], torch.Generator]):
        self.M = M
        self._streams = streams
        self._codebooks: dict[tuple[int, int, int], Codebook] = {}

    @classmethod
    def for_block(cls, M: int, seed: int, block: int) -> "CodebookBank":
        return cls(M, lambda user, station, bits: codebook_generator(seed, block, user, station, bits))

    @classmethod
    def from_generator(cls, M: int, rng: torch.Generator) -> "CodebookBank":
        """Draw every codebook from a single generator, in order of first use."""
        return cls(M, lambda user, station, bits: rng)

    def get(self, user: int, station: int, bits: int) -> Codebook:
        key = (user, station, bits)
        if key not in self._codebooks:
            self._codebooks[key] = generate_codebook(self._streams(*key), self.M, bits)
        return self._codebooks[key]


def link_stats(cfg: NetworkConfig, corr: CorrelationTable, i: int) -> LinkStats:
    """Powers and correlations of the links from every other station to user `i`, in ascending station order."""
    others = [j for j in range(cfg.K) if j != i]
    return LinkStats(
        mu=torch.tensor([cfg.mu[i][j] for j in others], dtype=torch.float64),
        eps=corr.eps[i, others].clone(),
    )


def allocate(cfg: NetworkConfig, corr: CorrelationTable, scheme: SchemeId) -> Optional[list[Allocation]]:
    """
    Feedback allocation of every user for one scheme at one power point.

    Returns:
        One allocation per user, or None for perfect CSI.

    Raises:
        ConvergenceError: If the feedback-period solver fails for some user.
    """
    if scheme == SchemeId.PERFECT_CSI:
        return None
    allocations: list[Allocation] = []
    for i in range(cfg.K):
        stats = link_stats(cfg, corr, i)
        if scheme == SchemeId.MFP_ADAPTIVE:
            raw = mfp_allocate_real(stats, cfg.M, cfg.Bs)
            allocations.append(integerize(raw, stats, cfg.M, cfg.Bs, caps=[cfg.max_bits_per_link] * stats.count))
        elif scheme == SchemeId.MFP_EQUAL:
            allocations.append(equal_allocate(cfg.Bs, cfg.K))
        elif scheme == SchemeId.AFP:
            allocations.append(
                afp_optimize(stats, cfg.M, cfg.T, cfg.Bs, config=cfg.newton, max_bits=cfg.max_bits_per_link)
            )
        else:
            raise ValueError(f"Unknown scheme {scheme}")
    return allocations


def feedback_grid(allocations: Sequence[Allocation], K: int) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Per-update codebook bits and feedback period of every link.

    Returns:
        Integer tensors `bits` and `periods` of shape (K, K); entry (l, j) belongs to the link from station j to user l.
        Diagonal entries are zero.
    """
    if len(allocations) != K:
        raise ValueError(f"Expected one allocation per user ({K}), got {len(allocations)}")
    bits = torch.zeros(K, K, dtype=torch.int64)
    periods = torch.zeros(K, K, dtype=torch.int64)
    for user, allocation in enumerate(allocations):
        if isinstance(allocation, AfpPlan):
            per_link = list(zip(allocation.bits_per_update, allocation.omega))
        else:
            per_link = [(b, 1) for b in allocation.bits]
        if len(per_link) != K - 1:
            raise ValueError(f"Allocation of user {user} covers {len(per_link)} links, expected {K - 1}")
        for station, (link_bits, period) in zip((j for j in range(K) if j != user), per_link):
            bits[user, station] = link_bits
            periods[user, station] = period
    return bits, periods


def feedback_schedule(periods: torch.Tensor, T: int) -> torch.Tensor:
    """
    Which links feed back at each subframe.

    A link with period ω reports at subframes n = 1 and every n divisible by ω (n = 1..T).

    Returns:
        Boolean tensor of shape (T, K, K), false on the diagonal.
    """
    n = torch.arange(1, T + 1)[:, None, None]
    due = (n % periods.clamp(min=1) == 0) | (n == 1)
    return due & (periods > 0)


def _hold(values: torch.Tensor, updated: torch.Tensor) -> torch.Tensor:
    """Repeat the value of the latest update at every instant; `updated[0]` must be true."""
    return values[torch.cumsum(updated.to(torch.int64), dim=0) - 1]


def simulate(
    cfg: NetworkConfig,
    scheme: SchemeId,
    allocations: Optional[Sequence[Allocation]],
    trajectory: torch.Tensor,
    codebooks: Optional[CodebookBank],
) -> TrialResult:
    """
    Sum rates of one scheme over a given channel trajectory.

    Args:
        cfg: Scenario at one power point.
        scheme: Scheme to simulate.
        allocations: One allocation per user (None for perfect CSI).
        trajectory: Channels of shape (T, K, K, M).
        codebooks: Codebooks to quantize against (unused for perfect CSI).
    """
    mu = torch.tensor(cfg.mu, dtype=torch.float64)
    directions = normalize(trajectory)

    if scheme == SchemeId.PERFECT_CSI:
        if allocations is not None:
            raise ValueError("Perfect CSI takes no feedback allocation")
        beams = zero_forcing_beamformers(directions)
        rates = sum_rate(network_sinrs(trajectory, beams, mu, perfect=True))
        return TrialResult(scheme=scheme, sum_rates=rates, mean=float(rates.mean()))

    if allocations is None or codebooks is None:
        raise ValueError(f"Scheme {scheme.value} needs feedback allocations and codebooks")
    expected = AfpPlan if scheme == SchemeId.AFP else BitAllocation
    if not all(isinstance(allocation, expected) for allocation in allocations):
        raise ValueError(f"Scheme {scheme.value} needs allocations of type {expected.__name__}")

    K = cfg.K
    bits, periods = feedback_grid(allocations, K)
    schedule = feedback_schedule(periods, cfg.T)

    held = directions.clone()
    for user in range(K):
        for station in range(K):
            if user == station:
                continue
            updated = schedule[:, user, station]
            codebook = codebooks.get(user, station, int(bits[user, station]))
            _, codewords = quantize_many(directions[updated, user, station], codebook)
            held[:, user, station] = _hold(codewords, updated)

    beams = torch.empty(cfg.T, K, cfg.M, dtype=trajectory.dtype)
    for station in range(K):
        others = [user for user in range(K) if user != station]
        changed = schedule[:, others, station].any(dim=1)
        rows = stack_interference(interference_directions(held[changed], station), station, K)
        beams[:, station] = _hold(nullspace_direction(rows).b, changed)

    rates = sum_rate(network_sinrs(trajectory, beams, mu))
    return TrialResult(scheme=scheme, sum_rates=rates, mean=float(rates.mean()))


def draw_trajectory(cfg: NetworkConfig, corr: CorrelationTable, rng: torch.Generator) -> torch.Tensor:
    """A stationary start followed by T Gauss-Markov steps, shape (T, K, K, M)."""
    return channel_trajectory(init_channels(rng, cfg.M, cfg.K), corr, rng, cfg.T)


def run_trial(
    cfg: NetworkConfig,
    scheme: SchemeId,
    allocations: Optional[Sequence[Allocation]],
    rng: torch.Generator,
    codebooks: Optional[CodebookBank] = None,
) -> TrialResult:
    """
    Run one trial: draw the channel trajectory from `rng`, then the codebooks (unless given) and simulate `scheme`.

    Args:
        cfg: Scenario at one power point.
        scheme: Scheme to simulate.
        allocations: One allocation per user, None for perfect CSI.
        rng: Generator of the trial.
        codebooks: Codebooks to use; drawn from `rng` after the channels when omitted.
    """
    trajectory = draw_trajectory(cfg, correlation_table(cfg), rng)
    if codebooks is None and scheme != SchemeId.PERFECT_CSI:
        codebooks = CodebookBank.from_generator(cfg.M, rng)
    return simulate(cfg, scheme, allocations, trajectory, codebooks)


def summarize(mu11_db: float, scheme: SchemeId, means: Sequence[float]) -> SweepRow:
    """Mean and standard error of per-trial means; the sum is exact so the result does not depend on trial order."""
    count = len(means)
    std_err = float(np.std(means, ddof=1)) / math.sqrt(count) if count > 1 else 0.0
    return SweepRow(mu11_db=mu11_db, scheme=scheme, mean_rate=math.fsum(means) / count, std_err=std_err, trials=count)


def describe(scheme: SchemeId, allocations: Optional[Sequence[Allocation]]) -> str:
    if allocations is None:
        return f"{scheme.value}: no feedback"
    parts = []
    for user, allocation in enumerate(allocations):
        if isinstance(allocation, AfpPlan):
            parts.append(
                f"user {user}: bits {list(allocation.bits_total)} omega {list(allocation.omega)} "
                f"per update {list(allocation.bits_per_update)}"
            )
        else:
            parts.append(f"user {user}: bits {list(allocation.bits)}")
    return f"{scheme.value}: " + "; ".join(parts)


def run_sweep(cfg: NetworkConfig, schemes: Sequence[SchemeId]) -> list[SweepRow]:
    """
    Run every scheme at every power point of the scenario.

    Channels of trial t come from the same stream at every power point and for every scheme; codebooks are redrawn
    every `cfg.codebook_refresh` trials.

    Returns:
        One row per power point and scheme, ordered by power point then by the order of `schemes`.

    Raises:
        SweepPointError: If the allocation at some power point cannot be computed.
    """
    if not schemes:
        raise ValueError("At least one scheme is required")
    corr = correlation_table(cfg)
    rows = []
    for mu11_db in cfg.sweep_db:
        point = cfg.with_mu11_db(mu11_db)
        allocations = {}
        for scheme in schemes:
            try:
                allocations[scheme] = allocate(point, corr, scheme)
            except ConvergenceError as e:
                raise SweepPointError(mu11_db, f"{scheme.value} allocation failed: {e}") from e
            logger.info(f"mu11={mu11_db:g} dB, {describe(scheme, allocations[scheme])}")

        means: dict[SchemeId, list[float]] = {scheme: [] for scheme in schemes}
        bank = None
        for trial in range(cfg.trials):
            if trial % cfg.codebook_refresh == 0:
                bank = CodebookBank.for_block(cfg.M, cfg.seed, trial // cfg.codebook_refresh)
            trajectory = draw_trajectory(point, corr, channel_generator(cfg.seed, trial))
            for scheme in schemes:
                means[scheme].append(simulate(point, scheme, allocations[scheme], trajectory, bank).mean)

        for scheme in schemes:
            row = summarize(mu11_db, scheme, means[scheme])
            logger.info(f"mu11={mu11_db:g} dB, {scheme.value}: mean sum rate {row.mean_rate:.4f} ± {row.std_err:.4f}")
            rows.append(row)
    return rows
