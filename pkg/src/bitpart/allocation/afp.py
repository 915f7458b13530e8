"""
Adaptive feedback period (AFP): joint choice of the feedback period ω_ij and the total bits B^t_ij of every interfering
link of one user, by minimizing the rate-loss bound

    g = Σ_j μ_ij { ε_ij^(2(ω_ij - 1)) (M/(M-1) 2^(-ω_ij B^t_ij / ((M-1) T)) - 1) + 1 }

subject to Σ_j B^t_ij = Bs. The constraint is eliminated by substituting the bits of the last link, leaving the
unconstrained variables x = [ω_1, ..., ω_n, B^t_1, ..., B^t_(n-1)] for n = K - 1 links.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import torch

from bitpart.allocation.integerize import integer_split
from bitpart.allocation.mfp import MAX_BITS_PER_LINK, LinkStats, Reals, mfp_allocate_real
from bitpart.allocation.newton import NewtonConfig, minimize_projected_newton

logger = logging.getLogger(__name__)

# |ε| is floored here before taking its logarithm, so a fully decorrelated link stays finite
MIN_ABS_CORRELATION = 1e-300


@dataclass(frozen=True)
class AfpPlan:
    """
    Feedback periods and bits of the interfering links of one user.

    omega: Integer feedback periods ω_ij in [1, T].
    bits_total: Integer bits B^t_ij over the horizon, summing to Bs.
    bits_per_update: Codebook bits used at each feedback instant, round(B^t_ij ω_ij / T).
    objective_value: g at the integer point.
    iterations: Accepted Newton iterations.
    continuous_omega: Periods at the continuous optimum.
    continuous_bits: Total bits at the continuous optimum.
    continuous_objective: g at the continuous optimum.
    objective_trace: g after every accepted Newton iteration, starting point first.
    gradient_norm: Projected-gradient norm at the continuous optimum.
    """

    omega: tuple[int, ...]
    bits_total: tuple[int, ...]
    bits_per_update: tuple[int, ...]
    objective_value: float
    iterations: int
    continuous_omega: tuple[float, ...] = ()
    continuous_bits: tuple[float, ...] = ()
    continuous_objective: float = math.nan
    objective_trace: tuple[float, ...] = ()
    gradient_norm: float = math.nan

    def __post_init__(self):
        if any(b > MAX_BITS_PER_LINK for b in self.bits_per_update):
            raise ValueError(f"Per-update bits must not exceed {MAX_BITS_PER_LINK}, got {self.bits_per_update}")


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def per_update_bits(bits_total: int, omega: int, T: int) -> int:
    """Bits of the codebook used at each feedback instant of a link."""
    return round_half_up(bits_total * omega / T)


def per_update_cap(omega: int, T: int, max_bits: int = MAX_BITS_PER_LINK) -> int:
    """Largest total bits whose per-update codebook stays within `max_bits`."""
    return math.ceil((max_bits + 0.5) * T / omega) - 1


class AfpProblem:
    """The AFP objective with the sum constraint eliminated, plus its analytic derivatives."""

    def __init__(self, stats: LinkStats, M: int, T: int, Bs: float):
        if M < 2 or T < 1 or Bs < 0:
            raise ValueError(f"Invalid AFP problem M={M}, T={T}, Bs={Bs}")
        self.stats = stats
        self.M = M
        self.T = T
        self.Bs = float(Bs)
        self.num_links = stats.count
        self.size = 2 * self.num_links - 1
        self.log_eps2 = 2 * torch.log(stats.eps.abs().clamp(min=MIN_ABS_CORRELATION))
        self.rate = math.log(2.0) / ((M - 1) * T)
        self.scale = M / (M - 1)

    def unpack(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Split the reduced vector into periods and the full bit vector (last link's bits substituted)."""
        n = self.num_links
        omega = x[:n]
        bits = torch.cat([x[n:], (self.Bs - x[n:].sum()).reshape(1)])
        return omega, bits

    def pack(self, omega: Reals, bits_total: Reals) -> torch.Tensor:
        omega = torch.as_tensor(omega, dtype=torch.float64)
        bits_total = torch.as_tensor(bits_total, dtype=torch.float64)
        return torch.cat([omega, bits_total[:-1]])

    def link_terms(self, omega: torch.Tensor, bits: torch.Tensor) -> torch.Tensor:
        """μ_ij { ε^(2(ω-1)) (M/(M-1) 2^(-ωB/((M-1)T)) - 1) + 1 } for every link."""
        decay, leak = self._factors(omega, bits)
        return self.stats.mu * (decay * (self.scale * leak - 1) + 1)

    def _factors(self, omega: torch.Tensor, bits: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        decay = torch.exp(self.log_eps2 * (omega - 1))
        leak = torch.exp(-self.rate * omega * bits)
        return decay, leak

    def _partials(self, x: torch.Tensor) -> dict[str, torch.Tensor]:
        """First and second partials of every link term in its own (ω, B) pair."""
        omega, bits = self.unpack(x)
        decay, leak = self._factors(omega, bits)
        a, c, y, mu = self.log_eps2, self.rate, self.scale, self.stats.mu
        return {
            "w": mu * decay * (a * (y * leak - 1) - y * c * bits * leak),
            "b": -mu * decay * y * c * omega * leak,
            "ww": mu * decay * (a**2 * (y * leak - 1) - 2 * a * y * c * bits * leak + y * c**2 * bits**2 * leak),
            "bb": mu * decay * y * leak * (c * omega) ** 2,
            "wb": -mu * y * c * decay * leak * (a * omega + 1 - c * omega * bits),
        }

    def objective(self, x: torch.Tensor) -> torch.Tensor:
        return self.link_terms(*self.unpack(x)).sum()

    def gradient(self, x: torch.Tensor) -> torch.Tensor:
        n = self.num_links
        partials = self._partials(x)
        grad = torch.empty(self.size, dtype=torch.float64)
        grad[:n] = partials["w"]
        grad[n:] = partials["b"][:-1] - partials["b"][-1]
        return grad

    def hessian(self, x: torch.Tensor) -> torch.Tensor:
        n = self.num_links
        partials = self._partials(x)
        hess = torch.zeros(self.size, self.size, dtype=torch.float64)
        hess[:n, :n] = torch.diag(partials["ww"])
        for l in range(n - 1):
            hess[l, n + l] = hess[n + l, l] = partials["wb"][l]
            hess[n - 1, n + l] = hess[n + l, n - 1] = -partials["wb"][-1]
        hess[n:, n:] = torch.diag(partials["bb"][:-1]) + partials["bb"][-1]
        return hess

    def bounds(self) -> tuple[torch.Tensor, torch.Tensor]:
        n = self.num_links
        lower = torch.cat([torch.ones(n, dtype=torch.float64), torch.zeros(n - 1, dtype=torch.float64)])
        upper = torch.cat([torch.full((n,), float(self.T), dtype=torch.float64), torch.full((n - 1,), self.Bs)])
        return lower, upper

    def project(self, x: torch.Tensor) -> torch.Tensor:
        """Clamp periods to [1, T] and bits onto {B ≥ 0, Σ B ≤ Bs}."""
        n = self.num_links
        omega = x[:n].clamp(1.0, float(self.T))
        bits = x[n:].clamp(min=0.0)
        if bits.sum() > self.Bs:
            bits = project_simplex(x[n:], self.Bs)
        return torch.cat([omega, bits])


def project_simplex(v: torch.Tensor, total: float) -> torch.Tensor:
    """Euclidean projection of `v` onto {w ≥ 0, Σ w = total}."""
    if v.numel() == 0:
        return v
    ordered, _ = torch.sort(v, descending=True)
    cumulative = torch.cumsum(ordered, dim=0) - total
    ranks = torch.arange(1, v.numel() + 1, dtype=v.dtype)
    support = ordered - cumulative / ranks > 0
    rho = int(torch.nonzero(support)[-1])
    threshold = cumulative[rho] / (rho + 1)
    return (v - threshold).clamp(min=0.0)


def afp_objective(omega: Reals, bits_total: Reals, stats: LinkStats, M: int, T: int) -> float:
    """The AFP rate-loss bound g at the given periods and total bits (no substitution)."""
    omega = torch.as_tensor(omega, dtype=torch.float64)
    bits_total = torch.as_tensor(bits_total, dtype=torch.float64)
    if (omega < 1).any() or (bits_total < 0).any():
        raise ValueError("Periods must be at least 1 and bits nonnegative")
    problem = AfpProblem(stats, M, T, float(bits_total.sum()))
    return float(problem.link_terms(omega, bits_total).sum())


def afp_rate_loss_bound(omega: Reals, bits_total: Reals, stats: LinkStats, M: int, T: int) -> float:
    """Upper bound on a user's expected rate loss under AFP feedback, log2(1 + g)."""
    return math.log2(1 + afp_objective(omega, bits_total, stats, M, T))


def afp_gradient(x: torch.Tensor, problem: AfpProblem) -> torch.Tensor:
    """Gradient of g in the reduced variables [ω_1..ω_n, B^t_1..B^t_(n-1)]."""
    return problem.gradient(x)


def afp_hessian(x: torch.Tensor, problem: AfpProblem) -> torch.Tensor:
    """Hessian of g in the reduced variables, symmetric by construction."""
    return problem.hessian(x)


def initial_point(problem: AfpProblem) -> torch.Tensor:
    """
    Start from the MFP closed-form split (projected onto the feasible set) with, per link, the integer period in
    [1, T] minimizing that link's term for its bits.
    """
    raw = mfp_allocate_real(problem.stats, problem.M, problem.Bs)
    bits = project_simplex(raw, problem.Bs)
    candidates = torch.arange(1, problem.T + 1, dtype=torch.float64)[:, None]
    terms = problem.link_terms(candidates, bits[None, :])
    omega = candidates[torch.argmin(terms, dim=0), 0]
    return problem.pack(omega, bits)


def afp_optimize(
    stats: LinkStats,
    M: int,
    T: int,
    Bs: int,
    config: Optional[NewtonConfig] = None,
    max_bits: int = MAX_BITS_PER_LINK,
) -> AfpPlan:
    """
    Jointly optimize feedback periods and total bits of one user's interfering links.

    The continuous problem is solved with `minimize_projected_newton`; the periods are then rounded to the nearest
    integer in [1, T] and the bits split into integers with the periods held fixed, so that no link uses more than
    `max_bits` bits per feedback instant.

    Raises:
        ConvergenceError: If the solver does not reach its tolerance.
    """
    if stats.count != M - 1:
        raise ValueError(f"Unsupported configuration: {stats.count} interfering links with M={M}, requires M = K")
    if not 0 <= max_bits <= MAX_BITS_PER_LINK:
        raise ValueError(f"max_bits must lie in [0, {MAX_BITS_PER_LINK}], got {max_bits}")
    problem = AfpProblem(stats, M, T, Bs)
    lower, upper = problem.bounds()
    result = minimize_projected_newton(
        objective=problem.objective,
        gradient=problem.gradient,
        hessian=problem.hessian,
        x0=initial_point(problem),
        project=problem.project,
        lower=lower,
        upper=upper,
        config=config,
    )
    omega, bits = problem.unpack(result.x)
    omega_int = tuple(min(max(round_half_up(float(w)), 1), T) for w in omega)

    fixed_omega = torch.tensor(omega_int, dtype=torch.float64)
    bits_int = integer_split(
        bits,
        lambda b: problem.link_terms(fixed_omega, b),
        Bs,
        [per_update_cap(w, T, max_bits) for w in omega_int],
    )
    plan = AfpPlan(
        omega=omega_int,
        bits_total=bits_int,
        bits_per_update=tuple(per_update_bits(b, w, T) for b, w in zip(bits_int, omega_int)),
        objective_value=afp_objective(omega_int, bits_int, stats, M, T),
        iterations=result.iterations,
        continuous_omega=tuple(float(w) for w in omega),
        continuous_bits=tuple(float(b) for b in bits),
        continuous_objective=result.value,
        objective_trace=result.trace,
        gradient_norm=result.gradient_norm,
    )
    logger.debug(f"AFP plan {plan}")
    return plan
