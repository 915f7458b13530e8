import math
from typing import Union

import torch

SERIES_LIMIT = 12.0
TERM_TOLERANCE = 1e-16
MAX_SERIES_TERMS = 200


def bessel_j0(x: Union[float, torch.Tensor]) -> torch.Tensor:
    """
    Bessel function of the first kind of order zero.

    Evaluated with the ascending power series J0(x) = Σ_k (-x²/4)^k / (k!)² for |x| ≤ 12, summed until every term
    is below 1e-16 in magnitude. Larger arguments use the Hankel expansion
    J0(x) = sqrt(2 / (πx)) (P(x) cos(x - π/4) - Q(x) sin(x - π/4)), truncated at its smallest term.

    Args:
        x: Real argument(s) of any shape.

    Returns:
        float64 tensor with the shape of `x`.
    """
    x = torch.as_tensor(x, dtype=torch.float64)
    if not torch.isfinite(x).all():
        raise ValueError(f"bessel_j0 requires finite arguments, got {x}")

    in_series = x.abs() <= SERIES_LIMIT
    x_series = torch.where(in_series, x, torch.zeros_like(x))
    quarter_square = -(x_series**2) / 4

    total = torch.ones_like(x)
    term = torch.ones_like(x)
    for k in range(1, MAX_SERIES_TERMS):
        term = term * quarter_square / (k * k)
        total = total + term
        if bool((term.abs() < TERM_TOLERANCE).all()):
            break

    if in_series.all():
        return total
    return torch.where(in_series, total, _hankel_j0(torch.where(in_series, 2 * SERIES_LIMIT, x.abs())))


def _hankel_j0(x: torch.Tensor) -> torch.Tensor:
    """Asymptotic expansion of J0 for x > 12; term k is (1·9·25···(2k-1)²) / (k! (8x)^k) with signs +, -, -, +."""
    p = torch.ones_like(x)
    q = torch.zeros_like(x)
    term = torch.ones_like(x)
    active = torch.ones_like(x, dtype=torch.bool)
    for k in range(1, MAX_SERIES_TERMS):
        next_term = term * (2 * k - 1) ** 2 / (8 * k * x)
        active = active & (next_term < term) & (term >= TERM_TOLERANCE)
        if not active.any():
            break
        term = torch.where(active, next_term, term)
        signed = torch.where(active, next_term, torch.zeros_like(x)) * (1.0 if k % 4 in (0, 3) else -1.0)
        if k % 2 == 0:
            p = p + signed
        else:
            q = q + signed
    phase = x - math.pi / 4
    return torch.sqrt(2 / (math.pi * x)) * (p * torch.cos(phase) - q * torch.sin(phase))


def correlation_coefficient(v: float, fc: float, c: float, Ts: float) -> float:
    """
    Clarke-model temporal correlation of a link over one subframe, J0(2π f_d Ts) with Doppler f_d = v fc / c.

    Args:
        v: Relative velocity in m/s.
        fc: Carrier frequency in Hz.
        c: Propagation speed in m/s.
        Ts: Subframe duration in seconds.
    """
    for name, value in (("v", v), ("fc", fc), ("c", c), ("Ts", Ts)):
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"{name} must be finite and nonnegative, got {value}")
    if c == 0:
        raise ValueError("Propagation speed c must be positive")
    doppler = v * fc / c
    return float(bessel_j0(2 * math.pi * doppler * Ts))
