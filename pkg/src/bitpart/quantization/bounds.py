import math

import torch


def _check(B: float, M: int, eps: float):
    if B < 0:
        raise ValueError(f"Bits must be nonnegative, got B={B}")
    if M < 2:
        raise ValueError(f"Need at least 2 antennas, got M={M}")
    if abs(eps) > 1:
        raise ValueError(f"Correlation must lie in [-1, 1], got eps={eps}")


def log_beta(x: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """log β(x, y) through log-gamma."""
    return torch.lgamma(x) + torch.lgamma(y) - torch.lgamma(x + y)


def quantization_error_bound(B: float, M: int, eps: float) -> float:
    """
    Upper bound on E|h̄ᴴb̂|² for a link quantized with B-bit RVQ one subframe earlier:
    1 - ε² + ε² 2^B β(2^B, M/(M-1)) M/(M-1), with the exact beta function.
    """
    _check(B, M, eps)
    exponent = torch.tensor(M / (M - 1), dtype=torch.float64)
    size = torch.tensor(2.0**B, dtype=torch.float64)
    leakage = torch.exp(B * math.log(2.0) + log_beta(size, exponent) + torch.log(exponent))
    return float(1 - eps**2 + eps**2 * leakage)


def quantization_error_bound_approx(B: float, M: int, eps: float) -> float:
    """The large-codebook form of `quantization_error_bound`, using β(x, y) ≈ Γ(y) x^(-y)."""
    _check(B, M, eps)
    exponent = M / (M - 1)
    leakage = math.exp(float(torch.lgamma(torch.tensor(exponent, dtype=torch.float64)))) * 2.0 ** (-B / (M - 1))
    return 1 - eps**2 + eps**2 * leakage * exponent
