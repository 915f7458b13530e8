from dataclasses import dataclass

import torch

from bitpart.channels.gauss_markov import complex_normal

MAX_CODEBOOK_BITS = 16
UNIT_NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class Codebook:
    """
    A random vector quantization codebook for one link.

    B: Number of feedback bits.
    vectors: Complex tensor of shape (2^B, M) with unit-norm rows.
    """

    B: int
    vectors: torch.Tensor

    def __post_init__(self):
        if self.vectors.ndim != 2 or self.vectors.shape[0] != 2**self.B:
            raise ValueError(f"A {self.B}-bit codebook needs {2**self.B} codewords, got shape {tuple(self.vectors.shape)}")

    @property
    def dim(self) -> int:
        return self.vectors.shape[-1]

    def __len__(self) -> int:
        return self.vectors.shape[0]


@dataclass(frozen=True)
class QuantizedDirection:
    """The codeword chosen for a channel direction, together with its fidelity |h̄ᴴc|²."""

    index: int
    vector: torch.Tensor
    fidelity: float


def generate_codebook(rng: torch.Generator, M: int, B: int) -> Codebook:
    """Draw 2^B isotropic unit vectors in ℂ^M by normalizing CN(0, I) samples."""
    if M < 2:
        raise ValueError(f"Codebooks need at least 2 dimensions, got M={M}")
    if not 0 <= B <= MAX_CODEBOOK_BITS:
        raise ValueError(f"Codebook bits must be in [0, {MAX_CODEBOOK_BITS}], got B={B}")
    samples = complex_normal((2**B, M), rng)
    return Codebook(B=B, vectors=samples / torch.linalg.vector_norm(samples, dim=-1, keepdim=True))


def fidelities(hbar: torch.Tensor, cb: Codebook) -> torch.Tensor:
    """
    Squared inner-product magnitudes between directions and every codeword.

    Args:
        hbar: Unit directions of shape (..., M).
        cb: Codebook of dimension M.

    Returns:
        Tensor of shape (..., 2^B) with entries |h̄ᴴc^k|².
    """
    if hbar.shape[-1] != cb.dim:
        raise ValueError(f"Direction of dimension {hbar.shape[-1]} does not match codebook dimension {cb.dim}")
    inner = hbar.conj() @ cb.vectors.T
    return (inner.abs() ** 2).clamp(max=1.0)


def quantize_many(hbar: torch.Tensor, cb: Codebook) -> tuple[torch.Tensor, torch.Tensor]:
    """
    Quantize a batch of unit directions against one codebook.

    Returns:
        Tuple of codeword indices of shape (...) and the chosen codewords of shape (..., M).
    """
    indices = torch.argmax(fidelities(hbar, cb), dim=-1)
    return indices, cb.vectors[indices]


def quantize(hbar: torch.Tensor, cb: Codebook) -> QuantizedDirection:
    """
    Pick the codeword maximizing |h̄ᴴc|², the lowest index winning ties.

    Args:
        hbar: Unit-norm direction of shape (M,).
        cb: Codebook of dimension M.
    """
    if hbar.ndim != 1:
        raise ValueError(f"Expected a single direction of shape (M,), got {tuple(hbar.shape)}")
    if abs(torch.linalg.vector_norm(hbar).item() - 1.0) > UNIT_NORM_TOLERANCE:
        raise ValueError("Direction to quantize must have unit norm")
    scores = fidelities(hbar, cb)
    index = int(torch.argmax(scores))
    return QuantizedDirection(index=index, vector=cb.vectors[index], fidelity=float(scores[index]))


def normalize(h: torch.Tensor) -> torch.Tensor:
    """Scale channel vectors (last dimension) to unit norm."""
    return h / torch.linalg.vector_norm(h, dim=-1, keepdim=True)
