import pytest
import torch

from bitpart.quantization import Codebook, fidelities, generate_codebook, normalize, quantize, quantize_many


@pytest.mark.parametrize(("M", "B"), [(2, 0), (3, 4), (4, 8)])
def test_generate_codebook(M, B):
    codebook = generate_codebook(torch.Generator().manual_seed(0), M, B)
    assert codebook.vectors.shape == (2**B, M)
    assert len(codebook) == 2**B
    assert codebook.dim == M
    norms = torch.linalg.vector_norm(codebook.vectors, dim=-1)
    torch.testing.assert_close(norms, torch.ones_like(norms))


def test_generate_codebook_is_deterministic():
    first = generate_codebook(torch.Generator().manual_seed(9), 3, 6)
    second = generate_codebook(torch.Generator().manual_seed(9), 3, 6)
    assert torch.equal(first.vectors, second.vectors)


@pytest.mark.parametrize(("M", "B"), [(1, 2), (3, -1), (3, 17)])
def test_generate_codebook_invalid(M, B):
    with pytest.raises(ValueError):
        generate_codebook(torch.Generator().manual_seed(0), M, B)


def test_codebook_size_must_match_bits():
    with pytest.raises(ValueError):
        Codebook(B=2, vectors=torch.zeros(3, 3, dtype=torch.complex128))


def test_quantize_recovers_codeword():
    codebook = generate_codebook(torch.Generator().manual_seed(1), 3, 5)
    chosen = quantize(codebook.vectors[7], codebook)
    assert chosen.index == 7
    assert torch.equal(chosen.vector, codebook.vectors[7])
    assert chosen.fidelity == pytest.approx(1.0)


def test_quantize_is_phase_invariant():
    codebook = generate_codebook(torch.Generator().manual_seed(2), 3, 4)
    rotated = codebook.vectors[3] * torch.exp(torch.tensor(1.1j, dtype=torch.complex128))
    assert quantize(rotated, codebook).index == 3


def test_quantize_ties_pick_lowest_index():
    direction = normalize(torch.tensor([1.0, 1.0j, 0.5], dtype=torch.complex128))
    codebook = Codebook(B=1, vectors=torch.stack([direction, direction]))
    assert quantize(direction, codebook).index == 0


def test_quantize_maximizes_fidelity():
    rng = torch.Generator().manual_seed(3)
    codebook = generate_codebook(rng, 3, 6)
    direction = normalize(torch.randn(3, dtype=torch.complex128, generator=rng))
    chosen = quantize(direction, codebook)
    assert chosen.fidelity == pytest.approx(float(fidelities(direction, codebook).max()))
    assert 0.0 <= chosen.fidelity <= 1.0


def test_quantize_rejects_non_unit_direction():
    codebook = generate_codebook(torch.Generator().manual_seed(0), 3, 2)
    with pytest.raises(ValueError):
        quantize(torch.tensor([1.0, 1.0, 0.0], dtype=torch.complex128), codebook)


def test_quantize_rejects_dimension_mismatch():
    codebook = generate_codebook(torch.Generator().manual_seed(0), 3, 2)
    with pytest.raises(ValueError):
        quantize(torch.tensor([1.0, 0.0], dtype=torch.complex128), codebook)


def test_quantize_many_matches_quantize():
    rng = torch.Generator().manual_seed(4)
    codebook = generate_codebook(rng, 3, 5)
    directions = normalize(torch.randn(20, 3, dtype=torch.complex128, generator=rng))
    indices, codewords = quantize_many(directions, codebook)
    assert indices.shape == (20,)
    assert codewords.shape == (20, 3)
    for direction, index in zip(directions, indices):
        assert quantize(direction, codebook).index == int(index)


def test_mean_fidelity_grows_with_codebook_size():
    rng = torch.Generator().manual_seed(5)
    directions = normalize(torch.randn(400, 3, dtype=torch.complex128, generator=rng))
    means = []
    for B in (1, 2, 4, 6):
        best = [fidelities(directions, generate_codebook(rng, 3, B)).amax(dim=-1).mean() for _ in range(50)]
        means.append(float(torch.stack(best).mean()))
    assert all(later > earlier for earlier, later in zip(means, means[1:]))
