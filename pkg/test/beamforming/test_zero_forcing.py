import pytest
import torch

from bitpart.beamforming import (
    InterferenceMatrix,
    interference_directions,
    nullspace_direction,
    stack_interference,
    zero_forcing_beamformers,
)
from bitpart.quantization import normalize


def _random_directions(draws: int, K: int = 3, M: int = 3, seed: int = 0) -> torch.Tensor:
    rng = torch.Generator().manual_seed(seed)
    return normalize(torch.randn(draws, K, K, M, dtype=torch.complex128, generator=rng))


def test_zero_forcing_nulls_interference():
    directions = _random_directions(1000)
    beams = zero_forcing_beamformers(directions)
    assert beams.shape == (1000, 3, 3)
    leakage = torch.einsum("dljm,djm->dlj", directions.conj(), beams).abs() ** 2
    off_diagonal = ~torch.eye(3, dtype=torch.bool)
    assert float(leakage[:, off_diagonal].max()) <= 1e-16


def test_beamformers_have_unit_norm_and_fixed_phase():
    beams = zero_forcing_beamformers(_random_directions(50, seed=1))
    norms = torch.linalg.vector_norm(beams, dim=-1)
    torch.testing.assert_close(norms, torch.ones_like(norms))
    first = beams[..., 0]
    assert float(first.imag.abs().max()) < 1e-12
    assert bool((first.real > 0).all())


def test_beamformers_are_deterministic():
    directions = _random_directions(10, seed=2)
    assert torch.equal(zero_forcing_beamformers(directions), zero_forcing_beamformers(directions))


def test_nullspace_direction_residual():
    directions = _random_directions(1, seed=3)[0]
    rows = stack_interference(interference_directions(directions, 1), 1, 3)
    beam = nullspace_direction(rows)
    assert rows.num_interferers == 2
    assert float(beam.residual) < 1e-12


def test_interference_directions_skip_the_serving_cell():
    directions = _random_directions(1, seed=4)[0]
    selected = interference_directions(directions, 1)
    assert torch.equal(selected, torch.stack([directions[0, 1], directions[2, 1]]))


def test_nullspace_direction_requires_one_more_antenna_than_interferers():
    rng = torch.Generator().manual_seed(5)
    rows = normalize(torch.randn(2, 4, dtype=torch.complex128, generator=rng))
    with pytest.raises(ValueError, match="Unsupported configuration"):
        nullspace_direction(InterferenceMatrix(rows=rows))


def test_stack_interference_invalid_arguments():
    directions = _random_directions(1, seed=6)[0]
    with pytest.raises(ValueError):
        stack_interference(directions[:1, 0], 0, 3)
    with pytest.raises(ValueError):
        stack_interference(interference_directions(directions, 0), 3, 3)


def test_stack_interference_accepts_a_sequence():
    directions = _random_directions(1, seed=7)[0]
    stacked = stack_interference([directions[1, 0], directions[2, 0]], 0, 3)
    torch.testing.assert_close(stacked.rows, interference_directions(directions, 0).conj())


def test_interference_rows_must_have_unit_norm():
    with pytest.raises(ValueError):
        InterferenceMatrix(rows=torch.ones(2, 3, dtype=torch.complex128))


def test_nullspace_of_two_coordinate_axes():
    e1, e2 = torch.eye(3, dtype=torch.complex128)[:2]
    beam = nullspace_direction(stack_interference([e1, e2], i=0, K=3))
    torch.testing.assert_close(beam.b, torch.tensor([0, 0, 1], dtype=torch.complex128), atol=1e-12, rtol=0.0)


def test_nullspace_of_repeated_direction():
    e1 = torch.eye(3, dtype=torch.complex128)[0]
    beam = nullspace_direction(stack_interference([e1, e1], i=0, K=3))
    assert float(beam.b[0].abs()) <= 1e-12
    assert float(torch.linalg.vector_norm(beam.b)) == pytest.approx(1.0)
    assert float(beam.residual) <= 1e-12
