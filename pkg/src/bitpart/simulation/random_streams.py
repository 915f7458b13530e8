"""
Independent random streams for the Monte Carlo harness.

Every stream is identified by the master seed and an integer key, so a trial draws the same numbers whichever order
(or process) it runs in.
"""
import numpy as np
import torch

CHANNEL_STREAM = 0
CODEBOOK_STREAM = 1


def stream_seed(seed: int, *key: int) -> int:
    """A 64-bit seed for the stream `key` under the master `seed`."""
    if seed < 0 or any(k < 0 for k in key):
        raise ValueError(f"Seed and stream key must be nonnegative, got seed={seed}, key={key}")
    sequence = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return int(sequence.generate_state(1, np.uint64)[0])


def make_generator(seed: int, *key: int) -> torch.Generator:
    return torch.Generator().manual_seed(stream_seed(seed, *key))


def channel_generator(seed: int, trial: int) -> torch.Generator:
    """Channel stream of a trial, shared by every scheme and sweep point."""
    return make_generator(seed, CHANNEL_STREAM, trial)


def codebook_generator(seed: int, block: int, user: int, station: int, bits: int) -> torch.Generator:
    """Codebook stream of one link and codebook size within a refresh block."""
    return make_generator(seed, CODEBOOK_STREAM, block, user, station, bits)
