import numpy as np
from numpy.random import Generator, Philox, SeedSequence

MAX_SEED = 2**64 - 1
_TORCH_SEED_MASK = 2**63 - 1


class SeedError(ValueError): ...


def _check_seed(seed: int) -> None:
    if not 0 <= seed <= MAX_SEED:
        raise SeedError(f"[SEED DOMAIN ERROR] seed must be a 64-bit unsigned integer, got {seed}")


def derive_seed_sequence(seed: int, *path: int) -> SeedSequence:
    """
    Seed sequence for the stream addressed by `path` under the root `seed`.

    Distinct paths give independent, counter-mixed streams; the same (seed, path) always gives
    the same stream regardless of how work is scheduled.
    """
    _check_seed(seed)
    return SeedSequence(entropy=seed, spawn_key=tuple(path))


def derive_generator(seed: int, *path: int) -> Generator:
    return Generator(Philox(derive_seed_sequence(seed, *path)))


def derive_seed(seed: int, *path: int) -> int:
    return int(derive_seed_sequence(seed, *path).generate_state(1, dtype=np.uint64)[0])


def derive_torch_seed(seed: int, *path: int) -> int:
    return derive_seed(seed, *path) & _TORCH_SEED_MASK


def trial_seeds(seed: int, count: int) -> list[int]:
    """`count` distinct 64-bit seeds for independent trials."""
    return [derive_seed(seed, index) for index in range(count)]
