"""Bitstring genomes for feature subsets, variation operators, and RNG streams.

A genome is a uint8 vector of 0/1 flags, one per candidate feature.  All
randomness flows through named streams derived from a hierarchical integer key
so that results are reproducible regardless of evaluation order.
"""

import numpy as np

Genome = np.ndarray


def derive_rng(*key: int) -> np.random.Generator:
    """Return the PCG64 generator for a hierarchical key.

    The first component is the master seed, the rest (generation index, slot,
    ...) select independent child streams.  The same key always yields the
    same stream.
    """
    if not key:
        raise ValueError("rng key needs at least a master seed")
    master, *path = (int(k) for k in key)
    if master < 0 or any(k < 0 for k in path):
        raise ValueError("rng key components must be non-negative")
    seq = np.random.SeedSequence(master, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(*key: int) -> int:
    """Collapse a hierarchical key to a single 32-bit integer seed."""
    master, *path = (int(k) for k in key)
    seq = np.random.SeedSequence(master, spawn_key=tuple(path))
    return int(seq.generate_state(1)[0])


def random_init(length: int, rng: np.random.Generator) -> Genome:
    """Draw a genome whose bits are independent fair coin flips."""
    if length < 1:
        raise ValueError("genome length must be positive")
    return (rng.random(length) < 0.5).astype(np.uint8)


def uniform_crossover(
    parent_a: Genome, parent_b: Genome, rng: np.random.Generator
) -> tuple[Genome, Genome]:
    """Uniform crossover: per position, child one copies a randomly chosen
    parent's bit and child two copies the other parent's bit."""
    if parent_a.shape != parent_b.shape:
        raise ValueError("parents must have equal length")
    take_a = rng.random(parent_a.shape[0]) < 0.5
    child_a = np.where(take_a, parent_a, parent_b).astype(np.uint8)
    child_b = np.where(take_a, parent_b, parent_a).astype(np.uint8)
    return child_a, child_b


def bitflip_mutation(genome: Genome, rng: np.random.Generator) -> Genome:
    """Flip each bit independently with probability 1/length."""
    length = genome.shape[0]
    flips = rng.random(length) < (1.0 / length)
    return np.where(flips, 1 - genome, genome).astype(np.uint8)


def repair_empty(genome: Genome, rng: np.random.Generator) -> Genome:
    """Set one uniformly chosen bit when the genome selects no feature."""
    if genome.any():
        return genome
    repaired = genome.copy()
    repaired[int(rng.integers(0, genome.shape[0]))] = 1
    return repaired


def to_bitstring(genome: Genome) -> str:
    return "".join("1" if b else "0" for b in genome)


def from_bitstring(text: str) -> Genome:
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"not a bitstring: {text!r}")
    return np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")
