"""Deterministic seed derivation.

Every random stream is keyed by ``(master, *path)`` through numpy's
``SeedSequence`` hashing, so a replicate's seeds depend only on its index
and never on scheduling order.
"""
import numpy as np

SPLIT = 1
INIT = 2
TRAIN_DATA = 3
TEST_DATA = 4
ORACLE = 5


def derive(master: int, *path: int) -> int:
    seq = np.random.SeedSequence(entropy=int(master), spawn_key=tuple(int(p) for p in path))
    return int(seq.generate_state(1, dtype=np.uint32)[0])
