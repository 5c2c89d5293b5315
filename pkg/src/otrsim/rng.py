"""Counter-based normal draws keyed by (seed, node, step, path).

Every shock used by the simulator is a pure function of
``(master_seed, node_index, step, path_index)``:

* a Philox-4x64 generator is keyed with ``(master_seed, node_index << 32 | step)``;
* the shock of path ``p`` is raw output number ``p`` of that keyed stream
  (counter block ``p // 4``, lane ``p % 4``);
* the top 52 bits become a uniform on the open interval (0, 1), mapped to a
  standard normal through the inverse normal CDF.

Because draws are addressed rather than consumed in sequence, any partition of
nodes or paths across workers reproduces the same numbers bit for bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

DERIVATION = "philox4x64:key=(seed,node<<32|step):ctr=path:u52+0.5:ndtri"

_MASK64 = (1 << 64) - 1
_LANES = 4


@dataclass(frozen=True)
class RngSpec:
    master_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must fit in an unsigned 64-bit integer")

    @property
    def derivation(self) -> str:
        return DERIVATION

    def raw(self, node_index: int, step: int, start: int, count: int) -> np.ndarray:
        """Raw 64-bit words for paths ``start .. start+count-1`` at one (node, step)."""
        if not 0 <= node_index < 2**32 or not 0 <= step < 2**32:
            raise ValueError("node_index and step must be < 2**32")
        if count <= 0:
            return np.empty(0, dtype=np.uint64)
        block, lane = divmod(start, _LANES)
        bitgen = Philox(key=[self.master_seed, (node_index << 32) | step],
                        counter=[block & _MASK64, block >> 64, 0, 0])
        return bitgen.random_raw(lane + count)[lane:]

    def normals(self, node_index: int, step: int, start: int, count: int) -> np.ndarray:
        return raw_to_normal(self.raw(node_index, step, start, count))

    def path_stream(self, node_index: int, path_index: int) -> "PathStream":
        return PathStream(self, node_index, path_index)


def raw_to_uniform(raw: np.ndarray) -> np.ndarray:
    # 52 bits so that (k + 0.5) is exact and the largest value stays below 1.0
    return ((raw >> np.uint64(12)).astype(np.float64) + 0.5) * 2.0**-52


def raw_to_normal(raw: np.ndarray) -> np.ndarray:
    return ndtri(raw_to_uniform(raw))


class PathStream:
    """The shocks of a single path, one per step, starting at step 0."""

    def __init__(self, spec: RngSpec, node_index: int, path_index: int):
        self.spec = spec
        self.node_index = node_index
        self.path_index = path_index
        self.step = 0

    def __iter__(self):
        return self

    def __next__(self) -> float:
        z = float(self.spec.normals(self.node_index, self.step, self.path_index, 1)[0])
        self.step += 1
        return z
