"""Seeded Gaussian streams.

All randomness in the library flows through :class:`RngState`, a counter-based
generator (Philox) whose standard-normal stream is reproducible across
platforms for a fixed numpy version.  The stream position is tracked in units
of *draws consumed*, which is the only replayable notion of position once the
ziggurat sampler's rejection steps are involved.
"""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class RngState:
    """A seeded Gaussian stream with a replayable position."""

    seed: int
    position: int = 0
    _gen: np.random.Generator = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))
        if self.position:
            # replay: identical seed + position must resume the same stream
            self._gen.standard_normal(self.position)

    def draw(self, count):
        """Return ``count`` i.i.d. N(0,1) draws and advance the position."""
        out = self._gen.standard_normal(count)
        self.position += count
        return out


def gaussian_matrix(rng, rows, cols):
    """rows x cols matrix of i.i.d. N(0,1) draws, filled column-major."""
    if rows < 1 or cols < 1:
        raise ValueError("gaussian_matrix needs rows, cols >= 1")
    data = rng.draw(rows * cols)
    return np.asfortranarray(data.reshape((rows, cols), order="F"))
