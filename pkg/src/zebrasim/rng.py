"""Deterministic seeded random streams (SplitMix64).

One independent stream per agent per trial; the same (seed, stream_id)
pair yields the identical sample sequence on every platform. The raw
state-advance functions live in the kernel module so the compiled and
pure backends share one generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import _kernel_py as _k


@dataclass
class RngStream:
    """Stateful view over a (seed, stream_id) SplitMix64 stream."""

    seed: int
    stream_id: int = 0
    _state: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._state = _k.stream_state(self.seed, self.stream_id)

    def reset(self) -> None:
        self._state = _k.stream_state(self.seed, self.stream_id)

    def uniform(self) -> float:
        """U[0, 1)."""
        self._state, u = _k.next_uniform(self._state)
        return u

    def normal(self) -> float:
        """Standard normal (Marsaglia polar)."""
        self._state, z = _k.next_normal(self._state)
        return z


def derive_seed(base: int, *tags: int | str) -> int:
    """Stable 63-bit seed derived from a base seed and mixed-type tags.

    Independent of PYTHONHASHSEED; used to give every trial an RNG that
    depends only on its own identifiers (parallel-schedule invariance).
    """
    h = _k.mix64(base)
    for tag in tags:
        if isinstance(tag, str):
            for b in tag.encode("utf-8"):
                h = _k.mix64(h ^ b)
        else:
            h = _k.mix64(h ^ (int(tag) & (2**64 - 1)))
    return h & (2**63 - 1)
