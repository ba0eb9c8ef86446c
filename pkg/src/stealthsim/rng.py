"""Deterministic pseudo-random streams for the simulation.

Every agent draws from its own stream so that adding or removing one agent
never shifts the numbers another agent sees.  Streams are derived from the
scenario seed and the agent id with the splitmix64 mixing function, which is
public domain and trivially portable, so replays hash identically on any
platform.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    """splitmix64 finalizer: avalanche a 64-bit value."""
    z = (z + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class Stream:
    """Counter-based splitmix64 generator with a draw counter.

    The draw counter is recorded in the trace every tick; a replay that
    consumes a different number of draws is flagged even when the visible
    state happens to match.
    """

    __slots__ = ("_state", "draws")

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK
        self.draws = 0

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        self.draws += 1
        return mix64(self._state)

    def uniform(self) -> float:
        """Float in [0, 1) with 53 bits of resolution."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform_range(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.uniform()

    def randrange(self, n: int) -> int:
        """Integer in [0, n).  Modulo bias is irrelevant at gameplay scale."""
        if n <= 0:
            raise ValueError(f"randrange needs n >= 1, got {n}")
        return self.next_u64() % n

    def choice(self, seq):
        return seq[self.randrange(len(seq))]


def derive_stream(seed: int, stream_id: int) -> Stream:
    """Independent stream for one agent (or other subsystem) of a run.

    Mixing the id before xor keeps low ids from producing correlated seeds.
    """
    return Stream(mix64(seed ^ mix64(stream_id + 1)))
