"""Shared helpers: deterministic seeding, circle geometry, interval estimates."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def counter_rng(seed: int, *counters: int) -> np.random.Generator:
    """Generator keyed by (seed, counters).

    Every Monte-Carlo sample draws from its own stream, so results do not
    depend on evaluation order or on how samples are split across workers.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, counters)]))


def wrap_angle(theta: float) -> float:
    """Reduce an angle difference to (-pi, pi]."""
    return -((-theta + np.pi) % TWO_PI - np.pi)


def circle_dist(z: complex, w: complex) -> float:
    """Chordal distance |z - w|; the notion of distance used on the circle."""
    return abs(z - w)


def phase_of(z: complex) -> float:
    """Argument of z folded into [0, 2*pi)."""
    return float(np.angle(z) % TWO_PI)


def arc_contains(theta: float, lo: float, hi: float) -> bool:
    """Whether angle theta lies on the counterclockwise arc from lo to hi."""
    span = (hi - lo) % TWO_PI
    return (theta - lo) % TWO_PI <= span


@dataclass(frozen=True)
class WilsonInterval:
    """Wilson score interval for a binomial proportion."""

    estimate: float
    lo: float
    hi: float
    hits: int
    samples: int

    @classmethod
    def from_counts(cls, hits: int, samples: int, z: float = 1.96) -> "WilsonInterval":
        if samples <= 0:
            raise ValueError("samples must be positive")
        p = hits / samples
        denom = 1.0 + z * z / samples
        center = (p + z * z / (2 * samples)) / denom
        half = z * np.sqrt(p * (1 - p) / samples + z * z / (4 * samples * samples)) / denom
        return cls(estimate=p, lo=max(0.0, center - half), hi=min(1.0, center + half),
                   hits=hits, samples=samples)

    def overlaps(self, other: "WilsonInterval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi


def pad_vector(vec: np.ndarray, src: tuple[int, int], dst: tuple[int, int]) -> np.ndarray:
    """Embed a vector indexed by sites src=[a,b] into sites dst=[c,d], zero-filled.

    Site labels align; dst must contain src.
    """
    a, b = src
    c, d = dst
    if not (c <= a and b <= d):
        raise ValueError(f"destination window {dst} does not contain {src}")
    if len(vec) != b - a + 1:
        raise ValueError("vector length does not match source window")
    out = np.zeros(d - c + 1, dtype=complex)
    out[a - c:b - c + 1] = vec
    return out


def format_float(x: float) -> str:
    """Shortest round-trip decimal form, used for byte-stable CSV output."""
    return repr(float(x))
