"""Momentum and amplitude value types shared across the transform engines."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["LightlikeMomentum", "Amplitude"]


@dataclass(frozen=True)
class LightlikeMomentum:
    """Forward light-like momentum p0 = |p| = mag along the unit vector dir."""

    mag: float
    dir: tuple[float, float, float]

    def __post_init__(self):
        if not self.mag > 0.0:
            raise ValueError(f"mag must be positive, got {self.mag}")
        n = np.asarray(self.dir, dtype=float)
        if abs(np.linalg.norm(n) - 1.0) > 1e-12:
            raise ValueError("dir must be a unit vector to 1e-12")

    @property
    def n(self) -> np.ndarray:
        return np.asarray(self.dir, dtype=float)

    def four(self) -> np.ndarray:
        return np.array([self.mag, *(self.mag * self.n)])


@dataclass(frozen=True)
class Amplitude:
    """Complex four-component momentum-space value with an error estimate."""

    components: np.ndarray
    err: float = 0.0

    def __post_init__(self):
        c = np.asarray(self.components, dtype=complex)
        if c.shape != (4,):
            raise ValueError(f"expected 4 components, got shape {c.shape}")
        if not np.all(np.isfinite(c.view(float))):
            raise ValueError("amplitude components must be finite")
        if self.err < 0.0:
            raise ValueError("err must be nonnegative")
        object.__setattr__(self, "components", c)

    @property
    def time(self) -> complex:
        return self.components[0]

    @property
    def spatial(self) -> np.ndarray:
        return self.components[1:]

    def norm(self) -> float:
        return float(np.linalg.norm(self.components))

    @classmethod
    def from_parts(cls, time: complex, spatial, err: float = 0.0) -> "Amplitude":
        return cls(np.array([time, *np.asarray(spatial, dtype=complex)]), err=err)


def transverse_project(amp: Amplitude, n) -> Amplitude:
    """Zero the time component and remove the n-parallel spatial part."""
    n = np.asarray(n, dtype=float)
    v = amp.spatial
    v_perp = v - n * (n @ v)
    return Amplitude.from_parts(0.0, v_perp, err=amp.err)
