"""Weyl words and quasi-free expectation values.

A word is a finite product of exponentiated field symbols, reduced to a
single generator with an accumulated phase via the group law

    W(g) W(c f) = exp(i (c/2) <g, D f>) W(g + c f),

with the symplectic pairing of the registry.  The vacuum functional is
Gaussian: omega0(W(h)) = exp((1/2) dplus(h, h)), so every expectation is
the reduced phase times a Gaussian factor with |omega0| <= 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..fourier.quadrature import QuadratureConfig
from .pairings import PairingValue, dplus, symplectic

__all__ = ["FieldRegistry", "WeylWord", "weyl_multiply", "vacuum_expectation"]


class FieldRegistry:
    """Label-indexed test fields with memoized pairwise pairings."""

    def __init__(self, fields=(), quad: QuadratureConfig | None = None):
        self.quad = quad or QuadratureConfig()
        self._fields: dict[str, object] = {}
        self._dplus: dict[tuple[str, str], PairingValue] = {}
        for f in fields:
            self.add(f)

    def add(self, f):
        if f.label in self._fields and self._fields[f.label] is not f:
            raise ValueError(f"duplicate field label {f.label!r}")
        self._fields[f.label] = f

    def __getitem__(self, label: str):
        return self._fields[label]

    def dplus(self, a: str, b: str) -> PairingValue:
        key = (a, b)
        if key not in self._dplus:
            self._dplus[key] = dplus(self._fields[a], self._fields[b], self.quad)
        return self._dplus[key]

    def symplectic(self, a: str, b: str) -> PairingValue:
        d = self.dplus(a, b)
        return PairingValue(-2.0 * float(np.imag(d.value)), err=2.0 * d.err)


@dataclass(frozen=True)
class WeylWord:
    """Unit-modulus phase times W(sum_i coeff_i field_i)."""

    phase: complex = 1.0
    coefficients: tuple[tuple[str, float], ...] = ()
    err: float = 0.0

    def __post_init__(self):
        if abs(abs(self.phase) - 1.0) > 1e-9:
            raise ValueError("phase must have unit modulus")

    @classmethod
    def generator(cls, label: str, coeff: float = 1.0) -> "WeylWord":
        return cls(phase=1.0, coefficients=((label, float(coeff)),))

    @classmethod
    def unit(cls) -> "WeylWord":
        return cls()

    def coeff_map(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for label, c in self.coefficients:
            out[label] = out.get(label, 0.0) + c
        return {k: v for k, v in out.items() if v != 0.0}

    def inverse(self) -> "WeylWord":
        return WeylWord(
            phase=np.conj(self.phase),
            coefficients=tuple((label, -c) for label, c in reversed(self.coefficients)),
            err=self.err,
        )


def weyl_multiply(a: WeylWord, b: WeylWord, registry: FieldRegistry) -> WeylWord:
    """Group law W(g) W(f) = e^{(i/2) <g, D f>} W(g + f) on reduced words.

    Words always hold the reduced form phase * W(sum coeffs), so the
    cocycle collects only the cross pairings between the two factors.
    """
    err = a.err + b.err
    cross = 0.0
    for la, ca in a.coefficients:
        for lb, cb in b.coefficients:
            s = registry.symplectic(la, lb)
            cross += ca * cb * s.value
            err += 0.5 * abs(ca * cb) * s.err
    merged: dict[str, float] = {}
    for label, c in a.coefficients + b.coefficients:
        merged[label] = merged.get(label, 0.0) + c
    coeffs_t = tuple((k, v) for k, v in merged.items() if v != 0.0)
    total_phase = complex(a.phase * b.phase * np.exp(1j * cross / 2.0))
    total_phase /= abs(total_phase)
    return WeylWord(phase=total_phase, coefficients=coeffs_t, err=err)


def vacuum_expectation(word: WeylWord, registry: FieldRegistry) -> tuple[complex, float]:
    """omega0 of a (reduced) word: phase * exp((1/2) dplus(h, h)), |result| <= 1."""
    coeffs = word.coeff_map()
    labels = sorted(coeffs)
    expo = 0.0 + 0.0j
    err = word.err
    for i, la in enumerate(labels):
        for lb in labels:
            d = registry.dplus(la, lb)
            expo += 0.5 * coeffs[la] * coeffs[lb] * d.value
            err += 0.5 * abs(coeffs[la] * coeffs[lb]) * d.err
    val = word.phase * np.exp(expo)
    return complex(val), float(err)
