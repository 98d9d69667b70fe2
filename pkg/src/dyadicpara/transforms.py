"""Coefficient transforms between signals and rectangle coefficients.

The coefficient tensor of a resolution-L signal has shape (2^L,)^d.  Along
each axis, flat index 2^k + j addresses the interval (level k, position j)
for 0 <= k <= L-1, and index 0 addresses the axis-constant (mean) slot.
Entries whose indices are all >= 1 are rectangle coefficients; the rest are
mean blocks.  For the orthonormal Haar family the full tensor is an
orthogonal change of basis, so Parseval and exact reconstruction hold; for
the other families only rectangle coefficients are populated.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, ResolutionError, UnsupportedFamilyError
from .families import AdaptedFamily
from .lattice import DyadicRectangle, enumerate_rectangles
from .signals import Signal


def lattice_levels(L: int) -> range:
    """Interval levels whose profiles are representable at resolution L."""
    return range(L)


def lattice_rectangles(d: int, L: int, cap=None) -> list:
    """All rectangles addressable by a resolution-L coefficient tensor."""
    if L < 1:
        return []
    return enumerate_rectangles(d, L - 1, cap=cap)


def flat_index(level: int, position: int) -> int:
    return (1 << level) + position


def index_interval(idx: int):
    """Inverse of flat_index; index 0 is the mean slot (returns None)."""
    if idx == 0:
        return None
    level = idx.bit_length() - 1
    return level, idx - (1 << level)


@dataclass(frozen=True)
class CoefficientField:
    d: int
    L: int
    family: AdaptedFamily
    tensor: np.ndarray = field(compare=False)

    def __post_init__(self):
        arr = np.asarray(self.tensor, dtype=float)
        if arr.shape != ((1 << self.L),) * self.d:
            raise ContractError("coefficient tensor has the wrong shape")
        arr.flags.writeable = False
        object.__setattr__(self, "tensor", arr)

    @property
    def has_mean_blocks(self) -> bool:
        return self.family.is_orthonormal_basis

    def rectangle_coefficient(self, rect: DyadicRectangle) -> float:
        idx = tuple(flat_index(a.level, a.position) for a in rect.axes)
        if any(a.level >= self.L for a in rect.axes):
            raise ResolutionError(
                f"rectangle {rect.to_json()} has no profile at resolution {self.L}"
            )
        return float(self.tensor[idx])

    def level_block(self, levels: tuple) -> np.ndarray:
        """Coefficients of all rectangles with the given per-axis levels."""
        slices = tuple(slice(1 << k, 1 << (k + 1)) for k in levels)
        return self.tensor[slices]

    def energy(self) -> float:
        return float(np.sum(self.tensor**2))

    def oscillatory_energy(self) -> float:
        sub = self.tensor[(slice(1, None),) * self.d]
        return float(np.sum(sub**2))

    def to_json(self):
        entries = []
        mean_blocks = []
        for idx in itertools.product(range(1 << self.L), repeat=self.d):
            v = float(self.tensor[idx])
            if v == 0.0:
                continue
            key = [None if i == 0 else list(index_interval(i)) for i in idx]
            if all(i >= 1 for i in idx):
                entries.append([key, v])
            else:
                mean_blocks.append([key, v])
        return {
            "d": self.d,
            "L": self.L,
            "family": {
                "kind": self.family.kind,
                "zero_pattern": list(self.family.zero_pattern),
            },
            "mean_blocks": mean_blocks,
            "entries": entries,
        }

    def save_json(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def from_json(cls, data) -> "CoefficientField":
        d, L = int(data["d"]), int(data["L"])
        fam = AdaptedFamily.make(
            data["family"]["kind"], d, tuple(data["family"]["zero_pattern"])
        )
        tensor = np.zeros(((1 << L),) * d)
        for key, v in list(data["entries"]) + list(data["mean_blocks"]):
            idx = tuple(
                0 if part is None else flat_index(int(part[0]), int(part[1]))
                for part in key
            )
            tensor[idx] = float(v)
        return cls(d, L, fam, tensor)

    @classmethod
    def load_json(cls, path) -> "CoefficientField":
        return cls.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Fast Haar cascade (orthonormal analysis/synthesis along one axis)
# ---------------------------------------------------------------------------


def _haar_analysis_axis(values: np.ndarray, axis: int, L: int) -> np.ndarray:
    """Orthonormal Haar analysis along one axis in O(2^L) per fiber.

    Output fiber layout: index 0 the mean coefficient, index 2^k + j the
    coefficient against h_(k,j).
    """
    a = np.moveaxis(values, axis, -1)
    n = a.shape[-1]
    out = np.empty_like(a)
    integ = a * (1.0 / n)  # cell integrals
    for k in range(L - 1, -1, -1):
        even = integ[..., 0::2]
        odd = integ[..., 1::2]
        out[..., (1 << k) : (1 << (k + 1))] = (even - odd) * 2.0 ** (k / 2.0)
        integ = even + odd
    out[..., 0] = integ[..., 0]
    return np.moveaxis(out, -1, axis)


def _haar_synthesis_axis(coeffs: np.ndarray, axis: int, L: int) -> np.ndarray:
    a = np.moveaxis(coeffs, axis, -1)
    vals = a[..., 0:1]
    for k in range(L):
        block = a[..., (1 << k) : (1 << (k + 1))] * 2.0 ** (k / 2.0)
        up = np.empty(a.shape[:-1] + (1 << (k + 1),), dtype=a.dtype)
        up[..., 0::2] = vals + block
        up[..., 1::2] = vals - block
        vals = up
    return np.moveaxis(vals, -1, axis)


def _dense_analysis_axis(
    values: np.ndarray, axis: int, L: int, matrix: np.ndarray
) -> np.ndarray:
    weighted = matrix * 2.0**-L
    moved = np.tensordot(weighted, values, axes=(1, axis))
    return np.moveaxis(moved, 0, axis)


def coefficients(f: Signal, family: AdaptedFamily) -> CoefficientField:
    """Inner products of f against every representable rectangle profile.

    The orthonormal Haar family uses the per-axis cascade and also fills
    the mean blocks; other families use dense per-axis profile matrices and
    populate rectangle entries only.
    """
    if family.d != f.d:
        raise ContractError("family and signal parameter counts differ")
    tensor = f.values.astype(float)
    if family.is_orthonormal_basis:
        for axis in range(f.d):
            tensor = _haar_analysis_axis(tensor, axis, f.L)
    else:
        for axis in range(f.d):
            tensor = _dense_analysis_axis(
                tensor, axis, f.L, family.profile_matrix(axis, f.L)
            )
    return CoefficientField(f.d, f.L, family, tensor)


def reconstruct(c: CoefficientField) -> Signal:
    """Synthesis inverse of `coefficients`, Haar families only."""
    if not c.family.is_orthonormal_basis:
        raise UnsupportedFamilyError(
            "reconstruction requires the orthonormal haar family"
        )
    values = c.tensor.astype(float)
    for axis in range(c.d):
        values = _haar_synthesis_axis(values, axis, c.L)
    return Signal(c.d, c.L, values)
