"""Discrete signals on uniform 2^L grids with L^p and weak-L^r norms.

A signal stores one value per grid cell of the unit torus [0, 1)^d
(row-major over axes); every cell has measure 2^(-dL).  Values are kept
read-only after construction so signals can be shared freely.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError
from .lattice import DyadicRectangle, level_cap


def _grid_shape(d: int, L: int) -> tuple:
    return ((1 << L),) * d


@dataclass(frozen=True)
class Signal:
    d: int
    L: int
    values: np.ndarray = field(compare=False)

    def __post_init__(self):
        if self.d < 1:
            raise ContractError("parameter count d must be >= 1")
        if not 0 <= self.L <= level_cap(self.d) + 1:
            raise ContractError(
                f"resolution L={self.L} outside [0, {level_cap(self.d) + 1}] for d={self.d}"
            )
        arr = np.ascontiguousarray(np.asarray(self.values, dtype=float))
        if arr.size != (1 << (self.d * self.L)):
            raise ContractError(
                f"need 2^{self.d * self.L} values, got {arr.size}"
            )
        arr = arr.reshape(_grid_shape(self.d, self.L))
        if not np.all(np.isfinite(arr)):
            raise ContractError("signal values must be finite")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    # -- constructors -------------------------------------------------

    @classmethod
    def zeros(cls, d: int, L: int) -> "Signal":
        return cls(d, L, np.zeros(_grid_shape(d, L)))

    @classmethod
    def constant(cls, d: int, L: int, c: float) -> "Signal":
        return cls(d, L, np.full(_grid_shape(d, L), float(c)))

    @classmethod
    def indicator(cls, rect: DyadicRectangle, L: int) -> "Signal":
        out = np.zeros(_grid_shape(rect.d, L))
        out[rect.cell_slices(L)] = 1.0
        return cls(rect.d, L, out)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "Signal":
        mask = np.asarray(mask)
        d = mask.ndim
        L = int(mask.shape[0]).bit_length() - 1
        return cls(d, L, mask.astype(float))

    # -- basic geometry ------------------------------------------------

    @property
    def cell_measure(self) -> float:
        return 2.0 ** (-self.d * self.L)

    def integral(self) -> float:
        """Correctly rounded integral over the torus."""
        return math.fsum(self.values.ravel()) * self.cell_measure

    # -- arithmetic (all return new signals) ---------------------------

    def _like(self, values: np.ndarray) -> "Signal":
        return Signal(self.d, self.L, values)

    def _check_peer(self, other: "Signal"):
        if (self.d, self.L) != (other.d, other.L):
            raise ContractError("signals live on different grids")

    def __add__(self, other: "Signal") -> "Signal":
        self._check_peer(other)
        return self._like(self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        self._check_peer(other)
        return self._like(self.values - other.values)

    def __mul__(self, scalar: float) -> "Signal":
        return self._like(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "Signal":
        return self._like(-self.values)

    def __abs__(self) -> "Signal":
        return self._like(np.abs(self.values))

    def pointwise_mul(self, other: "Signal") -> "Signal":
        self._check_peer(other)
        return self._like(self.values * other.values)

    def restrict(self, mask: np.ndarray) -> "Signal":
        """Zero the signal outside the boolean mask."""
        return self._like(np.where(mask, self.values, 0.0))

    # -- serialization --------------------------------------------------

    def save_csv(self, path):
        Path(path).write_text(
            "\n".join(repr(float(v)) for v in self.values.ravel()) + "\n"
        )

    @classmethod
    def load_csv(cls, path, d: int, L: int) -> "Signal":
        raw = [float(line) for line in Path(path).read_text().split() if line]
        return cls(d, L, np.array(raw))

    def to_json(self):
        return {"d": self.d, "L": self.L, "values": self.values.ravel().tolist()}

    @classmethod
    def from_json(cls, data) -> "Signal":
        return cls(int(data["d"]), int(data["L"]), np.array(data["values"]))

    def save_json(self, path):
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load_json(cls, path) -> "Signal":
        return cls.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Norms
# ---------------------------------------------------------------------------


def lp_norm(f: Signal, p: float) -> float:
    """(integral |f|^p)^(1/p) with cell-measure weighting; p=inf gives sup."""
    if p <= 0:
        raise ContractError("exponent p must be positive")
    a = np.abs(f.values)
    if np.isinf(p):
        return float(a.max()) if a.size else 0.0
    return float((np.sum(a**p) * f.cell_measure) ** (1.0 / p))


def weak_quasinorm(f: Signal, r: float) -> float:
    """sup over lambda of lambda * |{|f| > lambda}|^(1/r).

    The distribution function of a grid signal is a right-continuous step
    function, so the supremum is attained as lambda increases to one of the
    realized values; it equals max over values a of a * |{|f| >= a}|^(1/r).
    """
    if r <= 0:
        raise ContractError("exponent r must be positive")
    a = np.abs(f.values).ravel()
    vals, counts = np.unique(a, return_counts=True)
    if vals[-1] == 0.0:
        return 0.0
    # measure of {|f| >= vals[i]} via suffix counts
    suffix = np.cumsum(counts[::-1])[::-1] * f.cell_measure
    keep = vals > 0
    return float(np.max(vals[keep] * suffix[keep] ** (1.0 / r)))


@dataclass(frozen=True)
class ExponentTuple:
    """Input exponents p_v in (1, inf] and the derived target index."""

    ps: tuple

    def __post_init__(self):
        for p in self.ps:
            if not p > 1:
                raise ContractError("every exponent must lie in (1, inf]")

    @property
    def r(self) -> float:
        inv = sum(0.0 if np.isinf(p) else 1.0 / p for p in self.ps)
        if inv == 0.0:
            return float("inf")
        return 1.0 / inv


def conjugate_exponent(p: float) -> float:
    if np.isinf(p):
        return 1.0
    if p == 1.0:
        return float("inf")
    return p / (p - 1.0)
