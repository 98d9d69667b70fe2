"""Square, maximal, and mixed governing operators over the rectangle lattice.

Every operator aggregates the normalized coefficient field

    a_R(x) = |<f, phi_R>| / sqrt(|R|) * 1_R(x)

over the rectangles addressable at the signal's resolution.  The square
function takes an l^2 norm over all rectangles, the maximal function a
supremum, and the general governing operator applies one l^2 or l^sup norm
per coordinate in a prescribed nesting order.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ContractError, ResolutionError, ResourceError
from .families import AdaptedFamily
from .lattice import RectangleCollection
from .signals import Signal
from .transforms import CoefficientField, coefficients

SQUARE = "square"
MAX = "max"

# mixed-norm evaluation materializes one grid field per level tuple
_MIXED_FIELD_CELLS = 1 << 25


@dataclass(frozen=True)
class OperatorSpec:
    """Per-coordinate choice of square/max plus the nesting permutation.

    `pi` lists 0-based coordinates from the outermost norm to the
    innermost; `sigma[j]` chooses the norm applied along coordinate j.
    Square coordinates require the family to be mean zero there.
    """

    family: AdaptedFamily
    sigma: tuple
    pi: Optional[tuple] = None

    def __post_init__(self):
        if len(self.sigma) != self.family.d:
            raise ContractError("sigma must list one choice per coordinate")
        for s in self.sigma:
            if s not in (SQUARE, MAX):
                raise ContractError(f"unknown norm choice {s!r}")
        pi = tuple(range(self.family.d)) if self.pi is None else tuple(self.pi)
        if sorted(pi) != list(range(self.family.d)):
            raise ContractError("pi must be a permutation of the coordinates")
        object.__setattr__(self, "pi", pi)
        for j, s in enumerate(self.sigma):
            if s == SQUARE and not self.family.zero_pattern[j]:
                raise ContractError(
                    f"square norm in coordinate {j} requires a zero there"
                )

    @property
    def d(self) -> int:
        return self.family.d

    @classmethod
    def all_max(cls, family: AdaptedFamily) -> "OperatorSpec":
        return cls(family, (MAX,) * family.d)

    @classmethod
    def all_square(cls, family: AdaptedFamily) -> "OperatorSpec":
        return cls(family, (SQUARE,) * family.d)

    @classmethod
    def from_letters(cls, letters: str, family: AdaptedFamily, pi=None):
        table = {"S": SQUARE, "M": MAX}
        try:
            sigma = tuple(table[ch] for ch in letters.upper())
        except KeyError as exc:
            raise ContractError(f"bad operator letter in {letters!r}") from exc
        return cls(family, sigma, pi)


def _level_tuples(d: int, L: int):
    return itertools.product(range(L), repeat=d)


def _upsample(block: np.ndarray, levels, L: int) -> np.ndarray:
    out = block
    for axis, k in enumerate(levels):
        out = np.repeat(out, 1 << (L - k), axis=axis)
    return out


def _collection_masks(collection: RectangleCollection, d: int, L: int) -> dict:
    """Per level tuple, a boolean membership array over positions."""
    masks = {}
    for rect in collection.members:
        levels = rect.levels
        if max(levels) >= L:
            raise ResolutionError(
                f"rectangle {rect.to_json()} is finer than the coefficient "
                f"lattice at resolution {L}"
            )
        if levels not in masks:
            masks[levels] = np.zeros([1 << k for k in levels], dtype=bool)
        masks[levels][tuple(a.position for a in rect.axes)] = True
    return masks


def square_function(f: Signal, family: AdaptedFamily) -> Signal:
    """Pointwise l^2 aggregation; needs zeros in every coordinate."""
    if not all(family.zero_pattern):
        raise ContractError("the square function requires zeros in every coordinate")
    return governing_operator(f, OperatorSpec.all_square(family))


def maximal_function(f: Signal, family: AdaptedFamily) -> Signal:
    """Pointwise supremum of |<f, phi_R>| / sqrt(|R|) over R containing x."""
    return governing_operator(f, OperatorSpec.all_max(family))


def governing_operator(
    f: Signal,
    spec: OperatorSpec,
    collection: Optional[RectangleCollection] = None,
    field: Optional[CoefficientField] = None,
) -> Signal:
    if spec.d != f.d:
        raise ContractError("operator and signal parameter counts differ")
    if field is None:
        field = coefficients(f, spec.family)
    d, L = f.d, f.L
    masks = None if collection is None else _collection_masks(collection, d, L)
    grid = (1 << L,) * d

    # uniform sigma reduces in-place; mixed sigma materializes one field
    # per level tuple and contracts in the prescribed nesting order
    uniform = len(set(spec.sigma)) == 1
    if uniform:
        acc = np.zeros(grid)
    else:
        cells = L**d * (1 << (d * L))
        if cells > _MIXED_FIELD_CELLS:
            raise ResourceError(
                f"mixed-norm evaluation at d={d}, L={L} needs {cells} field "
                f"cells, above the cap {_MIXED_FIELD_CELLS}"
            )
        acc = np.zeros((L,) * d + grid)

    for levels in _level_tuples(d, L):
        block = np.abs(field.level_block(levels))
        scale = 2.0 ** (sum(levels) / 2.0)
        if masks is not None:
            sel = masks.get(levels)
            block = np.zeros_like(block) if sel is None else block * sel
        contrib = _upsample(block, levels, L) * scale
        if uniform and spec.sigma[0] == SQUARE:
            acc += contrib**2
        elif uniform:
            np.maximum(acc, contrib, out=acc)
        else:
            acc[levels] = contrib

    if uniform:
        return Signal(d, L, np.sqrt(acc) if spec.sigma[0] == SQUARE else acc)

    # innermost norm first: traverse the permutation from the inside out
    remaining = list(range(d))
    for coord in reversed(spec.pi):
        axis = remaining.index(coord)
        if spec.sigma[coord] == SQUARE:
            acc = np.sqrt(np.sum(acc**2, axis=axis))
        else:
            acc = np.max(acc, axis=axis)
        remaining.pop(axis)
    return Signal(d, L, acc)


def restricted_operator(
    f: Signal,
    spec: OperatorSpec,
    collection: RectangleCollection,
    field: Optional[CoefficientField] = None,
) -> Signal:
    """Same aggregation, but only over rectangles in the collection."""
    return governing_operator(f, spec, collection=collection, field=field)


def conditional_expectation(f: Signal, intervals) -> Signal:
    """Average f over each interval of a disjoint family; identity elsewhere.

    Block sums use exact (correctly rounded) accumulation, which makes the
    operation idempotent bit-for-bit and preserves the integral.
    """
    if f.d != 1:
        raise ContractError("conditional expectation is one-parameter only")
    intervals = list(intervals)
    for a, b in itertools.combinations(intervals, 2):
        if not a.is_disjoint(b):
            raise ContractError(
                f"intervals {a.to_json()} and {b.to_json()} overlap"
            )
    out = f.values.copy()
    for iv in intervals:
        lo, hi = iv.cells(f.L)
        out[lo:hi] = math.fsum(out[lo:hi]) / (hi - lo)
    return Signal(1, f.L, out)
