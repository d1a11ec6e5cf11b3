"""Packed symmetric tensors and tensor fields over a coordinate chart."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import DimMismatch, IndexOutOfRange, RankUnderflow
from .jet import Jet2


@lru_cache(maxsize=None)
def sorted_indices(dim: int, rank: int) -> tuple[tuple[int, ...], ...]:
    """All sorted multi-indices in packed (lexicographic) order."""
    return tuple(itertools.combinations_with_replacement(range(dim), rank))


@lru_cache(maxsize=None)
def _offsets(dim: int, rank: int) -> dict[tuple[int, ...], int]:
    return {mi: i for i, mi in enumerate(sorted_indices(dim, rank))}


@lru_cache(maxsize=None)
def multiplicities(dim: int, rank: int) -> tuple[int, ...]:
    """Number of ordered tuples represented by each packed slot."""
    out = []
    for mi in sorted_indices(dim, rank):
        count = math.factorial(rank)
        for c in itertools.groupby(mi):
            count //= math.factorial(len(list(c[1])))
        out.append(count)
    return tuple(out)


def packed_size(dim: int, rank: int) -> int:
    return math.comb(dim + rank - 1, rank)


def pack_index(multi_index: Sequence[int], dim: int) -> int:
    """Offset of a (not necessarily sorted) multi-index in packed storage."""
    for a in multi_index:
        if a < 0 or a >= dim:
            raise IndexOutOfRange(f"index {a} outside 0..{dim - 1}")
    return _offsets(dim, len(multi_index))[tuple(sorted(multi_index))]


def _is_zero(c) -> bool:
    if isinstance(c, Jet2):
        return False
    if isinstance(c, np.ndarray):
        return not c.any()
    return c == 0


class SymTensor:
    """Totally symmetric rank-``n`` tensor stored once per sorted multi-index.

    Components may be floats, numpy arrays (batched) or :class:`Jet2` values.
    """

    __slots__ = ("rank", "dim", "components")

    def __init__(self, rank: int, dim: int, components: Sequence | None = None):
        if rank < 1:
            raise RankUnderflow("SymTensor rank must be >= 1")
        size = packed_size(dim, rank)
        if components is None:
            components = [0.0] * size
        components = list(components)
        if len(components) != size:
            raise DimMismatch(f"expected {size} packed components, got {len(components)}")
        self.rank = rank
        self.dim = dim
        self.components = components

    @classmethod
    def from_dict(cls, rank: int, dim: int, entries: Mapping[tuple, object]) -> "SymTensor":
        comps: list = [0.0] * packed_size(dim, rank)
        for mi, val in entries.items():
            if len(mi) != rank:
                raise DimMismatch(f"multi-index {mi} has wrong rank")
            comps[pack_index(mi, dim)] = val
        return cls(rank, dim, comps)

    @classmethod
    def from_dense(cls, array) -> "SymTensor":
        """Pack a dense array, which must already be symmetric."""
        a = np.asarray(array, dtype=float)
        rank, dim = a.ndim, a.shape[0]
        comps = [a[mi] for mi in sorted_indices(dim, rank)]
        for mi in itertools.product(range(dim), repeat=rank):
            if not np.isclose(a[mi], a[tuple(sorted(mi))], rtol=1e-12, atol=1e-14):
                raise ValueError("array is not symmetric")
        return cls(rank, dim, comps)

    def __getitem__(self, multi_index) -> object:
        if isinstance(multi_index, int):
            multi_index = (multi_index,)
        if len(multi_index) != self.rank:
            raise DimMismatch("wrong number of indices")
        return self.components[pack_index(multi_index, self.dim)]

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim,) * self.rank)
        for mi in itertools.product(range(self.dim), repeat=self.rank):
            c = self.components[_offsets(self.dim, self.rank)[tuple(sorted(mi))]]
            out[mi] = c.value if isinstance(c, Jet2) else c
        return out

    def values(self) -> "SymTensor":
        """Copy with derivative parts stripped."""
        return SymTensor(self.rank, self.dim,
                         [c.value if isinstance(c, Jet2) else c for c in self.components])

    def __repr__(self) -> str:
        return f"SymTensor(rank={self.rank}, dim={self.dim})"


def _monomial(v: Sequence, mi: tuple[int, ...]):
    out = v[mi[0]]
    for a in mi[1:]:
        out = out * v[a]
    return out


def contract_full(S: SymTensor, v: Sequence):
    """``S(v, ..., v)`` summed over all ordered index tuples."""
    if len(v) != S.dim:
        raise DimMismatch(f"tensor dim {S.dim} vs vector length {len(v)}")
    total = 0.0
    for c, mult, mi in zip(S.components, multiplicities(S.dim, S.rank),
                           sorted_indices(S.dim, S.rank)):
        if _is_zero(c):
            continue
        term = _monomial(v, mi) * c
        total = total + (term * mult if mult != 1 else term)
    return total


def contract_partial(S: SymTensor, v: Sequence, k: int):
    """Fill ``k`` slots of ``S`` with ``v``; the rest stay free.

    Returns a rank ``n-k`` tensor with components
    ``S_{a_1..a_{n-k} b_1..b_k} v^{b_1}..v^{b_k}`` (no factorial factor), or
    the scalar :func:`contract_full` when ``k == n``.  Use
    :func:`vderivative` for the derivative-normalized version.
    """
    n = S.rank
    if k < 0 or k > n:
        raise RankUnderflow(f"cannot contract {k} slots of a rank-{n} tensor")
    if len(v) != S.dim:
        raise DimMismatch(f"tensor dim {S.dim} vs vector length {len(v)}")
    if k == 0:
        return SymTensor(n, S.dim, list(S.components))
    if k == n:
        return contract_full(S, v)
    dim = S.dim
    offsets = _offsets(dim, n)
    free = sorted_indices(dim, n - k)
    filled = list(zip(sorted_indices(dim, k), multiplicities(dim, k)))
    comps = []
    for a in free:
        acc = 0.0
        for b, mult in filled:
            c = S.components[offsets[tuple(sorted(a + b))]]
            if _is_zero(c):
                continue
            term = _monomial(v, b) * c
            acc = acc + (term * mult if mult != 1 else term)
        comps.append(acc)
    return SymTensor(n - k, dim, comps)


def vderivative(S: SymTensor, v: Sequence, j: int):
    """``j``-th derivative of ``S(v,...,v)`` with respect to ``v``.

    Equal to ``n!/(n-j)!`` times :func:`contract_partial` with ``n-j`` slots
    filled.
    """
    n = S.rank
    if j < 0 or j > n:
        raise RankUnderflow(f"derivative order {j} exceeds rank {n}")
    scale = math.factorial(n) // math.factorial(n - j)
    part = contract_partial(S, v, n - j)
    if j == 0:
        return part
    return SymTensor(j, S.dim, [c * scale for c in part.components])


@dataclass(frozen=True)
class TensorField:
    """Symmetric tensor field on an ``dim``-dimensional chart.

    ``func`` maps a point (sequence of floats, arrays or jets) to either a
    :class:`SymTensor` or a sparse ``{multi_index: component}`` mapping.
    It must be written with :mod:`reparam.jet` elementary functions so that
    jet-valued coordinates propagate derivatives.
    """

    rank: int
    dim: int
    func: Callable
    name: str = ""

    def __call__(self, x: Sequence) -> SymTensor:
        if len(x) != self.dim:
            raise DimMismatch(f"field on {self.dim}-dim chart evaluated at {len(x)} coords")
        out = self.func(x)
        if isinstance(out, SymTensor):
            if out.rank != self.rank or out.dim != self.dim:
                raise DimMismatch("field returned tensor of wrong shape")
            return out
        return SymTensor.from_dict(self.rank, self.dim, out)

    @classmethod
    def constant(cls, tensor: SymTensor, name: str = "") -> "TensorField":
        return cls(tensor.rank, tensor.dim, lambda x: tensor, name)


@dataclass(frozen=True)
class ScalarField:
    """Scalar function on the chart with an explicit gradient.

    Both callables must accept jet-valued coordinates.  The gradient is
    supplied rather than derived because equations of motion need the
    derivatives of ``d(value)`` itself.
    """

    dim: int
    value: Callable
    gradient: Callable

    def __call__(self, x: Sequence):
        return self.value(x)

    def grad(self, x: Sequence) -> list:
        g = list(self.gradient(x))
        if len(g) != self.dim:
            raise DimMismatch("gradient has wrong length")
        return g
