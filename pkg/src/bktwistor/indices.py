"""Multi-index calculus with the contraction convention.

A multi-index is a word over the tagged alphabet ``{0..l}`` (V-side) and
``{0'..m'}`` (W-side).  Two rewrite rules act on adjacent letters::

    ... i i ...  ->  - ...          (contraction)
    ... i j ...  ->  - ... j i ...  (swap, i != j)

so every word equals ``+-`` a unique strictly increasing word.  This is the
basis-monomial calculus of a Clifford algebra with ``e_i**2 = -1``; in
particular the sign is never zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .kernels import normalize_positions

V_SIDE = "V"
W_SIDE = "W"

# W letters sort after every V letter
_W_OFFSET = 1 << 16


@dataclass(frozen=True, order=True)
class IndexSymbol:
    side: str
    value: int

    def __post_init__(self):
        if self.side not in (V_SIDE, W_SIDE):
            raise ValueError(f"side must be 'V' or 'W', got {self.side!r}")
        if self.value < 0:
            raise ValueError("index values are non-negative")

    @property
    def key(self) -> int:
        return self.value + (_W_OFFSET if self.side == W_SIDE else 0)

    @classmethod
    def from_key(cls, key: int) -> "IndexSymbol":
        if key >= _W_OFFSET:
            return cls(W_SIDE, key - _W_OFFSET)
        return cls(V_SIDE, key)

    def __str__(self):
        return f"{self.value}'" if self.side == W_SIDE else str(self.value)


@dataclass(frozen=True)
class MultiIndex:
    symbols: tuple = ()

    @classmethod
    def of(cls, v: Iterable[int] = (), w: Iterable[int] = ()) -> "MultiIndex":
        """Block word: the V letters in order, then the W letters."""
        return cls(tuple(IndexSymbol(V_SIDE, i) for i in v)
                   + tuple(IndexSymbol(W_SIDE, j) for j in w))

    @classmethod
    def from_keys(cls, keys: Iterable[int]) -> "MultiIndex":
        return cls(tuple(IndexSymbol.from_key(k) for k in keys))

    @property
    def keys(self) -> tuple:
        return tuple(s.key for s in self.symbols)

    @property
    def v(self) -> tuple:
        return tuple(s.value for s in self.symbols if s.side == V_SIDE)

    @property
    def w(self) -> tuple:
        return tuple(s.value for s in self.symbols if s.side == W_SIDE)

    def __len__(self):
        return len(self.symbols)

    def __add__(self, other: "MultiIndex") -> "MultiIndex":
        return MultiIndex(self.symbols + other.symbols)

    def is_reduced(self) -> bool:
        k = self.keys
        return all(a < b for a, b in zip(k, k[1:]))

    def swap_adjacent(self, pos: int) -> "MultiIndex":
        s = list(self.symbols)
        s[pos], s[pos + 1] = s[pos + 1], s[pos]
        return MultiIndex(tuple(s))

    def __str__(self):
        return "(" + ",".join(str(s) for s in self.symbols) + ")"

    def to_json(self) -> dict:
        out = {"v": list(self.v), "w": list(self.w)}
        sides = [s.side.lower() for s in self.symbols]
        if sides != sorted(sides):
            # interleaved word: record the side sequence explicitly
            out["order"] = sides
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MultiIndex":
        v, w = list(obj.get("v", [])), list(obj.get("w", []))
        order = obj.get("order")
        if order is None:
            return cls.of(v, w)
        vi, wi = iter(v), iter(w)
        syms = []
        for side in order:
            if side == "v":
                syms.append(IndexSymbol(V_SIDE, next(vi)))
            else:
                syms.append(IndexSymbol(W_SIDE, next(wi)))
        return cls(tuple(syms))


def normalize_keys(keys: Sequence[int]) -> tuple[int, tuple]:
    """Sign and reduced word for a sequence of integer sort keys."""
    return normalize_positions(list(keys))


def normalize(index: MultiIndex) -> tuple[int, MultiIndex]:
    """Reduce ``index`` to its strictly increasing normal form.

    >>> normalize(MultiIndex.of([2, 1]))[0]
    -1
    >>> normalize(MultiIndex.of([1, 1]))
    (-1, MultiIndex(symbols=()))
    """
    sign, red = normalize_positions(list(index.keys))
    return sign, MultiIndex.from_keys(red)


def reduced_length(index: MultiIndex) -> int:
    return len(normalize(index)[1])


def sign_to_json(sign: int) -> int:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    return int(sign)
