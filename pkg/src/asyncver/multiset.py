"""Sparse multisets, the shared currency for task buffers, markings and
Parikh images."""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping


class Multiset:
    """Immutable finite map from symbols to positive counts.

    Absent symbols have count 0; an entry is never stored with count 0, so
    two multisets are equal iff their stored entries are.  Symbols must be
    hashable and mutually orderable, which keeps every iteration order
    deterministic.
    """

    __slots__ = ("_d", "_items", "_size", "_hash")

    def __init__(self, entries: Mapping | Iterable | None = None):
        d: dict = {}
        if entries is None:
            pass
        elif isinstance(entries, Multiset):
            d.update(entries._d)
        elif isinstance(entries, Mapping):
            for sym, count in entries.items():
                if not isinstance(count, int) or isinstance(count, bool):
                    raise TypeError(f"count for {sym!r} must be an int, got {count!r}")
                if count < 0:
                    raise ValueError(f"negative count for {sym!r}: {count}")
                if count:
                    d[sym] = d.get(sym, 0) + count
        else:
            for sym in entries:
                d[sym] = d.get(sym, 0) + 1
        self._d = d
        self._items = tuple(sorted(d.items()))
        self._size = sum(d.values())
        self._hash = hash(self._items)

    @staticmethod
    def single(sym, count: int = 1) -> "Multiset":
        return Multiset({sym: count})

    @property
    def size(self) -> int:
        """Total number of elements counted with multiplicity."""
        return self._size

    def items(self) -> tuple:
        return self._items

    def keys(self) -> tuple:
        return tuple(k for k, _ in self._items)

    def support(self) -> frozenset:
        return frozenset(self._d)

    def __getitem__(self, sym) -> int:
        return self._d.get(sym, 0)

    def __contains__(self, sym) -> bool:
        return sym in self._d

    def __bool__(self) -> bool:
        return bool(self._d)

    def __iter__(self) -> Iterator:
        return iter(self.keys())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Multiset):
            return NotImplemented
        return self._items == other._items

    def __hash__(self) -> int:
        return self._hash

    def __add__(self, other: "Multiset") -> "Multiset":
        d = dict(self._d)
        for sym, count in other._d.items():
            d[sym] = d.get(sym, 0) + count
        return Multiset(d)

    def __sub__(self, other: "Multiset") -> "Multiset":
        """Exact difference; raises if ``other`` is not below ``self``."""
        d = dict(self._d)
        for sym, count in other._d.items():
            have = d.get(sym, 0)
            if have < count:
                raise ValueError(f"cannot remove {count} x {sym!r}, only {have} present")
            if have == count:
                del d[sym]
            else:
                d[sym] = have - count
        return Multiset(d)

    def monus(self, other: "Multiset") -> "Multiset":
        """Saturating difference: counts never drop below 0."""
        d = {}
        for sym, count in self._d.items():
            rest = count - other._d.get(sym, 0)
            if rest > 0:
                d[sym] = rest
        return Multiset(d)

    def leq(self, other: "Multiset") -> bool:
        """Componentwise order: self can be completed to other."""
        for sym, count in self._d.items():
            if other._d.get(sym, 0) < count:
                return False
        return True

    def __le__(self, other: "Multiset") -> bool:
        return self.leq(other)

    def __lt__(self, other: "Multiset") -> bool:
        return self.leq(other) and self._items != other._items

    def restrict(self, symbols) -> "Multiset":
        """Projection onto the given symbol set."""
        symbols = set(symbols)
        return Multiset({s: c for s, c in self._d.items() if s in symbols})

    def without(self, symbols) -> "Multiset":
        symbols = set(symbols)
        return Multiset({s: c for s, c in self._d.items() if s not in symbols})

    def fmt(self, name=str) -> str:
        if not self._items:
            return "{}"
        return "{" + ", ".join(f"{name(s)}:{c}" for s, c in self._items) + "}"

    def __repr__(self) -> str:
        return f"Multiset({dict(self._items)!r})"


EMPTY = Multiset()


def parikh(word: Iterable) -> Multiset:
    """Letter-count image of a word (any iterable of symbols)."""
    return Multiset(word)
