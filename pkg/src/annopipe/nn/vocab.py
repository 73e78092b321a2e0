"""Closed symbol inventories with optional unknown-symbol fallback."""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Optional

UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
SEP = "<sep>"


class Vocab:
    """Symbol <-> index mapping, fixed after construction."""

    def __init__(self, symbols: Iterable[str], unk: Optional[str] = None):
        self._symbols = list(symbols)
        self._index = {s: i for i, s in enumerate(self._symbols)}
        if len(self._index) != len(self._symbols):
            raise ValueError("duplicate symbols in vocabulary")
        self._unk_index = self._index[unk] if unk is not None else None
        self.unk = unk

    @classmethod
    def build(cls, symbols: Iterable[str], specials: tuple[str, ...] = (UNK,),
              unk: Optional[str] = UNK) -> "Vocab":
        counts = Counter(symbols)
        ordered = list(specials) + sorted(s for s in counts if s not in specials)
        return cls(ordered, unk=unk)

    def __len__(self) -> int:
        return len(self._symbols)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self._index

    def encode(self, symbol: str) -> int:
        idx = self._index.get(symbol)
        if idx is None:
            if self._unk_index is None:
                raise KeyError(f"symbol {symbol!r} not in closed vocabulary")
            return self._unk_index
        return idx

    def encode_all(self, symbols: Iterable[str]) -> list[int]:
        return [self.encode(s) for s in symbols]

    def decode(self, index: int) -> str:
        return self._symbols[index]

    @property
    def symbols(self) -> list[str]:
        return list(self._symbols)

    def to_json(self) -> dict:
        return {"symbols": self._symbols, "unk": self.unk}

    @classmethod
    def from_json(cls, data: dict) -> "Vocab":
        return cls(data["symbols"], unk=data.get("unk"))
