"""Discrete polariton channels grouped by frequency sector and character.

Global indices run sector-major; inside a sector the character blocks are
laid out as s, then e, then m, and channels are the fastest index.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .errors import InvalidLabelError


class Character(str, Enum):
    S = "s"
    E = "e"
    M = "m"

    @property
    def order(self) -> int:
        return _CHAR_ORDER[self]


_CHAR_ORDER = {Character.S: 0, Character.E: 1, Character.M: 2}
CHARACTERS = (Character.S, Character.E, Character.M)


@dataclass(frozen=True)
class FrequencySector:
    frequency: float
    n_s: int
    n_e: int = 0
    n_m: int = 0

    def __post_init__(self):
        if not self.frequency > 0:
            raise ValueError(f"sector frequency must be positive, got {self.frequency}")
        if self.n_s < 1:
            raise ValueError("a sector needs at least one s channel")
        if self.n_e < 0 or self.n_m < 0:
            raise ValueError("channel counts must be non-negative")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.n_s, self.n_e, self.n_m)

    @property
    def size(self) -> int:
        return self.n_s + self.n_e + self.n_m

    def count(self, character: Character | str) -> int:
        return self.dims[Character(character).order]


@dataclass(frozen=True)
class ModeLabel:
    sector: int
    character: Character
    channel: int

    def __post_init__(self):
        object.__setattr__(self, "character", Character(self.character))


class ModeSpace:
    """Immutable registry of channels.

    >>> space = ModeSpace([FrequencySector(1.0, 2, 1, 1)])
    >>> space.flatten(ModeLabel(0, "m", 0))
    3
    """

    def __init__(self, sectors: Iterable[FrequencySector]):
        sectors = tuple(sectors)
        if not sectors:
            raise ValueError("a mode space needs at least one sector")
        freqs = [sec.frequency for sec in sectors]
        if any(b <= a for a, b in zip(freqs, freqs[1:])):
            raise ValueError("sector frequencies must be strictly increasing")
        self._sectors = sectors
        offsets = []
        total = 0
        for sec in sectors:
            offsets.append(total)
            total += sec.size
        self._offsets = tuple(offsets)
        self._total = total
        labels = []
        for k, sec in enumerate(sectors):
            for char in CHARACTERS:
                labels.extend(ModeLabel(k, char, c) for c in range(sec.count(char)))
        self._labels = tuple(labels)
        self._s_modes = tuple(i for i, lab in enumerate(labels) if lab.character is Character.S)

    @classmethod
    def single(cls, n_s: int, n_e: int = 0, n_m: int = 0, frequency: float = 1.0) -> "ModeSpace":
        return cls([FrequencySector(frequency, n_s, n_e, n_m)])

    @property
    def sectors(self) -> tuple[FrequencySector, ...]:
        return self._sectors

    @property
    def total_modes(self) -> int:
        return self._total

    def __len__(self):
        return self._total

    def __eq__(self, other):
        return isinstance(other, ModeSpace) and self._sectors == other._sectors

    def __hash__(self):
        return hash(self._sectors)

    def __repr__(self):
        return f"ModeSpace({list(self._sectors)!r})"

    def sector_offset(self, sector: int) -> int:
        return self._offsets[sector]

    def block(self, sector: int, character: Character | str) -> range:
        """Global indices of one character block of one sector."""
        sec = self._sectors[sector]
        char = Character(character)
        start = self._offsets[sector] + sum(sec.dims[: char.order])
        return range(start, start + sec.count(char))

    def sector_range(self, sector: int) -> range:
        start = self._offsets[sector]
        return range(start, start + self._sectors[sector].size)

    def flatten(self, label: ModeLabel) -> int:
        if not 0 <= label.sector < len(self._sectors):
            raise InvalidLabelError(f"sector {label.sector} out of range")
        count = self._sectors[label.sector].count(label.character)
        if not 0 <= label.channel < count:
            raise InvalidLabelError(
                f"channel {label.channel} out of range for {label.character.value} block "
                f"of sector {label.sector} (size {count})"
            )
        return self.block(label.sector, label.character)[label.channel]

    def unflatten(self, index: int) -> ModeLabel:
        if not 0 <= index < self._total:
            raise InvalidLabelError(f"global index {index} out of range [0, {self._total})")
        return self._labels[index]

    def character_of(self, index: int) -> Character:
        return self.unflatten(index).character

    def sector_of(self, index: int) -> int:
        return self.unflatten(index).sector

    def modes_of(self, character: Character | str) -> tuple[int, ...]:
        char = Character(character)
        if char is Character.S:
            return self._s_modes
        return tuple(i for i, lab in enumerate(self._labels) if lab.character is char)

    @property
    def s_modes(self) -> tuple[int, ...]:
        return self._s_modes

    def has_character(self, character: Character | str) -> bool:
        char = Character(character)
        return any(sec.count(char) > 0 for sec in self._sectors)

    def to_dict(self) -> dict:
        return {
            "sectors": [
                {"frequency": s.frequency, "n_s": s.n_s, "n_e": s.n_e, "n_m": s.n_m}
                for s in self._sectors
            ]
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModeSpace":
        return cls(FrequencySector(**sec) for sec in data["sectors"])
