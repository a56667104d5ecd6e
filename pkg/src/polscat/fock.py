"""Multi-polariton basis labels, occupations and symmetric amplitude storage.

A :class:`PolaritonTuple` is an ordered list of global mode indices grouped by
character.  Symmetric wavefunctions are stored once per *canonical* tuple
(each character group sorted); the sum over all ordered tuples of a
symmetric function ``f`` is ``sum(multiplicity(c) * f(c))`` over canonical
``c``.  The amplitude on a normalized occupation state is
``sqrt(multiplicity(c)) * psi(c)``.
"""
from __future__ import annotations

import itertools
import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import InvalidLabelError, ResourceCapError
from .modespace import CHARACTERS, Character, ModeSpace

log = logging.getLogger(__name__)

N_MAX = 6
SYMMETRY_WARN = 1e-8

Signature = tuple  # (P, Q, R)


@dataclass(frozen=True, order=True)
class PolaritonTuple:
    s: tuple[int, ...] = ()
    e: tuple[int, ...] = ()
    m: tuple[int, ...] = ()

    def __post_init__(self):
        for name in ("s", "e", "m"):
            object.__setattr__(self, name, tuple(int(i) for i in getattr(self, name)))

    @classmethod
    def from_labels(cls, space: ModeSpace, indices: Iterable[int]) -> "PolaritonTuple":
        groups = {c: [] for c in CHARACTERS}
        for i in indices:
            groups[space.character_of(i)].append(i)
        return cls(groups[Character.S], groups[Character.E], groups[Character.M])

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.s), len(self.e), len(self.m))

    @property
    def N(self) -> int:
        return len(self.s) + len(self.e) + len(self.m)

    @property
    def labels(self) -> tuple[int, ...]:
        """Concatenated labels, s group first, then e, then m."""
        return self.s + self.e + self.m

    def group(self, character: Character | str) -> tuple[int, ...]:
        return getattr(self, Character(character).value)

    def canonical(self) -> "PolaritonTuple":
        return PolaritonTuple(tuple(sorted(self.s)), tuple(sorted(self.e)), tuple(sorted(self.m)))

    def is_canonical(self) -> bool:
        return self == self.canonical()

    def multiplicity(self) -> int:
        """Number of distinct orderings under within-group permutations."""
        out = 1
        for grp in (self.s, self.e, self.m):
            out *= math.factorial(len(grp))
            for c in Counter(grp).values():
                out //= math.factorial(c)
        return out

    def occupation_factorials(self) -> int:
        return math.prod(math.factorial(c) for c in Counter(self.labels).values())

    def validate(self, space: ModeSpace) -> None:
        for char in CHARACTERS:
            for i in self.group(char):
                if space.character_of(i) is not char:
                    raise InvalidLabelError(f"mode {i} is not an {char.value} channel")

    def orderings(self) -> Iterator["PolaritonTuple"]:
        """All distinct within-group orderings."""
        for s in _distinct_perms(self.s):
            for e in _distinct_perms(self.e):
                for m in _distinct_perms(self.m):
                    yield PolaritonTuple(s, e, m)

    def to_dict(self) -> dict:
        return {"s": list(self.s), "e": list(self.e), "m": list(self.m)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "PolaritonTuple":
        return cls(data.get("s", ()), data.get("e", ()), data.get("m", ()))

    def __str__(self):
        return f"s{list(self.s)} e{list(self.e)} m{list(self.m)}"


def _distinct_perms(seq):
    return sorted(set(itertools.permutations(seq)))


@dataclass(frozen=True, order=True)
class OccupationState:
    """Sparse occupation numbers as sorted ``(mode, count)`` pairs."""

    occupations: tuple[tuple[int, int], ...]

    def __post_init__(self):
        occ = tuple(sorted((int(k), int(v)) for k, v in self.occupations if v))
        if any(v < 0 for _, v in occ):
            raise ValueError("occupation counts must be non-negative")
        object.__setattr__(self, "occupations", occ)

    @classmethod
    def from_mapping(cls, counts: Mapping[int, int]) -> "OccupationState":
        return cls(tuple(counts.items()))

    @property
    def N(self) -> int:
        return sum(v for _, v in self.occupations)

    def as_dict(self) -> dict[int, int]:
        return dict(self.occupations)


def tuple_to_occupation(t: PolaritonTuple) -> OccupationState:
    return OccupationState.from_mapping(Counter(t.labels))


def occupation_to_tuples(occ: OccupationState, space: ModeSpace) -> tuple[int, PolaritonTuple]:
    """Multiplicity and canonical tuple of an occupation state."""
    labels = [mode for mode, count in occ.occupations for _ in range(count)]
    t = PolaritonTuple.from_labels(space, labels).canonical()
    return t.multiplicity(), t


def multiplicity(t: PolaritonTuple) -> int:
    return t.multiplicity()


def check_cap(N: int, n_max: int = N_MAX) -> None:
    if N > n_max:
        raise ResourceCapError(f"polariton number {N} exceeds cap {n_max}")


def signatures(N: int, space: ModeSpace | None = None) -> list[Signature]:
    """Compositions (P, Q, R) of N, restricted to characters present in ``space``."""
    out = []
    for P in range(N, -1, -1):
        for Q in range(N - P, -1, -1):
            R = N - P - Q
            if space is not None:
                if Q and not space.has_character("e"):
                    continue
                if R and not space.has_character("m"):
                    continue
            out.append((P, Q, R))
    return out


def canonical_tuples(space: ModeSpace, signature: Signature) -> Iterator[PolaritonTuple]:
    """Canonical tuples of a sector, in lexicographic order."""
    P, Q, R = signature
    groups = [
        itertools.combinations_with_replacement(space.modes_of(c), k)
        for c, k in zip(CHARACTERS, (P, Q, R))
    ]
    for s, e, m in itertools.product(*(list(g) for g in groups)):
        yield PolaritonTuple(s, e, m)


def count_canonical(space: ModeSpace, signature: Signature) -> int:
    total = 1
    for c, k in zip(CHARACTERS, signature):
        n = len(space.modes_of(c))
        total *= math.comb(n + k - 1, k) if n else int(k == 0)
    return total


def enumerate_sectors(N: int, space: ModeSpace, with_tuples: bool = False):
    """Character signatures with P + Q + R = N, optionally paired with their
    canonical tuple streams."""
    if N < 0:
        raise ValueError("N must be non-negative")
    sigs = signatures(N, space)
    if with_tuples:
        return [(sig, canonical_tuples(space, sig)) for sig in sigs]
    return sigs


class AmplitudeTensor:
    """Symmetric amplitude function on one character signature.

    Values live on canonical tuples; lookups on any ordering return the
    canonical value.
    """

    def __init__(self, signature: Signature, values: Mapping[PolaritonTuple, complex] | None = None):
        self.signature = tuple(int(x) for x in signature)
        self._values: dict[PolaritonTuple, complex] = {}
        for t, v in (values or {}).items():
            if t.counts != self.signature:
                raise ValueError(f"tuple {t} does not have signature {self.signature}")
            c = t.canonical()
            if c in self._values and self._values[c] != complex(v):
                raise ValueError(f"conflicting amplitudes for orderings of {c}")
            self._values[c] = complex(v)

    @property
    def N(self) -> int:
        return sum(self.signature)

    def __getitem__(self, t: PolaritonTuple) -> complex:
        return self._values.get(t.canonical(), 0j)

    def __len__(self):
        return len(self._values)

    def __iter__(self):
        return iter(sorted(self._values))

    def items(self):
        return ((t, self._values[t]) for t in sorted(self._values))

    def norm2(self) -> float:
        return float(sum(t.multiplicity() * abs(v) ** 2 for t, v in self._values.items()))

    def scaled(self, factor: complex) -> "AmplitudeTensor":
        return AmplitudeTensor(self.signature, {t: factor * v for t, v in self._values.items()})

    def max_abs(self) -> float:
        return max((abs(v) for v in self._values.values()), default=0.0)

    def max_abs_diff(self, other: "AmplitudeTensor") -> float:
        keys = set(self._values) | set(other._values)
        return max((abs(self[k] - other[k]) for k in keys), default=0.0)

    def occupation_amplitudes(self) -> dict[OccupationState, complex]:
        return {tuple_to_occupation(t): math.sqrt(t.multiplicity()) * v for t, v in self._values.items()}

    def to_dense(self, space: ModeSpace) -> np.ndarray:
        """Full ordered tensor; axes follow the concatenated s, e, m slots and
        index positions within ``space.modes_of(character)``."""
        axes = _slot_modes(space, self.signature)
        pos = [{m: k for k, m in enumerate(modes)} for modes in axes]
        out = np.zeros(tuple(len(a) for a in axes), dtype=np.complex128)
        for t, v in self._values.items():
            for o in t.orderings():
                out[tuple(p[i] for p, i in zip(pos, o.labels))] = v
        return out

    @classmethod
    def from_dense(cls, space: ModeSpace, signature: Signature, array: np.ndarray,
                   drop_zeros: bool = True) -> "AmplitudeTensor":
        axes = _slot_modes(space, signature)
        pos = [{m: k for k, m in enumerate(modes)} for modes in axes]
        values = {}
        for t in canonical_tuples(space, signature):
            v = complex(array[tuple(p[i] for p, i in zip(pos, t.labels))])
            if v != 0 or not drop_zeros:
                values[t] = v
        return cls(signature, values)

    def to_records(self) -> list[dict]:
        return [{"tuple": t.to_dict(), "re": v.real, "im": v.imag} for t, v in self.items()]

    @classmethod
    def from_records(cls, signature: Signature, records: Iterable[Mapping]) -> "AmplitudeTensor":
        return cls(signature, {
            PolaritonTuple.from_dict(r["tuple"]): complex(r["re"], r["im"]) for r in records
        })

    def __repr__(self):
        return f"AmplitudeTensor(signature={self.signature}, entries={len(self._values)})"


def _slot_modes(space: ModeSpace, signature: Signature) -> list[tuple[int, ...]]:
    return [space.modes_of(c) for c, k in zip(CHARACTERS, signature) for _ in range(k)]


class FockState:
    """Pure multi-polariton state: one :class:`AmplitudeTensor` per signature."""

    def __init__(self, components: Iterable[AmplitudeTensor] = ()):
        self._components: dict[Signature, AmplitudeTensor] = {}
        for comp in components:
            if comp.signature in self._components:
                raise ValueError(f"duplicate component for signature {comp.signature}")
            self._components[comp.signature] = comp

    @classmethod
    def from_tensor(cls, tensor: AmplitudeTensor) -> "FockState":
        return cls([tensor])

    @classmethod
    def ingest(cls, space: ModeSpace, entries: Iterable[tuple[PolaritonTuple, complex]],
               normalize: bool = True) -> tuple["FockState", float]:
        """Build a symmetric state from ordered-tuple amplitudes.

        A canonical tuple listed on its own stands for its whole symmetric
        orbit.  If any non-canonical ordering of an orbit is listed, the orbit
        is symmetrized by averaging over all its orderings with unlisted ones
        taken as zero.  Returns the state and the largest symmetrization
        correction.
        """
        groups: dict[PolaritonTuple, dict[PolaritonTuple, complex]] = defaultdict(dict)
        for t, v in entries:
            t.validate(space)
            groups[t.canonical()][t] = groups[t.canonical()].get(t, 0j) + complex(v)
        per_sig: dict[Signature, dict[PolaritonTuple, complex]] = defaultdict(dict)
        correction = 0.0
        for c, given in groups.items():
            if set(given) == {c}:
                per_sig[c.counts][c] = given[c]
                continue
            orders = list(c.orderings())
            sym = sum(given.get(o, 0j) for o in orders) / len(orders)
            correction = max(correction, max(abs(given.get(o, 0j) - sym) for o in orders))
            per_sig[c.counts][c] = sym
        if correction > SYMMETRY_WARN:
            log.warning("input wavefunction symmetrized; largest correction %.3e", correction)
        state = cls(AmplitudeTensor(sig, vals) for sig, vals in sorted(per_sig.items(), reverse=True))
        if normalize:
            state = state.normalized()
        return state, correction

    @property
    def components(self) -> dict[Signature, AmplitudeTensor]:
        return dict(self._components)

    def __getitem__(self, signature: Signature) -> AmplitudeTensor:
        return self._components[tuple(signature)]

    def get(self, signature: Signature) -> AmplitudeTensor | None:
        return self._components.get(tuple(signature))

    def __iter__(self):
        return iter(sorted(self._components, key=lambda s: (sum(s), tuple(-x for x in s))))

    def items(self):
        return ((s, self._components[s]) for s in self)

    def __len__(self):
        return len(self._components)

    @property
    def sizes(self) -> list[int]:
        return sorted({sum(s) for s in self._components})

    @property
    def max_N(self) -> int:
        return max(self.sizes, default=0)

    def is_s_only(self) -> bool:
        return all(q == 0 and r == 0 for _, q, r in self._components)

    def s_component(self, n: int) -> AmplitudeTensor | None:
        return self._components.get((n, 0, 0))

    def norm2(self) -> float:
        return sum(c.norm2() for c in self._components.values())

    def normalized(self) -> "FockState":
        norm = math.sqrt(self.norm2())
        if norm == 0:
            raise ValueError("cannot normalize the zero state")
        return FockState(c.scaled(1 / norm) for _, c in self.items())

    def occupation_amplitudes(self) -> dict[OccupationState, complex]:
        out = {}
        for comp in self._components.values():
            out.update(comp.occupation_amplitudes())
        return out

    def to_records(self) -> list[dict]:
        return [dict(sector=list(sig), **rec) for sig, comp in self.items() for rec in comp.to_records()]

    @classmethod
    def from_records(cls, records: Iterable[Mapping]) -> "FockState":
        per_sig = defaultdict(list)
        for r in records:
            per_sig[tuple(r["sector"])].append(r)
        return cls(AmplitudeTensor.from_records(sig, recs) for sig, recs in per_sig.items())


# ------------------------------------------------------------------ presets
# Single-polariton vectors are indexed by position in ``space.s_modes``.

def _normalized(vec) -> np.ndarray:
    vec = np.asarray(vec, dtype=np.complex128).reshape(-1)
    norm = np.linalg.norm(vec)
    if norm == 0:
        raise ValueError("zero wavefunction")
    return vec / norm


def _from_pair_tensor(space: ModeSpace, psi: np.ndarray) -> FockState:
    comp = AmplitudeTensor.from_dense(space, (psi.ndim, 0, 0), psi)
    return FockState([comp]).normalized()


def single_mode(space: ModeSpace, k: int) -> FockState:
    modes = space.s_modes
    if not 0 <= k < len(modes):
        raise InvalidLabelError(f"s mode {k} out of range [0, {len(modes)})")
    return FockState([AmplitudeTensor((1, 0, 0), {PolaritonTuple((modes[k],)): 1.0})])


def single_polariton(space: ModeSpace, phi) -> FockState:
    phi = _normalized(phi)
    if len(phi) != len(space.s_modes):
        raise ValueError(f"wavefunction has {len(phi)} entries for {len(space.s_modes)} s modes")
    return _from_pair_tensor(space, phi)


def product_pair(space: ModeSpace, phi) -> FockState:
    """Both polaritons in the same single-polariton state ``phi``."""
    phi = _normalized(phi)
    return _from_pair_tensor(space, np.multiply.outer(phi, phi))


def entangled_pair(space: ModeSpace, phi1, phi2) -> FockState:
    """Symmetric pair state ``(phi1 phi2 + phi2 phi1) / sqrt(2)``, renormalized."""
    a, b = _normalized(phi1), _normalized(phi2)
    return _from_pair_tensor(space, (np.multiply.outer(a, b) + np.multiply.outer(b, a)) / math.sqrt(2))


def random_state(space: ModeSpace, sizes: Iterable[int], rng: np.random.Generator) -> FockState:
    """Gaussian random s-only state over the given polariton numbers."""
    comps = []
    for N in sorted(set(sizes)):
        check_cap(N)
        values = {t: complex(*rng.standard_normal(2)) for t in canonical_tuples(space, (N, 0, 0))}
        comps.append(AmplitudeTensor((N, 0, 0), values))
    return FockState(comps).normalized()
