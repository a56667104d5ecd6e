import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from polscat.errors import InvalidLabelError, ResourceCapError
from polscat.fock import (
    AmplitudeTensor,
    FockState,
    OccupationState,
    PolaritonTuple,
    canonical_tuples,
    check_cap,
    count_canonical,
    entangled_pair,
    enumerate_sectors,
    multiplicity,
    occupation_to_tuples,
    product_pair,
    random_state,
    single_mode,
    tuple_to_occupation,
)
from polscat.modespace import FrequencySector, ModeSpace

SPACE = ModeSpace([FrequencySector(1.0, 2, 1, 1), FrequencySector(2.0, 1, 1, 1)])


def test_sector_enumeration_order():
    assert enumerate_sectors(2, SPACE) == [(2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2)]
    assert enumerate_sectors(2, ModeSpace.single(3)) == [(2, 0, 0)]


@pytest.mark.parametrize("sig", [(2, 0, 0), (1, 1, 1), (0, 3, 0), (2, 1, 0)])
def test_canonical_counts(sig):
    ts = list(canonical_tuples(SPACE, sig))
    assert len(ts) == len(set(ts)) == count_canonical(SPACE, sig)
    assert all(t.is_canonical() for t in ts)
    # multiplicities add up to the number of ordered tuples
    n = [len(SPACE.modes_of(c)) for c in "sem"]
    assert sum(multiplicity(t) for t in ts) == math.prod(k ** p for k, p in zip(n, sig))


def test_multiplicity_examples():
    assert PolaritonTuple((0, 0, 1)).multiplicity() == 3
    assert PolaritonTuple((0, 1), (2,), (3,)).multiplicity() == 2
    assert PolaritonTuple((4, 4), (5, 5)).multiplicity() == 1


def test_occupation_roundtrip():
    t = PolaritonTuple((1, 0, 1), (2,), (3, 3))
    occ = tuple_to_occupation(t)
    assert occ == OccupationState.from_mapping({0: 1, 1: 2, 2: 1, 3: 2})
    mult, c = occupation_to_tuples(occ, SPACE)
    assert c == t.canonical() and mult == 3


def test_label_validation():
    with pytest.raises(InvalidLabelError):
        PolaritonTuple((2,)).validate(SPACE)


def test_tensor_lookup_any_ordering():
    a = AmplitudeTensor((2, 0, 0), {PolaritonTuple((1, 0)): 0.5})
    assert a[PolaritonTuple((0, 1))] == 0.5
    assert a.norm2() == pytest.approx(0.5)
    with pytest.raises(ValueError):
        AmplitudeTensor((2, 0, 0), {PolaritonTuple((1, 0)): 1, PolaritonTuple((0, 1)): 2})


def test_dense_roundtrip_and_norm():
    state = random_state(SPACE, [3], np.random.default_rng(0))
    comp = state[(3, 0, 0)]
    dense = comp.to_dense(SPACE)
    assert np.sum(np.abs(dense) ** 2) == pytest.approx(comp.norm2())
    assert np.allclose(dense, dense.transpose(1, 0, 2))
    assert AmplitudeTensor.from_dense(SPACE, (3, 0, 0), dense).max_abs_diff(comp) == 0


def test_ingest_symmetrizes_and_warns(caplog):
    state, corr = FockState.ingest(SPACE, [(PolaritonTuple((1, 0)), 1.0)])
    assert corr == pytest.approx(0.5)
    assert "symmetrized" in caplog.text
    assert state.norm2() == pytest.approx(1.0)
    # canonical-only entries are taken as already symmetric
    state, corr = FockState.ingest(SPACE, [(PolaritonTuple((0, 1)), 1.0), (PolaritonTuple((0, 0)), 1.0)])
    assert corr == 0
    assert state[(2, 0, 0)][PolaritonTuple((1, 0))] == pytest.approx(state[(2, 0, 0)][PolaritonTuple((0, 0))])


def test_occupation_amplitudes_normalized():
    state = random_state(SPACE, [1, 2], np.random.default_rng(3))
    amps = state.occupation_amplitudes()
    assert sum(abs(v) ** 2 for v in amps.values()) == pytest.approx(1.0)


def test_presets():
    assert single_mode(SPACE, 2)[(1, 0, 0)][PolaritonTuple((4,))] == 1
    with pytest.raises(InvalidLabelError):
        single_mode(SPACE, 3)
    pp = product_pair(SPACE, [1, 1, 0])
    assert pp[(2, 0, 0)][PolaritonTuple((0, 0))] == pytest.approx(0.5)
    ep = entangled_pair(SPACE, [1, 0, 0], [0, 1, 0])
    assert ep[(2, 0, 0)][PolaritonTuple((0, 1))] == pytest.approx(1 / math.sqrt(2))
    assert ep.norm2() == pytest.approx(1.0)


def test_records_roundtrip():
    state = random_state(SPACE, [1, 2], np.random.default_rng(1))
    back = FockState.from_records(state.to_records())
    for sig, comp in state.items():
        assert back[sig].max_abs_diff(comp) == 0


def test_cap():
    check_cap(6)
    with pytest.raises(ResourceCapError):
        check_cap(7)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=0, max_size=5))
def test_multiplicity_counts_distinct_orderings(labels):
    t = PolaritonTuple(labels)
    assert t.multiplicity() == len(list(t.orderings()))
