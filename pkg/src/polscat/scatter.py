"""Ingoing to outgoing transition amplitudes, output states and sector probabilities."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import ShapeError, UnsupportedInputError
from .fock import (
    N_MAX,
    AmplitudeTensor,
    FockState,
    PolaritonTuple,
    canonical_tuples,
    check_cap,
    signatures,
)
from .modespace import ModeSpace
from .permanent import PERMANENT_MAX, factorial_product, permanent
from .scatmat import BlockScatteringMatrix, KernelSet, kernels

TAU_STATE = 1e-10
NEGATIVE_CLAMP = 1e-12


@dataclass
class ScatteringScenario:
    """A mode space, one scattering matrix per frequency sector and a pure input."""

    mode_space: ModeSpace
    matrices: Sequence[BlockScatteringMatrix]
    psi_in: FockState
    n_max: int = N_MAX
    permanent_max: int = PERMANENT_MAX
    tau_state: float = TAU_STATE
    threads: int = 1
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.psi_in, AmplitudeTensor):
            self.psi_in = FockState.from_tensor(self.psi_in)
        self.matrices = tuple(self.matrices)
        sectors = self.mode_space.sectors
        if len(self.matrices) != len(sectors):
            raise ShapeError(f"{len(sectors)} frequency sectors but {len(self.matrices)} matrices")
        for k, (sec, Z) in enumerate(zip(sectors, self.matrices)):
            if tuple(Z.dims) != sec.dims:
                raise ShapeError(f"sector {k}: matrix dims {tuple(Z.dims)} != mode dims {sec.dims}")
        for sig, comp in self.psi_in.items():
            check_cap(sum(sig), self.n_max)
            for t in comp:
                t.validate(self.mode_space)
        norm2 = self.psi_in.norm2()
        if abs(norm2 - 1) > self.tau_state:
            raise ValueError(f"input state is not normalized (norm^2 = {norm2!r})")

    @property
    def Z(self) -> np.ndarray:
        """Global scattering matrix, block diagonal over frequency sectors."""
        if "Z" not in self._cache:
            self._cache["Z"] = block_diag(*(np.asarray(m.Z) for m in self.matrices))
        return self._cache["Z"]

    @property
    def T(self) -> np.ndarray:
        """Elastic block on the s modes, indexed like ``mode_space.s_modes``."""
        if "T" not in self._cache:
            self._cache["T"] = block_diag(*(m.T for m in self.matrices))
        return self._cache["T"]

    @property
    def kernels(self) -> KernelSet:
        """s-space kernels J_s, J_e, J_m, block diagonal over sectors."""
        if "K" not in self._cache:
            parts = [kernels(m) for m in self.matrices]
            self._cache["K"] = KernelSet(*(block_diag(*(getattr(p, name) for p in parts))
                                           for name in ("J_s", "J_e", "J_m")))
        return self._cache["K"]

    @property
    def n_s(self) -> int:
        return len(self.mode_space.s_modes)

    def is_s_only(self) -> bool:
        return self.psi_in.is_s_only()

    def with_input(self, psi_in: FockState) -> "ScatteringScenario":
        return ScatteringScenario(self.mode_space, self.matrices, psi_in, self.n_max,
                                  self.permanent_max, self.tau_state, self.threads)


def _sector_tags(space: ModeSpace, labels) -> list[int]:
    return sorted(space.sector_of(i) for i in labels)


def _raw_permanent(scenario: ScatteringScenario, out_t: PolaritonTuple, in_t: PolaritonTuple) -> complex:
    if out_t.N != in_t.N:
        return 0j
    check_cap(in_t.N, scenario.n_max)
    space = scenario.mode_space
    if len(space.sectors) > 1 and _sector_tags(space, out_t.labels) != _sector_tags(space, in_t.labels):
        return 0j
    sub = scenario.Z[np.ix_(out_t.labels, in_t.labels)]
    return permanent(sub, threads=scenario.threads, max_size=scenario.permanent_max)


def amplitude(scenario: ScatteringScenario, out_tuple: PolaritonTuple, in_tuple: PolaritonTuple) -> complex:
    """Amplitude between normalized occupation states built from the two tuples."""
    perm = _raw_permanent(scenario, out_tuple, in_tuple)
    if perm == 0:
        return 0j
    return perm / math.sqrt(out_tuple.occupation_factorials() * in_tuple.occupation_factorials())


def tuple_amplitude(scenario: ScatteringScenario, out_tuple: PolaritonTuple, in_tuple: PolaritonTuple) -> complex:
    """Overlap of unnormalized tuple states, Perm / sqrt(P!Q!R! p!q!r!).

    This is the kernel that maps a symmetric tuple wavefunction onto its
    outgoing counterpart. It differs from :func:`amplitude` whenever a label
    repeats.
    """
    perm = _raw_permanent(scenario, out_tuple, in_tuple)
    if perm == 0:
        return 0j
    return perm / math.sqrt(factorial_product(out_tuple.counts) * factorial_product(in_tuple.counts))


def _propagate(scenario: ScatteringScenario, comp: AmplitudeTensor, signature) -> AmplitudeTensor:
    inputs = [(t.multiplicity() * v, t) for t, v in comp.items() if v != 0]
    values = {}
    for out_t in canonical_tuples(scenario.mode_space, signature):
        total = 0j
        for w, in_t in inputs:
            total += w * tuple_amplitude(scenario, out_t, in_t)
        if total != 0:
            values[out_t] = total
    return AmplitudeTensor(signature, values)


def outgoing_wavefunction(scenario: ScatteringScenario, signature) -> AmplitudeTensor:
    """Outgoing wavefunction in one character sector for an s-only input."""
    if not scenario.is_s_only():
        raise UnsupportedInputError("input has e/m content; use full_output_state")
    signature = tuple(signature)
    comp = scenario.psi_in.s_component(sum(signature))
    if comp is None:
        return AmplitudeTensor(signature)
    return _propagate(scenario, comp, signature)


def full_output_state(scenario: ScatteringScenario) -> dict[tuple, AmplitudeTensor]:
    """Outgoing state over every character sector reachable from the input."""
    out: dict[tuple, AmplitudeTensor] = {}
    for N in scenario.psi_in.sizes:
        for sig in signatures(N, scenario.mode_space):
            acc: dict[PolaritonTuple, complex] = {}
            for in_sig, comp in scenario.psi_in.items():
                if sum(in_sig) != N:
                    continue
                for t, v in _propagate(scenario, comp, sig).items():
                    acc[t] = acc.get(t, 0j) + v
            out[sig] = AmplitudeTensor(sig, acc)
    return out


def apply_local(ops: Sequence[np.ndarray], tensor: np.ndarray) -> np.ndarray:
    """Apply ``ops[k]`` to axis ``k`` of a dense tensor."""
    out = tensor
    for k, op in enumerate(ops):
        out = np.moveaxis(np.tensordot(op, out, axes=([1], [k])), 0, k)
    return out


def _kernel_probability(scenario: ScatteringScenario, signature) -> float:
    P, Q, R = signature
    N = P + Q + R
    comp = scenario.psi_in.s_component(N)
    if comp is None:
        return 0.0
    J = scenario.kernels
    psi = comp.to_dense(scenario.mode_space)
    phi = apply_local([J.J_s] * P + [J.J_e] * Q + [J.J_m] * R, psi)
    value = np.vdot(psi, phi)
    scale = math.factorial(N) / factorial_product(signature)
    if abs(value.imag) > 1e-12 * max(1.0, abs(value.real)):
        raise ArithmeticError(f"sector probability has imaginary part {value.imag!r}")
    return scale * float(value.real)


def sector_probability(scenario: ScatteringScenario, signature, raw: bool = False) -> float:
    """Probability of detecting P, Q and R outgoing s, e and m polaritons.

    Computed from the kernel contraction. Negatives above ``-1e-12`` are
    clamped to zero unless ``raw`` is set.
    """
    if not scenario.is_s_only():
        raise UnsupportedInputError("kernel probabilities need an s-only input")
    p = _kernel_probability(scenario, tuple(signature))
    if raw:
        return p
    return 0.0 if -NEGATIVE_CLAMP < p < 0 else p


@dataclass(frozen=True)
class SectorRow:
    sector: tuple
    probability: float | None
    raw: float | None
    amplitude_probability: float

    def to_record(self) -> dict:
        return {
            "sector": list(self.sector),
            "probability": self.probability,
            "raw": self.raw,
            "amplitude_probability": self.amplitude_probability,
        }


def sector_table(scenario: ScatteringScenario, routes=("kernel", "amplitude")) -> list[SectorRow]:
    """Sector probabilities by the kernel route (s-only inputs) and from the
    explicit output state."""
    rows = []
    use_kernel = "kernel" in routes and scenario.is_s_only()
    outputs = full_output_state(scenario) if "amplitude" in routes else {}
    for N in scenario.psi_in.sizes:
        for sig in signatures(N, scenario.mode_space):
            raw = _kernel_probability(scenario, sig) if use_kernel else None
            p = None if raw is None else (0.0 if -NEGATIVE_CLAMP < raw < 0 else raw)
            amp = outputs[sig].norm2() if sig in outputs else float("nan")
            rows.append(SectorRow(sig, p, raw, amp))
    return rows
