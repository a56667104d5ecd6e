"""Reduced density matrix of the scattered radiation and its spectral analysis.

The s-polariton state left after tracing out the e and m polaritons is kept
as a block matrix over outgoing s-polariton numbers ``(P, P')``. Rows and
columns are canonical s tuples; the matrix entries are values of the
symmetric kernel ``rho(Xi | Xi')`` and the tuple multiplicities act as the
inner-product weights.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrityError, SingularTransmissionError, UnsupportedInputError
from .fock import AmplitudeTensor, PolaritonTuple, canonical_tuples
from .modespace import ModeSpace
from .scatter import ScatteringScenario, apply_local, full_output_state

RANK_TOL = 1e-9
HERMITIAN_TOL = 1e-8
SINGULAR_DET = 1e-12


@dataclass
class ReducedDensityMatrix:
    mode_space: ModeSpace
    tuples: dict[int, list[PolaritonTuple]]
    blocks: dict[tuple[int, int], np.ndarray] = field(default_factory=dict)

    @property
    def numbers(self) -> list[int]:
        return sorted(self.tuples)

    def weights(self, P: int) -> np.ndarray:
        return np.array([t.multiplicity() for t in self.tuples[P]], dtype=float)

    def block(self, P: int, P2: int) -> np.ndarray:
        if (P, P2) in self.blocks:
            return self.blocks[(P, P2)]
        return np.zeros((len(self.tuples[P]), len(self.tuples[P2])), dtype=np.complex128)

    def __getitem__(self, key):
        return self.block(*key)

    @property
    def trace(self) -> float:
        return float(sum(np.real(self.weights(P) @ np.diag(self.block(P, P))) for P in self.numbers))

    def matrix(self) -> np.ndarray:
        """All blocks assembled in ascending P order (unweighted kernel values)."""
        return np.block([[self.block(P, P2) for P2 in self.numbers] for P in self.numbers])

    def weighted_matrix(self) -> np.ndarray:
        """The matrix in the orthonormal occupation basis, W^1/2 rho W^1/2."""
        w = np.sqrt(np.concatenate([self.weights(P) for P in self.numbers]))
        return w[:, None] * self.matrix() * w[None, :]

    def labels(self) -> list[tuple[int, PolaritonTuple]]:
        return [(P, t) for P in self.numbers for t in self.tuples[P]]

    def hermiticity_residual(self) -> float:
        M = self.matrix()
        return float(np.max(np.abs(M - M.conj().T), initial=0.0))

    def max_abs_diff(self, other: "ReducedDensityMatrix") -> float:
        if self.numbers != other.numbers:
            raise ValueError("density matrices cover different polariton numbers")
        return float(np.max(np.abs(self.matrix() - other.matrix()), initial=0.0))

    def to_records(self) -> list[dict]:
        out = []
        for (P, P2) in sorted(self.blocks):
            B = self.blocks[(P, P2)]
            for i, row in enumerate(self.tuples[P]):
                for j, col in enumerate(self.tuples[P2]):
                    v = B[i, j]
                    out.append({"P": P, "P'": P2, "tuple_row": list(row.s), "tuple_col": list(col.s),
                                "re": float(v.real), "im": float(v.imag)})
        return out


@dataclass(frozen=True)
class DecoherenceReport:
    purity: float
    von_neumann_entropy: float
    eigenvalues: tuple[float, ...]
    schmidt_rank_estimate: int
    trace: float

    def to_record(self) -> dict:
        return {
            "purity": self.purity,
            "entropy": self.von_neumann_entropy,
            "rank": self.schmidt_rank_estimate,
            "trace": self.trace,
            "eigenvalues": list(self.eigenvalues),
        }


def _require_s_only(scenario: ScatteringScenario):
    if not scenario.is_s_only():
        raise UnsupportedInputError("closed-form reduction needs an s-only input")


def _pairs(sizes: list[int]):
    """(P, P', S) triples with both P + S and P' + S present in the input."""
    have = set(sizes)
    top = max(sizes, default=0)
    for P in range(top + 1):
        for P2 in range(top + 1):
            for S in range(top + 1):
                if P + S in have and P2 + S in have:
                    yield P, P2, S


def _empty(scenario: ScatteringScenario) -> ReducedDensityMatrix:
    space = scenario.mode_space
    top = scenario.psi_in.max_N
    return ReducedDensityMatrix(space, {P: list(canonical_tuples(space, (P, 0, 0))) for P in range(top + 1)})


def _flat_indices(space: ModeSpace, tuples: list[PolaritonTuple]) -> np.ndarray:
    pos = {m: k for k, m in enumerate(space.s_modes)}
    n = len(space.s_modes)
    if not tuples or not tuples[0].s:
        return np.zeros(len(tuples), dtype=int)
    idx = np.array([[pos[i] for i in t.s] for t in tuples])
    return np.ravel_multi_index(idx.T, (n,) * idx.shape[1])


def _dressed(scenario: ScatteringScenario, P: int, S: int, rows: np.ndarray) -> np.ndarray:
    """(T^P x 1^S) psi_{P+S} on canonical rows, reshaped to (rows,) + (n,) * S."""
    n = scenario.n_s
    psi = scenario.psi_in.s_component(P + S).to_dense(scenario.mode_space)
    chi = apply_local([scenario.T] * P, psi).reshape(n ** P, *((n,) * S))
    return chi[rows]


def reduced_density(scenario: ScatteringScenario) -> ReducedDensityMatrix:
    """Closed-form reduced density matrix from kernel contractions."""
    _require_s_only(scenario)
    rho = _empty(scenario)
    n = scenario.n_s
    J = scenario.kernels
    Lc = np.conj(J.J_e + J.J_m)
    rows = {P: _flat_indices(scenario.mode_space, ts) for P, ts in rho.tuples.items()}
    for P, P2, S in _pairs(scenario.psi_in.sizes):
        chi = _dressed(scenario, P, S, rows[P])
        chi2 = _dressed(scenario, P2, S, rows[P2])
        # contract the unobserved slots through the loss kernel, conjugated
        G = apply_local([np.eye(len(chi2))] + [Lc] * S, np.conj(chi2))
        scale = math.sqrt(math.factorial(P + S) * math.factorial(P2 + S)
                          / (math.factorial(P) * math.factorial(P2))) / math.factorial(S)
        blk = scale * chi.reshape(len(chi), -1) @ G.reshape(len(G), -1).T
        rho.blocks[(P, P2)] = rho.blocks.get((P, P2), 0) + blk
    return rho


def partial_trace_oracle(scenario: ScatteringScenario) -> ReducedDensityMatrix:
    """Reduced density matrix by explicit partial trace of the full output state.

    Independent of the kernel route: builds every outgoing amplitude from
    permanents, then sums over e/m tuples with their multiplicities.
    """
    out = full_output_state(scenario)
    rho = _empty(scenario)
    space = scenario.mode_space
    row_index = {P: {t.s: i for i, t in enumerate(ts)} for P, ts in rho.tuples.items()}
    # per (Q, R), the matrix A[P][Xi, y] = sqrt(mult(y)) Psi(Xi, y)
    env: dict[tuple[int, int], dict[int, np.ndarray]] = {}
    env_index: dict[tuple[int, int], dict] = {}
    for (P, Q, R), tensor in sorted(out.items()):
        if (Q, R) not in env_index:
            ys = list(canonical_tuples(space, (0, Q, R)))
            env_index[(Q, R)] = {(y.e, y.m): k for k, y in enumerate(ys)}
            env[(Q, R)] = {}
        ys = env_index[(Q, R)]
        A = np.zeros((len(rho.tuples[P]), len(ys)), dtype=np.complex128)
        for t, v in tensor.items():
            y = PolaritonTuple((), t.e, t.m)
            A[row_index[P][t.s], ys[(t.e, t.m)]] = math.sqrt(y.multiplicity()) * v
        env[(Q, R)][P] = A
    for (Q, R), per_P in env.items():
        for P, A in per_P.items():
            for P2, A2 in per_P.items():
                rho.blocks[(P, P2)] = rho.blocks.get((P, P2), 0) + A @ A2.conj().T
    return rho


def analyze(rho: ReducedDensityMatrix, rank_tol: float = RANK_TOL) -> DecoherenceReport:
    res = rho.hermiticity_residual()
    if res > HERMITIAN_TOL:
        raise IntegrityError(f"density matrix is not Hermitian (residual {res:.3e})")
    M = rho.weighted_matrix()
    lam = np.linalg.eigvalsh((M + M.conj().T) / 2)[::-1]
    pos = lam[lam > 0]
    entropy = float(-np.sum(pos * np.log(pos)))
    return DecoherenceReport(
        purity=float(np.sum(lam ** 2)),
        von_neumann_entropy=max(entropy, 0.0),
        eigenvalues=tuple(float(x) for x in lam),
        schmidt_rank_estimate=int(np.sum(lam > rank_tol)),
        trace=float(np.sum(lam)),
    )


def _vector(space: ModeSpace, phi) -> np.ndarray:
    if isinstance(phi, AmplitudeTensor):
        return phi.to_dense(space)
    return np.asarray(phi, dtype=np.complex128)


def _single(scenario: ScatteringScenario, N: int) -> np.ndarray:
    _require_s_only(scenario)
    if scenario.psi_in.sizes != [N]:
        raise UnsupportedInputError(f"expected an input with exactly {N} polaritons, got {scenario.psi_in.sizes}")
    return scenario.psi_in.s_component(N).to_dense(scenario.mode_space)


def _tensor(space: ModeSpace, vec: np.ndarray) -> AmplitudeTensor:
    return AmplitudeTensor.from_dense(space, (vec.ndim, 0, 0), vec)


@dataclass
class OnePolaritonResult:
    P_s: float
    P_e: float
    P_m: float
    phi_1s: AmplitudeTensor | None
    mode_space: ModeSpace

    def density(self) -> ReducedDensityMatrix:
        space = self.mode_space
        rho = ReducedDensityMatrix(space, {0: [PolaritonTuple()], 1: list(canonical_tuples(space, (1, 0, 0)))})
        rho.blocks[(0, 0)] = np.array([[self.P_e + self.P_m]], dtype=np.complex128)
        phi = self.phi_1s.to_dense(space) if self.phi_1s is not None else np.zeros(len(space.s_modes))
        rho.blocks[(1, 1)] = self.P_s * np.outer(phi, phi.conj())
        return rho


def one_polariton(scenario: ScatteringScenario) -> OnePolaritonResult:
    psi = _single(scenario, 1)
    J = scenario.kernels
    P_s, P_e, P_m = (float(np.vdot(psi, K @ psi).real) for K in J)
    phi = _tensor(scenario.mode_space, scenario.T @ psi / math.sqrt(P_s)) if P_s > 0 else None
    return OnePolaritonResult(P_s, P_e, P_m, phi, scenario.mode_space)


@dataclass
class TwoPolaritonResult:
    P: dict[str, float]
    phi_2s: AmplitudeTensor | None
    rho_1s_eigenvalues: np.ndarray
    rho_1s_states: list[AmplitudeTensor]
    rho_1s: np.ndarray
    mode_space: ModeSpace

    @property
    def vacuum_weight(self) -> float:
        return self.P["ee"] + self.P["em"] + self.P["mm"]

    @property
    def one_polariton_weight(self) -> float:
        return self.P["se"] + self.P["sm"]

    def density(self) -> ReducedDensityMatrix:
        space = self.mode_space
        ts = {P: list(canonical_tuples(space, (P, 0, 0))) for P in range(3)}
        rho = ReducedDensityMatrix(space, ts)
        rho.blocks[(0, 0)] = np.array([[self.vacuum_weight]], dtype=np.complex128)
        rho.blocks[(1, 1)] = self.one_polariton_weight * self.rho_1s
        if self.phi_2s is not None:
            phi = self.phi_2s.to_dense(space).reshape(-1)[_flat_indices(space, ts[2])]
            rho.blocks[(2, 2)] = self.P["ss"] * np.outer(phi, phi.conj())
        return rho


_PAIRS = ("ss", "se", "sm", "ee", "em", "mm")


def two_polariton(scenario: ScatteringScenario) -> TwoPolaritonResult:
    psi = _single(scenario, 2)
    J = dict(zip("sem", scenario.kernels))
    T = scenario.T
    probs = {}
    for tm in _PAIRS:
        a, b = J[tm[0]], J[tm[1]]
        probs[tm] = (1 if tm[0] == tm[1] else 2) * float(np.vdot(psi, a @ psi @ b.T).real)
    space = scenario.mode_space
    out2 = T @ psi @ T.T
    phi_2s = _tensor(space, out2 / math.sqrt(probs["ss"])) if probs["ss"] > 0 else None
    chi = T @ psi
    L = J["e"] + J["m"]
    weight = probs["se"] + probs["sm"]
    n = scenario.n_s
    if weight > 0:
        rho_1s = 2 * chi @ L.conj() @ chi.conj().T / weight
        lam, vecs = np.linalg.eigh((rho_1s + rho_1s.conj().T) / 2)
        lam, vecs = lam[::-1], vecs[:, ::-1]
        vecs = vecs * _column_phases(vecs)
    else:
        rho_1s = np.zeros((n, n), dtype=np.complex128)
        lam, vecs = np.zeros(n), np.eye(n, dtype=np.complex128)
    states = [_tensor(space, vecs[:, k]) for k in range(n)]
    return TwoPolaritonResult(probs, phi_2s, lam, states, rho_1s, space)


@dataclass
class EntangledPairResult:
    X_s: np.ndarray
    X_em: np.ndarray
    weight: float
    eigenvalues: np.ndarray
    coefficients: np.ndarray
    states: np.ndarray

    def orthonormality_residual(self) -> float:
        G = self.states.conj().T @ self.states
        return float(np.max(np.abs(G - np.eye(len(G)))))


def _column_phases(vecs: np.ndarray) -> np.ndarray:
    """Unit factors making each column's largest-magnitude entry real positive."""
    out = np.ones(vecs.shape[1], dtype=np.complex128)
    for k in range(vecs.shape[1]):
        big = vecs[np.argmax(np.abs(vecs[:, k])), k]
        if big != 0:
            out[k] = np.conj(big) / abs(big)
    return out


def _sqrt_psd(X: np.ndarray, inverse: bool = False) -> np.ndarray:
    w, V = np.linalg.eigh((X + X.conj().T) / 2)
    w = np.clip(w, 0, None)
    d = 1 / np.sqrt(w) if inverse else np.sqrt(w)
    return (V * d) @ V.conj().T


def entangled_pair_eigenproblem(scenario: ScatteringScenario, phi1, phi2,
                                ortho_tol: float = 1e-9) -> EntangledPairResult:
    """Two-branch spectrum of the one-polariton state left by the symmetric
    pair input (phi1 phi2 + phi2 phi1) / sqrt(2).

    Solves the 2x2 problem in the Hermitian form X_s^1/2 Xt X_s^1/2 / p with
    Xt the swapped loss overlaps; states are returned as columns over the s
    modes.
    """
    space = scenario.mode_space
    F = np.column_stack([_vector(space, phi1), _vector(space, phi2)])
    G = F.conj().T @ F
    if np.max(np.abs(G - np.eye(2))) > ortho_tol:
        raise ValueError("phi1 and phi2 must be orthonormal")
    J = scenario.kernels
    X_s = F.conj().T @ J.J_s @ F
    X_em = F.conj().T @ (J.J_e + J.J_m) @ F
    if abs(np.linalg.det(X_s)) < SINGULAR_DET:
        raise SingularTransmissionError("X_s is singular; the transmitted pair spans less than two states")
    Xt = np.array([[X_em[1, 1], X_em[0, 1]], [X_em[1, 0], X_em[0, 0]]])
    weight = float(np.trace(Xt @ X_s).real)
    root, inv_root = _sqrt_psd(X_s), _sqrt_psd(X_s, inverse=True)
    if weight > 1e-14:
        H = root @ Xt @ root / weight
        lam, U = np.linalg.eigh((H + H.conj().T) / 2)
        lam, U = lam[::-1], U[:, ::-1]
    else:
        lam, U = np.zeros(2), np.eye(2, dtype=np.complex128)
    C = inv_root @ U
    states = scenario.T @ F @ C
    rot = _column_phases(states)
    C, states = C * rot, states * rot
    return EntangledPairResult(X_s, X_em, weight, lam, C, states)
