"""Per-sector unitary input-output matrices and the kernels derived from them.

A sector matrix ``Z`` maps ingoing (s, e, m) channels to outgoing ones and is
laid out in 3x3 blocks::

    [[T,   E_e,  E_m ],
     [A_e, Q_ee, Q_em],
     [A_m, Q_me, Q_mm]]

``Z[out, in]`` is the single-polariton transition amplitude from ingoing
channel ``in`` to outgoing channel ``out``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import NotAContractionError, ShapeError

TAU_UNITARY = 1e-10
_EIG_FLOOR = 1e-13

_BLOCK_NAMES = {
    "T": (0, 0), "E_e": (0, 1), "E_m": (0, 2),
    "A_e": (1, 0), "Q_ee": (1, 1), "Q_em": (1, 2),
    "A_m": (2, 0), "Q_me": (2, 1), "Q_mm": (2, 2),
}


@dataclass(frozen=True, eq=False)
class BlockScatteringMatrix:
    Z: np.ndarray
    dims: tuple[int, int, int]
    sector: int = 0

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if len(dims) != 3 or dims[0] < 1 or min(dims) < 0:
            raise ShapeError(f"invalid block dimensions {self.dims}")
        Z = np.array(self.Z, dtype=np.complex128, copy=True)
        n = sum(dims)
        if Z.shape != (n, n):
            raise ShapeError(f"matrix shape {Z.shape} does not match block dimensions {dims}")
        Z.setflags(write=False)
        object.__setattr__(self, "Z", Z)
        object.__setattr__(self, "dims", dims)

    @classmethod
    def from_blocks(cls, T, E_e=None, E_m=None, A_e=None, A_m=None,
                    Q_ee=None, Q_em=None, Q_me=None, Q_mm=None, sector=0):
        T = np.atleast_2d(np.asarray(T, dtype=np.complex128))
        n_s = T.shape[0]
        n_e = 0 if A_e is None else np.atleast_2d(A_e).shape[0]
        n_m = 0 if A_m is None else np.atleast_2d(A_m).shape[0]
        dims = (n_s, n_e, n_m)
        given = dict(T=T, E_e=E_e, E_m=E_m, A_e=A_e, A_m=A_m,
                     Q_ee=Q_ee, Q_em=Q_em, Q_me=Q_me, Q_mm=Q_mm)
        Z = np.zeros((sum(dims), sum(dims)), dtype=np.complex128)
        starts = np.cumsum((0,) + dims)
        for name, (r, c) in _BLOCK_NAMES.items():
            block = given[name]
            if block is None or dims[r] == 0 or dims[c] == 0:
                continue
            block = np.asarray(block, dtype=np.complex128).reshape(dims[r], dims[c])
            Z[starts[r]:starts[r + 1], starts[c]:starts[c + 1]] = block
        return cls(Z, dims, sector)

    @property
    def size(self) -> int:
        return sum(self.dims)

    def _slice(self, k):
        start = sum(self.dims[:k])
        return slice(start, start + self.dims[k])

    def block(self, name: str) -> np.ndarray:
        r, c = _BLOCK_NAMES[name]
        return self.Z[self._slice(r), self._slice(c)]

    T = property(lambda self: self.block("T"))
    E_e = property(lambda self: self.block("E_e"))
    E_m = property(lambda self: self.block("E_m"))
    A_e = property(lambda self: self.block("A_e"))
    A_m = property(lambda self: self.block("A_m"))
    Q_ee = property(lambda self: self.block("Q_ee"))
    Q_em = property(lambda self: self.block("Q_em"))
    Q_me = property(lambda self: self.block("Q_me"))
    Q_mm = property(lambda self: self.block("Q_mm"))

    def to_dict(self) -> dict:
        flat = self.Z.ravel()
        return {
            "sector": self.sector,
            "dims": list(self.dims),
            "entries": [[float(z.real), float(z.imag)] for z in flat],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BlockScatteringMatrix":
        dims = tuple(data["dims"])
        n = sum(dims)
        entries = data["entries"]
        if len(entries) != n * n:
            raise ShapeError(f"expected {n * n} entries for dims {dims}, got {len(entries)}")
        Z = np.array([complex(re, im) for re, im in entries], dtype=np.complex128).reshape(n, n)
        return cls(Z, dims, int(data.get("sector", 0)))


@dataclass(frozen=True)
class ValidationReport:
    max_residual: float
    is_unitary: bool
    is_lossless: bool
    tolerance: float = TAU_UNITARY


def unitarity_residual(Z: np.ndarray) -> float:
    Z = np.asarray(Z)
    eye = np.eye(Z.shape[0])
    left = np.abs(Z @ Z.conj().T - eye).max(initial=0.0)
    right = np.abs(Z.conj().T @ Z - eye).max(initial=0.0)
    return float(max(left, right))


def validate(Z: BlockScatteringMatrix, tol: float = TAU_UNITARY) -> ValidationReport:
    if not isinstance(Z, BlockScatteringMatrix):
        raise ShapeError("validate expects a BlockScatteringMatrix")
    residual = unitarity_residual(Z.Z)
    unitary = residual < tol
    n_s, n_e, n_m = Z.dims
    lossless = unitary
    if unitary and n_e + n_m > 0:
        off = max(np.abs(Z.Z[:n_s, n_s:]).max(), np.abs(Z.Z[n_s:, :n_s]).max())
        q_dev = np.abs(Z.Z[n_s:, n_s:] + np.eye(n_e + n_m)).max()
        lossless = bool(off < tol and q_dev < tol)
    return ValidationReport(residual, bool(unitary), bool(lossless), tol)


def reciprocity_residual(T: np.ndarray, pairing) -> float:
    """Max deviation of ``T`` from ``P T^T P`` for a channel involution ``P``.

    ``pairing[i]`` is the channel paired with ``i`` under direction reversal.
    """
    T = np.asarray(T)
    pairing = np.asarray(pairing, dtype=int)
    n = T.shape[0]
    if pairing.shape != (n,) or sorted(pairing) != list(range(n)):
        raise ValueError("pairing must be a permutation of the channel indices")
    if np.any(pairing[pairing] != np.arange(n)):
        raise ValueError("pairing must be an involution")
    return float(np.abs(T.T - T[np.ix_(pairing, pairing)]).max(initial=0.0))


def _psd_sqrt(M: np.ndarray, tol: float) -> np.ndarray:
    M = (M + M.conj().T) / 2
    w, V = np.linalg.eigh(M)
    if w.size and w.min() < -tol:
        raise NotAContractionError(f"I - T^H T has eigenvalue {w.min():.3e} below -{tol}")
    # rounding noise on a zero eigenvalue would otherwise become ~1e-8 after the root;
    # dropping w < floor perturbs unitarity by at most floor
    w = np.where(w < _EIG_FLOOR, 0.0, w)
    return (V * np.sqrt(w)) @ V.conj().T


def _orthonormal_completion(V: np.ndarray) -> np.ndarray:
    """Columns spanning the orthogonal complement of the isometry ``V``.

    Column-pivoted QR of the complement projector; each column is then
    rotated so that its largest-magnitude entry is real and negative, and the
    columns are ordered by the row of that entry.
    """
    m, n = V.shape
    k = m - n
    if k == 0:
        return np.zeros((m, 0), dtype=np.complex128)
    P = np.eye(m) - V @ V.conj().T
    Q, _, _ = scipy.linalg.qr(P, pivoting=True)
    W = Q[:, :k]
    # one refinement pass against V
    W = W - V @ (V.conj().T @ W)
    W, _ = np.linalg.qr(W)
    for j in range(k):
        col = W[:, j]
        big = col[np.argmax(np.abs(col))]
        W[:, j] = col * (-np.conj(big) / abs(big))
    # undo the pivoting order: sort columns by the row of their dominant entry
    return W[:, np.argsort(np.argmax(np.abs(W), axis=0), kind="stable")]


def dilate_transmission(T, eta_e: float = 0.5, tol: float = TAU_UNITARY,
                        sector: int = 0) -> BlockScatteringMatrix:
    """Embed a contraction ``T`` as the s-block of a unitary with n_e = n_m = n_s.

    The absorption blocks are ``sqrt(eta_e) R`` and ``sqrt(1 - eta_e) R`` with
    ``R`` the principal square root of ``I - T^H T``; the remaining columns
    are a deterministic orthonormal completion.
    """
    T = np.array(np.atleast_2d(T), dtype=np.complex128, copy=True)
    if T.ndim != 2 or T.shape[0] != T.shape[1]:
        raise ShapeError(f"transmission block must be square, got {T.shape}")
    if not 0.0 <= eta_e <= 1.0:
        raise ValueError(f"eta_e must lie in [0, 1], got {eta_e}")
    n = T.shape[0]
    smax = np.linalg.svd(T, compute_uv=False).max(initial=0.0)
    if smax > 1 + tol:
        raise NotAContractionError(f"largest singular value {smax:.6g} exceeds 1")
    R = _psd_sqrt(np.eye(n) - T.conj().T @ T, tol)
    A_e = np.sqrt(eta_e) * R
    A_m = np.sqrt(1.0 - eta_e) * R
    V = np.vstack([T, A_e, A_m])
    Z = np.hstack([V, _orthonormal_completion(V)])
    Z[:n, :n] = T
    return BlockScatteringMatrix(Z, (n, n, n), sector)


@dataclass(frozen=True, eq=False)
class KernelSet:
    """Hermitian PSD kernels on the s channels of one sector.

    ``J_s = T^H T`` (elastic), ``J_e = A_e^H A_e`` and ``J_m = A_m^H A_m``
    (absorption); they sum to the identity for a unitary sector matrix.
    """

    J_s: np.ndarray
    J_e: np.ndarray
    J_m: np.ndarray

    def residual(self) -> float:
        n = self.J_s.shape[0]
        return float(np.abs(self.J_s + self.J_e + self.J_m - np.eye(n)).max())

    def min_eigenvalues(self) -> tuple[float, float, float]:
        return tuple(float(np.linalg.eigvalsh(J).min()) for J in (self.J_s, self.J_e, self.J_m))

    def __iter__(self):
        return iter((self.J_s, self.J_e, self.J_m))


def _gram(A: np.ndarray, n: int) -> np.ndarray:
    if A.shape[0] == 0:
        return np.zeros((n, n), dtype=np.complex128)
    G = A.conj().T @ A
    return (G + G.conj().T) / 2


def kernels(Z: BlockScatteringMatrix) -> KernelSet:
    n_s = Z.dims[0]
    return KernelSet(_gram(Z.T, n_s), _gram(Z.A_e, n_s), _gram(Z.A_m, n_s))


# ---------------------------------------------------------------- toy models

def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_contraction(n: int, rng: np.random.Generator, loss_scale: float = 0.5) -> np.ndarray:
    """``U diag(s) V`` with Haar ``U, V`` and ``s_k = sqrt(1 - loss_scale * u_k)``."""
    U = haar_unitary(n, rng)
    W = haar_unitary(n, rng)
    s = np.sqrt(1.0 - loss_scale * rng.uniform(0.0, 1.0, n))
    return (U * s) @ W


def _unit(name, value):
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"parameter {name}={value} outside [0, 1]")
    return value


def toy_model(name: str, sector: int = 0, **params) -> BlockScatteringMatrix:
    """Scenario generators: identity, attenuator, lossy_beamsplitter,
    random_unitary and random_lossy."""
    if name == "identity":
        n_s = int(params.pop("n_s", 1))
        Z = BlockScatteringMatrix(np.eye(n_s), (n_s, 0, 0), sector)
    elif name == "attenuator":
        t = _unit("t", params.pop("t"))
        eta_e = _unit("eta_e", params.pop("eta_e", 0.5))
        Z = dilate_transmission([[t]], eta_e, sector=sector)
    elif name == "lossy_beamsplitter":
        t = _unit("t", params.pop("t"))
        r = _unit("r", params.pop("r"))
        loss = _unit("loss", params.pop("loss", 0.0))
        eta_e = _unit("eta_e", params.pop("eta_e", 0.5))
        if t * t + r * r > 1 + TAU_UNITARY:
            raise ValueError(f"t^2 + r^2 = {t * t + r * r:.6g} exceeds 1")
        T = np.sqrt(1.0 - loss) * np.array([[t, 1j * r], [1j * r, t]])
        Z = dilate_transmission(T, eta_e, sector=sector)
    elif name == "random_unitary":
        rng = np.random.default_rng(int(params.pop("seed")))
        n_s = int(params.pop("n_s", 2))
        Z = BlockScatteringMatrix(haar_unitary(n_s, rng), (n_s, 0, 0), sector)
    elif name == "random_lossy":
        rng = np.random.default_rng(int(params.pop("seed")))
        n_s = int(params.pop("n_s", 2))
        loss_scale = _unit("loss_scale", params.pop("loss_scale", 0.5))
        eta_e = _unit("eta_e", params.pop("eta_e", 0.5))
        Z = dilate_transmission(random_contraction(n_s, rng, loss_scale), eta_e, sector=sector)
    else:
        raise ValueError(f"unknown toy model {name!r}")
    if params:
        raise ValueError(f"unexpected parameters for {name}: {sorted(params)}")
    report = validate(Z)
    if not report.is_unitary:
        raise ArithmeticError(f"{name} produced a non-unitary matrix (residual {report.max_residual:.3e})")
    return Z
