"""Acceptance gate: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python tests/test_acceptance.py``.
"""
from __future__ import annotations

import io
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import SCENARIO_DIR, random_scenario  # noqa: E402
from oracles import naive_permanent  # noqa: E402
from polscat.cli import run  # noqa: E402
from polscat.fock import PolaritonTuple, canonical_tuples, entangled_pair, product_pair, signatures, single_mode  # noqa: E402
from polscat.modespace import ModeSpace  # noqa: E402
from polscat.permanent import permanent  # noqa: E402
from polscat.reduce import (  # noqa: E402
    analyze,
    entangled_pair_eigenproblem,
    one_polariton,
    partial_trace_oracle,
    reduced_density,
    two_polariton,
)
from polscat.scatmat import dilate_transmission, haar_unitary, kernels, random_contraction, toy_model, unitarity_residual  # noqa: E402
from polscat.scatter import ScatteringScenario, amplitude, sector_probability, sector_table, tuple_amplitude  # noqa: E402

# tolerances, one per criterion
TOL_UNITARY = 1e-12
TOL_PERMANENT = 1e-12
TOL_CONSERVATION = 1e-10
TOL_SIX_TERM = 1e-12
TOL_RHO = 1e-10
TOL_ONE_POL = 1e-10
TOL_RANK = 1e-10
TOL_STATE = 1e-9
TOL_EIGSUM = 1e-10
TOL_EIG_RANGE = 1e-12  # round-off allowance on the [0, 1] bounds
TOL_EIG_MATCH = 1e-9
TOL_ORTHO = 1e-9
TOL_PURITY = 1e-10
TOL_LOSSLESS_P = 1e-12


def c01_unitarity():
    worst_u = worst_k = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        n = 1 + seed % 6
        Z = dilate_transmission(random_contraction(n, rng, rng.uniform()), rng.uniform())
        worst_u = max(worst_u, unitarity_residual(Z.Z))
        worst_k = max(worst_k, kernels(Z).residual())
    ok = worst_u < TOL_UNITARY and worst_k < TOL_UNITARY
    return ok, f"100 dilations: max |ZZ^H - I| = {worst_u:.2e}, max |J_s+J_e+J_m-I| = {worst_k:.2e}"


def c02_permanent():
    worst = 0.0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        n = 1 + seed % 7
        M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        ref = naive_permanent(M)
        for method in ("ryser", "glynn"):
            worst = max(worst, abs(permanent(M, method=method) - ref) / max(abs(ref), 1e-300))
    return worst < TOL_PERMANENT, f"50 matrices, N <= 7: max relative error {worst:.2e}"


def c03_conservation():
    worst_sum = worst_route = 0.0
    for seed in range(25):
        sc = random_scenario(200 + seed, sizes=(1 + seed % 3,))
        rows = sector_table(sc)
        worst_sum = max(worst_sum, abs(sum(r.probability for r in rows) - 1))
        worst_route = max(worst_route, max(abs(r.probability - r.amplitude_probability) for r in rows))
    ok = worst_sum < TOL_CONSERVATION and worst_route < TOL_CONSERVATION
    return ok, f"25 scenarios: max |sum p - 1| = {worst_sum:.2e}, kernel vs amplitude route {worst_route:.2e}"


def _six_term(Z, x1, x2, y, E1, E2, M):
    z = lambda out, inp: Z[out, inp]  # noqa: E731
    return 0.5 * (
        z(E1, x1) * z(E2, x2) * z(M, y)
        + z(E1, x1) * z(M, x2) * z(E2, y)
        + z(M, x1) * z(E1, x2) * z(E2, y)
        + z(E2, x1) * z(E1, x2) * z(M, y)
        + z(E2, x1) * z(M, x2) * z(E1, y)
        + z(M, x1) * z(E2, x2) * z(E1, y)
    )


def c04_six_term():
    worst = 0.0
    space = ModeSpace.single(2, 2, 2)
    for seed in range(10):
        rng = np.random.default_rng(300 + seed)
        Z = dilate_transmission(random_contraction(2, rng, 0.8), rng.uniform())
        sc = ScatteringScenario(space, [Z], single_mode(space, 0))
        # s in: 0, 1; e out: 2, 3; m in: 4; m out: 5
        in_t, out_t = PolaritonTuple((0, 1), (), (4,)), PolaritonTuple((), (2, 3), (5,))
        ref = _six_term(Z.Z, 0, 1, 4, 2, 3, 5)
        worst = max(worst, abs(tuple_amplitude(sc, out_t, in_t) - ref),
                    abs(amplitude(sc, out_t, in_t) - 2 * ref))
    return worst < TOL_SIX_TERM, f"10 dilated matrices: max deviation from six-term sum {worst:.2e}"


_RHO_SIZES = [(1,), (2,), (3,), (1, 2), (2, 3), (1, 3), (0, 1)]


def c05_reduced_density():
    worst = 0.0
    for seed in range(50):
        sc = random_scenario(400 + seed, sizes=_RHO_SIZES[seed % len(_RHO_SIZES)])
        worst = max(worst, reduced_density(sc).max_abs_diff(partial_trace_oracle(sc)))
    return worst < TOL_RHO, f"50 scenarios, N <= 3: max |closed form - partial trace| = {worst:.2e}"


def c06_one_polariton():
    worst = 0.0
    for seed in range(10):
        sc = random_scenario(500 + seed, sizes=(1,), max_n_s=4)
        res = one_polariton(sc)
        lam = sorted(x for x in analyze(reduced_density(sc)).eigenvalues if abs(x) > 1e-12)
        worst = max(worst, abs(res.P_s + res.P_e + res.P_m - 1),
                    np.abs(np.array(lam) - sorted([res.P_s, res.P_e + res.P_m])).max())
    space = ModeSpace.single(1, 1, 1)
    sc = ScatteringScenario(space, [toy_model("attenuator", t=0.6, eta_e=0.5)], single_mode(space, 0))
    lam = sorted(analyze(reduced_density(sc)).eigenvalues)
    att = max(abs(lam[0] - 0.36), abs(lam[1] - 0.64))
    ok = worst < TOL_ONE_POL and att < TOL_ONE_POL
    return ok, f"10 random: max deviation {worst:.2e}; attenuator spectrum {lam[0]:.12f}, {lam[1]:.12f}"


def _phase_distance(u, v):
    ph = np.vdot(v, u)
    ph = ph / abs(ph) if abs(ph) > 0 else 1
    return float(np.abs(u - ph * v).max())


def c07_product_input():
    worst_eig = worst_state = 0.0
    for seed in range(10):
        rng = np.random.default_rng(600 + seed)
        n = 2 + seed % 3
        space = ModeSpace.single(n, n, n)
        Z = dilate_transmission(random_contraction(n, rng, 0.7), rng.uniform())
        phi = haar_unitary(n, rng)[:, 0]
        sc = ScatteringScenario(space, [Z], product_pair(space, phi))
        res = two_polariton(sc)
        worst_eig = max(worst_eig, abs(res.rho_1s_eigenvalues[1]))
        d = Z.T @ phi
        d = d / np.linalg.norm(d)
        worst_state = max(worst_state, _phase_distance(res.rho_1s_states[0].to_dense(space), d))
    ok = worst_eig < TOL_RANK and worst_state < TOL_STATE
    return ok, f"10 scenarios: max second eigenvalue {worst_eig:.2e}, max state deviation {worst_state:.2e}"


def c08_entangled_input():
    worst = {"imag": 0.0, "range": 0.0, "sum": 0.0, "match": 0.0, "ortho": 0.0}
    for seed in range(10):
        rng = np.random.default_rng(700 + seed)
        n = 2 + seed % 3
        space = ModeSpace.single(n, n, n)
        Z = dilate_transmission(random_contraction(n, rng, 0.8), rng.uniform())
        U = haar_unitary(n, rng)
        sc = ScatteringScenario(space, [Z], entangled_pair(space, U[:, 0], U[:, 1]))
        ep = entangled_pair_eigenproblem(sc, U[:, 0], U[:, 1])
        lam = np.asarray(ep.eigenvalues)
        worst["imag"] = max(worst["imag"], float(np.abs(np.imag(lam)).max()))
        worst["range"] = max(worst["range"], float(max(-lam.min(), lam.max() - 1, 0)))
        worst["sum"] = max(worst["sum"], abs(lam.sum() - 1))
        direct = two_polariton(sc)
        worst["match"] = max(worst["match"], float(np.abs(direct.rho_1s_eigenvalues[:2] - lam).max()))
        for k in range(2):
            worst["match"] = max(worst["match"], _phase_distance(ep.states[:, k],
                                                                 direct.rho_1s_states[k].to_dense(space)))
        worst["ortho"] = max(worst["ortho"], ep.orthonormality_residual())
    ok = (worst["imag"] == 0 and worst["range"] <= TOL_EIG_RANGE and worst["sum"] < TOL_EIGSUM
          and worst["match"] < TOL_EIG_MATCH and worst["ortho"] < TOL_ORTHO)
    return ok, "10 scenarios: " + ", ".join(f"{k} {v:.2e}" for k, v in worst.items())


def c09_lossless():
    worst_purity = worst_p = worst_amp = 0.0
    for seed in range(12):
        N = 1 + seed % 4
        sc = random_scenario(800 + seed, sizes=(N,), lossless=True, max_n_s=2 if N == 4 else 3)
        worst_purity = max(worst_purity, abs(analyze(reduced_density(sc)).purity - 1))
        for sig in signatures(N, sc.mode_space):
            if sig[0] < N:
                worst_p = max(worst_p, abs(sector_probability(sc, sig, raw=True)))
        T = sc.T
        pos = {m: k for k, m in enumerate(sc.mode_space.s_modes)}
        ts = list(canonical_tuples(sc.mode_space, (N, 0, 0)))
        for out_t in ts[:8]:
            for in_t in ts[-8:]:
                sub = T[np.ix_([pos[i] for i in out_t.s], [pos[i] for i in in_t.s])]
                ref = naive_permanent(sub) / math.sqrt(out_t.occupation_factorials() * in_t.occupation_factorials())
                worst_amp = max(worst_amp, abs(amplitude(sc, out_t, in_t) - ref))
    ok = worst_purity < TOL_PURITY and worst_p < TOL_LOSSLESS_P and worst_amp < 1e-12
    return ok, (f"12 scenarios, N <= 4: |purity - 1| {worst_purity:.2e}, max p(Q+R>0) {worst_p:.2e}, "
                f"amplitude vs perm(T) {worst_amp:.2e}")


def c10_determinism():
    mismatches = []
    for path in sorted(SCENARIO_DIR.glob("*.toml")):
        for command in ("validate", "scatter", "reduce", "sweep"):
            outs = set()
            for threads in (1, 2, 8):
                buf = io.StringIO()
                run([command, "--config", str(path), "--seed", "5", "--threads", str(threads)], buf, io.StringIO())
                outs.add(buf.getvalue())
            if len(outs) != 1:
                mismatches.append(f"{path.stem}:{command}")
    return not mismatches, "byte-identical for 1, 2, 8 threads" if not mismatches else f"differs: {mismatches}"


CRITERIA = [c01_unitarity, c02_permanent, c03_conservation, c04_six_term, c05_reduced_density,
            c06_one_polariton, c07_product_input, c08_entangled_input, c09_lossless, c10_determinism]


def _report(fn):
    ok, detail = fn()
    num, name = fn.__name__[1:3], fn.__name__[4:]
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {int(num)} {name}: {detail}")
    return ok, detail


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion):
    ok, detail = _report(criterion)
    assert ok, detail


if __name__ == "__main__":
    results = [_report(fn)[0] for fn in CRITERIA]
    sys.exit(0 if all(results) else 1)
