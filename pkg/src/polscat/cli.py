"""Command-line entry point: ``polscat <command> --config scenario.toml``.

Every command prints one or more named tables. CSV output writes each table
as a ``# table: <name>`` line, a header and its rows, with a blank line
between tables; json-lines output writes one object per row with a
``table`` key. Floats use the shortest round-trip representation.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from dataclasses import dataclass, field

import numpy as np

from . import reduce as red
from .config import ScenarioConfig, complex_vector, load_config
from .errors import (
    ConfigError,
    IntegrityError,
    NonUnitaryError,
    NotAContractionError,
    ResourceCapError,
    ShapeError,
    SingularTransmissionError,
    UnsupportedInputError,
)
from .scatmat import kernels, validate
from .scatter import sector_table

EXIT_OK, EXIT_INVALID, EXIT_CAP, EXIT_PARSE = 0, 2, 3, 4


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values):
        self.rows.append(list(values))


def _tuple_str(t) -> str:
    return " ".join(str(i) for i in t.s)


def _num(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    return x


def render(tables: list[Table], fmt: str) -> str:
    buf = io.StringIO()
    if fmt == "json-lines":
        for tab in tables:
            for row in tab.rows:
                rec = {"table": tab.name}
                rec.update(zip(tab.columns, (_num(v) for v in row)))
                buf.write(json.dumps(rec) + "\n")
        return buf.getvalue()
    for k, tab in enumerate(tables):
        if k:
            buf.write("\n")
        buf.write(f"# table: {tab.name}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(tab.columns)
        for row in tab.rows:
            w.writerow([_num(v) for v in row])
    return buf.getvalue()


# ------------------------------------------------------------------ commands

def cmd_validate(cfg: ScenarioConfig, args) -> tuple[list[Table], int]:
    tab = Table("validation", ["sector", "max_residual", "is_unitary", "is_lossless",
                               "kernel_residual", "min_eig_s", "min_eig_e", "min_eig_m"])
    ok = True
    for Z in cfg.matrices(args.seed, check=False):
        rep = validate(Z, cfg.tau_unitary)
        K = kernels(Z)
        tab.add(Z.sector, rep.max_residual, rep.is_unitary, rep.is_lossless, K.residual(), *K.min_eigenvalues())
        ok = ok and rep.is_unitary
    return [tab], EXIT_OK if ok else EXIT_INVALID


def cmd_scatter(cfg: ScenarioConfig, args):
    sc = cfg.scenario(args.seed, args.threads)
    rows = sector_table(sc)
    tab = Table("sectors", ["P", "Q", "R", "kernel", "raw", "amplitude"])
    for r in rows:
        tab.add(*r.sector, r.probability, r.raw, r.amplitude_probability)
    kernel_sum = sum(r.probability for r in rows) if sc.is_s_only() else None
    amp_sum = sum(r.amplitude_probability for r in rows)
    total = Table("total", ["kernel_sum", "amplitude_sum", "norm_residual"])
    total.add(kernel_sum, amp_sum, abs(amp_sum - 1.0))
    return [tab, total], EXIT_OK


def _rho_tables(rho, report, oracle=None):
    cols = ["P", "P'", "row", "col", "re", "im"]
    if oracle is not None:
        cols += ["oracle_re", "oracle_im", "deviation"]
    tab = Table("rho", cols)
    for (P, P2) in sorted(rho.blocks):
        B = rho.block(P, P2)
        O = oracle.block(P, P2) if oracle is not None else None
        for i, a in enumerate(rho.tuples[P]):
            for j, b in enumerate(rho.tuples[P2]):
                row = [P, P2, _tuple_str(a), _tuple_str(b), B[i, j].real, B[i, j].imag]
                if O is not None:
                    row += [O[i, j].real, O[i, j].imag, abs(B[i, j] - O[i, j])]
                tab.add(*row)
    rep_cols = ["purity", "entropy", "rank", "trace"]
    rep_row = [report.purity, report.von_neumann_entropy, report.schmidt_rank_estimate, report.trace]
    if oracle is not None:
        rep_cols.append("max_deviation")
        rep_row.append(rho.max_abs_diff(oracle))
    rep = Table("report", rep_cols, [rep_row])
    eig = Table("eigenvalues", ["k", "value"], [[k, v] for k, v in enumerate(report.eigenvalues)])
    return [tab, rep, eig]


def cmd_reduce(cfg: ScenarioConfig, args):
    sc = cfg.scenario(args.seed, args.threads)
    if not sc.is_s_only():
        # no closed form for ingoing e/m content; the explicit trace is the result
        rho = red.partial_trace_oracle(sc)
        return _rho_tables(rho, red.analyze(rho, cfg.rank_tol)), EXIT_OK
    rho = red.reduced_density(sc)
    oracle = red.partial_trace_oracle(sc) if args.oracle else None
    return _rho_tables(rho, red.analyze(rho, cfg.rank_tol), oracle), EXIT_OK


def _state_table(name, space, vectors, keep):
    tab = Table(name, ["k", "mode", "re", "im"])
    for k in keep:
        for pos, mode in enumerate(space.s_modes):
            v = vectors[pos, k]
            tab.add(k, mode, v.real, v.imag)
    return tab


def cmd_one_photon(cfg: ScenarioConfig, args):
    sc = cfg.scenario(args.seed, args.threads)
    res = red.one_polariton(sc)
    probs = Table("probabilities", ["P_s", "P_e", "P_m", "total"],
                  [[res.P_s, res.P_e, res.P_m, res.P_s + res.P_e + res.P_m]])
    tables = [probs]
    if res.phi_1s is not None:
        phi = res.phi_1s.to_dense(sc.mode_space)[:, None]
        tables.append(_state_table("phi_1s", sc.mode_space, phi, [0]))
    report = red.analyze(res.density(), cfg.rank_tol)
    tables.append(Table("spectrum", ["k", "value"], [[k, v] for k, v in enumerate(report.eigenvalues)]))
    return tables, EXIT_OK


def cmd_two_photon(cfg: ScenarioConfig, args):
    sc = cfg.scenario(args.seed, args.threads)
    res = red.two_polariton(sc)
    names = list(res.P)
    probs = Table("probabilities", names + ["total", "vacuum_weight"],
                  [[res.P[k] for k in names] + [sum(res.P.values()), res.vacuum_weight]])
    lam = res.rho_1s_eigenvalues
    keep = [k for k, v in enumerate(lam) if v > cfg.rank_tol]
    spectrum = Table("rho_1s", ["k", "eigenvalue"], [[k, v] for k, v in enumerate(lam)])
    vecs = np.column_stack([s.to_dense(sc.mode_space) for s in res.rho_1s_states])
    tables = [probs, spectrum, _state_table("rho_1s_states", sc.mode_space, vecs, keep)]
    if cfg.input.get("preset") == "entangled_pair":
        ep = red.entangled_pair_eigenproblem(
            sc, complex_vector(cfg.input["phi1"], "input.phi1"), complex_vector(cfg.input["phi2"], "input.phi2"))
        ent = Table("entangled", ["alpha", "eigenvalue", "weight", "orthonormality_residual"])
        for a, v in enumerate(ep.eigenvalues):
            ent.add(a, v, ep.weight, ep.orthonormality_residual())
        tables += [ent, _state_table("entangled_states", sc.mode_space, ep.states, range(2))]
    return tables, EXIT_OK


def cmd_sweep(cfg: ScenarioConfig, args):
    parameter = args.parameter or cfg.sweep.get("parameter")
    if parameter not in ("loss", "eta_e"):
        raise ConfigError("sweep parameter must be loss or eta_e", "sweep.parameter")
    if args.grid:
        try:
            grid = [float(x) for x in args.grid.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad grid ({exc})", "--grid") from exc
    else:
        grid = [float(x) for x in cfg.sweep.get("values", [])]
    if not grid:
        raise ConfigError("empty sweep grid", "sweep.values")
    tab = None
    for value in grid:
        sc = cfg.varied(parameter, value).scenario(args.seed, args.threads)
        rows = sector_table(sc, routes=("kernel",))
        report = red.analyze(red.reduced_density(sc), cfg.rank_tol)
        eig = []
        if sc.psi_in.sizes == [2]:
            eig = list(red.two_polariton(sc).rho_1s_eigenvalues)
        if tab is None:
            cols = [parameter, "purity", "entropy", "rank"]
            cols += ["p_%d%d%d" % r.sector for r in rows]
            cols += [f"rho_1s_{k}" for k in range(len(eig))]
            tab = Table("sweep", cols)
        tab.add(value, report.purity, report.von_neumann_entropy, report.schmidt_rank_estimate,
                *(r.probability for r in rows), *eig)
    return [tab], EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "scatter": cmd_scatter,
    "reduce": cmd_reduce,
    "one-photon": cmd_one_photon,
    "two-photon": cmd_two_photon,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="scenario TOML file")
    common.add_argument("--format", choices=("csv", "json-lines"), default="csv")
    common.add_argument("--oracle", action="store_true", help="add the brute-force partial-trace cross-check")
    common.add_argument("--seed", type=int, default=0, help="seed for random models and states")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--tolerance", type=float, default=None,
                        help="override the unitarity and normalization tolerances")
    parser = argparse.ArgumentParser(prog="polscat", description="Discretized polariton scattering simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "sweep":
            p.add_argument("parameter", nargs="?", choices=("loss", "eta_e"))
            p.add_argument("--grid", help="comma-separated parameter values")
    return parser


def run(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    if args.seed < 0 or args.seed >= 2 ** 64:
        print("error: --seed must be an unsigned 64-bit integer", file=err)
        return EXIT_PARSE
    try:
        cfg = load_config(args.config).with_tolerance(args.tolerance)
        tables, code = COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PARSE
    except ResourceCapError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_CAP
    except (NonUnitaryError, NotAContractionError, ShapeError, IntegrityError,
            SingularTransmissionError, UnsupportedInputError, ValueError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID
    out.write(render(tables, args.format))
    return code


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
