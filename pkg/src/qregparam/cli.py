"""Command-line driver: problem setup, pipeline dispatch, line-delimited reports.

Reports are UTF-8 line-delimited JSON: one `config` record, one `mu` record per
grid value (quantum estimate paired with its classical oracle value), and one
`summary` record.  Wall time is logged but deliberately kept out of the file so
identical configurations produce byte-identical reports.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .hhl import HhlConfig
from .linalg import RegularizedProblem, compute_svd, gcv_value, tikhonov_solve, \
    tsvd_solve
from .mmio import load_matrix, load_vector
from .problems import KINDS, generate_problem
from .search import ParameterGrid, classical_select, gcv_pipeline, lcurve_pipeline

log = logging.getLogger("qregparam")

METHODS = ("lcurve", "gcv", "classical-lcurve", "classical-gcv", "tikhonov", "tsvd")


@dataclass
class RunConfig:
    method: str
    problem: str | None = None          # generator kind, or None with matrix_file
    m: int = 4
    n: int = 4
    noise: float = 0.01
    matrix_file: str | None = None
    rhs_file: str | None = None
    mu0: float = 1.0
    rho: float = 0.9
    p: int = 16
    epsilon: float = 0.05
    n_phase_bits: int = 6
    rank: int = 2
    seed: int = 0
    out: str | None = None
    repeats: int = 5

    def validate(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; choose from {METHODS}")
        if not 0 < self.rho < 1:
            raise ValueError("rho must lie in (0, 1)")
        if self.p < 1:
            raise ValueError("p must be >= 1")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.matrix_file is None and self.problem is None:
            raise ValueError("need either a generator kind or a matrix file")


@dataclass
class RunReport:
    config: dict
    rows: list[dict]
    selection: dict
    queries_used: int
    wall_time_s: float = field(default=0.0, compare=False)

    def to_lines(self) -> list[str]:
        dump = lambda obj: json.dumps(obj, sort_keys=True)
        lines = [dump({"record": "config", **self.config})]
        lines += [dump({"record": "mu", **row}) for row in self.rows]
        lines.append(dump({"record": "summary", "queries_used": self.queries_used,
                           **self.selection}))
        return lines

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.to_lines()) + "\n")


def _load_problem(config: RunConfig) -> RegularizedProblem:
    if config.matrix_file is not None:
        A = load_matrix(config.matrix_file)
        if config.rhs_file is None:
            raise ValueError("--matrix-file requires --rhs-file")
        b = load_vector(config.rhs_file)
        return RegularizedProblem(A=A, b=b)
    return generate_problem(config.problem, config.m, config.n, config.noise,
                            config.seed)


def _json_float(x: float) -> float:
    return float(x)


def run(config: RunConfig) -> RunReport:
    """Dispatch to the requested pipeline and assemble the report."""
    config.validate()
    t0 = time.perf_counter()
    problem = _load_problem(config)
    svd = compute_svd(problem.A)
    grid = ParameterGrid.geometric(config.mu0, config.rho, config.p)
    rng = np.random.default_rng(config.seed)
    cfg = HhlConfig(n_phase_bits=config.n_phase_bits, c_tilde=1.0, sigma_max=1.0,
                    t_evolution=1.0)  # template; per-mu constants derived in-pipeline

    rows: list[dict] = []
    oracle = {float(mu): tikhonov_solve(svd, problem.b, float(mu)) for mu in grid.mus}

    def oracle_row(mu: float, with_gcv: bool) -> dict:
        sol = oracle[mu]
        row = {
            "mu": _json_float(mu),
            "solution_norm_oracle": _json_float(sol.solution_norm),
            "residual_norm_oracle": _json_float(sol.residual_norm),
        }
        if with_gcv:
            row["gcv_oracle"] = _json_float(gcv_value(svd, problem.b, mu))
        return row

    if config.method == "tikhonov":
        sol = tikhonov_solve(svd, problem.b, config.mu0)
        rows.append({"mu": config.mu0,
                     "solution_norm_oracle": _json_float(sol.solution_norm),
                     "residual_norm_oracle": _json_float(sol.residual_norm)})
        selection = {"chosen_mu": config.mu0,
                     "solution_norm": _json_float(sol.solution_norm),
                     "residual_norm": _json_float(sol.residual_norm)}
        queries = 1
    elif config.method == "tsvd":
        sol = tsvd_solve(svd, problem.b, config.rank)
        rows.append({"k": config.rank,
                     "solution_norm_oracle": _json_float(sol.solution_norm),
                     "residual_norm_oracle": _json_float(sol.residual_norm)})
        selection = {"chosen_k": config.rank,
                     "solution_norm": _json_float(sol.solution_norm),
                     "residual_norm": _json_float(sol.residual_norm)}
        queries = 1
    elif config.method in ("classical-lcurve", "classical-gcv"):
        criterion = "lcurve-sum" if config.method == "classical-lcurve" else "gcv"
        result = classical_select(problem, grid, criterion)
        for j, mu in enumerate(grid.mus):
            row = oracle_row(float(mu), with_gcv=(criterion == "gcv"))
            row["criterion"] = _json_float(result.criterion_values[j])
            rows.append(row)
        selection = {"chosen_index": result.chosen_index,
                     "chosen_mu": _json_float(result.chosen_mu)}
        queries = result.queries_used
    elif config.method == "lcurve":
        result = lcurve_pipeline(problem, grid, cfg, config.epsilon, rng,
                                 repeats=config.repeats)
        for j, (mu, pt) in enumerate(zip(grid.mus, result.points)):
            row = oracle_row(float(mu), with_gcv=False)
            row["solution_norm_est"] = _json_float(pt.solution_norm)
            row["residual_norm_est"] = _json_float(pt.residual_norm)
            row["criterion"] = _json_float(result.criterion_values[j])
            rows.append(row)
        selection = {"chosen_index": result.chosen_index,
                     "chosen_mu": _json_float(result.chosen_mu)}
        queries = result.queries_used
    else:  # gcv
        result = gcv_pipeline(problem, grid, config.rank, cfg, config.epsilon, rng,
                              repeats=config.repeats)
        for j, mu in enumerate(grid.mus):
            row = oracle_row(float(mu), with_gcv=True)
            row["gcv_est"] = _json_float(result.criterion_values[j])
            rows.append(row)
        selection = {"chosen_index": result.chosen_index,
                     "chosen_mu": _json_float(result.chosen_mu)}
        queries = result.queries_used

    report = RunReport(
        config={k: v for k, v in asdict(config).items() if k != "out"},
        rows=rows,
        selection=selection,
        queries_used=int(queries),
        wall_time_s=time.perf_counter() - t0,
    )
    if config.out:
        report.write(config.out)
    log.info("method=%s chosen=%s wall=%.3fs", config.method, selection,
             report.wall_time_s)
    return report


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qregparam",
        description="Choose a Tikhonov regularization parameter by simulated "
                    "quantum L-curve/GCV search or by the classical oracles.",
    )
    ap.add_argument("--problem", choices=KINDS, default=None,
                    help="generator kind (alternative to --matrix-file)")
    ap.add_argument("--m", type=int, default=4)
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--noise", type=float, default=0.01)
    ap.add_argument("--matrix-file", default=None, help="Matrix Market matrix")
    ap.add_argument("--rhs-file", default=None, help="Matrix Market right-hand side")
    ap.add_argument("--mu0", type=float, default=1.0)
    ap.add_argument("--rho", type=float, default=0.9)
    ap.add_argument("--p", type=int, default=16)
    ap.add_argument("--method", required=True, choices=METHODS)
    ap.add_argument("--epsilon", type=float, default=0.05)
    ap.add_argument("--phase-bits", type=int, default=6, dest="n_phase_bits")
    ap.add_argument("--rank", type=int, default=2, help="GCV low-rank truncation")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--repeats", type=int, default=5,
                    help="odd amplitude-estimation repetitions (median taken)")
    ap.add_argument("--out", default=None, help="report path (stdout if omitted)")
    return ap


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("QREGPARAM_LOG", "WARNING").upper())
    args = build_parser().parse_args(argv)
    config = RunConfig(
        method=args.method, problem=args.problem, m=args.m, n=args.n,
        noise=args.noise, matrix_file=args.matrix_file, rhs_file=args.rhs_file,
        mu0=args.mu0, rho=args.rho, p=args.p, epsilon=args.epsilon,
        n_phase_bits=args.n_phase_bits, rank=args.rank, seed=args.seed,
        out=args.out, repeats=args.repeats,
    )
    try:
        report = run(config)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error [{type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    if not config.out:
        print("\n".join(report.to_lines()))
    return 0


if __name__ == "__main__":
    sys.exit(main())
