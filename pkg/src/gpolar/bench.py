"""Experiment sweeps over the generated test families, with CSV output."""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, GPDError
from .polar import VARIANTS, IterConfig, newton_determinantal, newton_suboptimal, sigma_dwh
from .testgen import generate

CSV_HEADER = ("experiment", "variant", "n", "kappa", "seed", "iterations", "converged",
              "residual", "orth_defect", "err_W", "err_S", "wall_ms")
SUMMARY_HEADER = ("experiment", "variant", "n", "kappa", "runs", "n_failed", "iterations",
                  "residual", "orth_defect", "err_W", "err_S", "wall_ms")

EXPERIMENTS = {
    # name: (family, exponents, default methods, default reps)
    "fig1": ("example1", tuple(range(1, 16)),
             tuple(f"sigma_dwh-{v}" for v in VARIANTS), 10),
    "table1": ("example2", (1, 5, 10, 15), ("sigma_dwh-plg", "dn", "son"), 20),
    "table2": ("example1_definite", (1, 5, 10, 15), ("sigma_dwh-ldliqr2", "dn", "son"), 20),
}


@dataclass
class ExperimentRecord:
    experiment: str
    variant: str
    n: int
    kappa: float
    seed: int
    iterations: int
    converged: bool
    residual: float
    orth_defect: float
    err_W: float | None
    err_S: float | None
    wall_ms: float

    def to_row(self) -> list[str]:
        def fmt(v):
            if v is None:
                return ""
            if isinstance(v, bool):
                return "true" if v else "false"
            if isinstance(v, float):
                return repr(v)
            return str(v)
        return [fmt(getattr(self, f)) for f in CSV_HEADER]

    @classmethod
    def from_row(cls, row: dict[str, str]) -> "ExperimentRecord":
        opt = lambda s: None if s == "" else float(s)  # noqa: E731
        return cls(
            experiment=row["experiment"], variant=row["variant"], n=int(row["n"]),
            kappa=float(row["kappa"]), seed=int(row["seed"]),
            iterations=int(row["iterations"]), converged=row["converged"] == "true",
            residual=float(row["residual"]), orth_defect=float(row["orth_defect"]),
            err_W=opt(row["err_W"]), err_S=opt(row["err_S"]), wall_ms=float(row["wall_ms"]),
        )


def normalize_method(name: str) -> str:
    """Canonical method name; bare ΣDWH variant names are accepted."""
    key = name.strip().lower()
    if key in ("dn", "son"):
        return key
    if key.startswith("sigma_dwh-"):
        key = key[len("sigma_dwh-"):]
    if key not in VARIANTS:
        raise DomainError(f"unknown method {name!r}; use dn, son or sigma_dwh-<variant> "
                          f"with variant in {VARIANTS}")
    return f"sigma_dwh-{key}"


def run_method(method: str, A, sigma, cfg: IterConfig | None = None):
    method = normalize_method(method)
    cfg = cfg or IterConfig()
    if method == "dn":
        return newton_determinantal(A, sigma, cfg)
    if method == "son":
        return newton_suboptimal(A, sigma, cfg)
    return sigma_dwh(A, sigma, sigma, cfg, variant=method.split("-", 1)[1])


def _rel(X, Y) -> float:
    return float(np.linalg.norm(X - Y) / np.linalg.norm(Y))


def run_cell(experiment: str, method: str, n: int, k: float, seed: int,
             max_iter: int = 100) -> ExperimentRecord:
    family = EXPERIMENTS[experiment][0] if experiment in EXPERIMENTS else experiment
    inst = generate(family, n, k, seed)
    method = normalize_method(method)
    cfg = IterConfig(max_iter=max_iter)
    t0 = time.perf_counter()
    try:
        res = run_method(method, inst.A, inst.sigma, cfg)
    except (GPDError, np.linalg.LinAlgError) as err:
        nan = float("nan")
        step = getattr(err, "step", None)
        it = step + 1 if step is not None else 0
        return ExperimentRecord(experiment, method, n, inst.kappa_target, seed, it, False,
                                nan, nan, None, None, 1e3 * (time.perf_counter() - t0))
    wall = 1e3 * (time.perf_counter() - t0)
    err_W = err_S = None
    if inst.W_true is not None:
        err_W, err_S = _rel(res.W, inst.W_true), _rel(res.S, inst.S_true)
    return ExperimentRecord(experiment, method, n, inst.kappa_target, seed, res.iterations,
                            res.converged, res.residual, res.orth_defect, err_W, err_S, wall)


def sweep(experiment: str, n: int = 100, reps: int | None = None, seed_base: int = 0,
          methods: Sequence[str] | None = None, exponents: Iterable[float] | None = None,
          threads: int = 1, max_iter: int = 100) -> list[ExperimentRecord]:
    """Run every (method, κ, rep) cell; rows come back in a fixed order."""
    if experiment not in EXPERIMENTS:
        raise DomainError(f"unknown experiment {experiment!r}; choose from {tuple(EXPERIMENTS)}")
    _, default_k, default_methods, default_reps = EXPERIMENTS[experiment]
    methods = [normalize_method(m) for m in (methods or default_methods)]
    ks = tuple(exponents) if exponents is not None else default_k
    reps = default_reps if reps is None else reps
    if reps < 1 or n < 1:
        raise DomainError("reps and n must be positive")
    cells = [(m, k, seed_base + r) for m in methods for k in ks for r in range(reps)]
    workers = threads if threads > 0 else (os.cpu_count() or 1)

    def job(cell):
        m, k, seed = cell
        return run_cell(experiment, m, n, k, seed, max_iter)

    if workers == 1:
        return [job(c) for c in cells]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, cells))


def summarize(records: Sequence[ExperimentRecord]) -> list[dict]:
    """Per (variant, κ) means over converged runs, with the failure count."""
    groups: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        groups.setdefault((r.experiment, r.variant, r.n, r.kappa), []).append(r)
    out = []
    for (exp, var, n, kappa), rs in groups.items():
        ok = [r for r in rs if r.converged]

        def mean(attr):
            vals = [getattr(r, attr) for r in ok if getattr(r, attr) is not None]
            return float(np.mean(vals)) if vals else None

        out.append({"experiment": exp, "variant": var, "n": n, "kappa": kappa,
                    "runs": len(rs), "n_failed": len(rs) - len(ok),
                    **{a: mean(a) for a in ("iterations", "residual", "orth_defect",
                                            "err_W", "err_S", "wall_ms")}})
    return out


def write_records(path, records: Sequence[ExperimentRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow(r.to_row())


def read_records(path) -> list[ExperimentRecord]:
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        if tuple(rd.fieldnames or ()) != CSV_HEADER:
            raise DomainError(f"{path}: unexpected CSV header {rd.fieldnames}")
        return [ExperimentRecord.from_row(row) for row in rd]


def summary_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.stem + ".summary" + (p.suffix or ".csv"))


def write_summary(path, rows: Sequence[dict]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SUMMARY_HEADER)
        for row in rows:
            w.writerow(["" if row[h] is None else (repr(row[h]) if isinstance(row[h], float)
                                                    else row[h]) for h in SUMMARY_HEADER])


def record_fields() -> tuple[str, ...]:
    return tuple(f.name for f in fields(ExperimentRecord))

