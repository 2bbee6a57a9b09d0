"""Run configuration, single-case runs, the SI/NDA benchmark matrix and CSV output."""

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import ConfigError
from .kernels import HGK, SRK
from .solvers import (
    SI_SCHEMES,
    ProblemSpec,
    SolveReport,
    dense_reference_solve,
    discretize,
    nda_solve,
    source_iteration,
)

METHODS = ("si", "nda", "both", "oracle")
KERNELS = ("hgk", "srk")

# reference iteration counts: (si, nda) per smooth-moment count B
TABLE1 = {
    "hgk": {1: (26, 12), 5: (35, 18), 9: (36, 18), 13: (36, 18)},
    "srk": {1: (2655, 351), 5: (2739, 318), 9: (2739, 318), 13: (2739, 314)},
}
TABLE1_B = (1, 5, 9, 13)
ITERATION_BAND = 0.40
SRK_MIN_SPEEDUP = 5.0
AGREEMENT_TOL = 1e-3


@dataclass(frozen=True)
class RunConfig:
    kernel: str = "hgk"
    sigma_s: float = 1.0
    g: float = 0.9
    C: float = 0.3903
    eta: float = 2.836e-5
    normalize: bool = True
    B: int = 1
    sigma_a: float = 1e-6
    length_cm: float = 1.0
    cells: int = 200
    quad_order: int = 16
    source_q: float = 1.0
    tol: float = 1e-6
    max_iters: int = 10000
    si_scheme: str = "implicit"
    method: str = "both"
    label: str = "case"
    output_dir: str = "."
    emit_flux: bool = True
    emit_history: bool = True

    def kernel_spec(self):
        if self.kernel == "hgk":
            return HGK(sigma_s=self.sigma_s, g=self.g)
        return SRK(sigma_s=self.sigma_s, C=self.C, eta=self.eta, normalize=self.normalize)

    def problem(self):
        return ProblemSpec(
            kernel=self.kernel_spec(),
            B=self.B,
            sigma_a=self.sigma_a,
            length=self.length_cm,
            cells=self.cells,
            quad_order=self.quad_order,
            source_q=self.source_q,
            tol=self.tol,
            max_iters=self.max_iters,
            si_scheme=self.si_scheme,
        )


_TYPES = {f.name: f.type for f in fields(RunConfig)}
_TRUE = {"true", "yes", "1", "on"}
_FALSE = {"false", "no", "0", "off"}


def _convert(key, raw, line):
    kind = _TYPES[key]
    try:
        if kind is bool:
            low = raw.lower()
            if low in _TRUE:
                return True
            if low in _FALSE:
                return False
            raise ValueError(raw)
        if kind is int:
            value = float(raw)
            if value != int(value):
                raise ValueError(raw)
            return int(value)
        if kind is float:
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"line {line}: bad {kind.__name__} value {raw!r} for key {key!r}", line, key)


def _validate(cfg):
    def bad(key, why):
        raise ConfigError(f"invalid {key}: {why}", key=key)

    if cfg.kernel not in KERNELS:
        bad("kernel", f"must be one of {KERNELS}")
    if cfg.method not in METHODS:
        bad("method", f"must be one of {METHODS}")
    if cfg.si_scheme not in SI_SCHEMES:
        bad("si_scheme", f"must be one of {SI_SCHEMES}")
    if cfg.sigma_s < 0:
        bad("sigma_s", "must be non-negative")
    if cfg.kernel == "hgk" and not 0.0 <= cfg.g < 1.0:
        bad("g", "HGK requires 0 <= g < 1")
    if cfg.kernel == "srk":
        if not cfg.eta > 0:
            bad("eta", "must be positive")
        if not cfg.C > 0:
            bad("C", "must be positive")
    if cfg.B < 1:
        bad("B", "must be >= 1")
    if cfg.sigma_a < 0:
        bad("sigma_a", "must be non-negative")
    if not cfg.length_cm > 0:
        bad("length_cm", "must be positive")
    if cfg.cells < 1:
        bad("cells", "must be >= 1")
    if cfg.quad_order < 2 or cfg.quad_order % 2:
        bad("quad_order", "must be an even integer >= 2")
    if cfg.source_q < 0:
        bad("source_q", "must be non-negative")
    if not cfg.tol > 0:
        bad("tol", "must be positive")
    if cfg.max_iters < 1:
        bad("max_iters", "must be >= 1")
    if not cfg.label or any(c in cfg.label for c in "/\\"):
        bad("label", "must be a non-empty file-name stem")
    return cfg


def parse_config(text):
    """Parse ``key=value`` lines (``#`` starts a comment) into a RunConfig."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}", lineno, key)
        values[key] = _convert(key, value, lineno)
    return _validate(RunConfig(**values))


def format_config(cfg):
    """Serialize a RunConfig to text that ``parse_config`` reads back identically."""
    lines = []
    for key, value in asdict(cfg).items():
        if isinstance(value, bool):
            value = "true" if value else "false"
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key}={value}")
    return "\n".join(lines) + "\n"


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def _fmt(x):
    return format(float(x), ".17g")


def emit_flux_profiles(reports, path):
    """Write x_cm, one phi0 column per report and, for SI + NDA, abs_diff."""
    reports = list(reports)
    x = reports[0].x
    for rep in reports[1:]:
        if rep.x.shape != x.shape or not np.allclose(rep.x, x, rtol=0, atol=1e-12):
            raise ValueError("flux profiles are on different grids")
    header = ["x_cm"] + [f"phi0_{rep.method.lower()}" for rep in reports]
    columns = [x] + [rep.phi0 for rep in reports]
    methods = [rep.method for rep in reports]
    if "SI" in methods and "NDA" in methods:
        header.append("abs_diff")
        columns.append(np.abs(reports[methods.index("SI")].phi0 - reports[methods.index("NDA")].phi0))
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(header)
        for row in zip(*columns):
            out.writerow([_fmt(v) for v in row])
    return path


def write_history(report, path):
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh, lineterminator="\n")
        out.writerow(["k", "epsilon"])
        for k, eps in enumerate(report.error_history, start=1):
            out.writerow([k, _fmt(eps)])
    return path


def _summary(report):
    return {
        "method": report.method,
        "iterations": report.iterations,
        "converged": report.converged,
        "final_error": report.final_error if report.error_history else None,
        "wall_seconds": report.wall_seconds,
    }


def write_report(cfg, reports, path):
    doc = {"config": asdict(cfg), "runs": [_summary(r) for r in reports]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=False)
        fh.write("\n")
    return path


def oracle_report(p, d=None):
    d = discretize(p) if d is None else d
    t0 = time.perf_counter()
    phi0 = dense_reference_solve(p, d)
    return SolveReport(
        method="ORACLE",
        iterations=0,
        converged=True,
        error_history=[],
        wall_seconds=time.perf_counter() - t0,
        phi0=phi0,
        edge_currents=np.empty(0),
        x=d.grid.nodes,
    )


def run_case(cfg, output_dir=None):
    """Run the configured method(s) and write the per-case files.

    Returns the list of SolveReports in run order.
    """
    out = output_dir or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    p = cfg.problem()
    d = discretize(p)
    runners = {"si": [source_iteration], "nda": [nda_solve], "both": [source_iteration, nda_solve],
               "oracle": [oracle_report]}[cfg.method]
    reports = [run(p, d) for run in runners]

    stem = os.path.join(out, cfg.label)
    if cfg.emit_flux:
        emit_flux_profiles(reports, f"{stem}_flux.csv")
    if cfg.emit_history:
        for rep in reports:
            if rep.method != "ORACLE":
                write_history(rep, f"{stem}_{rep.method.lower()}_history.csv")
    write_report(cfg, reports, f"{stem}_report.json")
    return reports


def table1_config(kernel, B):
    return RunConfig(kernel=kernel, B=B, method="both", label=f"{kernel}_B{B}")


def _in_band(value, reference):
    return abs(value - reference) <= ITERATION_BAND * reference


def run_table1_bench(output_dir, kernels=KERNELS, moments=TABLE1_B):
    """Run the SI/NDA benchmark matrix and write ``table1.csv``.

    Returns ``(rows, all_passed)``. Flux profiles of every case are written
    next to the table.
    """
    os.makedirs(output_dir, exist_ok=True)
    rows = []
    failures = []
    for kernel in kernels:
        for B in moments:
            cfg = table1_config(kernel, B)
            try:
                si, nda = run_case(cfg, output_dir)
            except Exception as exc:  # keep the partial table
                failures.append(f"{cfg.label}: {exc}")
                continue
            ref_si, ref_nda = TABLE1[kernel][B]
            speedup_iter = si.iterations / nda.iterations
            speedup_time = si.wall_seconds / nda.wall_seconds if nda.wall_seconds > 0 else math.inf
            diff = float(np.max(np.abs(si.phi0 - nda.phi0)) / np.max(si.phi0))
            checks = {
                "converged": si.converged and nda.converged,
                "si_band": _in_band(si.iterations, ref_si),
                "nda_band": _in_band(nda.iterations, ref_nda),
                "speedup": speedup_iter > 1.0
                and (kernel != "srk" or speedup_iter >= SRK_MIN_SPEEDUP),
                "agreement": diff <= AGREEMENT_TOL,
            }
            passed = all(checks.values())
            if not passed:
                failures.append(f"{cfg.label}: " + ", ".join(k for k, ok in checks.items() if not ok))
            rows.append({
                "kernel": kernel,
                "parameter": "g=0.9" if kernel == "hgk" else "C=0.3903;eta=2.836e-05",
                "B": B,
                "si_iterations": si.iterations,
                "si_runtime_s": f"{si.wall_seconds:.4f}",
                "nda_iterations": nda.iterations,
                "nda_runtime_s": f"{nda.wall_seconds:.4f}",
                "speedup_iter": f"{speedup_iter:.4f}",
                "speedup_time": f"{speedup_time:.4f}",
                "ref_si_iterations": ref_si,
                "ref_nda_iterations": ref_nda,
                "max_rel_flux_diff": f"{diff:.3e}",
                "pass": "pass" if passed else "fail",
            })
    path = os.path.join(output_dir, "table1.csv")
    columns = ["kernel", "parameter", "B", "si_iterations", "si_runtime_s", "nda_iterations",
               "nda_runtime_s", "speedup_iter", "speedup_time", "ref_si_iterations",
               "ref_nda_iterations", "max_rel_flux_diff", "pass"]
    with open(path, "w", newline="") as fh:
        out = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        out.writeheader()
        out.writerows(rows)
    if failures:
        with open(os.path.join(output_dir, "table1_failures.txt"), "w") as fh:
            fh.write("\n".join(failures) + "\n")
    return rows, not failures
