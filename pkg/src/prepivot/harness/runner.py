"""Replication loop, rejection tables and their CSV form."""

from __future__ import annotations

import csv
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import ndtr, ndtri

from prepivot.engine import apply_prepivot, bootstrap_p_values
from prepivot.errors import CapabilityError, DegeneracyError, NumericError, ParameterError, RankError
from prepivot.harness.designs import McDesign, simulate
from prepivot.numerics.rng import RngStream
from prepivot.numerics.uniformity import KsResult, ks_uniform

#: share of aborted replications above which a run is declared failed
MAX_ABORT_SHARE = 0.01

_RECOVERABLE = (RankError, DegeneracyError, NumericError)


@dataclass(frozen=True)
class ReplicationResult:
    index: int
    p_values: dict | None
    m_hat: float | None = None
    vd: float | None = None
    shift: float = 0.0
    error: str | None = None

    @property
    def aborted(self) -> bool:
        return self.p_values is None


def replication_stream(seed: int, r: int) -> RngStream:
    return RngStream(seed).split(0, r)


def run_replication(design: McDesign, r: int) -> ReplicationResult:
    """Simulate data set ``r`` and compute its p-values.

    Data come from ``(0, r, 0)``; the bootstrap uses ``(0, r)`` so its two
    levels land on ``(0, r, 1)`` and ``(0, r, 2)``.
    """
    stream = replication_stream(design.seed, r)
    try:
        rep = simulate(design, stream.split(0))
        report = bootstrap_p_values(rep.problem, design.bootstrap_config(), stream)
    except _RECOVERABLE as exc:
        return ReplicationResult(r, None, error=f"{type(exc).__name__}: {exc}")
    if design.plugin == "oracle" and report.p_plugin is not None:
        if rep.oracle_map is None:
            raise CapabilityError(f"no population map for model {design.model!r}")
        report.p_plugin = apply_prepivot(rep.oracle_map, report.p_hat)
    pv = {m: report.p_value(m) for m in design.methods}
    return ReplicationResult(r, pv, report.m_hat, rep.vd, rep.shift)


def _run_chunk(design: McDesign, start: int, stop: int) -> list[ReplicationResult]:
    return [run_replication(design, r) for r in range(start, stop)]


def run_replications(design: McDesign, workers: int | None = 1, chunk: int | None = None) -> list[ReplicationResult]:
    """All replications of ``design``, ordered by index.

    Results do not depend on ``workers`` or ``chunk``: every replication
    owns its stream, and aggregation is by index.
    """
    reps = design.reps
    workers = max(1, int(workers or os.cpu_count() or 1))
    if workers == 1 or reps < 2:
        results = _run_chunk(design, 0, reps)
    else:
        size = chunk or max(1, math.ceil(reps / (4 * workers)))
        bounds = [(s, min(reps, s + size)) for s in range(0, reps, size)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(_run_chunk, [design] * len(bounds), *zip(*bounds))
            results = [res for part in parts for res in part]
    results.sort(key=lambda res: res.index)
    aborts = sum(res.aborted for res in results)
    if aborts > MAX_ABORT_SHARE * reps:
        first = next(res.error for res in results if res.aborted)
        raise NumericError(
            f"{aborts} of {reps} replications aborted (limit {MAX_ABORT_SHARE:.0%}); first: {first}",
            diagnostics={"aborts": aborts, "reps": reps},
        )
    return results


def p_value_matrix(results: list[ReplicationResult], method: str) -> np.ndarray:
    return np.array([res.p_values[method] for res in results if not res.aborted], dtype=float)


# ---------------------------------------------------------------------------
# rejection tables

COLUMNS = ("dist", "a", "n", "scheme", "method", "level", "reject_freq", "se", "reps", "aborts")


@dataclass(frozen=True)
class RejectionRow:
    dist: str
    a: float
    n: int
    scheme: str
    method: str
    level: float
    reject_freq: float
    se: float
    reps: int
    aborts: int

    def as_tuple(self) -> tuple:
        return tuple(getattr(self, c) for c in COLUMNS)


@dataclass
class RejectionTable:
    rows: list[RejectionRow] = field(default_factory=list)
    header: dict = field(default_factory=dict)

    def extend(self, other: RejectionTable) -> None:
        self.rows.extend(other.rows)
        for k, v in other.header.items():
            self.header.setdefault(k, v)

    def lookup(self, **keys) -> list[RejectionRow]:
        return [row for row in self.rows if all(getattr(row, k) == v for k, v in keys.items())]

    def freq(self, **keys) -> float:
        hits = self.lookup(**keys)
        if len(hits) != 1:
            raise ParameterError(f"{len(hits)} rows match {keys}")
        return hits[0].reject_freq

    def format_rows(self, pretty: bool = False) -> list[list[str]]:
        out = []
        for row in self.rows:
            if pretty:
                freq, se = f"{100 * row.reject_freq:.1f}", f"{100 * row.se:.1f}"
            else:
                freq, se = f"{row.reject_freq:.6f}", f"{row.se:.6f}"
            out.append([row.dist, f"{row.a:g}", str(row.n), row.scheme, row.method, f"{row.level:g}",
                        freq, se, str(row.reps), str(row.aborts)])
        return out

    def write_csv(self, path: str | Path, pretty: bool = False) -> None:
        write_atomic(path, self.to_text(pretty))

    def to_text(self, pretty: bool = False) -> str:
        lines = [f"# {k}={_fmt_header(v)}" for k, v in self.header.items()]
        body = [",".join(COLUMNS)] + [",".join(r) for r in self.format_rows(pretty)]
        return "\n".join(lines + body) + "\n"


def _fmt_header(value) -> str:
    if isinstance(value, (tuple, list)):
        return ",".join(str(v) for v in value)
    return str(value)


def read_rejection_csv(path: str | Path) -> RejectionTable:
    """Inverse of :meth:`RejectionTable.write_csv` for non-pretty files."""
    header, body = {}, []
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key] = value
            elif line.strip():
                body.append(line)
    reader = csv.DictReader(body)
    if tuple(reader.fieldnames or ()) != COLUMNS:
        raise ParameterError(f"unexpected columns {reader.fieldnames}")
    rows = [
        RejectionRow(r["dist"], float(r["a"]), int(r["n"]), r["scheme"], r["method"], float(r["level"]),
                     float(r["reject_freq"]), float(r["se"]), int(r["reps"]), int(r["aborts"]))
        for r in reader
    ]
    return RejectionTable(rows, header)


def write_atomic(path: str | Path, text: str) -> None:
    """Write ``text`` so that readers never see a partial file."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def rejection_rows(design: McDesign, results: list[ReplicationResult]) -> list[RejectionRow]:
    done = [res for res in results if not res.aborted]
    aborts = len(results) - len(done)
    rows = []
    for method in design.methods:
        p = p_value_matrix(results, method)
        for level in design.levels:
            freq = float(np.mean(p <= level)) if p.size else float("nan")
            se = math.sqrt(freq * (1 - freq) / p.size) if p.size else float("nan")
            rows.append(RejectionRow(design.dist_label, float(design.a), design.n, design.scheme_label,
                                     method, level, freq, se, p.size, aborts))
    return rows


def run_table1(designs: list[McDesign] | McDesign, workers: int | None = 1) -> RejectionTable:
    """Rejection frequencies for every design cell, in the order given."""
    if isinstance(designs, McDesign):
        designs = [designs]
    table = RejectionTable()
    for design in designs:
        results = run_replications(design, workers)
        table.rows.extend(rejection_rows(design, results))
        for k, v in design.resolved().items():
            table.header.setdefault(k, v)
    return table


# ---------------------------------------------------------------------------
# uniformity and power


@dataclass
class UniformityResult:
    design: McDesign
    p_values: dict
    ks: dict
    m_hat: np.ndarray
    aborts: int

    def summary_rows(self) -> list[dict]:
        return [
            {"method": m, "ks_statistic": r.statistic, "ks_pvalue": r.pvalue, "size": r.size,
             "mass_at_0": float(np.mean(self.p_values[m] == 0.0)),
             "mass_at_1": float(np.mean(self.p_values[m] == 1.0))}
            for m, r in self.ks.items()
        ]


def run_uniformity(design: McDesign, workers: int | None = 1) -> UniformityResult:
    """Null p-values and their Kolmogorov-Smirnov distance from U(0, 1)."""
    if design.a != 0:
        raise ParameterError("uniformity runs require a = 0")
    results = run_replications(design, workers)
    pv = {m: p_value_matrix(results, m) for m in design.methods}
    ks: dict[str, KsResult] = {m: ks_uniform(p) for m, p in pv.items()}
    m_hat = np.array([res.m_hat for res in results if not res.aborted and res.m_hat is not None])
    return UniformityResult(design, pv, ks, m_hat, sum(res.aborted for res in results))


@dataclass(frozen=True)
class PowerPoint:
    a: float
    method: str
    level: float
    reject_freq: float
    se: float
    overlay: float


def local_power(a_shift, vd, level: float) -> np.ndarray:
    """Limiting rejection probability of a left-tailed level test."""
    return ndtr(ndtri(level) - np.asarray(a_shift, dtype=float) / np.asarray(vd, dtype=float))


def run_power_curve(design: McDesign, a_grid, workers: int | None = 1) -> list[PowerPoint]:
    """Rejection frequency against drift, with the Gaussian local-power overlay.

    The overlay averages ``Phi(Phi^-1(level) - shift / v_d_hat)`` over
    replications; it is NaN for models without a Gaussian limit.
    """
    points = []
    for a in a_grid:
        cell = design.with_(a=float(a))
        results = run_replications(cell, workers)
        done = [res for res in results if not res.aborted]
        for method in cell.methods:
            p = p_value_matrix(results, method)
            for level in cell.levels:
                freq = float(np.mean(p <= level))
                if done and all(res.vd is not None for res in done):
                    overlay = float(np.mean(local_power([r.shift for r in done], [r.vd for r in done], level)))
                else:
                    overlay = float("nan")
                points.append(PowerPoint(float(a), method, level, freq,
                                         math.sqrt(freq * (1 - freq) / max(p.size, 1)), overlay))
    return points
