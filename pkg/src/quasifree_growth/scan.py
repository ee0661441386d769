"""Entropy scans over many ``N`` and the comma-separated report format."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from threadpoolctl import threadpool_limits

from .construct import ConstructionLedger
from .intervals import IntervalSet
from .targets import GrowthTarget
from .toeplitz import fourier_coefficients, quadratic_bound_integral
from .verify import ChainRecord, bound_chain

logger = logging.getLogger(__name__)

__all__ = ["EntropyRow", "EntropyReport", "entropy_scan", "write_report", "read_report", "REPORT_COLUMNS"]

REPORT_COLUMNS = (
    "N",
    "S_N",
    "qN_eig",
    "qN_trace",
    "qN_integral",
    "qN_integral_err",
    "lower_integral",
    "lower_g",
    "f_N",
    "chain_ok",
)


@dataclass(frozen=True)
class EntropyRow:
    N: int
    S_N: float
    qN_eig: float
    qN_trace: float
    qN_integral: float
    qN_integral_err: float
    lower_integral: float
    lower_g: float
    f_N: float
    chain_ok: bool


@dataclass
class EntropyReport:
    rows: list[EntropyRow]
    chains: list[ChainRecord] = field(default_factory=list)
    errors: dict[int, str] = field(default_factory=dict)
    meta: dict[str, str] = field(default_factory=dict)

    def by_N(self) -> dict[int, EntropyRow]:
        return {row.N: row for row in self.rows}


def _row(K, coeffs, N, target, ledger, quad_tol) -> tuple[EntropyRow, ChainRecord]:
    chain = bound_chain(K, ledger, target, N, coeffs=coeffs, quad_tol=quad_tol)
    qi, qi_err = quadratic_bound_integral(K, N, abs_tol=quad_tol)
    row = EntropyRow(
        N=N,
        S_N=chain.S_N,
        qN_eig=chain.qN_eig,
        qN_trace=chain.qN_trace,
        qN_integral=qi,
        qN_integral_err=qi_err,
        lower_integral=chain.lower_integral,
        lower_g=chain.lower_g,
        f_N=chain.f_N,
        chain_ok=chain.ok,
    )
    return row, chain


def entropy_scan(
    K: IntervalSet,
    N_list,
    target: GrowthTarget | None = None,
    ledger: ConstructionLedger | None = None,
    *,
    workers: int = 1,
    k_max: int | None = None,
    quad_tol: float = 1e-10,
) -> EntropyReport:
    """One report row per ``N``, computed on a thread pool.

    Coefficients are computed once with ``k_max = max(N_list)``.  BLAS is
    pinned to one thread so that every row is computed identically whatever
    the pool size.  A failing row is recorded in ``errors`` and left out of
    ``rows``; the scan continues.
    """
    ns = sorted(set(int(n) for n in N_list))
    if not ns or ns[0] < 1:
        raise ValueError("N_list must contain positive integers")
    k_max = k_max or max(ns[-1], 1)
    if k_max < ns[-1] - 1:
        raise ValueError(f"k_max={k_max} too small for N={ns[-1]}")
    coeffs = fourier_coefficients(K, k_max)
    report = EntropyReport(rows=[])
    report.meta = {
        "k_max": str(k_max),
        "quad_tol": repr(quad_tol),
        "link_rtol": "1e-12",
        "target": target.spec if target is not None else "",
        "N_min": str(ledger.N_min) if ledger is not None else "",
    }

    def task(N):
        try:
            return N, _row(K, coeffs, N, target, ledger, quad_tol), None
        except Exception as exc:  # aggregated per row
            return N, None, f"{type(exc).__name__}: {exc}"

    with threadpool_limits(limits=1):
        if workers <= 1:
            results = [task(N) for N in ns]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(task, ns))
    for N, out, err in results:
        if err is not None:
            logger.error("N=%d failed: %s", N, err)
            report.errors[N] = err
            continue
        row, chain = out
        report.rows.append(row)
        report.chains.append(chain)
    return report


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if math.isnan(value):
        return "nan"
    return f"{value:.17g}"


def write_report(report: EntropyReport, path: str | Path) -> None:
    lines = [f"# {key}={value}" for key, value in report.meta.items()]
    for N, err in sorted(report.errors.items()):
        lines.append(f"# error N={N}: {err}")
    lines.append(",".join(REPORT_COLUMNS))
    for row in sorted(report.rows, key=lambda r: r.N):
        lines.append(",".join(_fmt(getattr(row, col)) for col in REPORT_COLUMNS))
    Path(path).write_text("\n".join(lines) + "\n")


def read_report(path: str | Path) -> EntropyReport:
    rows, meta = [], {}
    header = None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, eq, value = line[1:].strip().partition("=")
            if eq:
                meta[key] = value
            continue
        if not line.strip():
            continue
        fields = line.split(",")
        if header is None:
            header = fields
            if tuple(header) != REPORT_COLUMNS:
                raise ValueError(f"{path}: unexpected header {line!r}")
            continue
        vals = dict(zip(header, fields))
        rows.append(
            EntropyRow(
                N=int(vals["N"]),
                chain_ok=vals["chain_ok"] == "1",
                **{c: float(vals[c]) for c in REPORT_COLUMNS if c not in ("N", "chain_ok")},
            )
        )
    return EntropyReport(rows=rows, meta=meta)
