"""Solution counts over (k, tau) grids and the critical curve."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import astuple, dataclass, fields
from functools import lru_cache
from typing import Iterable, Optional, Union

import numpy as np

from .boundary import (TANGENCY_TOL, Params, Tolerances, critical_tau,
                       critical_tau_closed_form, enumerate_laws)

__all__ = ["PhaseRecord", "classify_point", "sweep", "tauc_curve", "CSV_HEADER",
           "records_to_csv", "tauc_to_csv"]

CSV_HEADER = ["k", "theta", "tau", "n_sym_distinct", "n_asym_pairs", "n_valid",
              "tau_c", "regime", "paper_discrepancy"]


@dataclass(frozen=True)
class PhaseRecord:
    k: int
    theta: float
    tau: float
    n_sym_distinct: int
    n_asym_pairs: int
    n_valid: int
    tau_c: float
    regime: str
    # at tau_c the tangent pair merges into a = 1: one distinct symmetric
    # law where a tangency count would give two
    paper_discrepancy: bool
    trivial_multiplicity: int = 1

    def csv_row(self) -> list[str]:
        return [str(self.k), f"{self.theta:.9g}", f"{self.tau:.9g}", str(self.n_sym_distinct),
                str(self.n_asym_pairs), str(self.n_valid), f"{self.tau_c:.9g}", self.regime,
                "true" if self.paper_discrepancy else "false"]


@lru_cache(maxsize=None)
def _tau_c(k: int) -> float:
    return critical_tau(k)


def classify_point(k: int, theta=None, *, tau=None, tolerances: Tolerances = Tolerances(),
                   critical_tol: float = TANGENCY_TOL) -> PhaseRecord:
    """Count the laws at one parameter point; every counted law must pass all oracles."""
    if (theta is None) == (tau is None):
        raise ValueError("give exactly one of theta or tau")
    params = Params.from_theta(k, theta) if theta is not None else Params.from_tau(k, tau)
    records = enumerate_laws(params, tolerances, check=True)
    sym = [r for r in records if r.law.family != "asymmetric"]
    asym = [r for r in records if r.law.family == "asymmetric"]
    trivial = next(r for r in sym if r.law.family == "trivial")
    tc = _tau_c(params.k)
    gap = float(params.tau) - tc
    if abs(gap) <= critical_tol:
        regime = "critical"
    else:
        regime = "above_critical" if gap > 0 else "below_critical"
    return PhaseRecord(
        k=params.k, theta=float(params.theta), tau=float(params.tau),
        n_sym_distinct=len(sym), n_asym_pairs=len(asym) // 2,
        n_valid=sum(r.valid for r in records), tau_c=tc, regime=regime,
        paper_discrepancy=regime == "critical",
        trivial_multiplicity=trivial.multiplicity)


def _k_values(k_range: Union[int, tuple[int, int], Iterable[int]]) -> list[int]:
    if isinstance(k_range, (int, np.integer)):
        return [int(k_range)]
    ks = list(k_range)
    if len(ks) == 2:
        ks = list(range(int(ks[0]), int(ks[1]) + 1))
    return ks


def _classify_tau(job):
    k, tau = job
    return classify_point(k, tau=tau)


def sweep(k_range, tau_range: tuple[float, float], steps: int,
          workers: Optional[int] = 1) -> list[PhaseRecord]:
    """Classify a k-major, tau-ascending grid; ``tau_range`` is inclusive."""
    ks = _k_values(k_range)
    lo, hi = tau_range
    if not ks or steps < 2 or not hi > lo:
        raise ValueError("empty sweep range")
    if lo <= 2:
        raise ValueError("tau range must lie above 2")
    taus = np.linspace(lo, hi, steps)
    jobs = [(k, float(t)) for k in ks for t in taus]
    if workers is None or workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_classify_tau, jobs))
    return [_classify_tau(j) for j in jobs]


def tauc_curve(k_min: int, k_max: int) -> list[tuple[int, float]]:
    if not 2 <= k_min <= k_max:
        raise ValueError("need 2 <= k_min <= k_max")
    return [(k, _tau_c(k)) for k in range(k_min, k_max + 1)]


def records_to_csv(records: list[PhaseRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in records:
        w.writerow(r.csv_row())
    return buf.getvalue()


def tauc_to_csv(rows: list[tuple[int, float]]) -> str:
    lines = ["k,tau_c"] + [f"{k},{t:.10g}" for k, t in rows]
    return "\n".join(lines) + "\n"
