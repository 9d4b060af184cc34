"""
Haar-random search over Hermite superpositions for the smallest
median-based (or variance-based) uncertainty product.

Degrees are swept 0..d. Each degree's pool holds N fresh Haar samples
plus the previous degree's argmin, zero-padded, so the running minima are
nonincreasing. Every sample's coefficients come from its own seed
``sample_seed(master_seed, degree, index)``; results therefore do not
depend on how the work is split across processes.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, TextIO

import numpy as np

from .hermite import (
    HermiteState,
    batch_siqr_products,
    batch_variance_products,
    haar_sample,
    sample_seed,
)

__all__ = [
    "SearchError",
    "SearchResult",
    "min_siqr_search",
    "min_variance_search",
    "convergence_table",
    "write_convergence_csv",
    "draw_block",
    "SANITY_FLOOR",
]

log = logging.getLogger(__name__)

SANITY_FLOOR = 0.05
MAX_FAILURE_FRACTION = 0.01
BLOCK = 8192
CSV_COLUMNS = ("degree", "samples", "min_product_over_hbar")


class SearchError(RuntimeError):
    pass


@dataclass(frozen=True)
class SearchResult:
    objective: str
    degree: int
    samples: int
    master_seed: int
    min_product_over_hbar: float
    argmin_state: HermiteState
    min_variance_product_over_hbar: Optional[float]
    per_degree_minima: list
    fresh_minima: list = field(default_factory=list)
    failures: int = 0
    below_sanity_floor: bool = False

    def to_dict(self) -> dict:
        return {
            "objective": self.objective,
            "degree": self.degree,
            "samples": self.samples,
            "master_seed": self.master_seed,
            "min_product_over_hbar": self.min_product_over_hbar,
            "min_variance_product_over_hbar": self.min_variance_product_over_hbar,
            "per_degree_minima": [[d, v] for d, v in self.per_degree_minima],
            "fresh_minima": [[d, v] for d, v in self.fresh_minima],
            "failures": self.failures,
            "below_sanity_floor": self.below_sanity_floor,
            "argmin_state": self.argmin_state.to_dict(),
        }


def draw_block(master_seed: int, degree: int, start: int, stop: int):
    """Coefficient rows and their seeds for sample indices [start, stop)."""
    seeds = [sample_seed(master_seed, degree, i) for i in range(start, stop)]
    C = np.empty((stop - start, degree + 1), dtype=complex)
    for row, seed in enumerate(seeds):
        C[row] = haar_sample(degree, seed).coefficients
    return C, seeds


_OBJECTIVES = {
    "siqr": batch_siqr_products,
    "variance": batch_variance_products,
}


def _evaluate_block(args):
    objective, master_seed, degree, start, stop = args
    C, _ = draw_block(master_seed, degree, start, stop)
    with np.errstate(invalid="ignore"):
        return _OBJECTIVES[objective](C)


def _evaluate_degree(objective, master_seed, degree, samples, executor):
    jobs = [
        (objective, master_seed, degree, s, min(samples, s + BLOCK))
        for s in range(0, samples, BLOCK)
    ]
    parts = executor.map(_evaluate_block, jobs) if executor else map(_evaluate_block, jobs)
    return np.concatenate(list(parts))


def _search(objective, degree, samples, master_seed, hbar, workers) -> SearchResult:
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if degree < 0:
        raise ValueError("degree must be nonnegative")
    executor = ProcessPoolExecutor(workers) if workers and workers > 1 else None
    try:
        best_value, best_state = math.inf, None
        minima, fresh, failures = [], [], 0
        for d in range(degree + 1):
            values = _evaluate_degree(objective, master_seed, d, samples, executor)
            bad = ~np.isfinite(values) | (values <= 0)
            n_bad = int(bad.sum())
            if n_bad:
                log.warning("degree %d: %d of %d samples failed and were skipped", d, n_bad, samples)
            failures += n_bad
            values = np.where(bad, np.inf, values)
            i = int(np.argmin(values))      # first index wins ties
            fresh.append((d, float(values[i])))
            # the carried argmin counts as index -1 and so wins exact ties
            if values[i] < best_value:
                best_value = float(values[i])
                seed = sample_seed(master_seed, d, i)
                best_state = haar_sample(d, seed, hbar)
            elif best_state is not None:
                best_state = best_state.padded(d)
            minima.append((d, best_value))
        total = samples * (degree + 1)
        if failures > MAX_FAILURE_FRACTION * total:
            raise SearchError(f"{failures} of {total} samples failed")
        if not math.isfinite(best_value):
            raise SearchError("no sample could be evaluated")
    finally:
        if executor:
            executor.shutdown()

    c = best_state.coefficients[None, :]
    siqr_min = float(batch_siqr_products(c)[0])
    var_min = float(batch_variance_products(c)[0])
    flagged = objective == "siqr" and any(v < SANITY_FLOOR for _, v in minima)
    if flagged:
        log.warning("minimum product %.6g is below the sanity floor %.2g; review", best_value, SANITY_FLOOR)
    return SearchResult(
        objective=objective,
        degree=degree,
        samples=samples,
        master_seed=master_seed,
        min_product_over_hbar=siqr_min,
        argmin_state=best_state,
        min_variance_product_over_hbar=var_min,
        per_degree_minima=minima,
        fresh_minima=fresh,
        failures=failures,
        below_sanity_floor=flagged,
    )


def min_siqr_search(
    degree: int, samples: int, master_seed: int = 0, hbar: float = 1.0, workers: Optional[int] = None
) -> SearchResult:
    """
    Smallest SIQR_x * SIQR_p / hbar over Haar samples at degrees 0..degree.

    ``min_variance_product_over_hbar`` reports the variance product of
    the same argmin state.
    """
    return _search("siqr", degree, samples, master_seed, hbar, workers)


def min_variance_search(
    degree: int, samples: int, master_seed: int = 0, hbar: float = 1.0, workers: Optional[int] = None
) -> SearchResult:
    """
    Smallest Delta x * Delta p / hbar over Haar samples at degrees 0..degree.

    ``min_product_over_hbar`` reports the SIQR product of the argmin state.
    """
    return _search("variance", degree, samples, master_seed, hbar, workers)


def convergence_table(result: SearchResult) -> list[tuple[int, int, float]]:
    """Rows of (degree, samples, running minimum) for the searched objective."""
    return [(d, result.samples, v) for d, v in result.per_degree_minima]


def write_convergence_csv(result: SearchResult, out: Optional[TextIO] = None) -> str:
    """Write the convergence table as CSV with a header row; returns the text."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(CSV_COLUMNS)
    for d, n, v in convergence_table(result):
        writer.writerow([d, n, repr(float(v))])
    text = buf.getvalue()
    if out is not None:
        out.write(text)
    return text
