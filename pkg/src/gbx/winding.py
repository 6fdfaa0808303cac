"""Indices of singular points as winding numbers over blow-up loops.

Indices are exact rationals with denominator 2 (integers for vector
fields, half-integers for line fields), never floats. A loop is
accepted only when the nearest-branch unwrap sees every adjacent gap
below a quarter period; otherwise the sample count doubles, up to six
times, before a hard under-resolution error. Every accepted index is
re-derived at half the loop radius and must agree exactly.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kernels
from .backend import max_threads
from .errors import NeedsRefinement, UnderResolvedLoop, UnstableIndex
from .sections import LINE, SectionSpec, SingularPoint, angle_in_frame, blowup_loop

MAX_REFINEMENTS = 6
TWO_PI = 2.0 * math.pi


@dataclass
class IndexResult:
    point: SingularPoint
    numerator: int  # index = numerator / 2
    n_samples: int
    radius: float
    refinements: int
    max_step: float

    @property
    def index(self) -> Fraction:
        return Fraction(self.numerator, 2)


def unwrap_angles(samples, period: float) -> float:
    """Total angle variation around a closed loop of samples mod period.

    Nearest-branch continuation, including the closing step back to the
    first sample, so the result is a period multiple for closed loops.
    Raises NeedsRefinement when an adjacent gap reaches period/4.
    """
    arr = np.ascontiguousarray(samples, dtype=np.float64)
    delta, max_gap = kernels.unwrap_delta(arr, period)
    if max_gap >= period / 4.0:
        raise NeedsRefinement(
            f"angle gap {max_gap:.4f} >= {period / 4.0:.4f}; refine the loop"
        )
    return delta


def _winding_numerator(section, frame, point, radius, n_samples):
    """(numerator over 2, final N, refinements, max gap) at one radius."""
    period = math.pi if section.kind == LINE else TWO_PI
    n = n_samples
    for attempt in range(MAX_REFINEMENTS + 1):
        loop = blowup_loop(point, n, chart=frame.chart, radius=radius)
        psi = angle_in_frame(section, frame, point.chart_id, loop.us, loop.vs)
        arr = np.ascontiguousarray(psi, dtype=np.float64)
        delta, max_gap = kernels.unwrap_delta(arr, period)
        if max_gap < period / 4.0:
            turns = delta / period
            snapped = round(turns)
            if abs(turns - snapped) > 1e-9:
                raise UnderResolvedLoop(point.label, n)
            numerator = snapped if section.kind == LINE else 2 * snapped
            return int(numerator), n, attempt, float(max_gap)
        n *= 2
    raise UnderResolvedLoop(point.label, n // 2)


def index_at(section: SectionSpec, frame, point: SingularPoint,
             n_samples: int = 512, check_stability: bool = True) -> IndexResult:
    """Index of the section at one singular point.

    The winding is recomputed at half the declared excision radius and
    must match exactly; disagreement raises UnstableIndex.
    """
    numerator, n_final, refinements, max_gap = _winding_numerator(
        section, frame, point, point.radius, n_samples
    )
    if check_stability:
        numerator_half, _, _, _ = _winding_numerator(
            section, frame, point, point.radius / 2.0, n_samples
        )
        if numerator_half != numerator:
            raise UnstableIndex(
                point.label, Fraction(numerator, 2), Fraction(numerator_half, 2)
            )
    return IndexResult(
        point=point,
        numerator=numerator,
        n_samples=n_final,
        radius=point.radius,
        refinements=refinements,
        max_step=max_gap,
    )


def total_index(section: SectionSpec, frames: dict,
                n_samples: int = 512) -> tuple[Fraction, list[IndexResult]]:
    """Exact sum of per-point indices plus the per-point table, ordered
    by point label. Per-point work may run on a small thread pool
    (GBX_THREADS), results are reduced in label order regardless."""
    points = sorted(section.singular_points, key=lambda p: p.label)

    def job(p):
        return index_at(section, frames[p.chart_id], p, n_samples=n_samples)

    workers = min(max_threads(), max(1, len(points)))
    if workers > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(job, points))
    else:
        results = [job(p) for p in points]
    total = sum((r.index for r in results), Fraction(0))
    return total, results
