"""Sections with singularities, blow-up loops, and frame angles."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError, NumericalError
from .frames import FrameConnection
from .geom import Chart, ChartedSurface, eval_metric, transition_map

VECTOR = "vector-field"
LINE = "line-field"
WHITNEY = "whitney"

DEFAULT_EXCISION_RADIUS = 0.1
MIN_LOOP_SAMPLES = 16


@dataclass(frozen=True)
class SingularPoint:
    chart_id: str
    u: float
    v: float
    radius: float = DEFAULT_EXCISION_RADIUS
    label: int = 0


@dataclass
class SectionSpec:
    """A section of the relevant bundle, given per chart by two
    component fields; line-field components are taken up to sign."""

    kind: str
    components: dict  # chart_id -> (field, field)
    singular_points: list = field(default_factory=list)

    def __post_init__(self):
        if self.kind not in (VECTOR, LINE):
            raise ConfigError(f"unsupported section kind {self.kind!r}")

    def value(self, chart_id, u, v):
        f1, f2 = self.components[chart_id]
        return np.asarray(f1.eval(u, v)), np.asarray(f2.eval(u, v))


@dataclass
class BlowupLoop:
    center: SingularPoint
    radius: float
    us: np.ndarray
    vs: np.ndarray

    @property
    def n_samples(self) -> int:
        return len(self.us)


def blowup_loop(p: SingularPoint, n_samples: int, chart: Chart | None = None,
                radius: float | None = None) -> BlowupLoop:
    """Counterclockwise circle of samples around a singular point.

    The first sample sits at angle zero (p + (r, 0)).
    """
    if n_samples < MIN_LOOP_SAMPLES:
        raise ConfigError(f"blow-up loops need at least {MIN_LOOP_SAMPLES} samples")
    r = p.radius if radius is None else radius
    if chart is not None and not chart.periodic:
        umin, umax, vmin, vmax = chart.domain
        if (
            p.u - r < umin
            or p.u + r > umax
            or p.v - r < vmin
            or p.v + r > vmax
        ):
            raise DomainError(
                f"excision disk of point i={p.label} exits chart {chart.id!r}"
            )
    phis = 2.0 * math.pi * np.arange(n_samples) / n_samples
    return BlowupLoop(p, r, p.u + r * np.cos(phis), p.v + r * np.sin(phis))


def angle_in_frame(section: SectionSpec, frame: FrameConnection, chart_id: str,
                   u, v, min_norm: float = 1e-12):
    """Angle of the section against the orthonormal frame.

    psi = atan2(<s, e2>_g, <s, e1>_g), mod 2pi for vector fields and
    understood mod pi for line fields (the unwrap handles the period).
    """
    v1, v2 = section.value(chart_id, u, v)
    e1u, e1v, e2u, e2v = frame.frame_at(u, v)
    g11, g12, g22 = eval_metric(frame.chart, u, v)
    gv1 = g11 * v1 + g12 * v2
    gv2 = g12 * v1 + g22 * v2
    p1 = e1u * gv1 + e1v * gv2
    p2 = e2u * gv1 + e2v * gv2
    norm2 = v1 * gv1 + v2 * gv2
    if np.any(norm2 < min_norm * min_norm):
        bad = int(np.argmin(norm2))
        uu = np.atleast_1d(u)
        vv = np.atleast_1d(v)
        raise NumericalError(
            f"section vanishes near ({uu.flat[min(bad, uu.size - 1)]:.6g}, "
            f"{vv.flat[min(bad, vv.size - 1)]:.6g}); undeclared singularity?"
        )
    return np.arctan2(p2, p1)


def detect_singularities(section: SectionSpec, chart: Chart,
                         grid_resolution: int = 64, threshold: float = 1e-3,
                         refine_iters: int = 48):
    """Advisory zero scan: grid cells where both components change sign
    get refined by quadrant bisection. Verification always uses the
    declared points; this is a helper for building scenarios."""
    if section.kind == WHITNEY:
        raise ConfigError("detection unsupported for whitney")
    if chart.id not in section.components:
        raise ConfigError(f"section has no components on chart {chart.id!r}")
    umin, umax, vmin, vmax = chart.domain
    us = np.linspace(umin, umax, grid_resolution + 1)
    vs = np.linspace(vmin, vmax, grid_resolution + 1)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    c1, c2 = section.value(chart.id, uu.ravel(), vv.ravel())
    c1 = c1.reshape(uu.shape)
    c2 = c2.reshape(uu.shape)
    mag = np.hypot(c1, c2)

    def sign_change(arr):
        s = np.sign(arr)
        return (
            (s[:-1, :-1] * s[1:, :-1] <= 0) | (s[:-1, :-1] * s[:-1, 1:] <= 0)
        ) & (
            (s[1:, 1:] * s[1:, :-1] <= 0) | (s[1:, 1:] * s[:-1, 1:] <= 0)
        )

    low = (
        np.minimum.reduce([mag[:-1, :-1], mag[1:, :-1], mag[:-1, 1:], mag[1:, 1:]])
        < threshold
    )
    cells = np.argwhere(sign_change(c1) & sign_change(c2) & low)

    found = []
    for iu, iv in cells:
        u0, u1 = us[iu], us[iu + 1]
        v0, v1 = vs[iv], vs[iv + 1]
        for _ in range(refine_iters):
            um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
            best = None
            for (a0, a1) in ((u0, um), (um, u1)):
                for (b0, b1) in ((v0, vm), (vm, v1)):
                    qu = np.array([a0, a1, a0, a1])
                    qv = np.array([b0, b0, b1, b1])
                    q1, q2 = section.value(chart.id, qu, qv)
                    has_flip = (np.min(q1) <= 0 <= np.max(q1)) and (
                        np.min(q2) <= 0 <= np.max(q2)
                    )
                    score = float(np.min(np.hypot(q1, q2)))
                    key = (not has_flip, score)
                    if best is None or key < best[0]:
                        best = (key, (a0, a1, b0, b1))
            u0, u1, v0, v1 = best[1]
        cu, cv = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
        if not any(math.hypot(cu - p.u, cv - p.v) < 1e-6 for p in found):
            found.append(
                SingularPoint(chart.id, cu, cv, DEFAULT_EXCISION_RADIUS, len(found) + 1)
            )
    return found


def check_section_consistency(surface: ChartedSurface, section: SectionSpec,
                              n_samples: int = 16, tol: float = 1e-8) -> float:
    """Two-chart agreement of the section over the overlap annulus.

    Vector fields must push forward exactly through the transition
    Jacobian; line fields are compared as directions mod pi.
    Returns the maximum discrepancy found.
    """
    if surface.gluing != "sphere-stereographic-pair":
        return 0.0
    c1, c2 = surface.charts
    radii = np.linspace(0.75, 1.3, n_samples)
    angles = np.linspace(0.0, 2 * math.pi, n_samples, endpoint=False)
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    us = (rr * np.cos(tt)).ravel()
    vs = (rr * np.sin(tt)).ravel()
    keep = np.ones(us.shape, dtype=bool)
    for p in section.singular_points:
        if p.chart_id == c1.id:
            keep &= np.hypot(us - p.u, vs - p.v) > p.radius
    us, vs = us[keep], vs[keep]
    v1, v2 = section.value(c1.id, us, vs)
    u2, vv2, jac = transition_map(surface.gluing, c1.id, us, vs)
    w1 = jac[:, 0, 0] * v1 + jac[:, 0, 1] * v2
    w2 = jac[:, 1, 0] * v1 + jac[:, 1, 1] * v2
    x1, x2 = section.value(c2.id, u2, vv2)
    if section.kind == VECTOR:
        scale = np.maximum(1.0, np.hypot(x1, x2))
        disc = np.hypot(w1 - x1, w2 - x2) / scale
    else:
        ang_push = np.arctan2(w2, w1)
        ang_other = np.arctan2(x2, x1)
        d = ang_push - ang_other
        d = d - math.pi * np.round(d / math.pi)
        disc = np.abs(d)
    worst = float(np.max(disc))
    if worst > tol:
        idx = int(np.argmax(disc))
        raise ConfigError(
            f"section inconsistent across charts near ({us[idx]:.4g}, "
            f"{vs[idx]:.4g}): discrepancy {worst:.3e}"
        )
    return worst


def check_nonvanishing(surface: ChartedSurface, section: SectionSpec,
                       grid: int = 48, min_norm: float = 1e-9):
    """The section must be bounded away from zero outside the declared
    excision disks (sampled on each chart's own region)."""
    from .geom import quadrature_nodes

    for chart in surface.charts:
        if chart.id not in section.components:
            raise ConfigError(f"section missing components on chart {chart.id!r}")
        us, vs, _ = quadrature_nodes(chart, grid)
        keep = np.ones(us.shape, dtype=bool)
        for p in section.singular_points:
            if p.chart_id == chart.id:
                keep &= np.hypot(us - p.u, vs - p.v) > 1.5 * p.radius
            elif surface.gluing == "sphere-stereographic-pair":
                safe = np.hypot(us, vs) > 1e-9
                ut, vt, _ = transition_map(surface.gluing, chart.id, us[safe], vs[safe])
                keep[safe] &= np.hypot(ut - p.u, vt - p.v) > 1.5 * p.radius
        v1, v2 = section.value(chart.id, us[keep], vs[keep])
        mag = np.hypot(v1, v2)
        if mag.size and float(np.min(mag)) < min_norm:
            bad = int(np.argmin(mag))
            raise ConfigError(
                f"section vanishes at undeclared point "
                f"({us[keep][bad]:.4g}, {vs[keep][bad]:.4g}) on chart {chart.id!r}"
            )
