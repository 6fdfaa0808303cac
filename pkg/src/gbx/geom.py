"""Charted surfaces with Riemannian metrics and 2-form quadrature.

Two built-in gluings cover the closed oriented cases we verify:

  torus-periodic            one chart [0,2pi) x [0,2pi), metric periodic
  sphere-stereographic-pair two charts glued by the plane inversion
                            (u,v) -> (u,-v)/(u^2+v^2); each chart owns
                            the closed unit disk in its own coordinates

Quadrature is tensor-product midpoint over each chart's own region:
Cartesian cells on rectangles, polar (radius x angle) cells on disks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError, MetricError, NonFiniteDensity

TORUS = "torus-periodic"
SPHERE = "sphere-stereographic-pair"

TWO_PI = 2.0 * math.pi


@dataclass
class OwnRegion:
    """Sub-rectangle or disk a chart owns for quadrature."""

    kind: str  # "rect" | "disk"
    rect: tuple | None = None  # (umin, umax, vmin, vmax)
    disk: tuple | None = None  # (cu, cv, radius)

    @staticmethod
    def rectangle(umin, umax, vmin, vmax):
        return OwnRegion("rect", rect=(umin, umax, vmin, vmax))

    @staticmethod
    def disk_region(cu, cv, radius):
        return OwnRegion("disk", disk=(cu, cv, radius))


@dataclass
class Chart:
    """Single coordinate patch with its metric data.

    Metric components are scalar fields g11, g12, g22. When the metric
    is conformal and given by an expression factor, `conformal_lambda`
    enables the exact symbolic connection/curvature path.
    """

    id: str
    domain: tuple  # (umin, umax, vmin, vmax)
    g11: object
    g12: object
    g22: object
    own_region: OwnRegion
    conformal_lambda: object = None
    periodic: bool = False

    def wrap(self, u, v):
        if not self.periodic:
            return u, v
        umin, umax, vmin, vmax = self.domain
        return (
            umin + np.mod(u - umin, umax - umin),
            vmin + np.mod(v - vmin, vmax - vmin),
        )

    def contains(self, u, v, slack=1e-9):
        if self.periodic:
            return np.full(np.shape(u) or (1,), True)
        umin, umax, vmin, vmax = self.domain
        return (
            (u >= umin - slack)
            & (u <= umax + slack)
            & (v >= vmin - slack)
            & (v <= vmax + slack)
        )


def eval_metric(chart: Chart, u, v):
    """Metric components at (u, v); raises MetricError when not positive
    definite and DomainError outside the chart."""
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    us = np.atleast_1d(np.asarray(u, dtype=np.float64))
    vs = np.atleast_1d(np.asarray(v, dtype=np.float64))
    inside = chart.contains(us, vs)
    if not np.all(inside):
        bad = int(np.argmin(inside))
        raise DomainError(
            f"point ({us[bad]:.6g}, {vs[bad]:.6g}) outside domain of chart "
            f"{chart.id!r}"
        )
    uw, vw = chart.wrap(us, vs)
    g11 = np.asarray(chart.g11.eval(uw, vw), dtype=np.float64)
    g12 = np.asarray(chart.g12.eval(uw, vw), dtype=np.float64)
    g22 = np.asarray(chart.g22.eval(uw, vw), dtype=np.float64)
    det = g11 * g22 - g12 * g12
    ok = (g11 > 0) & (det > 0)
    if not np.all(ok):
        bad = int(np.argmin(ok))
        raise MetricError(
            f"metric not positive definite at ({us.flat[bad]:.6g}, "
            f"{vs.flat[bad]:.6g}) on chart {chart.id!r}"
        )
    if scalar:
        return float(g11[0]), float(g12[0]), float(g22[0])
    return g11, g12, g22


def area_density(chart: Chart, u, v):
    """sqrt(det g) at (u, v)."""
    g11, g12, g22 = eval_metric(chart, u, v)
    return np.sqrt(g11 * g22 - g12 * g12)


@dataclass
class ChartedSurface:
    name: str
    gluing: str
    charts: list
    euler_char: int

    def __post_init__(self):
        if self.gluing not in (TORUS, SPHERE):
            raise ConfigError(f"unknown gluing {self.gluing!r}")
        if self.gluing == TORUS and len(self.charts) != 1:
            raise ConfigError("torus-periodic surfaces have exactly one chart")
        if self.gluing == SPHERE and len(self.charts) != 2:
            raise ConfigError("sphere-stereographic-pair surfaces have two charts")
        if self.gluing == TORUS:
            chart = self.charts[0]
            chart.periodic = True
            if not np.allclose(chart.domain, (0.0, TWO_PI, 0.0, TWO_PI), atol=1e-12):
                raise ConfigError("torus chart domain must be [0,2pi) x [0,2pi)")

    def chart(self, chart_id: str) -> Chart:
        for c in self.charts:
            if c.id == chart_id:
                return c
        raise ConfigError(f"no chart named {chart_id!r}")

    def validate(self, seam_samples: int = 33, seam_tol: float = 1e-9):
        """Run the gluing-specific consistency checks."""
        if self.gluing == TORUS:
            chart = self.charts[0]
            ts = np.linspace(0.0, TWO_PI, seam_samples)
            for f in (chart.g11, chart.g12, chart.g22):
                du = np.max(np.abs(f.eval(np.zeros_like(ts), ts) - f.eval(np.full_like(ts, TWO_PI), ts)))
                dv = np.max(np.abs(f.eval(ts, np.zeros_like(ts)) - f.eval(ts, np.full_like(ts, TWO_PI))))
                if max(du, dv) > seam_tol:
                    raise ConfigError(
                        f"torus metric not 2pi-periodic (seam discrepancy "
                        f"{max(du, dv):.3e})"
                    )
        else:
            for chart in self.charts:
                r = chart.own_region
                if r.kind != "disk" or not np.allclose(r.disk, (0.0, 0.0, 1.0)):
                    raise ConfigError(
                        "sphere charts must own the closed unit disk"
                    )
        return self


def transition_map(gluing: str, from_chart_id: str, u, v):
    """Map a point to the other chart; returns (u', v', J) with J the
    2x2 Jacobian of the transition."""
    scalar = np.ndim(u) == 0 and np.ndim(v) == 0
    us = np.atleast_1d(np.asarray(u, dtype=np.float64))
    vs = np.atleast_1d(np.asarray(v, dtype=np.float64))
    if gluing == TORUS:
        uw = np.mod(us, TWO_PI)
        vw = np.mod(vs, TWO_PI)
        jac = np.zeros(us.shape + (2, 2))
        jac[..., 0, 0] = 1.0
        jac[..., 1, 1] = 1.0
    elif gluing == SPHERE:
        rho2 = us * us + vs * vs
        if np.any(rho2 < 1e-18):
            raise DomainError("sphere transition singular at the chart origin")
        uw = us / rho2
        vw = -vs / rho2
        jac = np.empty(us.shape + (2, 2))
        jac[..., 0, 0] = (vs * vs - us * us) / rho2**2
        jac[..., 0, 1] = -2.0 * us * vs / rho2**2
        jac[..., 1, 0] = 2.0 * us * vs / rho2**2
        jac[..., 1, 1] = (vs * vs - us * us) / rho2**2
    else:
        raise ConfigError(f"unknown gluing {gluing!r}")
    if scalar:
        return float(uw[0]), float(vw[0]), jac[0]
    return uw, vw, jac


def check_overlap_consistency(surface: ChartedSurface, n_samples: int = 24) -> float:
    """Max metric discrepancy over the overlap annulus after pulling the
    second chart's metric back through the transition map."""
    if surface.gluing != SPHERE:
        return 0.0
    c1, c2 = surface.charts
    radii = np.linspace(0.7, 1.4, n_samples)
    angles = np.linspace(0.0, TWO_PI, n_samples, endpoint=False)
    rr, tt = np.meshgrid(radii, angles, indexing="ij")
    us = (rr * np.cos(tt)).ravel()
    vs = (rr * np.sin(tt)).ravel()
    g11, g12, g22 = eval_metric(c1, us, vs)
    u2, v2, jac = transition_map(SPHERE, c1.id, us, vs)
    h11, h12, h22 = eval_metric(c2, u2, v2)
    # pullback: (J^T h J)_ab
    a, b, c, d = jac[..., 0, 0], jac[..., 0, 1], jac[..., 1, 0], jac[..., 1, 1]
    p11 = h11 * a * a + 2 * h12 * a * c + h22 * c * c
    p12 = h11 * a * b + h12 * (a * d + b * c) + h22 * c * d
    p22 = h11 * b * b + 2 * h12 * b * d + h22 * d * d
    return float(
        max(
            np.max(np.abs(p11 - g11)),
            np.max(np.abs(p12 - g12)),
            np.max(np.abs(p22 - g22)),
        )
    )


def quadrature_nodes(chart: Chart, resolution: int):
    """Midpoint nodes and weights covering the chart's own region."""
    region = chart.own_region
    if region.kind == "rect":
        umin, umax, vmin, vmax = region.rect
        hu = (umax - umin) / resolution
        hv = (vmax - vmin) / resolution
        uc = umin + (np.arange(resolution) + 0.5) * hu
        vc = vmin + (np.arange(resolution) + 0.5) * hv
        uu, vv = np.meshgrid(uc, vc, indexing="ij")
        w = np.full(uu.size, hu * hv)
        return uu.ravel(), vv.ravel(), w
    cu, cv, radius = region.disk
    hr = radius / resolution
    ht = TWO_PI / resolution
    rc = (np.arange(resolution) + 0.5) * hr
    tc = (np.arange(resolution) + 0.5) * ht
    rr, tt = np.meshgrid(rc, tc, indexing="ij")
    us = cu + rr * np.cos(tt)
    vs = cv + rr * np.sin(tt)
    w = (rr * hr * ht).ravel()
    return us.ravel(), vs.ravel(), w


def integrate_2form(surface: ChartedSurface, densities, resolution: int) -> float:
    """Sum of midpoint quadratures of per-chart du^dv coefficient fields
    over the charts' own regions. Deterministic for a fixed resolution."""
    if len(densities) != len(surface.charts):
        raise ConfigError("need exactly one density per chart")
    total = 0.0
    for chart, density in zip(surface.charts, densities):
        us, vs, w = quadrature_nodes(chart, resolution)
        vals = np.asarray(density.eval(us, vs), dtype=np.float64)
        if not np.all(np.isfinite(vals)):
            bad = int(np.argmin(np.isfinite(vals)))
            raise NonFiniteDensity(
                f"non-finite density at quadrature node ({us[bad]:.6g}, "
                f"{vs[bad]:.6g}) on chart {chart.id!r}"
            )
        total += float(np.sum(vals * w))
    return total


def flat_chart(
    chart_id: str = "c",
    domain=(-2.0, 2.0, -2.0, 2.0),
    own_region: OwnRegion | None = None,
) -> Chart:
    """Euclidean rectangle chart, handy for tests and local computations."""
    from .expr import ExprField

    return Chart(
        id=chart_id,
        domain=domain,
        g11=ExprField("1"),
        g12=ExprField("0"),
        g22=ExprField("1"),
        own_region=own_region or OwnRegion.rectangle(*domain),
    )


def conformal_chart(chart_id, domain, lambda_expr: str, own_region) -> Chart:
    """Chart with metric lambda^2 (du^2 + dv^2) given by an expression."""
    from .expr import ExprField

    lam = ExprField(lambda_expr)
    lam2 = ExprField(("pow", lam.ast, ("num", 2.0)))
    return Chart(
        id=chart_id,
        domain=domain,
        g11=lam2,
        g12=ExprField("0"),
        g22=lam2,
        own_region=own_region,
        conformal_lambda=lam,
    )


ROUND_SPHERE_LAMBDA = "2/(1 + u^2 + v^2)"


def round_sphere(name="round-sphere", extent=3.0) -> ChartedSurface:
    """Unit round sphere as two stereographic charts."""
    charts = [
        conformal_chart(
            cid,
            (-extent, extent, -extent, extent),
            ROUND_SPHERE_LAMBDA,
            OwnRegion.disk_region(0.0, 0.0, 1.0),
        )
        for cid in ("a", "b")
    ]
    return ChartedSurface(name, SPHERE, charts, euler_char=2).validate()


def flat_torus(name="flat-torus") -> ChartedSurface:
    charts = [
        conformal_chart(
            "t",
            (0.0, TWO_PI, 0.0, TWO_PI),
            "1",
            OwnRegion.rectangle(0.0, TWO_PI, 0.0, TWO_PI),
        )
    ]
    return ChartedSurface(name, TORUS, charts, euler_char=0).validate()
