"""Scenario configuration: JSON schema validation and materialization.

A config runs exactly one of: a section-based verification (hopf,
projective, whitney, structure) or a Cech obstruction decision. All
referenced charts must exist and the schema is validated before any
numeric work starts.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .cech import LiftAssignment, Nerve
from .errors import ConfigError
from .expr import ExprField, GridField
from .geom import Chart, ChartedSurface, OwnRegion, conformal_chart
from .sections import LINE, VECTOR, SectionSpec, SingularPoint

IDENTITIES = ("hopf", "projective", "whitney", "structure")


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def _field_from_spec(spec):
    if isinstance(spec, str):
        return ExprField(spec)
    if isinstance(spec, dict) and "grid" in spec:
        g = spec["grid"]
        return GridField(g["values"], g["u"], g["v"])
    raise ConfigError(f"cannot interpret scalar field spec {spec!r}")


def _own_region_from_spec(spec):
    if "rect" in spec:
        return OwnRegion.rectangle(*[float(x) for x in spec["rect"]])
    if "disk" in spec:
        cu, cv, r = (float(x) for x in spec["disk"])
        return OwnRegion.disk_region(cu, cv, r)
    raise ConfigError("own_region needs a 'rect' or 'disk' entry")


def build_chart(spec: dict) -> Chart:
    _require("id" in spec, "chart needs an 'id'")
    _require("domain" in spec and len(spec["domain"]) == 4, "chart needs a 4-entry domain")
    domain = tuple(float(x) for x in spec["domain"])
    metric = spec.get("metric", {})
    own = _own_region_from_spec(spec.get("own_region", {"rect": list(domain)}))
    if "conformal_lambda" in metric:
        lam = metric["conformal_lambda"]
        if isinstance(lam, str):
            return conformal_chart(spec["id"], domain, lam, own)
        raise ConfigError("conformal_lambda must be an expression string")
    for key in ("g11", "g12", "g22"):
        _require(key in metric, f"metric needs {key} (or conformal_lambda)")
    return Chart(
        id=spec["id"],
        domain=domain,
        g11=_field_from_spec(metric["g11"]),
        g12=_field_from_spec(metric["g12"]),
        g22=_field_from_spec(metric["g22"]),
        own_region=own,
    )


def build_surface(spec: dict, name: str = "") -> ChartedSurface:
    _require("gluing" in spec, "surface needs a 'gluing'")
    _require("charts" in spec and spec["charts"], "surface needs charts")
    charts = [build_chart(c) for c in spec["charts"]]
    surface = ChartedSurface(
        name=name or spec.get("name", "surface"),
        gluing=spec["gluing"],
        charts=charts,
        euler_char=int(spec.get("euler_char", 0)),
    )
    return surface.validate()


def build_section(spec: dict, surface: ChartedSurface) -> SectionSpec:
    kind = spec.get("kind")
    _require(kind in (VECTOR, LINE), f"section kind must be one of {(VECTOR, LINE)}")
    comp = {}
    for cid, pair in spec.get("components", {}).items():
        surface.chart(cid)  # existence check
        _require(len(pair) == 2, f"components of chart {cid!r} must be a pair")
        comp[cid] = (_field_from_spec(pair[0]), _field_from_spec(pair[1]))
    for chart in surface.charts:
        _require(chart.id in comp, f"section missing components for chart {chart.id!r}")
    points = []
    for i, p in enumerate(spec.get("singular_points", [])):
        cid = p.get("chart")
        chart = surface.chart(cid)
        sp = SingularPoint(
            chart_id=cid,
            u=float(p["u"]),
            v=float(p["v"]),
            radius=float(p.get("radius", 0.1)),
            label=int(p.get("label", i + 1)),
        )
        umin, umax, vmin, vmax = chart.domain
        if not chart.periodic:
            _require(
                umin <= sp.u - sp.radius and sp.u + sp.radius <= umax
                and vmin <= sp.v - sp.radius and sp.v + sp.radius <= vmax,
                f"excision disk of point i={sp.label} exits chart {cid!r}",
            )
        points.append(sp)
    for i, a in enumerate(points):
        for b in points[i + 1 :]:
            if a.chart_id == b.chart_id:
                _require(
                    math.hypot(a.u - b.u, a.v - b.v) >= a.radius + b.radius,
                    f"excision disks of points i={a.label}, i={b.label} overlap",
                )
    return SectionSpec(kind=kind, components=comp, singular_points=points)


def build_nerve_and_lifts(spec: dict):
    for key in ("vertices", "edges", "triangles"):
        _require(key in spec, f"cech input needs {key!r}")
    edges = []
    matrices = {}
    for e in spec["edges"]:
        i, j = int(e["i"]), int(e["j"])
        edges.append((i, j))
        if "matrix" in e:
            matrices[(i, j)] = np.asarray(e["matrix"], dtype=np.float64)
    nerve = Nerve(
        vertices=list(spec["vertices"]),
        edges=edges,
        triangles=[tuple(t) for t in spec["triangles"]],
        tetrahedra=[tuple(t) for t in spec.get("tetrahedra", [])],
    )
    lifts = None
    if matrices:
        _require(
            set(matrices) >= set(nerve.edges),
            "every nerve edge needs a lift matrix",
        )
        lifts = LiftAssignment(matrices)
    return nerve, lifts


class ScenarioConfig:
    """Validated scenario: either a section run or a cech run."""

    def __init__(self, raw: dict):
        self.raw = raw
        self.name = raw.get("name", "scenario")
        has_cech = "cech" in raw
        has_run = "run" in raw or "section" in raw or "factors" in raw
        _require(
            has_cech != has_run,
            "config must contain exactly one of a section-based run or a cech run",
        )
        self.mode = "cech" if has_cech else "section"
        if self.mode == "cech":
            self.nerve, self.lifts = build_nerve_and_lifts(raw["cech"])
            self.surface = None
            return
        _require("surface" in raw, "config needs a 'surface' block")
        _require("run" in raw, "config needs a 'run' block")
        run = raw["run"]
        self.identity = run.get("identity")
        _require(self.identity in IDENTITIES, f"identity must be one of {IDENTITIES}")
        self.resolution = int(run.get("resolution", 128))
        self.loop_samples = int(run.get("loop_samples", 512))
        self.tolerance = float(run.get("tolerance", 1e-3))
        self.form_kind = run.get("form", "circle")
        _require(self.resolution >= 2, "resolution must be at least 2")
        self.surface = build_surface(raw["surface"], name=self.name)
        self.section = None
        self.factors = None
        if self.identity == "whitney":
            _require("factors" in raw, "whitney runs need a 'factors' list")
            self.factors = []
            for f in raw["factors"]:
                metric = f.get("metric")
                surf_spec = {
                    "gluing": raw["surface"]["gluing"],
                    "euler_char": raw["surface"].get("euler_char", 0),
                    "charts": [],
                }
                for chart_spec in raw["surface"]["charts"]:
                    cs = dict(chart_spec)
                    if metric and chart_spec["id"] in metric:
                        cs = dict(chart_spec)
                        cs["metric"] = {"conformal_lambda": metric[chart_spec["id"]]}
                    surf_spec["charts"].append(cs)
                fsurf = build_surface(surf_spec, name=self.name)
                fsec = build_section(f["section"], fsurf)
                self.factors.append((fsurf, fsec))
        elif self.identity == "structure":
            if "section" in raw:
                self.section = build_section(raw["section"], self.surface)
        else:
            _require("section" in raw, f"{self.identity} runs need a 'section' block")
            self.section = build_section(raw["section"], self.surface)
            if self.identity == "hopf":
                _require(self.section.kind == VECTOR, "hopf runs need a vector-field")
            if self.identity == "projective":
                _require(self.section.kind == LINE, "projective runs need a line-field")

    def with_overrides(self, resolution=None, loop_samples=None, tolerance=None):
        raw = json.loads(json.dumps(self.raw))
        if self.mode == "section":
            if resolution is not None:
                raw["run"]["resolution"] = resolution
            if loop_samples is not None:
                raw["run"]["loop_samples"] = loop_samples
            if tolerance is not None:
                raw["run"]["tolerance"] = tolerance
        return ScenarioConfig(raw)


def load_config(path: str) -> ScenarioConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config {path!r} is not valid JSON (line {exc.lineno}, column {exc.colno})"
        ) from exc
    return ScenarioConfig(raw)
