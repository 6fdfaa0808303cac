import math

import numpy as np
import pytest

from gbx.errors import ConfigError, DomainError, MetricError, NonFiniteDensity
from gbx.expr import ExprField, FuncField, GridField
from gbx.geom import (
    Chart,
    ChartedSurface,
    OwnRegion,
    area_density,
    check_overlap_consistency,
    conformal_chart,
    eval_metric,
    flat_torus,
    integrate_2form,
    round_sphere,
    transition_map,
)

TWO_PI = 2 * math.pi


class TestEvalMetric:
    def test_flat_torus(self):
        chart = flat_torus().charts[0]
        assert eval_metric(chart, 1.0, 2.0) == (1.0, 0.0, 1.0)

    def test_sphere_origin(self):
        chart = round_sphere().charts[0]
        g11, g12, g22 = eval_metric(chart, 0.0, 0.0)
        assert (g11, g12, g22) == pytest.approx((4.0, 0.0, 4.0))

    def test_grid_metric_constant(self):
        grid = GridField([[1.0, 1.0], [1.0, 1.0]], (0, 1), (0, 1))
        chart = Chart(
            "g", (0, 1, 0, 1), grid, ExprField("0"), grid,
            OwnRegion.rectangle(0, 1, 0, 1),
        )
        assert eval_metric(chart, 0.5, 0.5)[0] == 1.0

    def test_out_of_domain(self):
        chart = round_sphere().charts[0]
        with pytest.raises(DomainError):
            eval_metric(chart, 10.0, 0.0)

    def test_degenerate_rejected(self):
        chart = Chart(
            "bad", (0, 1, 0, 1),
            ExprField("u"), ExprField("0"), ExprField("1"),
            OwnRegion.rectangle(0, 1, 0, 1),
        )
        with pytest.raises(MetricError):
            eval_metric(chart, 0.0, 0.5)


class TestAreaDensity:
    def test_flat(self):
        assert area_density(flat_torus().charts[0], 0.3, 0.4) == 1.0

    def test_sphere_origin(self):
        assert area_density(round_sphere().charts[0], 0.0, 0.0) == pytest.approx(4.0)

    def test_diagonal(self):
        chart = Chart(
            "d", (0, 1, 0, 1),
            ExprField("4"), ExprField("0"), ExprField("9"),
            OwnRegion.rectangle(0, 1, 0, 1),
        )
        assert area_density(chart, 0.5, 0.5) == pytest.approx(6.0)


class TestTransition:
    def test_unit_circle_fixed(self):
        u, v, _ = transition_map("sphere-stereographic-pair", "a", 1.0, 0.0)
        assert (u, v) == pytest.approx((1.0, 0.0))

    def test_radius_inverts(self):
        u, v, _ = transition_map("sphere-stereographic-pair", "a", 2.0, 0.0)
        assert (u, v) == pytest.approx((0.5, 0.0))

    def test_torus_wraps(self):
        u, v, _ = transition_map("torus-periodic", "t", TWO_PI + 0.1, 0.2)
        assert (u, v) == pytest.approx((0.1, 0.2))

    def test_involution(self):
        rng = np.random.default_rng(0)
        us = rng.uniform(0.5, 2.0, 50)
        vs = rng.uniform(-1.5, 1.5, 50)
        u1, v1, _ = transition_map("sphere-stereographic-pair", "a", us, vs)
        u2, v2, _ = transition_map("sphere-stereographic-pair", "a", u1, v1)
        assert np.max(np.abs(u2 - us)) < 1e-12
        assert np.max(np.abs(v2 - vs)) < 1e-12

    def test_orientation_preserved(self):
        _, _, jac = transition_map("sphere-stereographic-pair", "a", 0.7, -0.4)
        assert np.linalg.det(jac) > 0

    def test_origin_singular(self):
        with pytest.raises(DomainError):
            transition_map("sphere-stereographic-pair", "a", 0.0, 0.0)


class TestOverlapConsistency:
    def test_round_sphere(self):
        assert check_overlap_consistency(round_sphere()) < 1e-12

    def test_bumpy_consistent(self):
        from gbx.config import ScenarioConfig
        from gbx.scenarios import bumpy_sphere

        surface = ScenarioConfig(bumpy_sphere()).surface
        assert check_overlap_consistency(surface) < 1e-9

    def test_mismatched_factor_detected(self):
        ext = 3.0
        charts = [
            conformal_chart("a", (-ext, ext, -ext, ext), "2/(1+u^2+v^2)",
                            OwnRegion.disk_region(0, 0, 1)),
            conformal_chart("b", (-ext, ext, -ext, ext), "4/(1+u^2+v^2)",
                            OwnRegion.disk_region(0, 0, 1)),
        ]
        surface = ChartedSurface("mismatch", "sphere-stereographic-pair", charts, 2)
        assert check_overlap_consistency(surface) >= 1.0


class TestIntegrate2Form:
    def test_torus_constant_exact(self):
        surface = flat_torus()
        val = integrate_2form(surface, [ExprField("1")], 128)
        assert val == pytest.approx(TWO_PI**2, rel=1e-12)

    def test_torus_sine_vanishes(self):
        surface = flat_torus()
        val = integrate_2form(surface, [ExprField("sin(u)")], 128)
        assert abs(val) < 1e-9

    def test_sphere_area(self):
        surface = round_sphere()
        dens = [
            FuncField(lambda us, vs, c=c: area_density(c, us, vs))
            for c in surface.charts
        ]
        val = integrate_2form(surface, dens, 256)
        assert abs(val - 4 * math.pi) < 1e-3

    def test_refinement_converges(self):
        surface = round_sphere()
        dens = [
            FuncField(lambda us, vs, c=c: area_density(c, us, vs))
            for c in surface.charts
        ]
        errors = [
            abs(integrate_2form(surface, dens, res) - 4 * math.pi)
            for res in (64, 128, 256)
        ]
        assert errors[0] > errors[1] > errors[2]

    def test_non_finite_density(self):
        surface = flat_torus()
        with pytest.raises(NonFiniteDensity):
            integrate_2form(surface, [ExprField("1/(u - pi)")], 17)

    def test_wrong_density_count(self):
        with pytest.raises(ConfigError):
            integrate_2form(flat_torus(), [], 16)


class TestSurfaceValidation:
    def test_torus_needs_periodic_metric(self):
        chart = Chart(
            "t", (0, TWO_PI, 0, TWO_PI),
            ExprField("1 + 0.1*u"), ExprField("0"), ExprField("1"),
            OwnRegion.rectangle(0, TWO_PI, 0, TWO_PI),
        )
        surface = ChartedSurface("bad-torus", "torus-periodic", [chart], 0)
        with pytest.raises(ConfigError):
            surface.validate()

    def test_metric_positive_on_scenario_nodes(self):
        from gbx.config import ScenarioConfig
        from gbx.scenarios import DEMOS
        from gbx.geom import quadrature_nodes

        for name, build in DEMOS.items():
            cfg = ScenarioConfig(build())
            if cfg.mode != "section":
                continue
            for chart in cfg.surface.charts:
                us, vs, _ = quadrature_nodes(chart, 32)
                eval_metric(chart, us, vs)  # raises on violation

    def test_chart_count_enforced(self):
        chart = flat_torus().charts[0]
        with pytest.raises(ConfigError):
            ChartedSurface("two-tori", "torus-periodic", [chart, chart], 0)

    def test_own_regions_cover_once(self):
        # torus: own region is the full fundamental square; sphere: two
        # unit disks whose interiors map to disjoint hemispheres
        surface = round_sphere()
        areas = []
        for chart in surface.charts:
            dens = FuncField(lambda us, vs, c=chart: area_density(c, us, vs))
            from gbx.geom import quadrature_nodes

            us, vs, w = quadrature_nodes(chart, 128)
            areas.append(float(np.sum(dens.eval(us, vs) * w)))
        assert sum(areas) == pytest.approx(4 * math.pi, abs=2e-3)
        assert areas[0] == pytest.approx(areas[1], abs=1e-12)
