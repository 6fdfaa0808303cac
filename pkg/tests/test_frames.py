import math

import numpy as np
import pytest

from gbx.errors import ConfigError
from gbx.expr import ExprField
from gbx.frames import (
    BumpWeights,
    blend_vertical_form,
    circle_vertical_form,
    curvature_K,
    frame_connection,
    gram_schmidt_frame,
    projective_alpha,
    surface_frames,
)
from gbx.geom import (
    Chart,
    OwnRegion,
    conformal_chart,
    eval_metric,
    flat_torus,
    round_sphere,
)
from helpers import wavy_torus_chart


def sample_grid(chart, n=9, margin=0.3):
    umin, umax, vmin, vmax = chart.domain
    us = np.linspace(umin + margin, umax - margin, n)
    vs = np.linspace(vmin + margin, vmax - margin, n)
    uu, vv = np.meshgrid(us, vs, indexing="ij")
    return uu.ravel(), vv.ravel()


class TestGramSchmidt:
    def test_flat(self):
        fc = gram_schmidt_frame(flat_torus().charts[0])
        e1u, e1v, e2u, e2v = fc.frame_at(1.0, 2.0)
        assert (e1u, e1v, e2u, e2v) == pytest.approx((1, 0, 0, 1))

    def test_conformal(self):
        chart = round_sphere().charts[0]
        fc = gram_schmidt_frame(chart)
        e1u, _, e2u, e2v = fc.frame_at(0.0, 0.0)
        assert e1u == pytest.approx(0.5)  # 1/lambda with lambda = 2
        assert e2u == pytest.approx(0.0)
        assert e2v == pytest.approx(0.5)

    def test_sheared_metric(self):
        chart = Chart(
            "s", (-1, 1, -1, 1),
            ExprField("1"), ExprField("0.5"), ExprField("1"),
            OwnRegion.rectangle(-1, 1, -1, 1),
        )
        fc = gram_schmidt_frame(chart)
        e1u, e1v, e2u, e2v = fc.frame_at(0.2, -0.3)
        assert (e1u, e1v) == pytest.approx((1.0, 0.0))
        assert e2u == pytest.approx(-1 / math.sqrt(3))
        assert e2v == pytest.approx(2 / math.sqrt(3))

    def test_orthonormality_everywhere(self):
        for chart in (round_sphere().charts[0], wavy_torus_chart()):
            fc = gram_schmidt_frame(chart)
            us, vs = sample_grid(chart)
            e1u, e1v, e2u, e2v = fc.frame_at(us, vs)
            g11, g12, g22 = eval_metric(chart, us, vs)

            def dot(xu, xv, yu, yv):
                return g11 * xu * yu + g12 * (xu * yv + xv * yu) + g22 * xv * yv

            assert np.max(np.abs(dot(e1u, e1v, e1u, e1v) - 1)) < 1e-10
            assert np.max(np.abs(dot(e2u, e2v, e2u, e2v) - 1)) < 1e-10
            assert np.max(np.abs(dot(e1u, e1v, e2u, e2v))) < 1e-10
            # positive orientation
            assert np.all(e1u * e2v - e1v * e2u > 0)


class TestConnection:
    def test_flat_vanishes(self):
        fc = frame_connection(flat_torus().charts[0])
        assert fc.conn_u.eval(1.0, 2.0) == 0.0
        assert fc.conn_v.eval(1.0, 2.0) == 0.0

    def test_round_sphere_analytic_value(self):
        fc = frame_connection(round_sphere().charts[0])
        # at (1,0): d_u log lambda = -1, d_v log lambda = 0
        assert fc.analytic
        assert fc.conn_u.eval(1.0, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert fc.conn_v.eval(1.0, 0.0) == pytest.approx(-1.0)

    def test_fd_matches_analytic_on_sphere(self):
        chart = round_sphere().charts[0]
        fc_analytic = frame_connection(chart)
        stripped = Chart(
            "fd", chart.domain, chart.g11, chart.g12, chart.g22, chart.own_region
        )
        fc_fd = frame_connection(stripped)
        assert not fc_fd.analytic
        us, vs = sample_grid(chart, n=7)
        for a, b in ((fc_analytic.conn_u, fc_fd.conn_u), (fc_analytic.conn_v, fc_fd.conn_v)):
            assert np.max(np.abs(a.eval(us, vs) - b.eval(us, vs))) < 1e-8

    def test_wavy_torus_fd_matches_closed_form(self):
        chart = wavy_torus_chart()
        fc = frame_connection(chart)
        us, vs = sample_grid(chart, n=9)
        # G = -sin(u) dv for the metric du^2 + (2 + cos u)^2 dv^2
        assert np.max(np.abs(fc.conn_u.eval(us, vs))) < 1e-9
        assert np.max(np.abs(fc.conn_v.eval(us, vs) - (-np.sin(us)))) < 1e-8

    def test_constant_scaling_leaves_connection(self):
        base = conformal_chart(
            "s", (-3, 3, -3, 3), "2/(1+u^2+v^2)", OwnRegion.disk_region(0, 0, 1)
        )
        scaled = conformal_chart(
            "s2", (-3, 3, -3, 3), "7*(2/(1+u^2+v^2))", OwnRegion.disk_region(0, 0, 1)
        )
        fc1 = frame_connection(base)
        fc2 = frame_connection(scaled)
        us, vs = sample_grid(base)
        for a, b in ((fc1.conn_u, fc2.conn_u), (fc1.conn_v, fc2.conn_v)):
            assert np.max(np.abs(a.eval(us, vs) - b.eval(us, vs))) < 1e-12

    def test_requires_connection_before_curvature(self):
        fc = gram_schmidt_frame(flat_torus().charts[0])
        with pytest.raises(ConfigError):
            curvature_K(fc.chart, fc)


class TestCurvature:
    def test_flat_zero(self):
        fc = frame_connection(flat_torus().charts[0])
        assert fc.curvature.eval(1.0, 1.0) == 0.0

    def test_round_sphere_unit(self):
        fc = frame_connection(round_sphere().charts[0])
        us, vs = sample_grid(fc.chart)
        assert np.max(np.abs(fc.curvature.eval(us, vs) - 1.0)) < 1e-6

    def test_round_sphere_unit_fd_path(self):
        chart = round_sphere().charts[0]
        stripped = Chart(
            "fd", chart.domain, chart.g11, chart.g12, chart.g22, chart.own_region
        )
        fc = frame_connection(stripped)
        us, vs = sample_grid(chart, n=7)
        assert np.max(np.abs(fc.curvature.eval(us, vs) - 1.0)) < 1e-5

    def test_bumpy_matches_laplacian_oracle(self):
        """K = -Lap(log lambda)/lambda^2, with the Laplacian from an
        independent 5-point stencil."""
        from gbx.scenarios import BUMPY_LAMBDA_A

        chart = conformal_chart(
            "bumpy", (-3, 3, -3, 3), BUMPY_LAMBDA_A, OwnRegion.disk_region(0, 0, 1)
        )
        fc = frame_connection(chart)
        lam = chart.conformal_lambda
        us, vs = sample_grid(chart, n=7)
        h = 1e-4

        def log_lam(u, v):
            return np.log(lam.eval(u, v))

        lap = (
            log_lam(us + h, vs)
            + log_lam(us - h, vs)
            + log_lam(us, vs + h)
            + log_lam(us, vs - h)
            - 4 * log_lam(us, vs)
        ) / h**2
        oracle = -lap / lam.eval(us, vs) ** 2
        assert np.max(np.abs(fc.curvature.eval(us, vs) - oracle)) < 1e-4

    def test_structural_relation(self):
        """curl of the connection equals -K sqrt(g) (central differences)."""
        for chart in (round_sphere().charts[0], wavy_torus_chart()):
            fc = frame_connection(chart)
            us, vs = sample_grid(chart, n=7, margin=0.5)
            h = 1e-3
            curl = (
                fc.conn_v.eval(us + h, vs) - fc.conn_v.eval(us - h, vs)
            ) / (2 * h) - (
                fc.conn_u.eval(us, vs + h) - fc.conn_u.eval(us, vs - h)
            ) / (2 * h)
            g11, g12, g22 = eval_metric(chart, us, vs)
            expected = -fc.curvature.eval(us, vs) * np.sqrt(g11 * g22 - g12 * g12)
            assert np.max(np.abs(curl - expected)) < 1e-5


class TestVerticalForms:
    def test_circle_flat_is_scaled_fiber_form(self):
        frames = surface_frames(flat_torus())
        form = circle_vertical_form(frames)
        a_psi, a_u, a_v = form.at("t", 1.0, 2.0)
        assert float(a_psi) == pytest.approx(1 / (2 * math.pi))
        assert float(a_u) == 0.0
        assert float(a_v) == 0.0

    def test_circle_fiber_integral_is_one(self):
        frames = surface_frames(round_sphere())
        form = circle_vertical_form(frames)
        assert form.fiber_integral("a", 0.3, 0.2) == pytest.approx(1.0)

    def test_horizontal_annihilation(self):
        """alpha on the horizontal lift (1, 0, -G1) and (0, 1, -G2)
        vanishes identically: a_u = a_psi*G1, a_v = a_psi*G2."""
        frames = surface_frames(round_sphere())
        form = circle_vertical_form(frames)
        for cid, fc in frames.items():
            us, vs = sample_grid(fc.chart)
            a_psi, a_u, a_v = form.at(cid, us, vs)
            res_u = np.abs(a_u - a_psi * fc.conn_u.eval(us, vs))
            res_v = np.abs(a_v - a_psi * fc.conn_v.eval(us, vs))
            assert max(np.max(res_u), np.max(res_v)) < 1e-12

    def test_projective_fiber_integrals(self):
        frames = surface_frames(round_sphere())
        # default normalization 1/pi: integral 1/2
        form = projective_alpha(frames)
        assert form.fiber_period == pytest.approx(math.pi)
        assert form.fiber_integral("a", 0.1, 0.4) == pytest.approx(0.5)
        # unnormalized: the written form integrates to pi/2 over the fiber
        raw = projective_alpha(frames, normalization=1.0)
        assert raw.fiber_integral("a", 0.1, 0.4) == pytest.approx(math.pi / 2)

    def test_projective_coefficients_are_half_connection(self):
        frames = surface_frames(round_sphere())
        form = projective_alpha(frames)
        fc = frames["a"]
        us, vs = sample_grid(fc.chart, n=5)
        a_psi, a_u, a_v = form.at("a", us, vs)
        assert np.allclose(a_u, 0.5 * (1 / math.pi) * fc.conn_u.eval(us, vs))
        assert np.allclose(a_v, 0.5 * (1 / math.pi) * fc.conn_v.eval(us, vs))
        assert np.allclose(a_psi, 0.5 / math.pi)


class ConstantWeights:
    def __init__(self, w0):
        self.w0 = w0

    def weight(self, chart_index, us, vs):
        w = self.w0 if chart_index == 0 else 1.0 - self.w0
        return np.full(np.shape(np.asarray(us)), w)


class TestBlend:
    def test_single_chart_identity(self):
        surface = flat_torus()
        frames = surface_frames(surface)
        base = circle_vertical_form(frames)
        fiber_only = type(base)(
            {"t": (base.coeffs["t"][0], ExprField("0"), ExprField("0"))},
            base.fiber_period,
            base.normalization,
            "circle",
        )
        blended = blend_vertical_form(surface, {"t": fiber_only})
        a_psi, a_u, a_v = blended.at("t", 1.0, 1.0)
        assert float(a_psi) == pytest.approx(1 / (2 * math.pi))
        assert float(a_u) == 0.0

    def _sphere_fiber_forms(self):
        surface = round_sphere()
        frames = surface_frames(surface)
        base = circle_vertical_form(frames)
        forms = {}
        for cid in ("a", "b"):
            forms[cid] = type(base)(
                {cid: (base.coeffs[cid][0], ExprField("0"), ExprField("0"))},
                base.fiber_period,
                base.normalization,
                "circle",
            )
        return surface, forms

    def test_identical_forms_zero_rotation_blend_to_input(self):
        surface, forms = self._sphere_fiber_forms()
        blended = blend_vertical_form(
            surface, forms, rotation_gradient=lambda us, vs: (us * 0.0, vs * 0.0)
        )
        a_psi, a_u, a_v = blended.at("a", 0.9, 0.3)
        assert float(a_psi) == pytest.approx(1 / (2 * math.pi))
        assert float(a_u) == 0.0
        assert float(a_v) == 0.0

    def test_fiber_integral_everywhere_one(self):
        surface, forms = self._sphere_fiber_forms()
        blended = blend_vertical_form(surface, forms)
        rng = np.random.default_rng(5)
        for _ in range(100):
            cid = rng.choice(["a", "b"])
            r = rng.uniform(0.05, 1.4)
            t = rng.uniform(0, 2 * math.pi)
            val = blended.fiber_integral(cid, r * math.cos(t), r * math.sin(t))
            assert val == pytest.approx(1.0, abs=1e-8)

    def test_degenerate_weights_return_first_chart_form(self):
        surface, forms = self._sphere_fiber_forms()
        blended = blend_vertical_form(surface, forms, weights=ConstantWeights(1.0))
        us = np.array([0.5, 0.9, 1.3])
        vs = np.array([0.1, -0.4, 0.2])
        a_psi, a_u, a_v = blended.at("a", us, vs)
        assert np.allclose(a_psi, 1 / (2 * math.pi))
        assert np.all(a_u == 0.0)
        assert np.all(a_v == 0.0)

    def test_bad_weights_rejected(self):
        surface, forms = self._sphere_fiber_forms()

        class Bad:
            def weight(self, chart_index, us, vs):
                return np.full(np.shape(np.asarray(us)), 0.4)

        with pytest.raises(ConfigError):
            blend_vertical_form(surface, forms, weights=Bad())

    def test_bump_weights_partition(self):
        w = BumpWeights()
        rng = np.random.default_rng(1)
        r = rng.uniform(0.5, 2.0, 200)
        t = rng.uniform(0, 2 * math.pi, 200)
        us, vs = r * np.cos(t), r * np.sin(t)
        own = w.weight(0, us, vs)
        # other chart's coordinates: radius 1/r
        us2, vs2 = us / r**2, -vs / r**2
        other = w.weight(1, us2, vs2)
        assert np.max(np.abs(own + other - 1.0)) < 1e-12
