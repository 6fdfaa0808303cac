"""Orthonormal frames, the metric connection form, and vertical 1-forms.

Conventions, fixed once and used everywhere:

* e1 = du-direction / |du|, e2 its positively oriented orthonormal
  completion.
* The connection coefficients (conn_u, conn_v) are the components of
  the 1-form G with nabla e1 = G e2 and nabla e2 = -G e1. For a
  conformal metric lambda^2 (du^2+dv^2) this gives
  G = -d_v(log lambda) du + d_u(log lambda) dv.
* Parallel transport of the frame angle psi along a curve satisfies
  d psi = -G(velocity), and consequently

      d_u G2 - d_v G1 = -K sqrt(det g)

  with K the Gauss curvature (+1 on the unit round sphere). The
  vertical form built below therefore obeys d(alpha) =
  -normalization * K sqrt(g) du^dv, the sign reports also state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .expr import ExprField, FuncField, differentiate, simplify
from .geom import SPHERE, Chart, ChartedSurface, eval_metric

H_CONNECTION = 1e-5  # finite-difference step for first metric derivatives
H_CURVATURE = 1e-4  # step for differentiating the connection coefficients


@dataclass
class FrameConnection:
    """Per-chart frame, connection coefficients, and curvature."""

    chart: Chart
    e1: tuple  # component fields (e1_u, e1_v)
    e2: tuple
    conn_u: object = None  # G1
    conn_v: object = None  # G2
    curvature: object = None  # K
    analytic: bool = False
    stencil_shrunk: bool = False  # a difference stencil hit the chart edge

    def frame_at(self, u, v):
        return (
            np.asarray(self.e1[0].eval(u, v)),
            np.asarray(self.e1[1].eval(u, v)),
            np.asarray(self.e2[0].eval(u, v)),
            np.asarray(self.e2[1].eval(u, v)),
        )


def _frame_component_funcs(chart: Chart):
    """Algebraic Gram-Schmidt frame components as callables of (us, vs)."""

    def abc(us, vs):
        g11, g12, g22 = eval_metric(chart, us, vs)
        det = g11 * g22 - g12 * g12
        a = 1.0 / np.sqrt(g11)
        c = np.sqrt(g11 / det)
        b = -g12 * c / g11
        return a, b, c

    return abc


def gram_schmidt_frame(chart: Chart) -> FrameConnection:
    """Orthonormal positively oriented frame with e1 along du."""
    abc = _frame_component_funcs(chart)
    e1u = FuncField(lambda us, vs: abc(us, vs)[0])
    zero = ExprField("0")
    e2u = FuncField(lambda us, vs: abc(us, vs)[1])
    e2v = FuncField(lambda us, vs: abc(us, vs)[2])
    return FrameConnection(chart=chart, e1=(e1u, zero), e2=(e2u, e2v))


def _shrunken_steps(chart: Chart, us, vs, h, fc: FrameConnection | None = None):
    """Per-point steps that keep central stencils inside the domain.

    Shrinking is flagged on the owning FrameConnection so reports can
    note that boundary accuracy degraded."""
    if chart.periodic:
        return np.full_like(us, h), np.full_like(vs, h)
    umin, umax, vmin, vmax = chart.domain
    hu = np.minimum(h, np.minimum(us - umin, umax - us))
    hv = np.minimum(h, np.minimum(vs - vmin, vmax - vs))
    if fc is not None and (np.any(hu < h) or np.any(hv < h)):
        fc.stencil_shrunk = True
    return np.maximum(hu, h * 1e-3), np.maximum(hv, h * 1e-3)


def _fd_connection_funcs(chart: Chart, h: float, fc: FrameConnection):
    """Connection coefficients via the bracket of the frame fields.

    With e1 = (a, 0) and e2 = (b, c), the Lie bracket is
    L = (a b_u - b a_u - c a_v, a c_u) and G(e_i) = -<L, e_i>.
    """
    abc = _frame_component_funcs(chart)

    def conn(us, vs):
        us = np.atleast_1d(np.asarray(us, dtype=np.float64))
        vs = np.atleast_1d(np.asarray(vs, dtype=np.float64))
        hu, hv = _shrunken_steps(chart, us, vs, h, fc)
        a0, b0, c0 = abc(us, vs)
        aup, bup, cup = abc(us + hu, vs)
        aum, bum, cum = abc(us - hu, vs)
        avp, bvp, cvp = abc(us, vs + hv)
        avm, bvm, cvm = abc(us, vs - hv)
        da_du = (aup - aum) / (2 * hu)
        da_dv = (avp - avm) / (2 * hv)
        db_du = (bup - bum) / (2 * hu)
        dc_du = (cup - cum) / (2 * hu)
        l1 = a0 * db_du - b0 * da_du - c0 * da_dv
        l2 = a0 * dc_du
        g11, g12, g22 = eval_metric(chart, us, vs)
        gl1 = g11 * l1 + g12 * l2
        gl2 = g12 * l1 + g22 * l2
        g_e1 = -(a0 * gl1)
        g_e2 = -(b0 * gl1 + c0 * gl2)
        conn_u = g_e1 / a0
        conn_v = (-b0 / (a0 * c0)) * g_e1 + g_e2 / c0
        return conn_u, conn_v

    return conn


def levi_civita_G(chart: Chart, frame: FrameConnection) -> FrameConnection:
    """Fill in the connection coefficients of the metric connection.

    Conformal expression metrics take the exact symbolic path; anything
    else is differenced centrally with step H_CONNECTION (shrunk near
    non-periodic domain edges).
    """
    lam = chart.conformal_lambda
    if lam is not None and isinstance(lam, ExprField):
        log_lam = ("call", "log", [lam.ast])
        g1 = ExprField(simplify(("neg", differentiate(log_lam, "v"))))
        g2 = ExprField(differentiate(log_lam, "u"))
        frame.conn_u = g1
        frame.conn_v = g2
        frame.analytic = True
        return frame
    conn = _fd_connection_funcs(chart, H_CONNECTION, frame)
    frame.conn_u = FuncField(lambda us, vs: conn(us, vs)[0])
    frame.conn_v = FuncField(lambda us, vs: conn(us, vs)[1])
    frame.analytic = False
    return frame


def curvature_K(chart: Chart, conn: FrameConnection):
    """Gauss curvature field. K = -(d_u G2 - d_v G1)/sqrt(det g).

    Exact for conformal expression metrics (K = -Lap(log lambda)/lambda^2),
    central differences of step H_CURVATURE otherwise.
    """
    if conn.conn_u is None or conn.conn_v is None:
        raise ConfigError("connection coefficients missing; run levi_civita_G first")
    lam = chart.conformal_lambda
    if conn.analytic and isinstance(lam, ExprField):
        log_lam = ("call", "log", [lam.ast])
        lap = simplify(
            (
                "add",
                differentiate(differentiate(log_lam, "u"), "u"),
                differentiate(differentiate(log_lam, "v"), "v"),
            )
        )
        k_ast = simplify(
            ("neg", ("div", lap, ("pow", lam.ast, ("num", 2.0))))
        )
        field = ExprField(k_ast)
        conn.curvature = field
        return field

    g1, g2 = conn.conn_u, conn.conn_v
    h = H_CURVATURE

    def k_vals(us, vs):
        us = np.atleast_1d(np.asarray(us, dtype=np.float64))
        vs = np.atleast_1d(np.asarray(vs, dtype=np.float64))
        hu, hv = _shrunken_steps(chart, us, vs, h, conn)
        d_g2_du = (g2.eval(us + hu, vs) - g2.eval(us - hu, vs)) / (2 * hu)
        d_g1_dv = (g1.eval(us, vs + hv) - g1.eval(us, vs - hv)) / (2 * hv)
        g11, g12, g22 = eval_metric(chart, us, vs)
        sqrt_g = np.sqrt(g11 * g22 - g12 * g12)
        return -(d_g2_du - d_g1_dv) / sqrt_g

    field = FuncField(k_vals)
    conn.curvature = field
    return field


def frame_connection(chart: Chart) -> FrameConnection:
    """Frame + connection + curvature in one call."""
    fc = gram_schmidt_frame(chart)
    fc = levi_civita_G(chart, fc)
    curvature_K(chart, fc)
    return fc


def surface_frames(surface: ChartedSurface) -> dict:
    """FrameConnection per chart id."""
    return {chart.id: frame_connection(chart) for chart in surface.charts}


# ---------------------------------------------------------------------------
# Vertical 1-forms
# ---------------------------------------------------------------------------


@dataclass
class VerticalForm:
    """1-form A_psi dpsi + A_u du + A_v dv per chart on the trivialized
    bundle piece, where psi is the fiber angle with the given period."""

    coeffs: dict  # chart_id -> (a_psi: Field, a_u: Field, a_v: Field)
    fiber_period: float
    normalization: float
    kind: str  # "circle" | "projective" | "blend"

    def at(self, chart_id, u, v):
        a_psi, a_u, a_v = self.coeffs[chart_id]
        return (
            np.asarray(a_psi.eval(u, v)),
            np.asarray(a_u.eval(u, v)),
            np.asarray(a_v.eval(u, v)),
        )

    def fiber_integral(self, chart_id, u, v, n=256):
        """Quadrature of the fiber restriction at a base point."""
        a_psi, _, _ = self.coeffs[chart_id]
        val = float(np.asarray(a_psi.eval(u, v)).ravel()[0])
        return val * self.fiber_period


def circle_vertical_form(
    frames: dict, normalization: float = 1.0 / (2.0 * math.pi)
) -> VerticalForm:
    """Connection form of the circle bundle scaled so the fiber integral
    is normalization * 2pi (1 with the default)."""
    coeffs = {}
    for cid, fc in frames.items():
        g1, g2 = fc.conn_u, fc.conn_v
        coeffs[cid] = (
            ExprField(("num", normalization)),
            FuncField(lambda us, vs, g=g1: normalization * g.eval(us, vs)),
            FuncField(lambda us, vs, g=g2: normalization * g.eval(us, vs)),
        )
    return VerticalForm(coeffs, 2.0 * math.pi, normalization, "circle")


def projective_alpha(frames: dict, normalization: float = 1.0 / math.pi) -> VerticalForm:
    """Line-bundle analogue: fiber angle runs mod pi and every
    coefficient carries the extra factor 1/2, so the normalized fiber
    integral is normalization * pi / 2 (1/2 with the default)."""
    coeffs = {}
    half = 0.5 * normalization
    for cid, fc in frames.items():
        g1, g2 = fc.conn_u, fc.conn_v
        coeffs[cid] = (
            ExprField(("num", half)),
            FuncField(lambda us, vs, g=g1: half * g.eval(us, vs)),
            FuncField(lambda us, vs, g=g2: half * g.eval(us, vs)),
        )
    return VerticalForm(coeffs, math.pi, normalization, "projective")


class BumpWeights:
    """Sine-taper partition of unity over the sphere overlap annulus.

    `weight(i, us, vs)` is chart i's weight at the point with chart-i
    coordinates (us, vs). The profile is the same radial taper for both
    charts; because it is antisymmetric in log-radius and the transition
    inverts the radius, the two weights sum to 1 at every point.
    """

    def __init__(self, r_in: float = 0.8, r_out: float = 1.25):
        if not 0 < r_in < 1 < r_out or abs(r_in * r_out - 1.0) > 1e-12:
            raise ConfigError("taper radii must satisfy r_in * r_out = 1")
        self.r_in = r_in
        self.r_out = r_out
        self._s = math.log(r_out)

    def weight(self, chart_index: int, us, vs):
        rho = np.sqrt(np.asarray(us) ** 2 + np.asarray(vs) ** 2)
        s = np.log(np.maximum(rho, 1e-300))
        return 0.5 * (1.0 - np.sin(np.clip(s / self._s, -1.0, 1.0) * math.pi / 2.0))


def sphere_fiber_rotation_gradient(us, vs):
    """Gradient of the fiber-angle offset between the two sphere charts.

    A section with frame angle psi in one chart has angle
    psi - 2*atan2(v,u) - pi in the other; the offset tau obeys
    d tau = (2v du - 2u dv)/rho^2 in either chart's own coordinates
    (the transition is an involution, so the formula is symmetric).
    """
    rho2 = np.asarray(us) ** 2 + np.asarray(vs) ** 2
    return 2.0 * np.asarray(vs) / rho2, -2.0 * np.asarray(us) / rho2


def _zero_rotation_gradient(us, vs):
    z = np.zeros_like(np.asarray(us, dtype=np.float64))
    return z, z


def blend_vertical_form(
    surface: ChartedSurface,
    fiber_forms: dict,
    weights=None,
    rotation_gradient="auto",
    check_tol: float = 1e-10,
) -> VerticalForm:
    """Partition-of-unity blend of per-chart fiber forms.

    Each chart contributes its fiber representative weighted by a bump;
    written in a chart's own fiber coordinate the result picks up the
    other chart's weight times the fiber-rotation gradient. The fiber
    period is preserved and the fiber integral is independent of the
    base point by construction.
    """
    cids = [c.id for c in surface.charts]
    periods = {fiber_forms[c].fiber_period for c in cids}
    if len(periods) != 1:
        raise ConfigError("cannot blend forms with different fiber periods")
    period = periods.pop()

    if len(cids) == 1:
        form = fiber_forms[cids[0]]
        return VerticalForm(dict(form.coeffs), period, form.normalization, "blend")

    if weights is None:
        weights = BumpWeights()
    if rotation_gradient == "auto":
        rotation_gradient = (
            sphere_fiber_rotation_gradient
            if surface.gluing == SPHERE
            else _zero_rotation_gradient
        )

    # Sum-to-one check on overlap samples, crossing the transition so the
    # two weights are compared at the same surface point.
    from .geom import transition_map

    ts = np.linspace(0, 2 * math.pi, 16, endpoint=False)
    for r in (0.85, 1.0, 1.2):
        us0, vs0 = r * np.cos(ts), r * np.sin(ts)
        if surface.gluing == SPHERE:
            us1, vs1, _ = transition_map(SPHERE, cids[0], us0, vs0)
        else:
            us1, vs1 = us0, vs0
        w = weights.weight(0, us0, vs0) + weights.weight(1, us1, vs1)
        if np.max(np.abs(w - 1.0)) > check_tol:
            raise ConfigError("bump weights do not sum to 1 on the overlap")

    coeffs = {}
    for idx, cid in enumerate(cids):
        other_cid = cids[1 - idx]
        a_psi_own = fiber_forms[cid].coeffs[cid][0]
        a_psi_other = fiber_forms[other_cid].coeffs[other_cid][0]

        def a_psi(us, vs, i=idx, f=a_psi_own, g=a_psi_other):
            w_own = weights.weight(i, us, vs)
            return w_own * f.eval(us, vs) + (1.0 - w_own) * g.eval(us, vs)

        def a_u(us, vs, i=idx, g=a_psi_other):
            w_other = 1.0 - weights.weight(i, us, vs)
            gu, _ = rotation_gradient(us, vs)
            return g.eval(us, vs) * w_other * gu

        def a_v(us, vs, i=idx, g=a_psi_other):
            w_other = 1.0 - weights.weight(i, us, vs)
            _, gv = rotation_gradient(us, vs)
            return g.eval(us, vs) * w_other * gv

        coeffs[cid] = (FuncField(a_psi), FuncField(a_u), FuncField(a_v))
    norm = fiber_forms[cids[0]].normalization
    return VerticalForm(coeffs, period, norm, "blend")
