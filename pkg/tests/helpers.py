"""Shared test constructions."""

import math
from math import comb

import numpy as np

from gbx.expr import ExprField
from gbx.geom import Chart, OwnRegion, flat_chart
from gbx.sections import SectionSpec, SingularPoint


def power_field_exprs(n: int):
    """Components of w^n (conjugated for negative n) as polynomial
    expression strings; angle n*phi around the origin."""
    if n == 0:
        return "1", "0"
    m = abs(n)
    re_terms, im_terms = [], []
    for k in range(m + 1):
        part = f"{comb(m, k)}*u^{m - k}*v^{k}"
        if k % 4 == 0:
            re_terms.append("+" + part)
        elif k % 4 == 1:
            im_terms.append("+" + part)
        elif k % 4 == 2:
            re_terms.append("-" + part)
        else:
            im_terms.append("-" + part)
    re = "".join(re_terms).lstrip("+") or "0"
    im = "".join(im_terms).lstrip("+") or "0"
    if n < 0:
        im = f"-({im})"
    return re, im


def power_section(n: int, chart_id="c", radius=0.1) -> SectionSpec:
    re, im = power_field_exprs(n)
    return SectionSpec(
        "vector-field",
        {chart_id: (ExprField(re), ExprField(im))},
        [SingularPoint(chart_id, 0.0, 0.0, radius, 1)],
    )


def wavy_torus_chart() -> Chart:
    """Surface-of-revolution metric du^2 + (2 + cos u)^2 dv^2 on the
    periodic square; K sqrt(g) = cos(u), so the total curvature is 0."""
    two_pi = 2 * math.pi
    return Chart(
        id="t",
        domain=(0.0, two_pi, 0.0, two_pi),
        g11=ExprField("1"),
        g12=ExprField("0"),
        g22=ExprField("(2 + cos(u))^2"),
        own_region=OwnRegion.rectangle(0.0, two_pi, 0.0, two_pi),
        periodic=True,
    )


def bare_flat_chart(extent=2.0) -> Chart:
    return flat_chart("c", (-extent, extent, -extent, extent))


def shoelace_area(us, vs) -> float:
    return 0.5 * float(np.sum(us * np.roll(vs, -1) - np.roll(us, -1) * vs))
