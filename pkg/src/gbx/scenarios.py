"""Bundled demo scenarios as plain config dictionaries.

Everything here round-trips through the same JSON schema the CLI
accepts, so the demos double as format documentation.
"""

from __future__ import annotations

import math

ROUND_LAMBDA = "2/(1 + u^2 + v^2)"

# Smooth odd perturbation of the conformal factor: the same expression
# with the opposite sign is its own transport through the inversion, so
# the two charts agree to roundoff.
_BUMP = "(3*u^2*v - v^3)/(1 + u^2 + v^2)^3"
BUMPY_LAMBDA_A = f"({ROUND_LAMBDA}) * exp(2.0*{_BUMP})"
BUMPY_LAMBDA_B = f"({ROUND_LAMBDA}) * exp(-2.0*{_BUMP})"

# Line field with four half-index zeros: the direction of the complex
# square root of P(w) = (w^2 - 1/4)(w^2 - 4), identical in both charts.
_RE_P = "(u^2 - v^2 - 0.25)*(u^2 - v^2 - 4) - 4*u^2*v^2"
_IM_P = "2*u*v*(2*(u^2 - v^2) - 4.25)"
_MAG = f"(({_RE_P})^2 + ({_IM_P})^2)^0.25"
_ANG = f"atan2({_IM_P}, {_RE_P})/2"
LINEFIELD_C1 = f"({_MAG}) * cos({_ANG})"
LINEFIELD_C2 = f"({_MAG}) * sin({_ANG})"


def _sphere_surface(lambda_a=ROUND_LAMBDA, lambda_b=ROUND_LAMBDA, extent=3.0):
    return {
        "gluing": "sphere-stereographic-pair",
        "euler_char": 2,
        "charts": [
            {
                "id": "a",
                "domain": [-extent, extent, -extent, extent],
                "metric": {"conformal_lambda": lambda_a},
                "own_region": {"disk": [0.0, 0.0, 1.0]},
            },
            {
                "id": "b",
                "domain": [-extent, extent, -extent, extent],
                "metric": {"conformal_lambda": lambda_b},
                "own_region": {"disk": [0.0, 0.0, 1.0]},
            },
        ],
    }


def _torus_surface(lambda_expr="1"):
    return {
        "gluing": "torus-periodic",
        "euler_char": 0,
        "charts": [
            {
                "id": "t",
                "domain": [0.0, 2 * math.pi, 0.0, 2 * math.pi],
                "metric": {"conformal_lambda": lambda_expr},
                "own_region": {
                    "rect": [0.0, 2 * math.pi, 0.0, 2 * math.pi]
                },
            }
        ],
    }


# Rotation field about the poles: zeros at both chart origins, index +1.
ROTATION_SECTION = {
    "kind": "vector-field",
    "components": {"a": ["-v", "u"], "b": ["v", "-u"]},
    "singular_points": [
        {"chart": "a", "u": 0.0, "v": 0.0, "radius": 0.1},
        {"chart": "b", "u": 0.0, "v": 0.0, "radius": 0.1},
    ],
}

# Rotation about an equatorial axis: zeros at (+-1, 0), the same sphere
# points and the same expressions in both charts.
EQUATOR_SECTION = {
    "kind": "vector-field",
    "components": {
        "a": ["u*v", "(1 - u^2 + v^2)/2"],
        "b": ["u*v", "(1 - u^2 + v^2)/2"],
    },
    "singular_points": [
        {"chart": "a", "u": 1.0, "v": 0.0, "radius": 0.1},
        {"chart": "a", "u": -1.0, "v": 0.0, "radius": 0.1},
    ],
}


def sphere_hopf():
    return {
        "name": "sphere-hopf",
        "surface": _sphere_surface(),
        "section": dict(ROTATION_SECTION),
        "run": {
            "identity": "hopf",
            "resolution": 256,
            "loop_samples": 512,
            "tolerance": 1e-3,
        },
    }


def torus_flat():
    return {
        "name": "torus-flat",
        "surface": _torus_surface(),
        "section": {
            "kind": "vector-field",
            "components": {"t": ["1", "0"]},
            "singular_points": [],
        },
        "run": {
            "identity": "hopf",
            "resolution": 128,
            "loop_samples": 512,
            "tolerance": 1e-9,
        },
    }


def bumpy_sphere():
    return {
        "name": "bumpy-sphere",
        "surface": _sphere_surface(BUMPY_LAMBDA_A, BUMPY_LAMBDA_B),
        "section": dict(ROTATION_SECTION),
        "run": {
            "identity": "hopf",
            "resolution": 256,
            "loop_samples": 512,
            "tolerance": 1e-3,
        },
    }


def sphere_linefield():
    return {
        "name": "sphere-linefield",
        "surface": _sphere_surface(),
        "section": {
            "kind": "line-field",
            "components": {
                "a": [LINEFIELD_C1, LINEFIELD_C2],
                "b": [LINEFIELD_C1, LINEFIELD_C2],
            },
            "singular_points": [
                {"chart": "a", "u": 0.5, "v": 0.0, "radius": 0.1},
                {"chart": "a", "u": -0.5, "v": 0.0, "radius": 0.1},
                {"chart": "a", "u": 2.0, "v": 0.0, "radius": 0.1},
                {"chart": "a", "u": -2.0, "v": 0.0, "radius": 0.1},
            ],
        },
        "run": {
            "identity": "projective",
            "resolution": 256,
            "loop_samples": 512,
            "tolerance": 1e-3,
        },
    }


def whitney_pair():
    return {
        "name": "whitney-pair",
        "surface": _sphere_surface(),
        "factors": [
            {
                "metric": {"a": ROUND_LAMBDA, "b": ROUND_LAMBDA},
                "section": dict(ROTATION_SECTION),
            },
            {
                "metric": {"a": BUMPY_LAMBDA_A, "b": BUMPY_LAMBDA_B},
                "section": dict(EQUATOR_SECTION),
            },
        ],
        "run": {
            "identity": "whitney",
            "resolution": 256,
            "loop_samples": 512,
            "tolerance": 2e-3,
        },
    }


def whitney_coincident():
    """Two factors singular at the same pole with different indices:
    the rotation field (index 1) and the second-order zero that a
    constant field on the opposite chart acquires there (index 2)."""
    return {
        "name": "whitney-coincident",
        "surface": _sphere_surface(),
        "factors": [
            {
                "metric": {"a": ROUND_LAMBDA, "b": ROUND_LAMBDA},
                "section": dict(ROTATION_SECTION),
            },
            {
                "metric": {"a": ROUND_LAMBDA, "b": ROUND_LAMBDA},
                "section": {
                    "kind": "vector-field",
                    "components": {"a": ["v^2 - u^2", "-2*u*v"], "b": ["1", "0"]},
                    "singular_points": [
                        {"chart": "a", "u": 0.0, "v": 0.0, "radius": 0.1}
                    ],
                },
            },
        ],
        "run": {
            "identity": "whitney",
            "resolution": 256,
            "loop_samples": 512,
            "tolerance": 2e-3,
        },
    }


def tetra_obstruction():
    """Rotation lifts on the solid-tetrahedron nerve whose triangle
    products are -I on the two triangles containing edge (0,1); the
    class is a coboundary and the verdict carries corrected lifts.

    Angles come from a vertex potential (phi_i - phi_j), which always
    closes up to +I, plus a pi twist on edge (0,1)."""
    from .cech import rotation

    def mat(m):
        return [[float(m[0, 0]), float(m[0, 1])], [float(m[1, 0]), float(m[1, 1])]]

    phi = {0: 0.0, 1: 0.4, 2: -0.1, 3: 0.25}
    lifts = {}
    for i in range(4):
        for j in range(i + 1, 4):
            theta = phi[i] - phi[j] + (math.pi if (i, j) == (0, 1) else 0.0)
            lifts[(i, j)] = mat(rotation(theta))
    return {
        "name": "tetra-obstruction",
        "cech": {
            "vertices": [0, 1, 2, 3],
            "edges": [
                {"i": i, "j": j, "matrix": m} for (i, j), m in lifts.items()
            ],
            "triangles": [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]],
            "tetrahedra": [[0, 1, 2, 3]],
        },
    }


DEMOS = {
    "sphere-hopf": sphere_hopf,
    "torus-flat": torus_flat,
    "bumpy-sphere": bumpy_sphere,
    "sphere-linefield": sphere_linefield,
    "whitney-pair": whitney_pair,
    "tetra-obstruction": tetra_obstruction,
}
