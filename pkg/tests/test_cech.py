import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gbx.cech import (
    LiftAssignment,
    Nerve,
    Z2Cochain,
    build_cocycle,
    check_cocycle,
    coboundary_of_edges,
    obstruction_class,
    octahedron_nerve,
    projective_plane_nerve,
    rotation,
    solve_coboundary,
    tetrahedron_nerve,
)
from gbx.errors import ConfigError

# Rotation lifts on the 6-vertex closed non-orientable nerve whose
# triangle product is -I on exactly one triangle; angles in units of
# pi/6, solved from the triangle sum conditions.
RP2_ANGLES_PI6 = {
    (1, 2): 2, (1, 3): -2, (1, 4): 1, (1, 5): -1, (1, 6): 0,
    (2, 3): 2, (2, 4): -1, (2, 5): 0, (2, 6): 1,
    (3, 4): 0, (3, 5): 1, (3, 6): -1,
    (4, 5): 1, (4, 6): -1,
    (5, 6): 1,
}


def identity_lifts(nerve):
    return LiftAssignment({e: np.eye(2) for e in nerve.edges})


def random_rotation_lifts(nerve, rng):
    """Vertex potentials plus random edge signs: always a valid
    assignment (every triangle product is +-I)."""
    phis = {v: rng.uniform(0, 2 * math.pi) for v in nerve.vertices}
    lifts = {}
    for (i, j) in nerve.edges:
        twist = math.pi if rng.random() < 0.5 else 0.0
        lifts[(i, j)] = rotation(phis[i] - phis[j] + twist)
    return LiftAssignment(lifts)


def brute_force_solve(nerve, z):
    """Exhaustive search over all edge assignments."""
    edges = nerve.edges
    for bits in itertools.product((0, 1), repeat=len(edges)):
        u = Z2Cochain(1, {e: b for e, b in zip(edges, bits) if b})
        if coboundary_of_edges(u, nerve).values == {
            t: 1 for t in z.support()
        }:
            return u
    return None


class TestNerve:
    def test_faces_must_close(self):
        with pytest.raises(ConfigError, match="missing edge"):
            Nerve([0, 1, 2], [(0, 1), (1, 2)], [(0, 1, 2)])

    def test_tetrahedra_need_faces(self):
        with pytest.raises(ConfigError, match="missing face"):
            Nerve(
                [0, 1, 2, 3],
                [(i, j) for i in range(4) for j in range(i + 1, 4)],
                [(0, 1, 2)],
                [(0, 1, 2, 3)],
            )

    def test_canonicalization(self):
        nerve = Nerve([0, 1, 2], [(1, 0), (2, 1), (2, 0)], [(2, 1, 0)])
        assert nerve.edges == [(0, 1), (0, 2), (1, 2)]
        assert nerve.triangles == [(0, 1, 2)]


class TestLiftAssignment:
    def test_det_must_be_one(self):
        with pytest.raises(ConfigError, match="det"):
            LiftAssignment({(0, 1): 2 * np.eye(2)})

    def test_negative_det_rejected(self):
        with pytest.raises(ConfigError, match="non-orientable"):
            LiftAssignment({(0, 1): np.diag([1.0, -1.0])})

    def test_reversed_edge_is_inverse(self):
        m = rotation(0.4)
        lifts = LiftAssignment({(0, 1): m})
        assert np.allclose(lifts.lift(1, 0) @ m, np.eye(2))

    def test_inverse_pair_convention_enforced(self):
        with pytest.raises(ConfigError, match="non-inverse"):
            LiftAssignment({(0, 1): rotation(0.3), (1, 0): rotation(0.3)})


class TestBuildCocycle:
    def test_identity_lifts_give_zero(self):
        nerve = tetrahedron_nerve()
        z = build_cocycle(nerve, identity_lifts(nerve))
        assert z.support() == []

    def test_rotation_triangle_minus_identity(self):
        nerve = Nerve([0, 1, 2], [(0, 1), (0, 2), (1, 2)], [(0, 1, 2)])
        t1, t2 = 0.7, -0.3
        lifts = LiftAssignment(
            {
                (0, 1): rotation(t1),
                (1, 2): rotation(t2),
                (2, 0): rotation(-t1 - t2 + math.pi),
            }
        )
        z = build_cocycle(nerve, lifts)
        assert z.value((0, 1, 2)) == 1

    def test_inconsistent_lifts_rejected(self):
        nerve = Nerve([0, 1, 2], [(0, 1), (0, 2), (1, 2)], [(0, 1, 2)])
        lifts = LiftAssignment(
            {(0, 1): rotation(0.3), (1, 2): rotation(0.1), (0, 2): np.eye(2)}
        )
        with pytest.raises(ConfigError, match="projective-consistent"):
            build_cocycle(nerve, lifts)


class TestCheckCocycle:
    def test_zero_cochain(self):
        nerve = tetrahedron_nerve()
        assert check_cocycle(Z2Cochain(2, {}), nerve)

    def test_single_one_fails_with_cell(self):
        nerve = tetrahedron_nerve()
        z = Z2Cochain(2, {(0, 1, 2): 1})
        assert not check_cocycle(z, nerve)

    def test_no_tetrahedra_vacuous(self):
        nerve = tetrahedron_nerve(with_cell=False)
        z = Z2Cochain(2, {(0, 1, 2): 1})
        assert check_cocycle(z, nerve)

    def test_randomized_lifts_always_cocycles(self):
        rng = np.random.default_rng(42)
        nerve = tetrahedron_nerve()
        for _ in range(100):
            lifts = random_rotation_lifts(nerve, rng)
            z = build_cocycle(nerve, lifts)
            assert check_cocycle(z, nerve)


class TestSolveCoboundary:
    def test_zero_cochain_solved(self):
        nerve = tetrahedron_nerve()
        u = solve_coboundary(Z2Cochain(2, {}), nerve)
        assert u is not None
        assert coboundary_of_edges(u, nerve).support() == []

    def test_two_triangle_support_solved_and_matches_brute_force(self):
        nerve = tetrahedron_nerve()
        z = Z2Cochain(2, {(0, 1, 2): 1, (0, 1, 3): 1})
        u = solve_coboundary(z, nerve)
        assert u is not None
        assert coboundary_of_edges(u, nerve).support() == z.support()
        assert brute_force_solve(nerve, z) is not None

    def test_single_support_unsolvable_without_cell(self):
        nerve = tetrahedron_nerve(with_cell=False)
        z = Z2Cochain(2, {(0, 1, 2): 1})
        assert solve_coboundary(z, nerve) is None
        assert brute_force_solve(nerve, z) is None

    def test_precondition_enforced(self):
        nerve = tetrahedron_nerve()
        with pytest.raises(ConfigError, match="cocycle"):
            solve_coboundary(Z2Cochain(2, {(0, 1, 2): 1}), nerve)

    @pytest.mark.parametrize(
        "nerve_build", [lambda: tetrahedron_nerve(False), octahedron_nerve]
    )
    def test_exhaustive_agreement(self, nerve_build):
        """Elimination agrees with 2^edges enumeration on every cocycle
        supported on these nerves (<= 12 edges)."""
        nerve = nerve_build()
        rng = np.random.default_rng(7)
        tris = nerve.triangles
        tried = 0
        for _ in range(40):
            bits = rng.integers(0, 2, len(tris))
            z = Z2Cochain(2, {t: 1 for t, b in zip(tris, bits) if b})
            if not check_cocycle(z, nerve):
                continue
            tried += 1
            ours = solve_coboundary(z, nerve)
            brute = brute_force_solve(nerve, z)
            assert (ours is None) == (brute is None)
            if ours is not None:
                assert coboundary_of_edges(ours, nerve).support() == z.support()
        assert tried >= 20

    @given(st.integers(0, 2**4 - 1))
    def test_solution_verified_when_found(self, mask):
        nerve = tetrahedron_nerve(with_cell=False)
        tris = nerve.triangles
        z = Z2Cochain(2, {t: 1 for i, t in enumerate(tris) if (mask >> i) & 1})
        u = solve_coboundary(z, nerve)
        if u is not None:
            assert coboundary_of_edges(u, nerve).support() == z.support()


class TestObstruction:
    def test_trivial_with_corrected_lifts(self):
        from gbx.config import ScenarioConfig
        from gbx.scenarios import tetra_obstruction

        cfg = ScenarioConfig(tetra_obstruction())
        z = build_cocycle(cfg.nerve, cfg.lifts)
        assert z.support() == [(0, 1, 2), (0, 1, 3)]
        out = obstruction_class(z, cfg.nerve, cfg.lifts)
        assert out["verdict"] == "trivial"
        assert out["corrected_max_residual"] < 1e-9

    def test_nontrivial_certificate(self):
        nerve = tetrahedron_nerve(with_cell=False)
        z = Z2Cochain(2, {(0, 1, 2): 1})
        out = obstruction_class(z, nerve)
        assert out["verdict"] == "nontrivial"
        xor = 0
        for t in out["certificate"]:
            xor ^= z.value(tuple(t))
        assert xor == 1

    def test_empty_nerve_trivial(self):
        nerve = Nerve([0, 1], [(0, 1)], [])
        out = obstruction_class(Z2Cochain(2, {}), nerve)
        assert out["verdict"] == "trivial"
        assert out["witness"] == {}

    def test_projective_plane_lifts_nontrivial(self):
        """Constant rotation lifts on the closed non-orientable nerve
        realize the nontrivial class."""
        nerve = projective_plane_nerve()
        lifts = LiftAssignment(
            {
                e: rotation(k * math.pi / 6.0)
                for e, k in RP2_ANGLES_PI6.items()
            }
        )
        z = build_cocycle(nerve, lifts)
        assert len(z.support()) == 1
        out = obstruction_class(z, nerve, lifts)
        assert out["verdict"] == "nontrivial"
        # the dependent set here is the full fundamental cycle
        assert len(out["certificate"]) == len(nerve.triangles)

    def test_gauge_covariance(self):
        """Flipping one lift's sign toggles z exactly on the triangles
        containing that edge and never changes the verdict."""
        rng = np.random.default_rng(3)
        nerve = tetrahedron_nerve()
        lifts = random_rotation_lifts(nerve, rng)
        z = build_cocycle(nerve, lifts)
        verdict = obstruction_class(z, nerve)["verdict"]
        for edge in nerve.edges:
            flipped = lifts.flipped(edge)
            z2 = build_cocycle(nerve, flipped)
            expected_toggle = {
                t for t in nerve.triangles if edge[0] in t and edge[1] in t
            }
            toggled = set(z.support()) ^ set(z2.support())
            assert toggled == expected_toggle
            assert obstruction_class(z2, nerve)["verdict"] == verdict


class TestNormalization:
    def test_permutation_invariance_and_repeats(self):
        z = Z2Cochain(2, {(0, 1, 2): 1})
        for perm in itertools.permutations((0, 1, 2)):
            assert z.value(perm) == 1
        assert z.value((0, 0, 1)) == 0
        assert z.value((0, 1, 3)) == 0
