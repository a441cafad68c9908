"""Tests for the group element module."""

import math

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from pathlib import Path
import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from lib.errors import GroupKindMismatch, GroupMembershipError, IdentityInput
from lib.linalg_groups import (
    SU2,
    AxisAngle,
    Rot3,
    Rot4,
    U2Mat,
    axis_angle_of,
    b_theta,
    c_theta,
    common_kind,
    conj_su2,
    exp_so3,
    gens_from_json,
    gens_to_json,
    lift_so3_pair,
    long_product,
    matrix_from_json,
    matrix_power,
    matrix_to_json,
    phi_cover,
    rotation_angle,
    so4_to_so3_pair,
    su2_lift,
    v_phi_gamma,
)


def random_rot3(rng):
    return Rot3(Rotation.random(random_state=rng).as_matrix())


def random_su2(rng):
    b = rng.normal(size=4)
    b /= np.linalg.norm(b)
    return SU2(complex(b[0], b[1]), complex(b[2], b[3]))


class TestElementTypes:
    """Construction and validation of group elements."""

    def test_rot3_rejects_non_orthogonal(self):
        with pytest.raises(GroupMembershipError):
            Rot3(np.diag([1.0, 1.0, 1.01]))

    def test_rot3_rejects_reflection(self):
        with pytest.raises(GroupMembershipError, match='determinant'):
            Rot3(np.diag([1.0, 1.0, -1.0]))

    def test_rot3_rejects_wrong_shape(self):
        with pytest.raises(GroupMembershipError):
            Rot3(np.eye(4))

    def test_rot3_matrix_is_read_only(self):
        r = c_theta(0.3)
        with pytest.raises(ValueError):
            r.m[0, 0] = 2.0

    def test_rot4_identity_and_inverse(self):
        a = lift_so3_pair(c_theta(0.4), c_theta(1.1))
        assert np.allclose((a @ a.inverse()).m, Rot4.identity().m)

    def test_su2_needs_unit_coordinates(self):
        with pytest.raises(GroupMembershipError):
            SU2(1.0, 0.5)

    def test_su2_from_matrix_round_trip(self):
        rng = np.random.default_rng(1)
        u = random_su2(rng)
        v = SU2.from_matrix(u.m)
        assert np.allclose(u.b, v.b)

    def test_su2_from_matrix_rejects_u2(self):
        m = np.exp(0.5j) * b_theta(0.3).m
        with pytest.raises(GroupMembershipError):
            SU2.from_matrix(m)

    def test_u2_rejects_non_unitary(self):
        with pytest.raises(GroupMembershipError):
            U2Mat(np.array([[1.0, 1.0], [0.0, 1.0]]))

    def test_common_kind_mismatch(self):
        with pytest.raises(GroupKindMismatch):
            common_kind([Rot3.identity(), SU2.identity()])

    def test_common_kind_empty(self):
        with pytest.raises(ValueError):
            common_kind([])


class TestRotations:
    """Rotation constructors, exponential and axis-angle recovery."""

    def test_c_theta_fixes_first_axis(self):
        r = c_theta(1.234)
        assert np.allclose(r.apply([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0])
        assert np.allclose(r.apply([0.0, 1.0, 0.0]), [0.0, math.cos(1.234), math.sin(1.234)])

    def test_c_theta_zero_is_identity(self):
        assert np.array_equal(c_theta(0.0).m, np.eye(3))

    def test_exp_so3_matches_c_theta(self):
        for theta in (0.1, 1.0, 2.5, math.pi, 4.0):
            assert np.allclose(exp_so3([theta, 0.0, 0.0]).m, c_theta(theta).m, atol=1e-14)

    def test_exp_so3_small_angle(self):
        r = exp_so3([1e-10, 0.0, 0.0])
        assert np.allclose(r.m, np.eye(3), atol=1e-9)

    def test_v_phi_gamma_moves_e1_by_phi(self):
        for phi, gamma in ((math.pi / 2, 0.0), (0.3, 1.1), (1.0, -2.0)):
            column = v_phi_gamma(phi, gamma).m[:, 0]
            assert column[0] == pytest.approx(math.cos(phi), abs=1e-14)
            assert np.allclose(column[1:], [math.sin(phi) * math.cos(gamma),
                                            math.sin(phi) * math.sin(gamma)])

    def test_axis_angle_round_trip(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            r = random_rot3(rng)
            aa = axis_angle_of(r)
            assert 0.0 <= aa.theta < 2.0 * math.pi
            assert np.max(np.abs(aa.to_rot3().m - r.m)) < 1e-10

    def test_axis_is_canonically_oriented(self):
        aa = axis_angle_of(exp_so3([-0.5, 0.2, 0.0]))
        assert aa.axis[0] > 0

    def test_half_turn_axis(self):
        aa = axis_angle_of(c_theta(math.pi))
        assert np.allclose(aa.axis, [1.0, 0.0, 0.0])
        assert aa.theta == pytest.approx(math.pi, abs=1e-12)

    def test_identity_has_no_axis(self):
        with pytest.raises(IdentityInput):
            axis_angle_of(Rot3.identity())

    def test_axis_angle_rejects_non_unit_axis(self):
        with pytest.raises(GroupMembershipError):
            AxisAngle(np.array([2.0, 0.0, 0.0]), 1.0)

    def test_rotation_angle_range(self):
        assert rotation_angle(c_theta(0.7).m) == pytest.approx(0.7)
        assert rotation_angle(c_theta(2 * math.pi - 0.7).m) == pytest.approx(0.7)


class TestProducts:
    """Long products and powers."""

    def test_matrix_power_negative_uses_adjoint(self):
        r = c_theta(0.3).m
        assert np.allclose(matrix_power(r, -3), c_theta(-0.9).m)

    def test_matrix_power_zero(self):
        assert np.array_equal(matrix_power(c_theta(0.3).m, 0), np.eye(3))

    def test_long_product_stays_orthogonal(self):
        r = c_theta(1.0 / 3.0).m
        product = long_product([r] * 1000)
        assert np.max(np.abs(product.T @ product - np.eye(3))) < 1e-12
        assert np.allclose(product, c_theta(1000.0 / 3.0).m, atol=1e-10)

    def test_long_product_needs_factors(self):
        with pytest.raises(ValueError):
            long_product([])


class TestDoubleCover:
    """The covering SU(2) -> SO(3) and its lift."""

    def test_homomorphism(self):
        rng = np.random.default_rng(11)
        for _ in range(1000):
            u, v = random_su2(rng), random_su2(rng)
            lhs = phi_cover(u @ v).m
            rhs = phi_cover(u).m @ phi_cover(v).m
            assert np.linalg.norm(lhs - rhs) < 1e-10

    def test_kernel_is_plus_minus_identity(self):
        rng = np.random.default_rng(12)
        u = random_su2(rng)
        assert np.array_equal(phi_cover(-u).m, phi_cover(u).m)
        assert np.allclose(phi_cover(-SU2.identity()).m, np.eye(3))

    def test_b_theta_covers_c_theta(self):
        for theta in np.linspace(-7.0, 7.0, 100):
            assert np.max(np.abs(phi_cover(b_theta(theta)).m - c_theta(theta).m)) < 1e-12

    def test_b_theta_fourth_power(self):
        assert np.allclose(np.linalg.matrix_power(b_theta(math.pi).m, 4), np.eye(2))
        assert np.allclose(np.linalg.matrix_power(b_theta(math.pi / 2).m, 4), -np.eye(2))

    def test_lift_inverts_cover(self):
        rng = np.random.default_rng(13)
        for _ in range(200):
            r = random_rot3(rng)
            u = su2_lift(r)
            assert u.b[0] >= 0.0
            assert np.max(np.abs(phi_cover(u).m - r.m)) < 1e-10

    def test_lift_of_identity(self):
        assert su2_lift(Rot3.identity()).b == (1.0, 0.0, 0.0, 0.0)

    def test_conjugation_covers_rotation_conjugation(self):
        v = v_phi_gamma(0.8, 0.3)
        u = su2_lift(v)
        image = phi_cover(conj_su2(u, b_theta(1.1))).m
        assert np.allclose(image, v.m @ c_theta(1.1).m @ v.m.T, atol=1e-12)


class TestSO4Split:
    """The bivector split SO(4) -> SO(3) x SO(3)."""

    def test_split_is_homomorphism(self):
        rng = np.random.default_rng(21)
        for _ in range(500):
            a = lift_so3_pair(random_rot3(rng), random_rot3(rng))
            b = lift_so3_pair(random_rot3(rng), random_rot3(rng))
            ab_plus, ab_minus = so4_to_so3_pair(a @ b)
            a_plus, a_minus = so4_to_so3_pair(a)
            b_plus, b_minus = so4_to_so3_pair(b)
            assert np.max(np.abs(ab_plus.m - a_plus.m @ b_plus.m)) < 1e-11
            assert np.max(np.abs(ab_minus.m - a_minus.m @ b_minus.m)) < 1e-11

    def test_lift_round_trip(self):
        rng = np.random.default_rng(22)
        for _ in range(200):
            cp, cm = random_rot3(rng), random_rot3(rng)
            plus, minus = so4_to_so3_pair(lift_so3_pair(cp, cm))
            assert np.max(np.abs(plus.m - cp.m)) < 1e-10
            assert np.max(np.abs(minus.m - cm.m)) < 1e-10

    def test_lift_prefers_nonnegative_trace(self):
        a = lift_so3_pair(c_theta(2.9), c_theta(-2.5))
        assert np.trace(a.m) >= 0.0

    def test_block_rotation_acts_on_both_sides(self):
        # rotating the (e1, e2) plane by t turns both Omega_2/Omega_3 planes by t
        t = 0.6
        a = np.eye(4)
        a[:2, :2] = [[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]]
        plus, minus = so4_to_so3_pair(Rot4(a))
        assert plus.m[0, 0] == pytest.approx(1.0)
        assert minus.m[0, 0] == pytest.approx(1.0)
        assert rotation_angle(plus.m) == pytest.approx(t)
        assert rotation_angle(minus.m) == pytest.approx(t)


class TestJsonEncoding:
    """Generator file encoding."""

    def test_complex_entries_are_pairs(self):
        rows = matrix_to_json(b_theta(0.5).m)
        assert len(rows[0][0]) == 2
        assert np.allclose(matrix_from_json(rows), b_theta(0.5).m)

    def test_generators_payload(self):
        gens = [c_theta(0.1), c_theta(0.2)]
        payload = gens_to_json(gens)
        assert payload['kind'] == 'so3'
        restored = gens_from_json(payload)
        assert np.allclose(restored[1].m, gens[1].m)

    def test_generators_payload_rejects_bad_kind(self):
        with pytest.raises(ValueError):
            gens_from_json({'kind': 'gl3', 'matrices': [np.eye(3).tolist()]})

    def test_generators_payload_checks_membership(self):
        with pytest.raises(GroupMembershipError):
            gens_from_json({'kind': 'so3', 'matrices': [[[2, 0, 0], [0, 1, 0], [0, 0, 1]]]})

    def test_generators_payload_snaps_within_tolerance(self):
        rounded = np.round(c_theta(0.3).m, 9).tolist()
        with pytest.raises(GroupMembershipError):
            gens_from_json({'kind': 'so3', 'matrices': [rounded]})
        (g,) = gens_from_json({'kind': 'so3', 'matrices': [rounded]}, tol=1e-8)
        assert np.max(np.abs(g.m.T @ g.m - np.eye(3))) < 1e-14
        assert np.allclose(g.m, c_theta(0.3).m, atol=1e-9)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
