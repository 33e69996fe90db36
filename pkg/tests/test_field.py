"""Field quantities against brute-force numpy and finite-difference oracles."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gvf3d.field import (FieldParams, SingularFieldError, chi_jacobian,
                         classify, jacobian_planar_field, q_matrix,
                         sample_field)
from gvf3d.paths import builtin_helix


def brute_force_reference(path, params, xi):
    """Independent numpy route to e, N, tau, chi, V, Q."""
    f1 = path.phi1.evaluate(xi)
    f2 = path.phi2.evaluate(xi)
    e = np.array([f1.value, f2.value])
    big_n = np.column_stack([f1.gradient, f2.gradient])
    k = params.K
    tau = np.cross(f1.gradient, f2.gradient)
    chi = tau - big_n @ k @ e
    v = 0.5 * e @ k @ e
    q = k @ big_n.T @ big_n @ k
    return e, big_n, tau, chi, v, q


class TestSampleField:
    def test_on_path_helix_equals_tangent(self, helix_path, helix_params):
        s = sample_field(helix_path, helix_params, (1.0, 0.0, 0.0))
        assert np.array_equal(s.e, [0.0, 0.0])
        assert np.allclose(s.chi, s.tau, atol=0.0)
        assert np.allclose(s.tau, [0.0, 1.0, 1.0], atol=1e-15)
        assert s.V == 0.0

    def test_off_path_helix_hand_value(self, helix_path, helix_params):
        # Hand evaluation: e = (1, 0), n1 = (1,0,0), n2 = (0,1,-1),
        # tau = (0,1,1), chi = tau - 1*1*n1 = (-1, 1, 1).
        s = sample_field(helix_path, helix_params, (2.0, 0.0, 0.0))
        assert np.array_equal(s.e, [1.0, 0.0])
        assert np.allclose(s.N[:, 0], [1.0, 0.0, 0.0], atol=0.0)
        assert np.allclose(s.N[:, 1], [0.0, 1.0, -1.0], atol=0.0)
        assert np.allclose(s.chi, [-1.0, 1.0, 1.0], atol=0.0)

    def test_matches_brute_force_oracle(self, cylinder_path, cylinder_params,
                                        rng):
        for xi in rng.uniform(-3.0, 3.0, size=(200, 3)):
            s = sample_field(cylinder_path, cylinder_params, xi)
            e, big_n, tau, chi, v, q = brute_force_reference(
                cylinder_path, cylinder_params, xi)
            assert np.allclose(s.e, e, rtol=1e-14, atol=0.0)
            assert np.allclose(s.N, big_n, rtol=1e-14, atol=0.0)
            assert np.allclose(s.tau, tau, rtol=1e-13, atol=1e-13)
            assert np.allclose(s.chi, chi, rtol=1e-12, atol=1e-12)
            assert np.isclose(s.V, v, rtol=1e-13)
            assert np.allclose(s.Q, q, rtol=1e-12, atol=1e-12)

    def test_chi_is_tau_minus_nke(self, cylinder_path, cylinder_params, rng):
        for xi in rng.uniform(-3.0, 3.0, size=(100, 3)):
            s = sample_field(cylinder_path, cylinder_params, xi)
            assert np.allclose(s.chi, s.tau - s.nke, rtol=1e-12, atol=1e-12)

    def test_lyapunov_nonnegative_zero_iff_on_path(self, cylinder_path,
                                                   cylinder_params, rng):
        for xi in rng.uniform(-3.0, 3.0, size=(100, 3)):
            s = sample_field(cylinder_path, cylinder_params, xi)
            assert s.V >= 0.0
            assert (s.V == 0.0) == (s.e_norm == 0.0)

    def test_chi_hat_unit_norm(self, helix_path, helix_params, rng):
        for xi in rng.uniform(-3.0, 3.0, size=(100, 3)):
            s = sample_field(helix_path, helix_params, xi)
            assert s.chi_hat is not None
            assert abs(np.linalg.norm(s.chi_hat) - 1.0) < 1e-12

    def test_chi_hat_undefined_at_singular_point(self, cylinder_path,
                                                 cylinder_params):
        # (0, sqrt(R^2 - b^2), b) is a singular point of scenario 1.
        xi = (0.0, math.sqrt(4.0 - 2.25), 1.5)
        s = sample_field(cylinder_path, cylinder_params, xi)
        assert s.chi_norm <= s.eps_singular
        assert s.chi_hat is None

    def test_lyapunov_derivative_identity(self, cylinder_path,
                                          cylinder_params, helix_path,
                                          helix_params, rng):
        # grad(V) . chi = -|NKe|^2 since tau is orthogonal to both gradients.
        for path, params in ((cylinder_path, cylinder_params),
                             (helix_path, helix_params)):
            for xi in rng.uniform(-3.0, 3.0, size=(500, 3)):
                s = sample_field(path, params, xi)
                grad_v_dot_chi = float(s.nke @ s.chi)
                assert abs(grad_v_dot_chi + s.nke_norm**2) < 1e-9

    def test_tau_orthogonal_to_gradients(self, cylinder_path,
                                         cylinder_params, rng):
        for xi in rng.uniform(-3.0, 3.0, size=(200, 3)):
            s = sample_field(cylinder_path, cylinder_params, xi)
            n1, n2 = s.N[:, 0], s.N[:, 1]
            scale1 = 1.0 + s.tau_norm * np.linalg.norm(n1)
            scale2 = 1.0 + s.tau_norm * np.linalg.norm(n2)
            assert abs(float(s.tau @ n1)) < 1e-12 * scale1
            assert abs(float(s.tau @ n2)) < 1e-12 * scale2


class TestQMatrix:
    def test_helix_det_is_two(self, helix_path, helix_params, rng):
        # |tau| = sqrt(2) everywhere on the helix and k1 = k2 = 1.
        for xi in rng.uniform(-4.0, 4.0, size=(50, 3)):
            s = sample_field(helix_path, helix_params, xi)
            q, _ = q_matrix(s)
            assert np.isclose(np.linalg.det(q), 2.0, rtol=1e-12)

    def test_det_identity_both_scenarios(self, cylinder_path,
                                         cylinder_params, helix_path,
                                         helix_params, rng):
        for path, params in ((cylinder_path, cylinder_params),
                             (helix_path, helix_params)):
            for xi in rng.uniform(-3.0, 3.0, size=(300, 3)):
                s = sample_field(path, params, xi)
                det = float(np.linalg.det(s.Q))
                expected = (params.k1 * params.k2 * s.tau_norm) ** 2
                assert det == pytest.approx(expected, rel=1e-9, abs=1e-12)

    def test_eigenvalues_ascending_and_trace(self, cylinder_path,
                                             cylinder_params, rng):
        k1, k2 = cylinder_params.k1, cylinder_params.k2
        for xi in rng.uniform(-3.0, 3.0, size=(100, 3)):
            s = sample_field(cylinder_path, cylinder_params, xi)
            q, (lo, hi) = q_matrix(s)
            assert lo <= hi
            assert lo >= -1e-12
            n1, n2 = s.N[:, 0], s.N[:, 1]
            trace = k1**2 * float(n1 @ n1) + k2**2 * float(n2 @ n2)
            assert lo + hi == pytest.approx(trace, rel=1e-12)
            # Cross-check the closed form against numpy's eigensolver.
            ev = np.linalg.eigvalsh(q)
            assert np.allclose([lo, hi], ev, rtol=1e-9, atol=1e-9)

    def test_definition_vs_det_identity_cylinder(self, cylinder_path):
        params = FieldParams(2.0, 2.0)
        s = sample_field(cylinder_path, params, (1.0, 0.0, 1.5))
        q, _ = q_matrix(s)
        brute = params.K @ s.N.T @ s.N @ params.K
        assert np.allclose(q, brute, rtol=1e-13, atol=0.0)
        assert np.isclose(np.linalg.det(q),
                          (params.k1 * params.k2 * s.tau_norm) ** 2,
                          rtol=1e-9)

    def test_degenerate_gradients_give_zero_matrix(self):
        # phi1 = phi2 = constant surfaces: N = 0 identically.
        from gvf3d.paths import path_from_expressions
        path = path_from_expressions("1.0 - 1.0", "2.0 - 2.0")
        s = sample_field(path, FieldParams(1.0, 1.0), (0.3, 0.4, 0.5))
        q, (lo, hi) = q_matrix(s)
        assert np.array_equal(q, np.zeros((2, 2)))
        assert lo == hi == 0.0


class TestClassify:
    def test_helix_never_singular(self, helix_path, helix_params, rng):
        for xi in rng.uniform(-4.0, 4.0, size=(100, 3)):
            s = sample_field(helix_path, helix_params, xi)
            m = classify(s)
            assert not m.in_C
            assert s.tau_norm == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_on_path_in_invariant_set(self, cylinder_path, cylinder_params):
        for u in np.linspace(0.0, 1.0, 37, endpoint=False):
            xi = cylinder_path.parametrization(float(u))
            s = sample_field(cylinder_path, cylinder_params, xi)
            assert classify(s).in_M

    def test_degenerate_line_point_in_c_prime(self, cylinder_path,
                                              cylinder_params):
        # On the line {(a, y, b)} but off M: gradients linearly dependent.
        s = sample_field(cylinder_path, cylinder_params, (0.0, 0.5, 1.5))
        m = classify(s)
        assert m.in_C_prime
        assert not m.in_M
        assert not m.in_C

    def test_c_and_c_prime_disjoint(self, cylinder_path, cylinder_params,
                                    rng):
        pts = list(rng.uniform(-3.0, 3.0, size=(200, 3)))
        pts.append(np.array([0.0, math.sqrt(1.75), 1.5]))  # singular point
        pts.append(np.array([0.0, 0.5, 1.5]))              # C' point
        for xi in pts:
            m = classify(sample_field(cylinder_path, cylinder_params, xi))
            assert not (m.in_C and m.in_C_prime)
            if m.in_C:
                assert m.in_M

    def test_tolerances_recorded_and_validated(self, helix_path,
                                               helix_params):
        s = sample_field(helix_path, helix_params, (2.0, 0.0, 0.0))
        m = classify(s, eps_m=1e-6, eps_rank=1e-7)
        assert (m.eps_m, m.eps_rank) == (1e-6, 1e-7)
        with pytest.raises(ValueError):
            classify(s, eps_m=0.0)

    def test_near_boundary_flag(self, helix_path, helix_params):
        # |NKe| scales with the offset along n1 here, so eps_m can be set
        # on either side of it to probe the flag.
        s = sample_field(helix_path, helix_params, (1.0 + 1e-7, 0.0, 0.0))
        nke = s.nke_norm
        just_above = classify(s, eps_m=nke / 2.0)   # off M, within 10x
        assert not just_above.in_M and just_above.near_boundary
        just_below = classify(s, eps_m=nke * 2.0)   # in M, within 10x
        assert just_below.in_M and just_below.near_boundary
        far = classify(s, eps_m=nke * 100.0)
        assert far.in_M and not far.near_boundary
        exact = sample_field(helix_path, helix_params, (1.0, 0.0, 0.0))
        assert not classify(exact).near_boundary


class TestJacobians:
    def fd_planar_jacobian(self, path, params, xi, h=1e-6):
        xi = np.asarray(xi, dtype=float)

        def planar(p):
            s = sample_field(path, params, p)
            return np.array([s.chi_hat[0], s.chi_hat[1]])

        cols = []
        for axis in range(3):
            step = np.zeros(3)
            step[axis] = h
            cols.append((planar(xi + step) - planar(xi - step)) / (2.0 * h))
        return np.column_stack(cols)

    def test_matches_finite_differences_helix(self, helix_path, helix_params,
                                              rng):
        count = 0
        while count < 100:
            xi = rng.uniform(-3.0, 3.0, size=3)
            s = sample_field(helix_path, helix_params, xi)
            if s.chi_hat is None:
                continue
            count += 1
            jac = jacobian_planar_field(helix_path, helix_params, xi)
            fd = self.fd_planar_jacobian(helix_path, helix_params, xi)
            assert np.allclose(jac, fd, atol=1e-5, rtol=0.0)

    def test_matches_finite_differences_cylinder(self, cylinder_path,
                                                 cylinder_params, rng):
        count = 0
        while count < 50:
            xi = rng.uniform(-3.0, 3.0, size=3)
            s = sample_field(cylinder_path, cylinder_params, xi)
            if s.chi_hat is None or s.chi_norm < 1e-3 \
                    or math.hypot(s.chi[0], s.chi[1]) < 1e-2:
                continue
            count += 1
            jac = jacobian_planar_field(cylinder_path, cylinder_params, xi)
            fd = self.fd_planar_jacobian(cylinder_path, cylinder_params, xi)
            scale = max(1.0, float(np.abs(jac).max()))
            assert np.allclose(jac, fd, atol=1e-5 * scale, rtol=0.0)

    def test_translation_invariant_line_field(self, straight_line_path):
        params = FieldParams(1.0, 1.0)
        jac = jacobian_planar_field(straight_line_path, params,
                                    (0.0, 0.0, 0.0))
        assert np.allclose(jac[:, 0], 0.0, atol=0.0)

    def test_scenario1_start_is_finite(self, cylinder_path, cylinder_params):
        jac = jacobian_planar_field(cylinder_path, cylinder_params,
                                    (1.8, 1.0, 2.0))
        assert np.all(np.isfinite(jac))
        fd = self.fd_planar_jacobian(cylinder_path, cylinder_params,
                                     (1.8, 1.0, 2.0))
        assert np.allclose(jac, fd, atol=1e-5, rtol=0.0)

    def test_raises_at_singular_point(self, cylinder_path, cylinder_params):
        xi = (0.0, math.sqrt(1.75), 1.5)
        with pytest.raises(SingularFieldError):
            jacobian_planar_field(cylinder_path, cylinder_params, xi)

    def test_raw_jacobian_matches_finite_differences(self, cylinder_path,
                                                     cylinder_params, rng):
        h = 1e-6
        for xi in rng.uniform(-3.0, 3.0, size=(50, 3)):
            jac = chi_jacobian(cylinder_path, cylinder_params, xi)
            fd_cols = []
            for axis in range(3):
                step = np.zeros(3)
                step[axis] = h
                chi_hi = sample_field(cylinder_path, cylinder_params,
                                      xi + step).chi
                chi_lo = sample_field(cylinder_path, cylinder_params,
                                      xi - step).chi
                fd_cols.append((chi_hi - chi_lo) / (2.0 * h))
            fd = np.column_stack(fd_cols)
            scale = max(1.0, float(np.abs(jac).max()))
            assert np.allclose(jac, fd, atol=2e-5 * scale, rtol=0.0)


class TestOnPathTangency:
    def test_cylinder(self, cylinder_path, cylinder_params):
        for u in np.linspace(0.0, 1.0, 64, endpoint=False):
            xi = cylinder_path.parametrization(float(u))
            s = sample_field(cylinder_path, cylinder_params, xi)
            scale = 1.0 + s.tau_norm
            assert np.allclose(s.chi, s.tau, atol=1e-12 * scale * 20)

    def test_helix(self, helix_path, helix_params):
        for t in np.linspace(-6.0, 6.0, 64):
            xi = helix_path.parametrization(float(t))
            s = sample_field(helix_path, helix_params, xi)
            assert np.allclose(s.chi, s.tau, atol=1e-12)


def test_field_sample_json_record(helix_path, helix_params):
    import json
    s = sample_field(helix_path, helix_params, (2.0, 0.0, 0.0))
    record = s.to_json_dict()
    text = json.dumps(record)
    back = json.loads(text)
    assert back["e"] == [1.0, 0.0]
    assert back["chi"] == [-1.0, 1.0, 1.0]
    assert abs(np.linalg.norm(back["chi_hat"]) - 1.0) < 1e-12
    assert back["norms"]["tau"] == pytest.approx(math.sqrt(2.0))


def test_field_sample_json_record_at_singular_point(cylinder_path,
                                                    cylinder_params):
    import json
    s = sample_field(cylinder_path, cylinder_params,
                     (0.0, math.sqrt(1.75), 1.5))
    back = json.loads(json.dumps(s.to_json_dict(), allow_nan=False))
    assert back["chi_hat"] is None


def test_concurrent_sampling_matches_sequential(cylinder_path,
                                                cylinder_params, rng):
    # Field evaluation is stateless: many threads, same answers.
    from concurrent.futures import ThreadPoolExecutor
    points = [tuple(p) for p in rng.uniform(-3.0, 3.0, size=(256, 3))]
    sequential = [sample_field(cylinder_path, cylinder_params, p).chi
                  for p in points]
    with ThreadPoolExecutor(max_workers=8) as pool:
        threaded = list(pool.map(
            lambda p: sample_field(cylinder_path, cylinder_params, p).chi,
            points))
    for a, b in zip(sequential, threaded):
        assert np.array_equal(a, b)


@settings(max_examples=80, deadline=None)
@given(
    k1=st.floats(min_value=0.1, max_value=10.0),
    k2=st.floats(min_value=0.1, max_value=10.0),
    x=st.floats(min_value=-3.0, max_value=3.0),
    y=st.floats(min_value=-3.0, max_value=3.0),
    z=st.floats(min_value=-3.0, max_value=3.0),
)
def test_field_identities_property(k1, k2, x, y, z):
    path = builtin_helix()
    params = FieldParams(k1, k2)
    s = sample_field(path, params, (x, y, z))
    # Orthogonal split of chi: |chi|^2 = |tau|^2 + |NKe|^2.
    assert s.chi_norm**2 == pytest.approx(s.tau_norm**2 + s.nke_norm**2,
                                          rel=1e-9, abs=1e-9)
    # det identity, relative.
    det = float(np.linalg.det(s.Q))
    assert det == pytest.approx((k1 * k2 * s.tau_norm) ** 2, rel=1e-9,
                                abs=1e-12)
