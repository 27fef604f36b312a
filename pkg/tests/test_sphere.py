import numpy as np
import pytest

from foldedmaps import sphere as S
from foldedmaps import _spectral as sp
from foldedmaps.errors import DomainError

RNG = np.random.default_rng(20240811)


def random_fold_point(rng=RNG):
    v = rng.normal(size=4)
    v = v / np.linalg.norm(v)
    return S.FoldPoint(complex(v[0], v[1]), complex(v[2], v[3]))


# ---------------------------------------------------------------------------
# charts


def test_embed_pole():
    p = S.embed_hemisphere(+1, np.array([0.0, 0.0]))
    assert np.allclose(p.x, [1, 0, 0, 0, 0])


def test_embed_equator_fixed():
    p = S.embed_hemisphere(+1, np.array([1.0, 0.0]))
    assert np.allclose(p.x, [0, 1, 0, 0, 0])
    for _ in range(10):
        y = RNG.normal(size=4)
        y = y / np.linalg.norm(y)
        yc = np.array([complex(y[0], y[1]), complex(y[2], y[3])])
        q = S.embed_hemisphere(-1, yc)
        assert abs(q.x0) < 1e-14
        assert np.allclose(q.equator_part(), yc)


def test_embed_explicit_value():
    # direct arithmetic from the rational formula at y = (0.6, 0)
    p = S.embed_hemisphere(-1, np.array([0.6, 0.0]))
    assert abs(p.x0 - (-(1 - 0.36) / (1 + 0.36))) < 1e-15
    assert abs(p.x[1] - 1.2 / 1.36) < 1e-15


def test_embed_domain_error():
    with pytest.raises(DomainError):
        S.embed_hemisphere(+1, np.array([1.2, 0.0]))


def _random_ball_point(scale=0.9):
    y = RNG.normal(size=4)
    y = y / np.linalg.norm(y) * RNG.uniform(0, scale)
    return np.array([complex(y[0], y[1]), complex(y[2], y[3])])


def test_embed_involution_equivariance():
    for _ in range(20):
        yc = _random_ball_point()
        a = S.involution(S.embed_hemisphere(+1, yc))
        b = S.embed_hemisphere(-1, yc)
        assert np.allclose(a.x, b.x, atol=1e-15)


def test_chart_roundtrip():
    for _ in range(20):
        yc = _random_ball_point()
        p = S.embed_hemisphere(+1, yc)
        assert np.allclose(S.chart_of_hemisphere(p, +1), yc, atol=1e-14)


def test_project_equator():
    assert np.allclose(S.project_equator(
        S.Point4Sphere(np.array([1.0, 0, 0, 0, 0]))), [0, 0])
    assert np.allclose(S.project_equator(
        S.Point4Sphere(np.array([0.0, 1, 0, 0, 0]))), [1, 0])
    y = np.array([0.3 + 0.1j, -0.2 + 0.4j])
    p = S.embed_hemisphere(+1, y)
    expected = 2 * y / (1 + np.real(np.vdot(y, y)))
    assert np.allclose(S.project_equator(p), expected, atol=1e-15)


# ---------------------------------------------------------------------------
# contact structure


def test_alpha_of_reeb_is_one():
    for _ in range(25):
        p = random_fold_point()
        assert abs(S.alpha_eval(S.reeb_vector(p)) - 1.0) < 1e-12


def test_alpha_vanishes_on_contact_plane():
    for _ in range(25):
        p = random_fold_point()
        fr = S.fold_frame(p)
        assert abs(S.alpha_eval(fr.f1)) < 1e-12
        assert abs(S.alpha_eval(fr.f2)) < 1e-12


def test_alpha_explicit():
    p = S.FoldPoint(1.0, 0.0)
    v = S.TangentAtFold(p, 2j * np.pi * np.array([1.0, 0.0]))
    assert abs(S.alpha_eval(v) - 1.0) < 1e-14


def test_reeb_matches_flow_derivative():
    h = 1e-6
    for _ in range(10):
        p = random_fold_point()
        num = (p.flow(h).as_c2() - p.flow(-h).as_c2()) / (2 * h)
        assert np.allclose(num, S.reeb_vector(p).vec, atol=1e-8)


def test_reeb_matches_flow_derivative_downstream():
    # flow to t = 0.25, then differentiate numerically there
    h = 1e-6
    for _ in range(10):
        p = random_fold_point()
        q = p.flow(0.25)
        num = (p.flow(0.25 + h).as_c2() - p.flow(0.25 - h).as_c2()) / (2 * h)
        assert np.allclose(num, S.reeb_vector(q).vec, atol=1e-8)


def test_fold_frame_orthonormal():
    for _ in range(25):
        p = random_fold_point()
        m = S.fold_frame(p).matrix()
        gram = np.real(m.conj().T @ m)
        assert np.allclose(gram, np.eye(4), atol=1e-12)


def test_frame_projections_complete():
    for _ in range(25):
        p = random_fold_point()
        v = RNG.normal(size=2) + 1j * RNG.normal(size=2)
        t = S.TangentAtFold(p, v, validate=False)
        k, l, chi = S.split_ekl_f(t)
        assert abs(k ** 2 + l ** 2 + abs(chi) ** 2
                   - np.linalg.norm(v) ** 2) < 1e-9


def test_pi_f_of_reeb_vanishes():
    for _ in range(10):
        p = random_fold_point()
        _, _, chi = S.split_ekl_f(S.reeb_vector(p))
        assert abs(chi) < 1e-12


def test_contact_plane_at_base_point():
    # at (1, 0) the contact plane is {(0, a)}
    fr = S.fold_frame(S.FoldPoint(1.0, 0.0))
    assert abs(fr.f1.vec[0]) < 1e-15
    assert abs(fr.f2.vec[0]) < 1e-15


# ---------------------------------------------------------------------------
# one-sided complex structures


def test_j_onesided_on_transverse_direction():
    for _ in range(10):
        p = random_fold_point()
        fr = S.fold_frame(p)
        r = S.reeb_vector(p)
        up = S.j_onesided(+1, fr.k)
        dn = S.j_onesided(-1, fr.k)
        assert np.allclose(up.vec, r.vec / (2 * np.pi), atol=1e-12)
        assert np.allclose(dn.vec, -r.vec / (2 * np.pi), atol=1e-12)


def test_j_onesided_agrees_on_contact_plane():
    for _ in range(10):
        p = random_fold_point()
        fr = S.fold_frame(p)
        for v in (fr.f1, fr.f2):
            up = S.j_onesided(+1, v)
            dn = S.j_onesided(-1, v)
            assert np.allclose(up.vec, 1j * v.vec, atol=1e-12)
            assert np.allclose(dn.vec, up.vec, atol=1e-12)


def test_j_onesided_squares_to_minus_one():
    for side in (+1, -1):
        for _ in range(10):
            p = random_fold_point()
            v = S.TangentAtFold(p, RNG.normal(size=2) + 1j * RNG.normal(size=2),
                                validate=False)
            jv = S.j_onesided(side, v)
            jjv = S.j_onesided(side, jv)
            assert np.allclose(jjv.vec, -v.vec, atol=1e-12)


# ---------------------------------------------------------------------------
# Hopf projection


def test_hopf_base_points():
    assert S.hopf_project(S.FoldPoint(1.0, 0.0)).distance(
        S.ProjectivePoint.of(np.array([1.0, 0.0]))) < 1e-14


def test_hopf_fiber_invariance():
    for _ in range(20):
        p = random_fold_point()
        t = RNG.uniform()
        assert S.hopf_project(p).distance(S.hopf_project(p.flow(t))) < 1e-12


def test_hopf_complex_linearity():
    # d(pi_V) restricted to F is complex linear: finite-difference check
    h = 1e-6
    worst = 0.0
    for _ in range(100):
        p = random_fold_point()
        fr = S.fold_frame(p)
        f = fr.f1.vec

        def curve(vec, t):
            q = p.as_c2() + t * vec
            return S.hopf_project(S.normalize_to_fold(q)).bloch()

        d_f = (curve(f, h) - curve(f, -h)) / (2 * h)
        d_if = (curve(1j * f, h) - curve(1j * f, -h)) / (2 * h)
        # complex linearity on the base sphere: d(if) = rotation of d(f)
        # by 90 degrees about the base point axis
        n = S.hopf_project(p).bloch()
        rotated = np.cross(n, d_f)
        worst = max(worst, float(np.linalg.norm(d_if - rotated)))
    assert worst < 1e-6


# ---------------------------------------------------------------------------
# folded form and energies


def test_det_omega_sign_and_equator():
    np_pole = S.Point4Sphere(np.array([1.0, 0, 0, 0, 0]))
    sp_pole = S.Point4Sphere(np.array([-1.0, 0, 0, 0, 0]))
    assert S.det_omega(np_pole) > 0
    assert S.det_omega(sp_pole) < 0
    assert abs(S.det_omega(np_pole) - 2 / np.pi ** 2) < 1e-12
    eq = S.FoldPoint(0.6, 0.8).as_point4()
    assert abs(S.det_omega(eq)) < 1e-12


def test_det_omega_transverse_vanishing():
    h = 1e-5
    for _ in range(10):
        p = random_fold_point()
        pc = p.as_c2()

        def at(x0):
            r = np.sqrt(1 - x0 ** 2)
            v = r * pc
            return S.det_omega(S.Point4Sphere(np.array(
                [x0, v[0].real, v[0].imag, v[1].real, v[1].imag])))

        slope = (at(h) - at(-h)) / (2 * h)
        assert abs(slope) > 0.1


def test_det_omega_sign_change_along_meridian():
    p = S.FoldPoint(0.36 + 0.48j, 0.8)
    pc = p.as_c2()
    x0s = np.linspace(-0.5, 0.5, 21)
    vals = []
    for x0 in x0s:
        v = np.sqrt(1 - x0 ** 2) * pc
        vals.append(S.det_omega(S.Point4Sphere(np.array(
            [x0, v[0].real, v[0].imag, v[1].real, v[1].imag]))))
    vals = np.array(vals)
    assert np.all(np.sign(vals[x0s > 0.01]) > 0)
    assert np.all(np.sign(vals[x0s < -0.01]) < 0)


def _disk_grid(fn, dfn, nr, m):
    r, w = S.gauss_legendre_radial(nr)
    th = sp.angles(m)
    z = r[:, None] * np.exp(1j * th[None, :])
    y = fn(z)
    dy = dfn(z) if dfn is not None else None
    return S.grid_from_chart(y, r, w, dy)


def test_energy_constant_map_zero():
    g = _disk_grid(lambda z: np.stack(
        [np.full_like(z, 0.3 + 0.1j), np.full_like(z, 0.2)], axis=2),
        None, 32, 64)
    assert abs(S.omega_energy(g)) < 1e-13


def test_energy_equator_disk():
    # oracle: two resolutions of independent midpoint quadrature, Richardson
    def brute(n):
        hr = 1.0 / n
        rr = (np.arange(n) + 0.5) * hr
        tt = (np.arange(2 * n) + 0.5) * (2 * np.pi / (2 * n))
        z = rr[:, None] * np.exp(1j * tt[None, :])
        y = np.stack([z, np.zeros_like(z)], axis=2)
        yv = S.equator_map(y)
        e = 1e-6
        dyr = (S.equator_map(np.stack([(rr[:, None] + e) * np.exp(1j * tt[None, :]),
                                       np.zeros_like(z)], axis=2)) -
               S.equator_map(np.stack([(rr[:, None] - e) * np.exp(1j * tt[None, :]),
                                       np.zeros_like(z)], axis=2))) / (2 * e)
        dyt = np.gradient(yv, tt, axis=1)
        dens = np.imag(np.sum(np.conj(dyr) * dyt, axis=2)) / np.pi
        return np.sum(dens) * hr * (2 * np.pi / (2 * n))

    e1, e2 = brute(40), brute(80)
    oracle = e2 + (e2 - e1) / 3.0
    assert abs(oracle - 1.0) < 1e-3  # independent oracle pins the value 1

    g = _disk_grid(lambda z: np.stack([z, np.zeros_like(z)], axis=2),
                   lambda z: np.stack([np.exp(1j * np.angle(z)),
                                       np.zeros_like(z)], axis=2), 64, 128)
    assert abs(S.omega_energy(g) - 1.0) < 1e-12


def test_energy_degenerate_grid_error():
    with pytest.raises(DomainError):
        S.PolarMapGrid(np.array([0.5]), np.array([1.0]),
                       np.zeros((1, 8, 2), dtype=complex))


def test_omega0_conventions():
    e1 = np.array([1.0, 0.0])
    assert abs(S.omega0(e1, 1j * e1) - 1.0) < 1e-15
    u = RNG.normal(size=2) + 1j * RNG.normal(size=2)
    v = RNG.normal(size=2) + 1j * RNG.normal(size=2)
    assert abs(S.omega0(u, v) + S.omega0(v, u)) < 1e-13


def test_characteristic_param():
    x = S.CharacteristicParam(np.exp(0.3j))
    p = x.point(0.2)
    assert abs(x.parameter_of(p) - 0.2) < 1e-12
    q = x.add(0.15, 0.25)
    assert abs(x.parameter_of(q) - 0.4) < 1e-12
