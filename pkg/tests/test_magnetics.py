import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from micropump import kernels, magnetics
from micropump.errors import ConvergenceError, GeometryError, SingularPointError
from micropump.model import MU0, CoilSpec, MagnetSpec, magnetization, um

R1 = 1e-3  # reference loop radius


def biot_savart_quadrature(R, r, z, n=1 << 15):
    """(B_r, B_z) of a unit-current loop by summing dl x r over the angle."""
    phi = 2 * np.pi * (np.arange(n) + 0.5) / n
    c, s = np.cos(phi), np.sin(phi)
    dlx, dly = -s, c  # per unit R dphi
    rx, ry, rz = r - R * c, -R * s, z
    d3 = (rx**2 + ry**2 + rz**2) ** 1.5
    k = MU0 / (4 * np.pi) * R * 2 * np.pi / n
    return k * np.sum(dly * rz / d3), k * np.sum((dlx * ry - dly * rx) / d3)


# -- loop discretization ----------------------------------------------------


def test_paper_coil_loop_radii(coil):
    loops = magnetics.spiral_to_loops(coil, 1.0)
    expected = [1250 + 12.5 + 45 * n for n in range(10)]
    np.testing.assert_allclose(loops.radii * 1e6, expected, rtol=1e-12)
    assert loops.radii[0] * 1e6 == pytest.approx(1262.5) and loops.radii[-1] * 1e6 == pytest.approx(1667.5)


def test_single_turn_study_loop():
    loops = magnetics.spiral_to_loops(CoilSpec(1, um(400), um(25), um(20)), 1.0)
    assert loops.radii.tolist() == pytest.approx([um(412.5)])


@pytest.mark.parametrize("f", [2, 3])
def test_fidelity_conserves_current(coil, f):
    loops = magnetics.spiral_to_loops(coil, 0.7, fidelity=f)
    assert len(loops) == coil.turns * f * f
    assert loops.filament_currents.sum() == pytest.approx(0.7 * coil.turns, rel=1e-14)
    assert loops.radii.min() > coil.inner_radius
    assert np.all(np.abs(loops.zs) < coil.conductor_thickness / 2)


def test_fidelity_changes_force_little(coil, magnet):
    f1 = magnetics.force_point(magnetics.spiral_to_loops(coil, 1.0, 1), magnet, um(620))
    f3 = magnetics.force_point(magnetics.spiral_to_loops(coil, 1.0, 3), magnet, um(620))
    assert f3 == pytest.approx(f1, rel=1e-3)


# -- on-axis closed forms ---------------------------------------------------


def test_onaxis_values():
    assert magnetics.loop_bz_onaxis(R1, 1.0, 0.0) == pytest.approx(6.2832e-4, rel=1e-4)
    assert magnetics.loop_bz_onaxis(R1, 1.0, R1) == pytest.approx(2.2214e-4, rel=1e-4)
    assert magnetics.loop_bz_onaxis(R1, 1.0, R1) == pytest.approx(MU0 / (2 * R1) / 2**1.5, rel=1e-14)


def test_onaxis_far_field_decays_as_cube():
    z = np.array([1e3, 2e3]) * R1
    b = magnetics.loop_bz_onaxis(R1, 1.0, z)
    assert b[0] / b[1] == pytest.approx(8.0, rel=1e-5)


def test_onaxis_matches_quadrature():
    _, bz = biot_savart_quadrature(R1, 0.0, R1)
    assert magnetics.loop_bz_onaxis(R1, 1.0, R1) == pytest.approx(bz, rel=1e-12)


# -- off-axis field ----------------------------------------------------------


def test_offaxis_reference_point_matches_quadrature():
    br, bz = magnetics.loop_field_offaxis(R1, 1.0, 0.5e-3, 0.5e-3)
    qr, qz = biot_savart_quadrature(R1, 0.5e-3, 0.5e-3)
    assert br == pytest.approx(qr, rel=1e-8)
    assert bz == pytest.approx(qz, rel=1e-8)
    kr, kz = kernels.loop_field_quadrature(R1, 1.0, 0.5e-3, 0.5e-3)
    assert kz == pytest.approx(qz, rel=1e-12) and kr == pytest.approx(qr, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(1e-5, 1e-1), st.floats(-10.0, 10.0))
def test_axis_reduction(R, zr):
    z = zr * R
    br, bz = magnetics.loop_field_offaxis(R, 1.0, 0.0, z)
    assert br == 0.0
    assert bz == pytest.approx(magnetics.loop_bz_onaxis(R, 1.0, z), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(0.01, 3.0))
def test_mirror_symmetry(rr, zr):
    if math.hypot(rr - 1.0, zr) < 1e-3:
        return
    up = magnetics.loop_field_offaxis(R1, 1.0, rr * R1, zr * R1)
    down = magnetics.loop_field_offaxis(R1, 1.0, rr * R1, -zr * R1)
    assert down[1] == pytest.approx(up[1], rel=1e-13, abs=1e-30)
    assert down[0] == pytest.approx(-up[0], rel=1e-13, abs=1e-30)


@pytest.mark.parametrize("zr", [-2.0, 0.01, 0.3, 3.0])
def test_near_axis_branches_join(zr):
    # the axis series and the elliptic form meet without a visible step
    z = zr * R1
    beta = math.hypot(R1, z)
    rc = kernels._BR_SERIES_RATIO * beta
    r = np.array([rc * (1 - 1e-9), rc * (1 + 1e-9)])
    br = magnetics.coil_field(magnetics.single_loop(R1, 1.0), r, z)[0]
    assert br[1] == pytest.approx(br[0], rel=1e-10)
    qr, _ = biot_savart_quadrature(R1, r[1], z)
    assert br[1] == pytest.approx(qr, rel=1e-10)


def test_singular_point_rejected():
    with pytest.raises(SingularPointError):
        magnetics.loop_field_offaxis(R1, 1.0, R1, 0.0)
    with pytest.raises(SingularPointError):
        magnetics.coil_dbz_dz(magnetics.single_loop(R1, 1.0), R1 + 1e-10, 0.0)
    # one nanometer and a bit is fine
    magnetics.loop_field_offaxis(R1, 1.0, R1 + 2e-9, 0.0)


# -- superposition and linearity -------------------------------------------------


def test_superposition(coil):
    loops = magnetics.spiral_to_loops(coil, 0.8)
    r = np.array([0.0, 3e-4, 1.1e-3, 2.5e-3])
    z = np.array([6.2e-4, 1e-4, -3e-4, 2e-3])
    br, bz = magnetics.coil_field(loops, r, z)
    parts = [magnetics.loop_field_offaxis(R, 0.8, r, z) for R in loops.radii]
    np.testing.assert_allclose(br, sum(p[0] for p in parts), rtol=1e-12)
    np.testing.assert_allclose(bz, sum(p[1] for p in parts), rtol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.floats(-5.0, 5.0).filter(lambda x: abs(x) > 1e-3))
def test_field_and_gradient_linear_in_current(current):
    one = magnetics.spiral_to_loops(CoilSpec(5, um(400), um(25), um(20)), 1.0)
    scaled = one.with_current(current)
    z = um(300)
    assert magnetics.coil_bz(scaled, 0.0, z)[0] == pytest.approx(current * magnetics.coil_bz(one, 0.0, z)[0], rel=1e-13)
    assert magnetics.coil_dbz_dz(scaled, 0.0, z) == pytest.approx(current * magnetics.coil_dbz_dz(one, 0.0, z),
                                                                  rel=1e-12)


# -- gradient ------------------------------------------------------------------


def test_gradient_zero_on_coil_plane():
    assert magnetics.coil_dbz_dz(magnetics.single_loop(R1, 1.0), 0.0, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_gradient_matches_analytic_derivative():
    loop = magnetics.single_loop(R1, 1.0)
    z = 0.5e-3
    exact = -3 * MU0 * R1**2 * z / (2 * (R1**2 + z**2) ** 2.5)
    assert exact == pytest.approx(-0.5395, rel=1e-4)
    assert magnetics.coil_dbz_dz(loop, 0.0, z) == pytest.approx(exact, rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.02, 4.0))
def test_gradient_matches_analytic_over_heights(zr):
    z = zr * R1
    g = magnetics.coil_dbz_dz(magnetics.single_loop(R1, 1.0), 0.0, z)
    assert g == pytest.approx(magnetics.loop_dbz_dz_onaxis(R1, 1.0, z), rel=1e-6)


def test_gradient_argmax_at_half_radius():
    loop = magnetics.single_loop(R1, 1.0)
    z = np.linspace(1e-6, 2e-3, 2000)
    step = z[1] - z[0]
    g = np.abs(magnetics.coil_dbz_dz(loop, np.zeros_like(z), z))
    assert abs(z[np.argmax(g)] - R1 / 2) <= step


def test_field_profile_preserves_order(coil):
    z = [um(900), um(100), um(620)]
    prof = magnetics.field_profile(magnetics.spiral_to_loops(coil, 1.0), z)
    assert [s.z for s in prof] == z
    assert all(math.isfinite(s.bz) for s in prof)


# -- magnetization -----------------------------------------------------------------


def hankel_demag(c, t):
    """Axial magnetometric demagnetizing factor from the face-charge Hankel integral."""
    f = lambda u: special.j1(u) ** 2 * -np.expm1(-u * t / c) / u**2  # noqa: E731
    edges = np.arange(0.0, 4000.0 + 1e-9, 2.0)
    total = sum(integrate.quad(f, a, b, epsabs=0, epsrel=1e-12)[0] for a, b in zip(edges[:-1], edges[1:]))
    total += 1.0 / (2 * np.pi * edges[-1] ** 2)  # J1^2 ~ 1/(pi u) tail
    return 2 * c / t * total


@pytest.mark.parametrize("c,t", [(1.0, 2.0), (1222e-6, 20e-6), (1.0, 0.1), (1.0, 10.0)])
def test_demagnetizing_factor_matches_hankel_oracle(c, t):
    assert magnetics.demagnetizing_factor(c, t) == pytest.approx(hankel_demag(c, t), rel=1e-6)


def test_demagnetizing_factor_limits():
    assert magnetics.demagnetizing_factor(1.0, 2.0) == pytest.approx(0.3116, abs=1e-4)
    assert magnetics.demagnetizing_factor(1.0, 1e-3) > 0.99
    assert magnetics.demagnetizing_factor(1.0, 100.0) < 0.01


def test_magnetization_models(magnet):
    rigid = magnetics.effective_magnetization(magnet, "rigid")
    assert rigid == magnetization(magnet)
    demag = magnetics.effective_magnetization(magnet, "demagnetized")
    assert 0 < demag < rigid
    assert magnetics.effective_magnetization(magnet, "auto") == demag
    bare = MagnetSpec(magnet.radius, magnet.thickness, magnet.remanence)
    assert magnetics.effective_magnetization(bare, "auto") == magnetization(bare)
    with pytest.raises(ValueError):
        magnetics.effective_magnetization(bare, "demagnetized")
    with pytest.raises(ValueError):
        magnetics.effective_magnetization(magnet, "soft")


def test_demagnetized_equals_rigid_for_unit_recoil_permeability():
    m = MagnetSpec(1e-3, 1e-4, 0.3, coercivity=0.3 / MU0)
    assert magnetics.effective_magnetization(m, "demagnetized") == pytest.approx(0.3 / MU0, rel=1e-14)


# -- forces ------------------------------------------------------------------------


def test_point_force_zero_current(coil, magnet):
    assert magnetics.force_point(magnetics.spiral_to_loops(coil, 0.0), magnet, um(620)) == 0.0


def test_point_force_half_current(coil, magnet):
    full = magnetics.force_point(magnetics.spiral_to_loops(coil, 0.9), magnet, um(620))
    half = magnetics.force_point(magnetics.spiral_to_loops(coil, 0.45), magnet, um(620))
    assert half == pytest.approx(full / 2, rel=1e-12)


def test_point_force_order_of_magnitude(coil, magnet):
    f = abs(magnetics.force_point(magnetics.spiral_to_loops(coil, 1.0), magnet, um(620)))
    assert 18.4e-6 / 4 <= f <= 4 * 18.4e-6


def test_point_force_attracts_for_positive_current(coil, magnet):
    # positive current puts +B_z above the coil, which falls off with height
    assert magnetics.force_point(magnetics.spiral_to_loops(coil, 1.0), magnet, um(620)) < 0


@pytest.mark.parametrize("gap", [0.0, -1e-4])
def test_point_force_rejects_nonpositive_gap(coil, magnet, gap):
    with pytest.raises(GeometryError):
        magnetics.force_point(magnetics.spiral_to_loops(coil, 1.0), magnet, gap)


def test_volume_force_band_at_design_current(coil, magnet):
    f = abs(magnetics.force_volavg(magnetics.spiral_to_loops(coil, 0.9), magnet, um(620)))
    assert 8e-6 <= f <= 32e-6


def test_volume_force_linear(coil, magnet):
    loops = magnetics.spiral_to_loops(coil, 0.5)
    f1 = magnetics.force_volavg(loops, magnet, um(620))
    f2 = magnetics.force_volavg(loops.with_current(1.0), magnet, um(620))
    assert f2 == pytest.approx(2 * f1, rel=1e-9)


def test_volume_force_small_magnet_limit(coil):
    tiny = MagnetSpec(um(2), um(2), 0.3)
    loops = magnetics.spiral_to_loops(coil, 1.0)
    for gap in (um(300), um(620), um(1200)):
        fv = magnetics.force_volavg(loops, tiny, gap)
        fp = magnetics.force_point(loops, tiny, gap)
        assert fv == pytest.approx(fp, rel=5e-3)


def test_volume_force_converges_monotonically(coil, magnet):
    loops = magnetics.spiral_to_loops(coil, 1.0)
    seq = magnetics.volume_force_sequence(loops, magnet, um(620), [2, 3, 4, 6, 8, 12, 16, 32])
    deltas = np.abs(np.diff(seq))
    live = deltas > 1e-12 * abs(seq[-1])  # below this the deltas are roundoff
    assert live[:3].all()
    assert np.all(deltas[1:][live[1:]] < deltas[:-1][live[1:]])
    assert deltas[-1] <= 1e-3 * abs(seq[-1])


def test_volume_force_reports_nonconvergence():
    # a filament just under the bottom face makes the integrand nearly singular
    m = MagnetSpec(1e-3, 20e-6, 0.3)
    with pytest.raises(ConvergenceError):
        magnetics.force_volavg(magnetics.single_loop(5e-4, 1.0), m, 10.5e-6)


def test_volume_force_rejects_magnet_through_coil_plane(coil, magnet):
    with pytest.raises(GeometryError):
        magnetics.force_volavg(magnetics.spiral_to_loops(coil, 1.0), magnet, magnet.thickness / 2)


def test_rigid_volume_force_is_larger(coil, magnet):
    loops = magnetics.spiral_to_loops(coil, 1.0)
    rigid = magnetics.force_volavg(loops, magnet, um(620), magnetization_model="rigid")
    auto = magnetics.force_volavg(loops, magnet, um(620))
    ratio = magnetics.effective_magnetization(magnet, "rigid") / magnetics.effective_magnetization(magnet)
    assert rigid == pytest.approx(auto * ratio, rel=1e-12)


# -- resistance --------------------------------------------------------------------


def test_resistance_and_length(coil):
    assert magnetics.coil_length(coil) * 1e3 == pytest.approx(92.05, abs=0.01)
    r = magnetics.coil_resistance(coil)
    assert r == pytest.approx(3.09, abs=0.01)
    assert abs(r / 3.23 - 1) <= 0.10


def test_resistance_single_turn():
    c = CoilSpec(1, um(400), um(25), um(20), um(20))
    r = 412.5e-6
    assert magnetics.coil_resistance(c, 1.7e-8) == pytest.approx(1.7e-8 * 2 * np.pi * r / (25e-6 * 20e-6), rel=1e-14)


def test_resistance_inverse_in_thickness(coil):
    from dataclasses import replace

    thick = replace(coil, conductor_thickness=2 * coil.conductor_thickness)
    assert magnetics.coil_resistance(thick) == pytest.approx(magnetics.coil_resistance(coil) / 2, rel=1e-14)
