import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from centroaffine.diffop import symbolic_L
from centroaffine.diffpoly import ZERO, u as usym
from centroaffine.hierarchy import FlowSpec, flow_lax_pair, flow_rhs
from centroaffine.numerics import (
    BlowUp,
    CurvatureField,
    CurveSamples,
    Grid,
    SingularFrame,
    as_open_curve,
    compile_rhs,
    curvature_from_curve,
    derivative,
    evolve,
    fornberg_weights,
    frame_from_curvature,
    isospectral_drift,
    liouville_det,
    match_eigenvalues,
    monodromy,
    period_integral,
    reconstruct_curve,
    refine,
    round_trip_error,
    split_linear,
    zero_curvature_residual,
)

TWO_PI = 2 * np.pi


def periodic(N=64, length=TWO_PI):
    return Grid(0.0, length, N)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 8)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 100)
    with pytest.raises(ValueError):
        Grid(0.0, -1.0, 64)
    g = Grid(0.0, 1.0, 101, periodic=False)
    assert g.h == pytest.approx(0.01)
    assert g.x[-1] == pytest.approx(1.0)


def test_fornberg_central_second_derivative():
    w = fornberg_weights(0.0, [-1, 0, 1], 2)
    assert np.allclose(w[:, 2], [1, -2, 1])
    assert np.allclose(w[:, 0], [0, 1, 0])


def test_spectral_and_fd_derivatives():
    g = periodic()
    assert np.max(np.abs(derivative(np.sin(g.x), g, 1) - np.cos(g.x))) < 1e-12
    og = Grid(0.0, 1.0, 201, periodic=False)
    assert np.max(np.abs(derivative(np.exp(og.x), og, 3) - np.exp(og.x))) < 1e-4


def test_refine_and_period_integral():
    g = periodic(32)
    f = np.cos(3 * g.x)
    fine = refine(f, g, 4)
    xf = g.h / 4 * np.arange(fine.shape[-1])
    assert np.max(np.abs(fine - np.cos(3 * xf))) < 1e-12
    assert period_integral(1 + f, g) == pytest.approx(TWO_PI)


def test_curvature_of_circle():
    g = periodic()
    curve = CurveSamples(g, np.stack([np.cos(g.x), np.sin(g.x)], axis=1))
    k = curvature_from_curve(curve)
    assert np.allclose(k.u[0], 1.0, atol=1e-10)
    assert np.allclose(k.u[1], 0.0, atol=1e-10)


def test_curvature_of_exponentials_on_open_grid():
    g = Grid(0.0, 1.0, 201, periodic=False)
    curve = CurveSamples(g, np.stack([np.exp(g.x), np.exp(2 * g.x)], axis=1))
    k = curvature_from_curve(curve)
    # gamma'' - 3 gamma' + 2 gamma = 0
    assert np.allclose(k.u[0], 2.0, atol=1e-5)
    assert np.allclose(k.u[1], -3.0, atol=1e-5)


def test_curvature_of_space_circle():
    g = periodic()
    curve = CurveSamples(g, np.stack([np.ones(g.N), np.cos(g.x), np.sin(g.x)], axis=1))
    k = curvature_from_curve(curve)
    assert np.allclose(k.u, [[0.0], [1.0], [0.0]], atol=1e-9)


def test_singular_frame():
    g = periodic()
    line = CurveSamples(g, np.stack([np.cos(g.x), 2 * np.cos(g.x)], axis=1))
    with pytest.raises(SingularFrame):
        curvature_from_curve(line)


def test_frame_of_constant_curvature():
    g = Grid(0.0, 3.0, 301, periodic=False)
    field = CurvatureField(g, np.stack([np.ones(g.N), np.zeros(g.N)]))
    W = frame_from_curvature(field)
    assert np.allclose(W.W[:, 0, 0], np.cos(g.x), atol=1e-10)
    assert np.allclose(W.W[:, 0, 1], np.sin(g.x), atol=1e-10)
    assert np.allclose(W.dets(), 1.0, atol=1e-10)


def test_round_trip():
    g = periodic(256)
    field = CurvatureField(g, np.stack([1 + 0.3 * np.cos(g.x), 0.2 * np.sin(2 * g.x)]))
    assert round_trip_error(field) < 1e-8
    with pytest.raises(ValueError):
        frame_from_curvature(field, refine_factor=3)


def test_open_curve_view():
    g = periodic(32)
    c = CurveSamples(g, np.zeros((32, 2)))
    o = as_open_curve(c)
    assert not o.grid.periodic and o.grid.h == pytest.approx(g.h)
    assert as_open_curve(o) is o


def test_monodromy_of_constant_curvature():
    g = periodic()
    field = CurvatureField(g, np.stack([np.ones(g.N), np.zeros(g.N)]))
    M = monodromy(field)
    assert np.allclose(M, np.eye(2), atol=1e-7)
    # lam shifts the constant term: u0 = 1 - lam
    Ms = monodromy(field, lam=np.array([0.0, -3.0]))
    assert Ms.shape == (2, 2, 2)
    assert np.allclose(np.trace(Ms[1]), 2 * np.cos(2 * TWO_PI), atol=1e-9)


def test_monodromy_det_is_liouville():
    g = periodic(128)
    field = CurvatureField(g, np.stack([np.cos(g.x), 0.3 + 0.1 * np.sin(g.x)]))
    assert np.linalg.det(monodromy(field)) == pytest.approx(liouville_det(field), rel=1e-9)
    with pytest.raises(ValueError):
        monodromy(CurvatureField(Grid(0, 1, 32, periodic=False), np.zeros((2, 32))))


def test_compile_rhs_and_split():
    g = periodic()
    rhs = [usym(0) * usym(0, 1) + 2 * usym(1, 2), ZERO]
    f = compile_rhs(rhs)
    uu = np.stack([np.sin(g.x), np.cos(g.x)])
    out = f(uu, g)
    assert np.allclose(out[0], np.sin(g.x) * np.cos(g.x) - 2 * np.cos(g.x))
    assert np.allclose(out[1], 0.0)
    lin, rest = split_linear(rhs)
    assert lin == {(0, 1, 2): 2.0}
    assert rest[0] == usym(0) * usym(0, 1)


@pytest.mark.parametrize("method", ["ifrk4", "rk4"])
def test_translation_flow(method):
    g = periodic(64)
    field = CurvatureField(g, np.stack([np.cos(g.x), np.zeros(g.N)]))
    rhs = flow_rhs(FlowSpec(2, 1), symbolic_L(2, traceless=True))
    traj = evolve(field, rhs, 1e-3, 1000, save_every=100, method=method)
    exact = np.cos(g.x + 1.0)
    assert np.sqrt(np.mean((traj.fields[-1, 0] - exact) ** 2)) < 1e-6
    assert len(traj) == 11 and traj.times[-1] == pytest.approx(1.0)


def test_kdv_soliton():
    k = 1.0
    g = periodic(256, 40.0)
    x = g.x - 20.0

    def sol(t):
        return 2 * k**2 / np.cosh(k * (x + k**2 * t)) ** 2

    field = CurvatureField(Grid(-20.0, 40.0, 256), np.stack([sol(0.0), np.zeros(g.N)]))
    rhs = flow_rhs(FlowSpec(2, 3), symbolic_L(2, traceless=True))
    traj = evolve(field, rhs, 1e-3, 1000, save_every=500)
    assert np.sqrt(np.mean((traj.fields[-1, 0] - sol(1.0)) ** 2)) < 1e-3


def test_zero_data_stays_zero():
    g = periodic(32)
    rhs = flow_rhs(FlowSpec(2, 3), symbolic_L(2, traceless=True))
    traj = evolve(CurvatureField(g, np.zeros((2, 32))), rhs, 1e-2, 10)
    assert not np.any(traj.fields)


def test_evolve_validation():
    g = periodic(32)
    field = CurvatureField(g, np.zeros((2, 32)))
    rhs = [ZERO, ZERO]
    with pytest.raises(ValueError):
        evolve(field, rhs, 0.0, 1)
    with pytest.raises(ValueError):
        evolve(field, [ZERO], 0.1, 1)
    with pytest.raises(ValueError):
        evolve(field, rhs, 0.1, 1, method="euler")
    with pytest.raises(ValueError):
        evolve(CurvatureField(Grid(0, 1, 32, periodic=False), np.zeros((2, 32))), rhs, 0.1, 1)


def test_blow_up():
    g = periodic(32)
    field = CurvatureField(g, np.stack([2 + np.cos(g.x), np.zeros(32)]))
    with pytest.raises(BlowUp):
        evolve(field, [usym(0) ** 2, ZERO], 1e-2, 200, blowup=1e4)


def test_zero_curvature_and_drift_for_translation():
    g = periodic(64)
    L = symbolic_L(2, traceless=True)
    rhs, X = flow_lax_pair(FlowSpec(2, 1), L)
    field = CurvatureField(g, np.stack([np.cos(g.x), np.zeros(g.N)]))
    traj = evolve(field, rhs, 1e-3, 500, save_every=10)
    per, worst = zero_curvature_residual(traj, X)
    assert np.isnan(per[0]) and worst < 1e-8
    drift = isospectral_drift(traj, [0.3, 1.0])
    assert drift["max"] < 1e-8
    assert set(drift["per_lambda"]) == {0.3, 1.0}


def test_zero_curvature_needs_five_snapshots():
    g = periodic(32)
    traj = evolve(CurvatureField(g, np.zeros((2, 32))), [ZERO, ZERO], 0.1, 2)
    with pytest.raises(ValueError):
        zero_curvature_residual(traj, [[ZERO, ZERO], [ZERO, ZERO]])


def test_reconstructed_curves_have_trajectory_curvature():
    g = periodic(64)
    L = symbolic_L(2, traceless=True)
    rhs, X = flow_lax_pair(FlowSpec(2, 1), L)
    field = CurvatureField(g, np.stack([1 + 0.2 * np.cos(g.x), np.zeros(g.N)]))
    traj = evolve(field, rhs, 1e-2, 50, save_every=10)
    curves = reconstruct_curve(traj, np.eye(2), X)
    assert len(curves) == len(traj)
    for c, uu in zip(curves, traj.fields):
        back = curvature_from_curve(as_open_curve(c))
        assert np.max(np.abs(back.u - uu)) < 1e-6


def test_match_eigenvalues():
    a = np.array([1.0, 2.0 + 1j, -3.0])
    b = np.array([-3.0, 1.0, 2.0 + 1j])
    assert np.allclose(match_eigenvalues(a, b), a)


@settings(max_examples=15)
@given(st.floats(0.05, 0.5), st.integers(1, 3))
def test_round_trip_property(amp, mode):
    g = periodic(256)
    field = CurvatureField(g, np.stack([1 + amp * np.cos(mode * g.x), amp * np.sin(g.x)]))
    assert round_trip_error(field) < 1e-8


@settings(max_examples=10)
@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5))
def test_det_liouville_property(a, b):
    g = periodic(64)
    field = CurvatureField(g, np.stack([a * np.cos(g.x), b + 0.2 * np.sin(g.x)]))
    assert np.linalg.det(monodromy(field)) == pytest.approx(liouville_det(field), rel=1e-8)
