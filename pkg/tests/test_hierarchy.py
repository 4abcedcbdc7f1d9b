import random

import pytest
from gmpy2 import mpq
from hypothesis import given, settings
from hypothesis import strategies as st

from centroaffine.diffop import DiffOp, companion, symbolic_L
from centroaffine.diffpoly import ZERO, d_x, euler_derivative, u
from centroaffine.duality import DualCoset
from centroaffine.hierarchy import (
    FlowSpec,
    OmegaSeries,
    adler_map,
    bracket_evolutionary,
    eigenring_kernel_check,
    flow_lax_pair,
    flow_operator,
    flow_rhs,
    kernel_pair,
    omega,
    omega_order_for,
    omega_power,
    power_truncation,
    verify_omega,
)
from centroaffine.psido import PsiDO, oracle_flow
from centroaffine.sampling import random_coset, random_dual
from centroaffine.spectral import TruncationError
from strategies import seeds

D = DiffOp.D
KDV = mpq(3, 2) * u(0) * u(0, 1) + mpq(1, 4) * u(0, 3)


def matmul(A, B):
    n = len(A)
    return [[sum((A[i][k] * B[k][j] for k in range(n)), ZERO) for j in range(n)] for i in range(n)]


def test_omega_leading_terms():
    om = omega(2, 1, symbolic_L(2, traceless=True))
    assert [c.to_text() for c in om.coeffs] == ["D", "1/2*u0*D - 1/4*u0^(1)"]
    assert omega(3, 0).coeffs[0] == DiffOp([u(2) / 3, 1])
    assert om.to_json() == {"n": 2, "order": 1, "omega": ["D", "1/2*u0*D - 1/4*u0^(1)"]}


@pytest.mark.parametrize("n", [2, 3, 4])
def test_vacuum_omega_is_D(n):
    om = omega(n, 3, D(n))
    assert om.coeffs[0] == D()
    assert all(not c for c in om.coeffs[1:])
    assert verify_omega(om).is_zero()


def test_omega_power_one_and_n():
    om = omega(2, 4)
    assert omega_power(om, 1).terms == om.coset().terms
    p = omega_power(om, 2)
    assert p.terms == {1: DiffOp([1])}
    assert p.truncation == power_truncation(om, 2)


@pytest.mark.parametrize("n, T", [(2, 3), (3, 2), (4, 2)])
def test_omega_power_n_is_lambda(n, T):
    om = omega(n, omega_order_for(T, n))
    res = verify_omega(om)
    assert res.truncation >= T
    assert res.is_zero()


def test_literal_truncation_also_zero():
    # with only Omega_0..Omega_T the certified range of Omega^n - lam is shorter but still zero
    om = omega(2, 3)
    res = verify_omega(om)
    assert res.is_zero()
    assert res.truncation == power_truncation(om, 2)


def test_uniqueness_perturbation():
    om = omega(2, 4)
    bumped = list(om.coeffs)
    bumped[2] = bumped[2] + DiffOp([mpq(1, 7)])
    assert not verify_omega(OmegaSeries(om.L, bumped)).is_zero()


def test_zero_constants():
    for n, T in [(2, 4), (3, 3)]:
        for c in omega(n, T).coeffs[1:]:
            assert all(p.constant_term() == 0 for p in c.coeffs)


def test_omega_rejects_bad_args():
    with pytest.raises(ValueError):
        omega(1, 2)
    with pytest.raises(ValueError):
        omega(2, -1)
    with pytest.raises(ValueError):
        omega(3, 2, symbolic_L(2))


def test_flow_examples():
    L0 = symbolic_L(2, traceless=True)
    assert flow_operator(FlowSpec(2, 1), L0).terms == {0: D()}
    assert flow_rhs(FlowSpec(2, 1), L0) == [u(0, 1), ZERO]
    P = flow_operator(FlowSpec(2, 3), L0)
    assert P.terms[1] == D()
    assert flow_rhs(FlowSpec(2, 3), L0) == [KDV, ZERO]
    assert flow_operator(FlowSpec(3, 1)).terms == {0: DiffOp([u(2) / 3, 1])}


def test_flowspec_rejects():
    for n, j in [(2, 2), (3, 6), (2, 0), (1, 1)]:
        with pytest.raises(ValueError):
            FlowSpec(n, j)
    assert (FlowSpec(3, 5).N, FlowSpec(3, 5).m) == (1, 2)


def test_flow_operator_checks_truncation():
    with pytest.raises(TruncationError):
        flow_operator(FlowSpec(2, 5), om=omega(2, 1))


@pytest.mark.parametrize("n, j", [(2, 1), (2, 3), (2, 5), (3, 1), (3, 2), (3, 4), (4, 1)])
def test_flow_matches_fractional_power(n, j):
    assert flow_rhs(FlowSpec(n, j)) == oracle_flow(symbolic_L(n), j)


@pytest.mark.parametrize("n, j", [(2, 3), (2, 5), (3, 2), (3, 4)])
def test_flow_matches_fractional_power_traceless(n, j):
    L = symbolic_L(n, traceless=True)
    assert flow_rhs(FlowSpec(n, j), L) == oracle_flow(L, j)


@pytest.mark.parametrize("n, a, b", [(2, 1, 3), (2, 3, 5), (3, 1, 2), (3, 2, 4)])
def test_flows_commute(n, a, b):
    br = bracket_evolutionary(flow_rhs(FlowSpec(n, a)), flow_rhs(FlowSpec(n, b)))
    assert all(c == 0 for c in br)


def test_bracket_detects_noncommuting_fields():
    F = [u(0) ** 2, ZERO]
    G = [u(0, 1), ZERO]
    assert bracket_evolutionary(F, F) == [ZERO, ZERO]
    # translation commutes with anything autonomous
    assert bracket_evolutionary(F, G) == [ZERO, ZERO]
    H = [u(0, 2), ZERO]
    assert bracket_evolutionary(F, H)[0] != 0
    with pytest.raises(ValueError):
        bracket_evolutionary(F, [ZERO])


def test_kdv_is_euler_derivative():
    density = mpq(1, 4) * u(0) ** 3 - mpq(1, 8) * u(0, 1) ** 2
    assert euler_derivative(density, 0) == mpq(3, 4) * u(0) ** 2 + mpq(1, 4) * u(0, 2)
    assert d_x(euler_derivative(density, 0)) == KDV


@pytest.mark.parametrize("n, j, traceless", [(2, 3, True), (2, 3, False), (3, 1, False), (3, 2, False), (3, 4, True)])
def test_lax_pair_zero_curvature(n, j, traceless):
    L = symbolic_L(n, traceless=traceless)
    h, X = flow_lax_pair(FlowSpec(n, j), L)
    F = companion(L)
    Ft = [[ZERO] * n for _ in range(n)]
    Ft[n - 1] = [-c for c in h]
    FX, XF = matmul(F, X), matmul(X, F)
    for i in range(n):
        for k in range(n):
            assert Ft[i][k] - d_x(X[i][k]) + FX[i][k] - XF[i][k] == 0


def test_adler_examples():
    L = DiffOp([u(0), 0, 1])
    assert adler_map(PsiDO.D(-1), L).terms == {0: -u(0, 1)}
    with pytest.raises(TruncationError):
        adler_map(PsiDO({-1: u(0)}, -1), L)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_kernel_pair_unit(n):
    kp = kernel_pair(DualCoset.delta(n - 1, n), symbolic_L(n))
    assert kp.adler_zero and kp.dual_zero


def test_kernel_pair_vacuum():
    kp = kernel_pair(DualCoset([1, 0]), D(2))
    assert kp.adler_zero and kp.dual_zero
    kp = kernel_pair(DualCoset([0, u(0)]), symbolic_L(2))
    assert not kp.adler_zero and not kp.dual_zero


def test_kernel_pair_length_checked():
    with pytest.raises(ValueError):
        kernel_pair(DualCoset([1, 0, 0]), symbolic_L(2))


@pytest.mark.parametrize("n", [2, 3])
def test_kernel_tests_agree_on_100_samples(n):
    rng = random.Random(1234 + n)
    L = symbolic_L(n)
    for _ in range(100):
        kp = kernel_pair(random_dual(rng, n), L)
        assert kp.adler_zero == kp.dual_zero


@given(seeds, st.sampled_from([2, 3]))
def test_kernel_tests_agree(seed, n):
    kp = kernel_pair(random_dual(random.Random(seed), n), symbolic_L(n))
    assert kp.adler_zero == kp.dual_zero


@pytest.mark.parametrize("n, T", [(2, 3), (3, 2)])
def test_eigenring_dual_image_in_kernel(n, T):
    res = eigenring_kernel_check(omega(n, T))
    assert res == {"remainder_lam_free": True, "adler_positive_zero": True,
                   "dual_positive_zero": True, "agree": True}


@settings(max_examples=10)
@given(seeds)
def test_eigenring_check_negative_control(seed):
    from centroaffine.diffpoly import DiffPoly

    lam = DiffPoly.constant_symbol("lam")
    Y = random_coset(random.Random(seed), 2, terms=2, order=1)
    if not Y:
        return
    res = eigenring_kernel_check(omega(2, 2), Y.scale(lam) + D())
    assert res["agree"]


def test_eigenring_check_rejects_non_eigenring_element():
    from centroaffine.diffpoly import DiffPoly

    lam = DiffPoly.constant_symbol("lam")
    Y = DiffOp([u(0), 1]).scale(lam)
    res = eigenring_kernel_check(omega(2, 2), Y)
    assert not res["adler_positive_zero"] and not res["dual_positive_zero"]
