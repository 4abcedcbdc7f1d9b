"""Self-check suites run by ``centroaffine check``.

Each suite returns a dict with an overall verdict and one entry per check.
Symbolic residuals are reported as canonical text ("0" when they vanish);
numeric ones as floats.
"""
from __future__ import annotations

import random
from dataclasses import dataclass

import numpy as np

from .diffop import (
    DiffOp,
    adjoint,
    companion,
    compose,
    divide_right,
    hat_and_remainder,
    horner,
    matrix_rep,
    symbolic_L,
    trace_of_rep,
)
from .diffpoly import DiffPoly, euler_derivative, is_curvature
from .duality import (
    DualCoset,
    DualRepMismatch,
    adjoint_curve,
    dual_rep,
    lagrange_residual,
    phi_factor,
    trace_pairing_residual,
)
from .hierarchy import (
    FlowSpec,
    bracket_evolutionary,
    eigenring_kernel_check,
    flow_lax_pair,
    flow_rhs,
    kernel_pair,
    omega,
    omega_order_for,
    verify_omega,
)
from .psido import oracle_flow
from .sampling import random_coset, random_diffop, random_dual, random_monic

SUITES = ("ops", "duality", "omega", "adler", "commute", "numeric")


@dataclass
class Check:
    name: str
    passed: bool
    residual: object = "0"

    def to_json(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "residual": self.residual}


def _short(p) -> str:
    text = p.to_text() if hasattr(p, "to_text") else str(p)
    if isinstance(text, list):
        text = "; ".join(text)
    return text if len(text) <= 200 else text[:197] + "..."


def _exact(name: str, residual) -> Check:
    """Passes iff the symbolic residual is zero."""
    if isinstance(residual, (list, tuple)):
        bad = [r for r in residual if r]
        return Check(name, not bad, _short(bad[0]) if bad else "0")
    return Check(name, not residual, _short(residual) if residual else "0")


def _first_failure(name: str, items) -> Check:
    """items yields residuals; the first nonzero one is reported."""
    count = 0
    for r in items:
        count += 1
        if r:
            return Check(name, False, _short(r))
    return Check(name, True, f"0 ({count} cases)")


def suite_ops(n: int = 3, samples: int = 20, seed: int = 0, **_) -> list:
    rng = random.Random(seed)
    L = symbolic_L(n)

    def assoc():
        for _ in range(samples):
            A, B, C = (random_diffop(rng, n, rng.randint(0, 2)) for _ in range(3))
            yield compose(compose(A, B), C) - compose(A, compose(B, C))

    def division():
        for _ in range(samples):
            A = random_diffop(rng, n, rng.randint(0, n + 2))
            M = random_monic(rng, n)
            Q, R = divide_right(A, M)
            yield compose(Q, M) + R - A
            if R.degree >= M.degree:
                yield DiffOp([DiffPoly.const(1)])

    def antihom():
        for _ in range(samples):
            A, B = (random_diffop(rng, n, rng.randint(0, 2)) for _ in range(2))
            yield adjoint(compose(A, B)) - compose(adjoint(B), adjoint(A))

    def telescoping():
        for _ in range(samples):
            d = rng.randint(1, 4)
            A = random_diffop(rng, n, d)
            for k in range(d + 1):
                tail = DiffOp([A.coeff(j) for j in range(d - k)])
                yield compose(horner(A, k), DiffOp.D(d - k)) + tail - A

    def hat():
        for _ in range(samples):
            X = random_coset(rng, n)
            xhat, h = hat_and_remainder(X, L)
            yield compose(L, X) + h - compose(xhat, L)

    rep = [a - b for ra, rb in zip(matrix_rep(DiffOp.D(1), L), companion(L)) for a, b in zip(ra, rb)]
    return [
        _first_failure("compose associativity", assoc()),
        _first_failure("division identity", division()),
        _first_failure("adjoint anti-homomorphism", antihom()),
        _first_failure("horner telescoping", telescoping()),
        _first_failure("hat consistency", hat()),
        _exact("matrix_rep(D) = companion", rep),
    ]


def suite_duality(n: int = 3, samples: int = 10, seed: int = 0, **_) -> list:
    rng = random.Random(seed)
    L = symbolic_L(n)

    def pairing():
        for _ in range(samples):
            yield trace_pairing_residual(L, random_coset(rng, n), random_dual(rng, n))

    def dual_reps():
        for _ in range(samples):
            try:
                dual_rep(random_coset(rng, n), L)
            except DualRepMismatch as exc:
                yield str(exc)
            else:
                yield None

    def involution():
        for _ in range(samples):
            M = random_monic(rng, n)
            yield adjoint_curve(adjoint_curve(M)) - M

    S = phi_factor(L)
    foreign = [p for row in S for p in row if any(not is_curvature(v[0]) for v in p.variables())]
    return [
        _exact("lagrange identity", lagrange_residual(L)),
        _first_failure("trace pairing identity", pairing()),
        _first_failure("dual representation", dual_reps()),
        _first_failure("adjoint curve involution", involution()),
        _exact("phi factor depends on u only", foreign),
    ]


def suite_omega(n: int = 2, order: int = 3, traceless: bool = False, **_) -> list:
    L = symbolic_L(n, traceless)
    om = omega(n, order, L)
    literal = verify_omega(om)
    checks = [
        _exact(f"Omega^n = lam through lam^-{literal.truncation}", list(literal.terms.values())),
        _exact("Omega_0 = D + u_(n-1)/n", om.coeffs[0] - DiffOp([L.coeff(n - 1) / n, 1])),
        _exact("zero constant terms", [DiffPoly.const(c.constant_term()) for op in om.coeffs[1:] for c in op.coeffs]),
        _exact("trace-free representations", [trace_of_rep(c, L) for c in om.coeffs[1:]]),
    ]
    deep = omega(n, omega_order_for(order, n), L)
    certified = verify_omega(deep)
    checks.append(_exact(f"Omega^n = lam certified through lam^-{certified.truncation}",
                         list(certified.terms.values())))
    return checks


def suite_adler(n: int = 2, samples: int = 100, seed: int = 0, order: int = 2, **_) -> list:
    rng = random.Random(seed)
    L = symbolic_L(n)
    disagree = []
    for i in range(samples):
        kp = kernel_pair(random_dual(rng, n), L)
        if kp.adler_zero != kp.dual_zero:
            disagree.append(i)
    unit = kernel_pair(DualCoset.delta(n - 1, n), L)
    eig = eigenring_kernel_check(omega(n, order, L))
    return [
        Check("adler zero iff dual zero (random)", not disagree,
              f"{len(disagree)} disagreements in {samples}"),
        Check("unit element in both kernels", unit.adler_zero and unit.dual_zero,
              "0" if unit.adler_zero and unit.dual_zero else _short(unit.adler)),
        Check("Omega dual image in both kernels", eig["adler_positive_zero"] and eig["dual_positive_zero"]
              and eig["remainder_lam_free"], "0" if all(eig.values()) else str(eig)),
    ]


COMMUTE_CASES = ((2, 1, 3), (2, 3, 5), (3, 1, 2))


def suite_commute(**_) -> list:
    out = []
    for n, j1, j2 in COMMUTE_CASES:
        br = bracket_evolutionary(flow_rhs(FlowSpec(n, j1)), flow_rhs(FlowSpec(n, j2)))
        out.append(_exact(f"[flow {j1}, flow {j2}] for n={n}", br))
    for n, j in ((2, 3), (3, 1), (3, 2)):
        diff = [a - b for a, b in zip(flow_rhs(FlowSpec(n, j)), oracle_flow(symbolic_L(n), j))]
        out.append(_exact(f"flow {j} for n={n} matches fractional power", diff))
    kdv = flow_rhs(FlowSpec(2, 3))
    out.append(_exact("KdV flow conserves the period integral",
                      [euler_derivative(p, k) for p in kdv[:1] for k in range(2)]))
    return out


def suite_numeric(seed: int = 0, **_) -> list:
    from .numerics import (
        CurvatureField,
        Grid,
        evolve,
        isospectral_drift,
        liouville_det,
        monodromy,
        round_trip_error,
        zero_curvature_residual,
    )

    grid = Grid(0.0, 2 * np.pi, 256)
    x = grid.x
    u = CurvatureField(grid, np.stack([1 + 0.3 * np.cos(x), 0.2 * np.sin(2 * x)]))
    rt = round_trip_error(u)
    M = monodromy(u, 0.7)
    det_err = float(abs(np.linalg.det(M) - liouville_det(u)))

    small = Grid(0.0, 2 * np.pi, 128)
    u0 = CurvatureField(small, np.stack([np.cos(small.x), np.zeros(small.N)]))
    rhs, X = flow_lax_pair(FlowSpec(2, 3), symbolic_L(2, traceless=True))
    traj = evolve(u0, rhs, 1e-4, 2000, save_every=100)
    drift = isospectral_drift(traj, [0.3, 1.0, 2.5])["max"]
    _, zc = zero_curvature_residual(traj, X)
    return [
        Check("curvature round trip < 1e-8", rt < 1e-8, rt),
        Check("monodromy det matches Liouville < 1e-8", det_err < 1e-8, det_err),
        Check("KdV isospectral drift < 1e-6 (t = 0.2)", drift < 1e-6, drift),
        Check("KdV zero-curvature residual < 1e-4 (t = 0.2)", zc < 1e-4, zc),
    ]


RUNNERS = {
    "ops": suite_ops,
    "duality": suite_duality,
    "omega": suite_omega,
    "adler": suite_adler,
    "commute": suite_commute,
    "numeric": suite_numeric,
}


def run_suite(name: str, **options) -> dict:
    if name not in RUNNERS:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    opts = {k: v for k, v in options.items() if v is not None}
    checks = RUNNERS[name](**opts)
    return {
        "suite": name,
        "options": {k: opts[k] for k in sorted(opts)},
        "passed": all(c.passed for c in checks),
        "checks": [c.to_json() for c in checks],
    }
