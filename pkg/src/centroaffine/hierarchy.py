"""Eigenring generator Omega, n-KdV flows, the Adler map and flow brackets."""
from __future__ import annotations

from dataclasses import dataclass, field

from .diffpoly import ZERO, DiffPoly, integrate_exact, poly_sum
from .diffop import DiffOp, compose, hat_and_remainder, symbolic_L, trace_of_rep
from .duality import DualCoset, dual_apply
from .psido import PsiDO, from_right_coeffs, plus_part, psido_mul
from .spectral import LambdaCoset, TruncationError, coset_mul, lambda_poly_part


class InconsistentRecursion(ArithmeticError):
    """The eigenring recursion produced an inconsistent defect."""


def _defect(X: DiffOp, L: DiffOp) -> DiffOp:
    # Xhat - X for the hat operator defined by L X = Xhat L - h
    xhat, _ = hat_and_remainder(X, L)
    return xhat - X


@dataclass
class OmegaSeries:
    """Omega = sum_k coeffs[k] lam^-k, exact through lam^-T."""

    L: DiffOp
    coeffs: list
    remainders: list = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.L.degree

    @property
    def T(self) -> int:
        return len(self.coeffs) - 1

    def coset(self) -> LambdaCoset:
        return LambdaCoset({-k: c for k, c in enumerate(self.coeffs)}, self.T, self.L)

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "order": self.T,
            "omega": [c.to_text() for c in self.coeffs],
        }


def _solve_step(h: DiffOp, L: DiffOp) -> DiffOp:
    """Find Y of degree < n with Yhat - Y = h, zero constants, trace-free rep."""
    n = L.degree
    hc = h.padded(n)
    if hc[n - 1]:
        raise InconsistentRecursion(f"remainder has a D^{n - 1} component: {hc[n - 1].to_text()}")
    c = [ZERO] * n
    # the defect is linear in Y and blind to c_0; accumulate it term by term
    defect = DiffOp()
    for m in range(n - 2, -1, -1):
        # its D^m part is n c_{m+1}' plus terms in c_{>m+1}
        c[m + 1] = integrate_exact((hc[m] - defect.coeff(m)) / n)
        if c[m + 1]:
            mono = DiffOp([ZERO] * (m + 1) + [c[m + 1]])
            defect = defect + _defect(mono, L)
    # matrix_rep(c_0) is c_0 on the diagonal, so the trace is affine in c_0
    c[0] = -trace_of_rep(DiffOp(c), L) / n
    Y = DiffOp(c)
    if defect != DiffOp(hc) or _defect(DiffOp([c[0]]), L):
        raise InconsistentRecursion("defect equation not satisfied")
    return Y


def omega(n: int, T: int, L: DiffOp | None = None) -> OmegaSeries:
    """Coefficients Omega_0..Omega_T of the eigenring generator of L - lam."""
    if n < 2:
        raise ValueError("need n >= 2")
    if T < 0:
        raise ValueError("truncation must be non-negative")
    if L is None:
        L = symbolic_L(n)
    if L.degree != n:
        raise ValueError("operator order does not match n")
    coeffs = [DiffOp([L.coeff(n - 1) / n, 1])]
    rems = []
    for _ in range(T):
        _, h = hat_and_remainder(coeffs[-1], L)
        rems.append(h)
        coeffs.append(_solve_step(h, L))
    return OmegaSeries(L, coeffs, rems)


def power_truncation(om: OmegaSeries, k: int) -> int:
    """Certified truncation of Omega^k computed from Omega_0..Omega_T.

    Any product term with raw lam-exponent E and D-degree d reduces into
    exponents E .. E + d // n.  The uncertified tail sits at lam^-(T+1) or
    below with degree <= n-1, so maximise over products containing it.
    """
    n, T = om.n, om.T
    choices = [(-b, c.degree) for b, c in enumerate(om.coeffs) if c]
    tail = (-(T + 1), n - 1)
    # best[(has_tail, degree)] = largest exponent sum
    best = {(False, 0): 0}
    for _ in range(k):
        nxt: dict = {}
        for (flag, d), e in best.items():
            for (ce, cd), tf in [(x, False) for x in choices] + [(tail, True)]:
                key = (flag or tf, d + cd)
                if nxt.get(key, None) is None or nxt[key] < e + ce:
                    nxt[key] = e + ce
        best = nxt
    worst = max((e + d // n for (flag, d), e in best.items() if flag), default=None)
    return -worst - 1


def omega_power(om: OmegaSeries, k: int) -> LambdaCoset:
    if k < 1:
        raise ValueError("power must be >= 1")
    base = om.coset()
    T_k = power_truncation(om, k)
    out = base
    for j in range(2, k + 1):
        # later factors have top exponent 0 and lift by at most one each
        keep = -T_k - (k - j)
        out = coset_mul(out, base, truncation=-keep, keep_from=keep)
    return out.certify(T_k) if k > 1 else out


def verify_omega(om: OmegaSeries) -> LambdaCoset:
    """Omega^n - lam, zero in every certified order."""
    p = omega_power(om, om.n)
    return p - LambdaCoset({1: DiffOp([1])}, None, om.L)


def omega_order_for(T_certified: int, n: int) -> int:
    """Omega truncation needed for Omega^n to be certified through lam^-T."""
    T = T_certified
    while power_truncation(omega_shape(n, T), n) < T_certified:
        T += 1
    return T


def omega_shape(n: int, T: int) -> OmegaSeries:
    # placeholder series with generic degrees, for certification arithmetic
    from .diffpoly import ONE

    coeffs = [DiffOp([ZERO, ONE])] + [DiffOp([ZERO] * (n - 1) + [ONE]) for _ in range(T)]
    return OmegaSeries(DiffOp([ZERO] * n + [ONE]), coeffs)


@dataclass(frozen=True)
class FlowSpec:
    n: int
    j: int

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need n >= 2")
        if self.j < 1:
            raise ValueError("need j >= 1")
        if self.j % self.n == 0:
            raise ValueError(f"j = {self.j} is a multiple of n = {self.n}; the flow is trivial")

    @property
    def N(self) -> int:
        return self.j // self.n

    @property
    def m(self) -> int:
        return self.j % self.n

    @property
    def truncation(self) -> int:
        # lam^N Omega^m needs Omega^m certified through lam^-N
        return self.N + 1


def flow_operator(spec: FlowSpec, L: DiffOp | None = None, om: OmegaSeries | None = None) -> LambdaCoset:
    """(lam^N Omega^m)_+ as a lam-polynomial of cosets."""
    if L is None:
        L = om.L if om is not None else symbolic_L(spec.n)
    if om is None:
        om = omega(spec.n, spec.truncation, L)
    if om.T < spec.truncation:
        raise TruncationError(f"Omega truncation {om.T} < required {spec.truncation}")
    if power_truncation(om, spec.m) < spec.N:
        raise TruncationError("Omega^m is not certified through lam^-N")
    p = omega_power(om, spec.m).shift(spec.N)
    return lambda_poly_part(p)


def flow_rhs(spec: FlowSpec, L: DiffOp | None = None, om: OmegaSeries | None = None) -> list:
    """u_k,t = h_k with h the remainder of the lam^0 part of the flow operator."""
    P = flow_operator(spec, L, om)
    L = P.modulus
    _, h = hat_and_remainder(P.coefficient(0), L)
    return h.padded(spec.n)


def bracket_evolutionary(Fv, Gv) -> list:
    """Commutator of evolutionary fields via Frechet derivatives."""
    if len(Fv) != len(Gv):
        raise ValueError("fields over different n")
    n = len(Fv)

    def frechet(A, B, i):
        terms = []
        for k in range(n):
            for m in range(A[i].max_order(k) + 1):
                d = A[i].partial((k, m))
                if d:
                    terms.append(d * B[k].dx(m))
        return poly_sum(terms)

    return [frechet(Fv, Gv, i) - frechet(Gv, Fv, i) for i in range(n)]


def adler_map(X: PsiDO, L: DiffOp) -> PsiDO:
    """L (X L)_+ - (L X)_+ L."""
    n = L.degree
    Lp = PsiDO.from_diffop(L)
    need = n
    if X.low is not None and X.low > -need:
        raise TruncationError(f"adler_map needs X certified to D^-{need}")
    xl = plus_part(psido_mul(X, Lp, need))
    lx = plus_part(psido_mul(Lp, X, need))
    return PsiDO.from_diffop(compose(L, xl) - compose(lx, L))


@dataclass
class KernelPair:
    X: PsiDO
    adler_zero: bool
    dual_zero: bool
    adler: PsiDO
    dual: DualCoset


def dual_kernel_residual(Q: DualCoset, L: DiffOp) -> DualCoset:
    from .diffop import adjoint

    return dual_apply(adjoint(L), Q, L)


def kernel_pair(Q: DualCoset, L: DiffOp) -> KernelPair:
    """X = sum D^(-1-j) Q_j with both kernel tests computed independently."""
    if Q.n != L.degree:
        raise ValueError("dual coset length does not match operator order")
    X = from_right_coeffs(Q.coeffs, L.degree)
    A = adler_map(X, L)
    R = dual_kernel_residual(Q, L)
    return KernelPair(X, A.is_zero(), R.is_zero(), A, R)


def eigenring_dual(X_hat: DiffOp, L: DiffOp) -> DualCoset:
    """Dual image Xhat* . delta_{n-1} of an eigenring element."""
    from .diffop import adjoint

    return dual_apply(adjoint(X_hat), DualCoset.delta(L.degree - 1, L.degree), L)


def lambda_shifted_omega(om: OmegaSeries, name: str = "lam") -> tuple:
    """L - lam and sum_k Omega_k lam^(T-k), with lam a central constant symbol.

    (L - lam) Y = Yhat (L - lam) - h_T exactly, so Y is an eigenring
    element up to a lam-free remainder.
    """
    lam = DiffPoly.constant_symbol(name)
    L = om.L
    Llam = L - DiffOp([lam])
    T = om.T
    acc = DiffOp()
    for k, c in enumerate(om.coeffs):
        acc = acc + c.scale(lam ** (T - k))
    return Llam, acc


def split_in_lambda(obj, name: str = "lam") -> dict:
    """{power: same-kind object} for DiffOp, PsiDO or DualCoset coefficients."""
    out: dict = {}

    def put(key, pos, p):
        for e, part in p.coefficients_in(name).items():
            out.setdefault(e, {}).setdefault(key, {})[pos] = part

    if isinstance(obj, DiffOp):
        for i, c in enumerate(obj.coeffs):
            put("op", i, c)
        return {e: DiffOp([d["op"].get(i, ZERO) for i in range(obj.degree + 1)]) for e, d in out.items()}
    if isinstance(obj, PsiDO):
        for i, c in obj.terms.items():
            put("ps", i, c)
        return {e: PsiDO(d["ps"], obj.low) for e, d in out.items()}
    if isinstance(obj, DualCoset):
        for i, c in enumerate(obj.coeffs):
            put("q", i, c)
        return {e: DualCoset([d["q"].get(i, ZERO) for i in range(obj.n)]) for e, d in out.items()}
    raise TypeError(type(obj))


def _lam_free(p: DiffPoly, name: str = "lam") -> bool:
    return set(p.coefficients_in(name)) <= {0}


def eigenring_kernel_check(om: OmegaSeries, Y: DiffOp | None = None) -> dict:
    """Kernel membership of the dual image of the lam-shifted Omega.

    Both the Adler residual and the dual residual must vanish in every
    positive power of lam; the lam^0 part carries the truncation remainder.
    Passing another coset Y runs the same test on it (a negative control).
    """
    Llam, Yom = lambda_shifted_omega(om)
    Y = Yom if Y is None else Y
    yhat, h = hat_and_remainder(Y, Llam)
    pair = kernel_pair(eigenring_dual(yhat, Llam), Llam)
    adler_parts = split_in_lambda(plus_part(pair.adler))
    dual_parts = split_in_lambda(pair.dual)
    adler_pos = [e for e, v in adler_parts.items() if e >= 1 and v]
    dual_pos = [e for e, v in dual_parts.items() if e >= 1 and not v.is_zero()]
    return {
        "remainder_lam_free": all(_lam_free(c) for c in h.coeffs),
        "adler_positive_zero": not adler_pos,
        "dual_positive_zero": not dual_pos,
        "agree": (not adler_pos) == (not dual_pos),
    }


def flow_lax_pair(spec: FlowSpec, L: DiffOp | None = None) -> tuple:
    """(rhs, X): the flow and matrix_rep of its lam^0 operator, for F_t - X_x + [F, X] = 0."""
    from .diffop import matrix_rep

    P = flow_operator(spec, L)
    L = P.modulus
    P0 = P.coefficient(0)
    _, h = hat_and_remainder(P0, L)
    return h.padded(spec.n), matrix_rep(P0, L)
