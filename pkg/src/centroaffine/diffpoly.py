"""Exact differential polynomials in the curvature jets u_k^(m).

A monomial is a sorted tuple of jet variables ``(idx, order)`` with
repetition for powers.  ``idx`` encodes the kind of symbol:

* ``0 <= idx < AUX_BASE``: curvature component ``u_idx``;
* ``AUX_BASE <= idx < CONST_BASE``: an auxiliary differential indeterminate
  (``z``, ``y``, ...), differentiated like any other function;
* ``idx >= CONST_BASE``: a central constant symbol (``lam``) killed by d/dx.

Coefficients are ``gmpy2.mpq`` rationals.  Values are immutable.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from gmpy2 import mpq

AUX_BASE = 1 << 32
CONST_BASE = 1 << 96
_NAME_BYTES = 8

Var = tuple  # (idx, order)
Mono = tuple  # sorted tuple of Var, the public monomial form

# Internally a monomial is an int packing one exponent field per jet
# variable; slots are handed out on first use, so products are additions.
_BITS = 16
_FIELD = (1 << _BITS) - 1
_SLOT: dict = {}
_VARS: list = []
_DECODED: dict = {0: ()}


class NotExact(ArithmeticError):
    """Raised when a differential polynomial is not a total x-derivative."""


def rational(value) -> mpq:
    if isinstance(value, mpq):
        return value
    if isinstance(value, Fraction):
        return mpq(value.numerator, value.denominator)
    if isinstance(value, float):
        raise TypeError("floating-point coefficients are not allowed")
    return mpq(value)


def _encode_name(name: str, base: int) -> int:
    raw = name.encode("ascii")
    if not raw or len(raw) > _NAME_BYTES or not name.isidentifier():
        raise ValueError(f"bad symbol name {name!r}")
    return base + int.from_bytes(raw, "big")


def _decode_name(idx: int) -> str:
    base = CONST_BASE if idx >= CONST_BASE else AUX_BASE
    code = idx - base
    return code.to_bytes((code.bit_length() + 7) // 8, "big").decode("ascii")


def aux_index(name: str) -> int:
    return _encode_name(name, AUX_BASE)


def const_index(name: str) -> int:
    return _encode_name(name, CONST_BASE)


def is_curvature(idx: int) -> bool:
    return idx < AUX_BASE


def is_constant_symbol(idx: int) -> bool:
    return idx >= CONST_BASE


def var_name(idx: int) -> str:
    if idx < AUX_BASE:
        return f"u{idx}"
    return _decode_name(idx)


def _slot(v: Var) -> int:
    s = _SLOT.get(v)
    if s is None:
        s = len(_VARS)
        _SLOT[v] = s
        _VARS.append(v)
    return s


def _unit(v: Var) -> int:
    return 1 << (_BITS * _slot(v))


def _decode(m: int) -> tuple:
    """((var, exponent), ...) sorted by var."""
    d = _DECODED.get(m)
    if d is None:
        out = []
        x, slot = m, 0
        while x:
            e = x & _FIELD
            if e:
                out.append((_VARS[slot], e))
            x >>= _BITS
            slot += 1
        d = tuple(sorted(out))
        _DECODED[m] = d
    return d


def _to_tuple(m: int) -> Mono:
    out = []
    for v, e in _decode(m):
        out.extend([v] * e)
    return tuple(out)


def _from_tuple(mono) -> int:
    m = 0
    for v in mono:
        v = (int(v[0]), int(v[1]))
        if v[1] < 0:
            raise ValueError("negative derivative order")
        m += _unit(v)
    return m


def _mono_degree(m: int) -> int:
    return sum(e for _, e in _decode(m))


def _rank(v: Var) -> tuple:
    # ordering used by integrate_exact: x-derivatives rank above everything
    # of lower order; constant symbols never lead.
    idx, order = v
    if idx >= CONST_BASE:
        return (-1, idx)
    return (order, idx)


class DiffPoly:
    """Sparse polynomial over the rationals in jet variables."""

    __slots__ = ("_t", "_derivs", "_hash")

    def __init__(self, terms: Mapping[Mono, object] | None = None, *, _trusted=False):
        if _trusted:
            self._t = terms
        else:
            clean: dict = {}
            for mono, coef in (terms or {}).items():
                c = rational(coef)
                if c:
                    k = _from_tuple(mono)
                    clean[k] = clean.get(k, 0) + c
            self._t = {k: c for k, c in clean.items() if c}
        self._derivs = None
        self._hash = None

    @property
    def terms(self) -> dict:
        """Monomial tuple -> coefficient view."""
        return {_to_tuple(m): c for m, c in self._t.items()}

    def __len__(self) -> int:
        return len(self._t)

    # -- constructors ------------------------------------------------------
    @classmethod
    def const(cls, c) -> "DiffPoly":
        c = rational(c)
        return cls({0: c}, _trusted=True) if c else ZERO

    @classmethod
    def u(cls, k: int, order: int = 0) -> "DiffPoly":
        if k < 0 or k >= AUX_BASE or order < 0:
            raise ValueError("invalid curvature jet")
        return cls({_unit((k, order)): mpq(1)}, _trusted=True)

    @classmethod
    def aux(cls, name: str, order: int = 0) -> "DiffPoly":
        if order < 0:
            raise ValueError("negative derivative order")
        return cls({_unit((aux_index(name), order)): mpq(1)}, _trusted=True)

    @classmethod
    def constant_symbol(cls, name: str) -> "DiffPoly":
        return cls({_unit((const_index(name), 0)): mpq(1)}, _trusted=True)

    # -- basic protocol ----------------------------------------------------
    def __bool__(self) -> bool:
        return bool(self._t)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffPoly):
            try:
                other = DiffPoly.const(other)
            except TypeError:
                return NotImplemented
        return self._t == other._t

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._t.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"DiffPoly({self.to_text()!r})"

    def __str__(self) -> str:
        return self.to_text()

    # -- ring operations ---------------------------------------------------
    def __add__(self, other) -> "DiffPoly":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        if not other._t:
            return self
        if not self._t:
            return other
        out = dict(self._t)
        for m, c in other._t.items():
            s = out.get(m)
            if s is None:
                out[m] = c
            else:
                s = s + c
                if s:
                    out[m] = s
                else:
                    del out[m]
        return DiffPoly(out, _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly({m: -c for m, c in self._t.items()}, _trusted=True)

    def __sub__(self, other) -> "DiffPoly":
        other = _coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "DiffPoly":
        return (-self) + other

    def __mul__(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return _mul(self, other)
        try:
            c = rational(other)
        except TypeError:
            return NotImplemented
        if not c:
            return ZERO
        return DiffPoly({m: v * c for m, v in self._t.items()}, _trusted=True)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "DiffPoly":
        c = rational(other)
        return self * (1 / c)

    def __pow__(self, k: int) -> "DiffPoly":
        out = ONE
        for _ in range(k):
            out = out * self
        return out

    # -- structure ---------------------------------------------------------
    def degree(self) -> int:
        return max((_mono_degree(m) for m in self._t), default=0)

    def constant_term(self) -> mpq:
        return self._t.get(0, mpq(0))

    def is_constant(self) -> bool:
        return all(m == 0 for m in self._t)

    def variables(self) -> set:
        return {v for m in self._t for v, _ in _decode(m)}

    def symbols(self) -> set:
        return {v[0] for v in self.variables()}

    def max_order(self, idx: int) -> int:
        return max((o for (i, o) in self.variables() if i == idx), default=-1)

    def is_linear(self) -> bool:
        return all(_mono_degree(m) == 1 for m in self._t)

    # -- calculus ----------------------------------------------------------
    def dx(self, k: int = 1) -> "DiffPoly":
        """k-th total x-derivative (memoised)."""
        if k == 0:
            return self
        if self._derivs is None:
            self._derivs = [self]
        while len(self._derivs) <= k:
            self._derivs.append(_dx(self._derivs[-1]))
        return self._derivs[k]

    def partial(self, var: Var) -> "DiffPoly":
        """Partial derivative with respect to the jet variable ``var``."""
        var = (int(var[0]), int(var[1]))
        if var not in _SLOT:
            return ZERO
        unit = _unit(var)
        shift = _BITS * _SLOT[var]
        out = {}
        for m, c in self._t.items():
            e = (m >> shift) & _FIELD
            if e:
                out[m - unit] = c * e
        return DiffPoly(out, _trusted=True)

    def _split_constant(self, name: str) -> dict:
        v = (const_index(name), 0)
        parts: dict = {}
        if v not in _SLOT:
            return {0: dict(self._t)} if self._t else {}
        shift = _BITS * _SLOT[v]
        for m, c in self._t.items():
            e = (m >> shift) & _FIELD
            parts.setdefault(e, {})[m - (e << shift)] = c
        return parts

    def substitute_constant(self, name: str, value) -> "DiffPoly":
        """Replace a central constant symbol by a rational value."""
        value = rational(value)
        out: dict = {}
        for e, part in self._split_constant(name).items():
            f = value ** e
            for m, c in part.items():
                out[m] = out.get(m, 0) + c * f
        return DiffPoly({m: c for m, c in out.items() if c}, _trusted=True)

    def coefficients_in(self, name: str) -> dict:
        """Split as a polynomial in a constant symbol: ``{power: DiffPoly}``."""
        return {e: DiffPoly(t, _trusted=True) for e, t in self._split_constant(name).items()}

    # -- serialisation -----------------------------------------------------
    def sorted_terms(self) -> list:
        items = [(_to_tuple(m), c) for m, c in self._t.items()]
        return sorted(items, key=lambda t: (len(t[0]), t[0]), reverse=True)

    def to_text(self) -> str:
        if not self._t:
            return "0"
        pieces = []
        for mono, c in self.sorted_terms():
            sign = "-" if c < 0 else "+"
            a = -c if c < 0 else c
            body = _mono_text(mono)
            if not body:
                txt = str(a)
            elif a == 1:
                txt = body
            else:
                txt = f"{a}*{body}"
            pieces.append((sign, txt))
        first_sign, first = pieces[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, txt in pieces[1:]:
            out += f" {sign} {txt}"
        return out

    def to_json(self) -> dict:
        terms = []
        for mono, c in self.sorted_terms():
            terms.append({"coef": str(c), "mono": [[_json_var(i), o] for i, o in mono]})
        return {"terms": terms}

    @classmethod
    def from_json(cls, obj: Mapping) -> "DiffPoly":
        terms: dict = {}
        for t in obj["terms"]:
            mono = tuple(sorted((_parse_json_var(i), int(o)) for i, o in t["mono"]))
            terms[mono] = terms.get(mono, mpq(0)) + mpq(t["coef"])
        return cls(terms)


def _json_var(idx: int):
    if idx < AUX_BASE:
        return idx
    if idx >= CONST_BASE:
        return "const:" + _decode_name(idx)
    return _decode_name(idx)


def _parse_json_var(v) -> int:
    if isinstance(v, int):
        return v
    if v.startswith("const:"):
        return const_index(v[6:])
    return aux_index(v)


def _var_text(v: Var) -> str:
    idx, order = v
    name = var_name(idx)
    return name if order == 0 else f"{name}^({order})"


def _mono_text(mono: Mono) -> str:
    parts = []
    i = 0
    while i < len(mono):
        j = i
        while j < len(mono) and mono[j] == mono[i]:
            j += 1
        txt = _var_text(mono[i])
        parts.append(txt if j - i == 1 else f"{txt}^{j - i}")
        i = j
    return "*".join(parts)


def _coerce(x):
    if isinstance(x, DiffPoly):
        return x
    try:
        return DiffPoly.const(x)
    except TypeError:
        return None


def _mul(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    ta, tb = a._t, b._t
    if not ta or not tb:
        return ZERO
    if len(ta) < len(tb):
        ta, tb = tb, ta
    out: dict = {}
    get = out.get
    items_b = list(tb.items())
    for ma, ca in ta.items():
        for mb, cb in items_b:
            m = ma + mb
            out[m] = get(m, 0) + ca * cb
    return DiffPoly({m: c for m, c in out.items() if c}, _trusted=True)


def _dx(p: DiffPoly) -> DiffPoly:
    out: dict = {}
    get = out.get
    for m, c in p._t.items():
        for v, e in _decode(m):
            if v[0] >= CONST_BASE:
                continue
            nm = m - _unit(v) + _unit((v[0], v[1] + 1))
            out[nm] = get(nm, 0) + c * e
    return DiffPoly({m: c for m, c in out.items() if c}, _trusted=True)


ZERO = DiffPoly({}, _trusted=True)
ONE = DiffPoly({0: mpq(1)}, _trusted=True)


# -- module-level operations ----------------------------------------------
def d_x(p: DiffPoly) -> DiffPoly:
    """Total x-derivative, extending u_k^(m) -> u_k^(m+1) by Leibniz."""
    return p.dx()


def _resolve_index(k) -> int:
    return aux_index(k) if isinstance(k, str) else int(k)


def euler_derivative(p: DiffPoly, k) -> DiffPoly:
    """Variational derivative  sum_m (-d_x)^m dp/du_k^(m)."""
    idx = _resolve_index(k)
    top = p.max_order(idx)
    out = ZERO
    for m in range(top + 1):
        term = p.partial((idx, m))
        if not term:
            continue
        term = term.dx(m)
        out = out + (term if m % 2 == 0 else -term)
    return out


def integrate_exact(p: DiffPoly) -> DiffPoly:
    """Antiderivative with zero constant term, or raise :class:`NotExact`.

    Integration by parts against the highest-ranked jet variable.  If
    ``p = d_x q`` then the top variable of ``p`` is the successor of the
    top variable ``w`` of ``q`` and enters linearly with coefficient
    ``dq/dw``, so each pass strips the leading variable exactly.
    """
    rest = p
    acc = ZERO
    while rest:
        top = max((v for v in rest.variables() if v[0] < CONST_BASE), key=_rank, default=None)
        if top is None or top[1] == 0:
            raise NotExact(f"not a total derivative: {p.to_text()}")
        shift = _BITS * _SLOT[top]
        unit = 1 << shift
        w = (top[0], top[1] - 1)
        wrank = _rank(w)
        wunit = _unit(w)
        wshift = _BITS * _SLOT[w]
        prim = {}
        for m, c in rest._t.items():
            e = (m >> shift) & _FIELD
            if e > 1:
                raise NotExact(f"nonlinear in {_var_text(top)}: {p.to_text()}")
            if e == 1:
                cm = m - unit
                if any(v[0] < CONST_BASE and _rank(v) > wrank for v, _ in _decode(cm)):
                    raise NotExact(f"not a total derivative: {p.to_text()}")
                ew = (cm >> wshift) & _FIELD
                prim[cm + wunit] = c / (ew + 1)
        piece = DiffPoly(prim, _trusted=True)
        acc = acc + piece
        rest = rest - piece.dx()
    return acc


def is_total_derivative(p: DiffPoly) -> bool:
    try:
        integrate_exact(p)
    except NotExact:
        return False
    return True


def u(k: int, order: int = 0) -> DiffPoly:
    return DiffPoly.u(k, order)


def aux(name: str, order: int = 0) -> DiffPoly:
    return DiffPoly.aux(name, order)


def poly_sum(items: Iterable[DiffPoly]) -> DiffPoly:
    """Sum many polynomials with a single accumulator."""
    out: dict = {}
    for p in items:
        for m, c in p._t.items():
            out[m] = out.get(m, 0) + c
    return DiffPoly({m: c for m, c in out.items() if c}, _trusted=True)
