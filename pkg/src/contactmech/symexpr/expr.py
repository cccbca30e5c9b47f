"""Immutable symbolic expressions with a canonical rational normal form.

An expression is stored as a pair of multivariate polynomials (numerator,
denominator) over *atoms*.  An atom is either a named symbol or a function
application sin/cos/exp/ln of another expression.  Monomials carry signed
integer exponents, so division by a single term folds exactly into the
numerator; only genuinely multi-term denominators survive as a denominator
polynomial.

Canonicalization applied on every construction:

* terms flattened, merged and sorted under a fixed total order on atoms;
* rational coefficients folded exactly (arbitrary-precision ``Fraction``);
* ``exp(u)**k`` folded to ``exp(k*u)`` and products of exponentials merged;
* ``sin(u)**2`` rewritten to ``1 - cos(u)**2`` (powers >= 2 reduced);
* ``sin(-u) -> -sin(u)``, ``cos(-u) -> cos(u)``, ``exp(0) -> 1``, ``ln(1) -> 0``;
* the denominator is monic, content-free, and absorbed entirely when it is a
  single term.

Construction is deterministic, so canonicalization is idempotent by
definition; two expressions built through different routes may still differ
structurally while being equal as functions, which is what the probabilistic
zero test is for.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Optional, Union

from .errors import EvaluationDomainError

ROLES = (
    "position",
    "velocity",
    "momentum",
    "action",
    "parameter",
    "multiplier",
    "free-function",
)

Number = Union[int, Fraction]


@dataclass(frozen=True)
class Symbol:
    """A named indeterminate with a kinematic role and optional component index."""

    name: str
    role: str = "parameter"
    index: Optional[int] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown symbol role {self.role!r}")

    def __repr__(self):
        return self.name

    # Arithmetic on symbols builds expressions, so model code reads naturally.
    def __add__(self, other):
        return to_expr(self) + other

    def __radd__(self, other):
        return to_expr(other) + to_expr(self)

    def __sub__(self, other):
        return to_expr(self) - other

    def __rsub__(self, other):
        return to_expr(other) - to_expr(self)

    def __mul__(self, other):
        return to_expr(self) * other

    def __rmul__(self, other):
        return to_expr(other) * to_expr(self)

    def __truediv__(self, other):
        return to_expr(self) / other

    def __rtruediv__(self, other):
        return to_expr(other) / to_expr(self)

    def __pow__(self, k):
        return to_expr(self) ** k

    def __neg__(self):
        return -to_expr(self)


class Func:
    """A function-application atom: sin, cos, exp or ln of an expression."""

    __slots__ = ("kind", "arg", "_key")
    KINDS = ("sin", "cos", "exp", "ln")

    def __init__(self, kind: str, arg: "Expr"):
        if kind not in Func.KINDS:
            raise ValueError(f"unknown function {kind!r}")
        self.kind = kind
        self.arg = arg
        self._key = (1, kind, arg.key)

    def __eq__(self, other):
        return isinstance(other, Func) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"{self.kind}({self.arg!r})"


Atom = Union[Symbol, Func]


def _atom_key(atom: Atom):
    if isinstance(atom, Symbol):
        return (0, atom.name, atom.role, -1 if atom.index is None else atom.index)
    return atom._key


# A monomial is a sorted tuple of (atom, nonzero signed exponent); a term is
# (coefficient, monomial); a polynomial is a sorted tuple of terms.
Mono = tuple
Term = tuple
Poly = tuple

_P_ZERO: Poly = ()
_P_ONE: Poly = ((Fraction(1), ()),)


def _mono_key(mono: Mono):
    return tuple((_atom_key(a), e) for a, e in mono)


def _sort_poly(terms: Iterable[Term]) -> Poly:
    return tuple(sorted(terms, key=lambda t: _mono_key(t[1])))


def _collect(terms: Iterable[Term]) -> Poly:
    acc: dict = {}
    for coeff, mono in terms:
        key = _mono_key(mono)
        if key in acc:
            old_coeff, _ = acc[key]
            coeff = old_coeff + coeff
        acc[key] = (coeff, mono)
    return _sort_poly((c, m) for c, m in acc.values() if c != 0)


def _normalize_term(coeff: Fraction, pairs: Iterable[tuple]) -> Poly:
    """Merge exponents, fold exponentials, reduce sin powers; returns a Poly."""
    if coeff == 0:
        return _P_ZERO
    exps: dict = {}
    for atom, e in pairs:
        exps[atom] = exps.get(atom, 0) + e
    exp_arg = None  # combined argument of all exp factors
    plain = []
    for atom, e in exps.items():
        if e == 0:
            continue
        if isinstance(atom, Func) and atom.kind == "exp":
            piece = atom.arg * e
            exp_arg = piece if exp_arg is None else exp_arg + piece
        else:
            plain.append((atom, e))
    if exp_arg is not None and exp_arg.num:
        plain.append((Func("exp", exp_arg), 1))
    # Reduce any sin(u)**k with k >= 2 via sin**2 = 1 - cos**2.
    for i, (atom, e) in enumerate(plain):
        if isinstance(atom, Func) and atom.kind == "sin" and e >= 2:
            rest = plain[:i] + plain[i + 1 :]
            if e % 2:
                rest = rest + [(atom, 1)]
            base = _collect([(coeff, tuple(sorted(rest, key=lambda p: _atom_key(p[0]))))])
            cos2 = _collect(
                [
                    (Fraction(1), ()),
                    (Fraction(-1), ((Func("cos", atom.arg), 2),)),
                ]
            )
            return _poly_mul(base, _poly_pow(cos2, e // 2))
    mono = tuple(sorted(plain, key=lambda p: _atom_key(p[0])))
    return ((coeff, mono),)


def _poly_add(a: Poly, b: Poly) -> Poly:
    return _collect(list(a) + list(b))


def _poly_neg(a: Poly) -> Poly:
    return tuple((-c, m) for c, m in a)


def _poly_mul(a: Poly, b: Poly) -> Poly:
    out: list = []
    for ca, ma in a:
        for cb, mb in b:
            out.extend(_normalize_term(ca * cb, list(ma) + list(mb)))
    return _collect(out)


def _poly_pow(a: Poly, k: int) -> Poly:
    result = _P_ONE
    for _ in range(k):
        result = _poly_mul(result, a)
    return result


def _mono_invert(term: Term) -> Term:
    coeff, mono = term
    return (Fraction(1) / coeff, tuple((a, -e) for a, e in mono))


class Expr:
    """Canonical immutable expression; all arithmetic returns new values."""

    __slots__ = ("num", "den", "_key", "_hash")

    def __init__(self, num: Poly, den: Poly):
        # Private; use module helpers or arithmetic to build expressions.
        self.num = num
        self.den = den
        self._key = None
        self._hash = None

    @property
    def key(self):
        if self._key is None:
            num_key = tuple(
                (c.numerator, c.denominator, _mono_key(m)) for c, m in self.num
            )
            den_key = tuple(
                (c.numerator, c.denominator, _mono_key(m)) for c, m in self.den
            )
            self._key = (num_key, den_key)
        return self._key

    def __eq__(self, other):
        if not isinstance(other, Expr):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self.key)
        return self._hash

    def __repr__(self):
        from .dsl import to_text

        return to_text(self)

    __str__ = __repr__

    # -- predicates ------------------------------------------------------

    def is_zero_canonical(self) -> bool:
        return not self.num

    def is_constant(self) -> bool:
        return not self.den_nontrivial() and (
            not self.num or (len(self.num) == 1 and self.num[0][1] == ())
        )

    def constant_value(self) -> Optional[Fraction]:
        if not self.num and self.den == _P_ONE:
            return Fraction(0)
        if self.is_constant():
            return self.num[0][0]
        return None

    def den_nontrivial(self) -> bool:
        return self.den != _P_ONE

    def is_term(self) -> bool:
        """True when the expression is a single product of atom powers."""
        return self.den == _P_ONE and len(self.num) == 1

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = to_expr(other)
        if self.den == other.den:
            return _make(_poly_add(self.num, other.num), self.den)
        num = _poly_add(
            _poly_mul(self.num, other.den), _poly_mul(other.num, self.den)
        )
        return _make(num, _poly_mul(self.den, other.den))

    def __radd__(self, other):
        return to_expr(other) + self

    def __sub__(self, other):
        return self + (-to_expr(other))

    def __rsub__(self, other):
        return to_expr(other) + (-self)

    def __neg__(self):
        return _make(_poly_neg(self.num), self.den)

    def __mul__(self, other):
        other = to_expr(other)
        return _make(
            _poly_mul(self.num, other.num), _poly_mul(self.den, other.den)
        )

    def __rmul__(self, other):
        return to_expr(other) * self

    def __truediv__(self, other):
        other = to_expr(other)
        if other.is_zero_canonical():
            raise ZeroDivisionError("division by canonical zero expression")
        return _make(
            _poly_mul(self.num, other.den), _poly_mul(self.den, other.num)
        )

    def __rtruediv__(self, other):
        return to_expr(other) / self

    def __pow__(self, k):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        if k == 0:
            return ONE
        if k < 0:
            if self.is_zero_canonical():
                raise ZeroDivisionError("zero to a negative power")
            return _make(_poly_pow(self.den, -k), _poly_pow(self.num, -k))
        return _make(_poly_pow(self.num, k), _poly_pow(self.den, k))

    # -- structure -------------------------------------------------------

    def atoms(self):
        seen = set()
        for poly in (self.num, self.den):
            for _, mono in poly:
                for atom, _ in mono:
                    if atom not in seen:
                        seen.add(atom)
                        yield atom

    def stable_digest(self) -> int:
        """Process-independent structural hash (used to seed random probes)."""
        blob = repr(self.key).encode()
        return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "big")


def _strip_den_content(num: Poly, den: Poly) -> tuple:
    """Remove atom powers common to every denominator term."""
    if len(den) <= 1:
        return num, den
    common: dict = None
    for _, mono in den:
        table = dict(mono)
        if common is None:
            common = dict(table)
        else:
            for atom in list(common):
                if atom in table:
                    common[atom] = min(common[atom], table[atom])
                else:
                    common[atom] = min(common[atom], 0)
            for atom in table:
                if atom not in common:
                    common[atom] = min(table[atom], 0)
        common = {a: e for a, e in common.items() if e != 0}
        if not common:
            return num, den
    shift = tuple(common.items())
    inv = tuple((a, -e) for a, e in shift)
    den = _collect(
        sum((list(_normalize_term(c, list(m) + list(inv))) for c, m in den), [])
    )
    num = _collect(
        sum((list(_normalize_term(c, list(m) + list(inv))) for c, m in num), [])
    )
    return num, den


def _make(num: Poly, den: Poly) -> Expr:
    if not den:
        raise ZeroDivisionError("denominator is canonically zero")
    if not num:
        return ZERO
    num, den = _strip_den_content(num, den)
    if len(den) == 1:
        inv = _mono_invert(den[0])
        num = _collect(
            sum(
                (
                    list(_normalize_term(c * inv[0], list(m) + list(inv[1])))
                    for c, m in num
                ),
                [],
            )
        )
        den = _P_ONE
    else:
        lead = den[0][0]
        if lead != 1:
            num = tuple((c / lead, m) for c, m in num)
            den = tuple((c / lead, m) for c, m in den)
    return Expr(num, den)


ZERO = Expr(_P_ZERO, _P_ONE)
ONE = Expr(_P_ONE, _P_ONE)


def const(value) -> Expr:
    """Exact rational constant (int, Fraction, or decimal string)."""
    f = Fraction(value)
    if f == 0:
        return ZERO
    return Expr(((f, ()),), _P_ONE)


def to_expr(x) -> Expr:
    if isinstance(x, Expr):
        return x
    if isinstance(x, Symbol):
        return Expr(((Fraction(1), ((x, 1),)),), _P_ONE)
    if isinstance(x, (int, Fraction)):
        return const(x)
    raise TypeError(f"cannot interpret {x!r} as an expression")


def func(kind: str, arg) -> Expr:
    """Apply sin/cos/exp/ln with the folding rules of the canonical form."""
    arg = to_expr(arg)
    cval = arg.constant_value()
    if kind in ("sin", "cos", "exp") and cval == 0:
        return ZERO if kind == "sin" else ONE
    if kind == "ln" and cval == 1:
        return ZERO
    if kind in ("sin", "cos") and arg.num and arg.num[0][0] < 0:
        if kind == "sin":
            return -func("sin", -arg)
        return func("cos", -arg)
    return Expr(((Fraction(1), ((Func(kind, arg), 1),)),), _P_ONE)


def sin(arg) -> Expr:
    return func("sin", arg)


def cos(arg) -> Expr:
    return func("cos", arg)


def exp(arg) -> Expr:
    return func("exp", arg)


def ln(arg) -> Expr:
    return func("ln", arg)


# ---------------------------------------------------------------------------
# differentiation / substitution / evaluation
# ---------------------------------------------------------------------------


def _atom_diff(atom: Atom, x: Symbol) -> Expr:
    if isinstance(atom, Symbol):
        return ONE if atom == x else ZERO
    inner = diff(atom.arg, x)
    if inner.is_zero_canonical():
        return ZERO
    if atom.kind == "sin":
        return func("cos", atom.arg) * inner
    if atom.kind == "cos":
        return -func("sin", atom.arg) * inner
    if atom.kind == "exp":
        return Expr(((Fraction(1), ((atom, 1),)),), _P_ONE) * inner
    return inner / atom.arg  # ln


def _poly_diff(p: Poly, x: Symbol) -> Expr:
    total = ZERO
    for coeff, mono in p:
        for i, (atom, e) in enumerate(mono):
            d = _atom_diff(atom, x)
            if d.is_zero_canonical():
                continue
            rest = list(mono[:i]) + list(mono[i + 1 :]) + [(atom, e - 1)]
            factor = _make(_normalize_term(coeff * e, rest), _P_ONE)
            total = total + factor * d
    return total


def diff(e, x: Symbol) -> Expr:
    """Partial derivative; exact, with product/quotient/chain rules."""
    e = to_expr(e)
    dn = _poly_diff(e.num, x)
    if e.den == _P_ONE:
        return dn
    dd = _poly_diff(e.den, x)
    num_e = Expr(e.num, _P_ONE)
    den_e = Expr(e.den, _P_ONE)
    return (dn * den_e - num_e * dd) / (den_e * den_e)


def _subst_atom(atom: Atom, bindings) -> Expr:
    if isinstance(atom, Symbol):
        found = bindings.get(atom)
        return to_expr(atom) if found is None else to_expr(found)
    return func(atom.kind, substitute(atom.arg, bindings))


def _subst_poly(p: Poly, bindings) -> Expr:
    total = ZERO
    for coeff, mono in p:
        term = const(coeff)
        for atom, e in mono:
            term = term * (_subst_atom(atom, bindings) ** e)
        total = total + term
    return total


def substitute(e, bindings: Mapping[Symbol, object]) -> Expr:
    """Simultaneous substitution of symbols, then canonicalization."""
    e = to_expr(e)
    if not bindings:
        return e
    num = _subst_poly(e.num, bindings)
    den = _subst_poly(e.den, bindings)
    return num / den


def _eval_atom(atom: Atom, env):
    if isinstance(atom, Symbol):
        try:
            return env[atom]
        except KeyError:
            raise EvaluationDomainError(f"no value bound for symbol {atom.name}")
    v = evaluate(atom.arg, env)
    x = float(v)
    if atom.kind == "sin":
        return math.sin(x)
    if atom.kind == "cos":
        return math.cos(x)
    if atom.kind == "exp":
        return math.exp(x)
    if x <= 0:
        raise EvaluationDomainError("ln of a nonpositive value")
    return math.log(x)


def _eval_poly(p: Poly, env):
    total = Fraction(0)
    for coeff, mono in p:
        term = coeff
        for atom, e in mono:
            base = _eval_atom(atom, env)
            if base == 0 and e < 0:
                raise EvaluationDomainError("zero raised to a negative power")
            term = term * base**e
        total = total + term
    return total


def evaluate(e, env: Mapping[Symbol, object]):
    """Numeric value; exact Fraction when no transcendental atom is hit."""
    e = to_expr(e)
    nv = _eval_poly(e.num, env)
    dv = _eval_poly(e.den, env)
    if dv == 0:
        raise EvaluationDomainError("denominator vanishes at the point")
    return nv / dv


def primitive_part(e) -> Expr:
    """Strip nowhere-vanishing factors from a constraint expression.

    Drops the denominator, the rational content, and (for multi-term
    numerators) the monomial gcd across terms, then fixes the sign so the
    first canonical term is positive.  Single-term expressions keep their
    atoms and lose only the coefficient.  This is the generic-point
    convention: a stripped factor vanishes only on thin sets.
    """
    e = to_expr(e)
    if e.is_zero_canonical():
        return ZERO
    num = e.num
    if len(num) == 1:
        coeff, mono = num[0]
        kept = tuple(
            (a, k)
            for a, k in mono
            if not (isinstance(a, Symbol) and a.role == "parameter")
        )
        return _make(((Fraction(1), kept),), _P_ONE)
    if len(num) > 1:
        common: dict = None
        for _, mono in num:
            table = dict(mono)
            if common is None:
                common = dict(table)
            else:
                for atom in list(common):
                    common[atom] = min(common[atom], table.get(atom, 0))
                for atom in table:
                    if atom not in common:
                        common[atom] = min(table[atom], 0)
            common = {a: k for a, k in common.items() if k != 0}
            if not common:
                break
        if common:
            inv = tuple((a, -k) for a, k in common.items())
            num = _collect(
                sum(
                    (list(_normalize_term(c, list(m) + list(inv))) for c, m in num),
                    [],
                )
            )
    scale = num[0][0]
    num = tuple((c / scale, m) for c, m in num)
    return _make(num, _P_ONE)


def free_symbols(e) -> frozenset:
    e = to_expr(e)
    out = set()
    stack = [e]
    while stack:
        cur = stack.pop()
        for atom in cur.atoms():
            if isinstance(atom, Symbol):
                out.add(atom)
            else:
                stack.append(atom.arg)
    return frozenset(out)


def contains_symbol(e, x: Symbol) -> bool:
    return x in free_symbols(e)
