"""Exact coefficient domains: multivariate polynomials over big rationals,
rational functions, and small dense matrices over any coefficient domain.

Polynomials are stored sparsely as {exponent-vector: Fraction} with a fixed
canonical variable order, so equality is structural.  All operations are pure;
values are immutable and safe to share between threads.
"""

from __future__ import annotations

import json
import math
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

# Canonical variable precedence; unknown names sort after these, alphabetically.
_VAR_PRECEDENCE = ("p", "rho", "x", "a", "b", "c", "q", "eta", "y")

Scalar = Union[int, Fraction]


class ExactDivisionError(ArithmeticError):
    """Raised when an exact polynomial division leaves a remainder."""


class SeriesError(ValueError):
    """Raised when a power-series expansion is undefined (den(0) not invertible)."""


def _var_key(name: str):
    try:
        return (0, _VAR_PRECEDENCE.index(name))
    except ValueError:
        return (1, name)


def _sort_vars(names: Iterable[str]) -> tuple:
    return tuple(sorted(set(names), key=_var_key))


def _coerce_coeff(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    raise TypeError(f"exact polynomial coefficients must be rational, got {type(value).__name__}")


class MultiPoly:
    """A multivariate polynomial with exact rational coefficients."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str] = (), terms: Mapping[tuple, Scalar] | None = None):
        vars = tuple(vars)
        cleaned = {}
        if terms:
            for exps, coeff in terms.items():
                coeff = _coerce_coeff(coeff)
                if coeff == 0:
                    continue
                exps = tuple(int(e) for e in exps)
                if len(exps) != len(vars):
                    raise ValueError("exponent vector length does not match variable count")
                if any(e < 0 for e in exps):
                    raise ValueError("negative exponent")
                cleaned[exps] = cleaned.get(exps, Fraction(0)) + coeff
        # drop cancelled terms and unused variables, enforce canonical order
        cleaned = {e: c for e, c in cleaned.items() if c != 0}
        used = [i for i in range(len(vars)) if any(e[i] for e in cleaned)]
        vars_used = tuple(vars[i] for i in used)
        order = _sort_vars(vars_used)
        idx = [vars_used.index(v) for v in order]
        object.__setattr__(self, "vars", order)
        object.__setattr__(
            self,
            "terms",
            {tuple(e[used[j]] for j in idx): c for e, c in cleaned.items()}
            if used
            else ({(): c for e, c in cleaned.items()} if cleaned else {}),
        )

    # -- construction ------------------------------------------------------

    @classmethod
    def const(cls, value) -> "MultiPoly":
        value = _coerce_coeff(value)
        return cls((), {(): value} if value else {})

    @classmethod
    def variable(cls, name: str) -> "MultiPoly":
        return cls((name,), {(1,): Fraction(1)})

    def __setattr__(self, name, value):
        raise AttributeError("MultiPoly is immutable")

    # -- predicates and views -----------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.vars

    def const_value(self) -> Fraction:
        if self.vars:
            raise ValueError(f"not a constant polynomial: {self}")
        return self.terms.get((), Fraction(0))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, var: str) -> int:
        if var not in self.vars:
            return 0
        i = self.vars.index(var)
        return max((e[i] for e in self.terms), default=0)

    # -- alignment helpers ----------------------------------------------------

    @staticmethod
    def _coerce(other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            return other
        return MultiPoly.const(other)

    def _aligned(self, other: "MultiPoly"):
        allvars = _sort_vars(self.vars + other.vars)
        return allvars, self._remap(allvars), other._remap(allvars)

    def _remap(self, allvars: tuple) -> dict:
        pos = [allvars.index(v) for v in self.vars]
        out = {}
        for exps, coeff in self.terms.items():
            key = [0] * len(allvars)
            for i, e in zip(pos, exps):
                key[i] = e
            out[tuple(key)] = coeff
        return out

    # -- ring operations -----------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, (MultiPoly, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        allvars, a, b = self._aligned(other)
        for exps, coeff in b.items():
            a[exps] = a.get(exps, Fraction(0)) + coeff
        return MultiPoly(allvars, a)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly(self.vars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, (MultiPoly, int, Fraction)):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, (MultiPoly, int, Fraction)):
            return NotImplemented
        other = self._coerce(other)
        if other.is_const():
            k = other.const_value()
            if k == 0:
                return MultiPoly()
            return MultiPoly(self.vars, {e: c * k for e, c in self.terms.items()})
        if self.is_const():
            return other * self
        allvars, a, b = self._aligned(other)
        out: dict = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                key = tuple(x + y for x, y in zip(e1, e2))
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return MultiPoly(allvars, out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = MultiPoly.const(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __truediv__(self, other):
        # exact scaling by a rational only; polynomial quotients go through div_exact
        if isinstance(other, (int, Fraction)):
            k = Fraction(other)
            if k == 0:
                raise ZeroDivisionError("division of polynomial by zero")
            return self * Fraction(1, 1) * Fraction(k.denominator, k.numerator)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.vars == other.vars and self.terms == other.terms

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    # -- calculus and structure ------------------------------------------------

    def derivative(self, var: str) -> "MultiPoly":
        if var not in self.vars:
            return MultiPoly()
        i = self.vars.index(var)
        out = {}
        for exps, coeff in self.terms.items():
            e = exps[i]
            if e == 0:
                continue
            key = exps[:i] + (e - 1,) + exps[i + 1:]
            out[key] = out.get(key, Fraction(0)) + coeff * e
        return MultiPoly(self.vars, out)

    def coefficients_in(self, var: str) -> list:
        """Coefficients of var^0..var^deg, each a polynomial free of `var`."""
        if var not in self.vars:
            return [self]
        i = self.vars.index(var)
        rest = self.vars[:i] + self.vars[i + 1:]
        deg = self.degree_in(var)
        buckets: list[dict] = [{} for _ in range(deg + 1)]
        for exps, coeff in self.terms.items():
            key = exps[:i] + exps[i + 1:]
            buckets[exps[i]][key] = coeff
        return [MultiPoly(rest, b) for b in buckets]

    def univariate(self, var: str) -> list:
        """Dense ascending coefficient list; requires all other variables absent."""
        extra = [v for v in self.vars if v != var]
        if extra:
            raise ValueError(f"polynomial is not univariate in {var}: also uses {extra}")
        coeffs = self.coefficients_in(var)
        return [c.const_value() for c in coeffs]

    def substitute(self, mapping: Mapping[str, object]) -> "MultiPoly":
        """Substitute polynomials or rationals for variables (others untouched)."""
        subs = {}
        for name, value in mapping.items():
            subs[name] = value if isinstance(value, MultiPoly) else MultiPoly.const(value)
        result = MultiPoly()
        powers: dict = {}

        def power(name, e):
            base = subs.get(name, MultiPoly.variable(name))
            cache = powers.setdefault(name, {0: MultiPoly.const(1), 1: base})
            while e not in cache:
                k = max(cache)
                cache[k + 1] = cache[k] * base
            return cache[e]

        for exps, coeff in self.terms.items():
            term = MultiPoly.const(coeff)
            for name, e in zip(self.vars, exps):
                if e:
                    term = term * power(name, e)
            result = result + term
        return result

    def evaluate(self, bindings: Mapping[str, object]):
        """Horner evaluation; exact for rational bindings, numeric otherwise.

        Every variable of the polynomial must be bound.
        """
        missing = [v for v in self.vars if v not in bindings]
        if missing:
            raise KeyError(f"unbound variables: {missing}")
        if not self.vars:
            return self.terms.get((), Fraction(0))
        var = self.vars[0]
        value = bindings[var]
        acc = None
        for coeff in reversed(self.coefficients_in(var)):
            part = coeff.evaluate(bindings)
            acc = part if acc is None else acc * value + part
        return acc

    def truncate_total(self, max_degree: int) -> "MultiPoly":
        return MultiPoly(
            self.vars, {e: c for e, c in self.terms.items() if sum(e) <= max_degree}
        )

    def content(self) -> Fraction:
        """Positive rational content (gcd of all coefficients), 0 for the zero poly."""
        if not self.terms:
            return Fraction(0)
        nums = 0
        dens = 1
        for c in self.terms.values():
            nums = math.gcd(nums, abs(c.numerator))
            dens = dens * c.denominator // math.gcd(dens, c.denominator)
        return Fraction(nums, dens)

    def monic_primitive(self) -> "MultiPoly":
        """Divide out the content; leading coefficient (canonical order) positive."""
        if not self.terms:
            return self
        scale = self.content()
        lead = self.terms[max(self.terms)]
        if lead < 0:
            scale = -scale
        return self * (1 / scale)

    def div_exact(self, divisor: "MultiPoly") -> "MultiPoly":
        """Exact polynomial quotient; raises ExactDivisionError on any remainder."""
        divisor = self._coerce(divisor)
        if divisor.is_zero():
            raise ZeroDivisionError("division of polynomial by zero")
        if divisor.is_const():
            return self * (1 / divisor.const_value())
        allvars, a, b = self._aligned(divisor)
        lead_b = max(b)
        lead_b_coeff = b[lead_b]
        quotient: dict = {}
        rem = dict(a)
        while rem:
            lead_r = max(rem)
            key = tuple(x - y for x, y in zip(lead_r, lead_b))
            if any(e < 0 for e in key):
                raise ExactDivisionError("not an exact polynomial division")
            q = rem[lead_r] / lead_b_coeff
            quotient[key] = quotient.get(key, Fraction(0)) + q
            for e2, c2 in b.items():
                tgt = tuple(x + y for x, y in zip(key, e2))
                val = rem.get(tgt, Fraction(0)) - q * c2
                if val == 0:
                    rem.pop(tgt, None)
                else:
                    rem[tgt] = val
        return MultiPoly(allvars, quotient)

    # -- formatting -----------------------------------------------------------

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda item: (sum(item[0]), item[0]))

    def to_text(self) -> str:
        if not self.terms:
            return "0"
        pieces = []
        for exps, coeff in self.sorted_terms():
            factors = [
                name if e == 1 else f"{name}^{e}"
                for name, e in zip(self.vars, exps)
                if e
            ]
            mag = abs(coeff)
            if not factors:
                body = str(mag)
            elif mag == 1:
                body = "*".join(factors)
            else:
                body = "*".join([str(mag)] + factors)
            if not pieces:
                pieces.append(body if coeff > 0 else f"-{body}")
            else:
                pieces.append(f"+ {body}" if coeff > 0 else f"- {body}")
        return " ".join(pieces)

    def to_json_obj(self) -> dict:
        return {
            "vars": list(self.vars),
            "terms": [[list(e), f"{c.numerator}/{c.denominator}"] for e, c in self.sorted_terms()],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "MultiPoly":
        vars = tuple(obj["vars"])
        terms = {tuple(e): Fraction(c) for e, c in obj["terms"]}
        return cls(vars, terms)

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"MultiPoly({self.to_text()})"


def P(name: str) -> MultiPoly:
    """Shorthand for a polynomial variable."""
    return MultiPoly.variable(name)


ONE = MultiPoly.const(1)
ZERO = MultiPoly()


def poly_arith(lhs: MultiPoly, rhs: MultiPoly, op: str) -> MultiPoly:
    """Spec-surface dispatch for add/sub/mul (operators do the real work)."""
    if op == "add":
        return lhs + rhs
    if op == "sub":
        return lhs - rhs
    if op == "mul":
        return lhs * rhs
    raise ValueError(f"unknown op {op!r}")


def poly_eval(poly: MultiPoly, bindings: Mapping[str, object]):
    return poly.evaluate(bindings)


# -- multivariate gcd (primitive PRS) ------------------------------------------


def poly_gcd(f: MultiPoly, g: MultiPoly) -> MultiPoly:
    """GCD over Q[vars], normalized primitive with positive leading coefficient.

    Constants are units, so gcd of two nonzero constants is 1.
    """
    if f.is_zero():
        return g.monic_primitive()
    if g.is_zero():
        return f.monic_primitive()
    if f.is_const() or g.is_const():
        return ONE
    var = _sort_vars(f.vars + g.vars)[0]
    fc = f.coefficients_in(var)
    gc = g.coefficients_in(var)
    cont_f = _list_gcd(fc)
    cont_g = _list_gcd(gc)
    pp_f = [c.div_exact(cont_f) for c in fc]
    pp_g = [c.div_exact(cont_g) for c in gc]
    gcd_pp = _prs_gcd(pp_f, pp_g)
    result = poly_gcd(cont_f, cont_g) * _from_coeffs(var, gcd_pp)
    return result.monic_primitive()


def _list_gcd(polys) -> MultiPoly:
    acc = MultiPoly()
    for poly in polys:
        acc = poly_gcd(acc, poly)
        if acc == ONE:
            break
    return acc if not acc.is_zero() else ONE


def _from_coeffs(var: str, coeffs) -> MultiPoly:
    x = P(var)
    acc = MultiPoly()
    for k, c in enumerate(coeffs):
        acc = acc + c * x ** k
    return acc


def _trim(coeffs):
    while coeffs and coeffs[-1].is_zero():
        coeffs.pop()
    return coeffs


def _primitive(coeffs):
    coeffs = _trim(list(coeffs))
    if not coeffs:
        return coeffs
    cont = _list_gcd(coeffs)
    scale = 1 / cont.content() if cont.is_const() else None
    if scale is not None:
        return [c * scale for c in coeffs]
    return [c.div_exact(cont) for c in coeffs]


def _prs_gcd(a, b):
    """Primitive PRS gcd of univariate polys with MultiPoly coefficients."""
    a = _primitive(a)
    b = _primitive(b)
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _pseudo_rem(a, b)
        a, b = b, _primitive(r)
    return a


def _pseudo_rem(a, b):
    r = list(a)
    lb = b[-1]
    db = len(b) - 1
    while _trim(r) and len(r) - 1 >= db:
        dr = len(r) - 1
        lead = r[-1]
        r = [c * lb for c in r]
        shift = dr - db
        for i, c in enumerate(b):
            r[shift + i] = r[shift + i] - lead * c
        r = _trim(r)
    return r


# -- rational functions --------------------------------------------------------


class RationalFunction:
    """Quotient of two exact polynomials.

    Stored with the denominator scaled so that its lowest-order coefficient in
    x is 1 whenever that coefficient is a rational constant (matching the
    1 - ...*x + ... presentation).  No automatic gcd cancellation; call
    ``simplify`` explicitly.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=1, series_var: str = "x"):
        num = MultiPoly._coerce(num)
        den = MultiPoly._coerce(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        coeffs = den.coefficients_in(series_var)
        low = next(c for c in coeffs if not c.is_zero())
        if low.is_const():
            scale = 1 / low.const_value()
            num = num * scale
            den = den * scale
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    def __setattr__(self, name, value):
        raise AttributeError("RationalFunction is immutable")

    @staticmethod
    def _lift(other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            return other
        return RationalFunction(MultiPoly._coerce(other))

    def __add__(self, other):
        other = self._lift(other)
        return RationalFunction(
            self.num * other.den + other.num * self.den, self.den * other.den
        )

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._lift(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = self._lift(other)
        if other.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __eq__(self, other):
        if not isinstance(other, (RationalFunction, MultiPoly, int, Fraction)):
            return NotImplemented
        other = self._lift(other)
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        s = self.simplify()
        return hash((s.num, s.den))

    def simplify(self) -> "RationalFunction":
        g = poly_gcd(self.num, self.den)
        if g.is_const():
            return self
        return RationalFunction(self.num.div_exact(g), self.den.div_exact(g))

    def evaluate(self, bindings: Mapping[str, object]):
        den = self.den.evaluate(bindings)
        if den == 0:
            raise ZeroDivisionError("denominator vanishes at the binding")
        return self.num.evaluate(bindings) / den

    def substitute(self, mapping: Mapping[str, object]) -> "RationalFunction":
        return RationalFunction(self.num.substitute(mapping), self.den.substitute(mapping))

    def __str__(self):
        return f"({self.num.to_text()}) / ({self.den.to_text()})"

    def __repr__(self):
        return f"RationalFunction({self})"


def series_coefficients(g: RationalFunction, var: str = "x", k: int = 10) -> list:
    """Coefficients of var^0..var^k of the formal power series of g.

    Requires the denominator's constant term in var to be a nonzero rational.
    """
    den = g.den.coefficients_in(var)
    num = g.num.coefficients_in(var)
    d0 = den[0]
    if d0.is_zero():
        raise SeriesError("denominator has zero constant term; series undefined")
    if not d0.is_const():
        raise SeriesError("denominator constant term is not invertible in the polynomial ring")
    inv = 1 / d0.const_value()
    out = []
    for i in range(k + 1):
        acc = num[i] if i < len(num) else MultiPoly()
        for j in range(1, min(i, len(den) - 1) + 1):
            acc = acc - den[j] * out[i - j]
        out.append(acc * inv)
    return out


# -- small dense matrices --------------------------------------------------------


class Matrix:
    """A small square matrix over any coefficient domain (float, Fraction,
    complex, or MultiPoly); dims 2 and 3 are what the transfer engine uses."""

    __slots__ = ("rows",)

    def __init__(self, rows):
        rows = tuple(tuple(r) for r in rows)
        dim = len(rows)
        if any(len(r) != dim for r in rows):
            raise ValueError("matrix must be square")
        object.__setattr__(self, "rows", rows)

    def __setattr__(self, name, value):
        raise AttributeError("Matrix is immutable")

    @property
    def dim(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, dim: int) -> "Matrix":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        n = self.dim
        return Matrix(
            tuple(
                tuple(
                    _dot(self.rows[i], tuple(other.rows[k][j] for k in range(n)))
                    for j in range(n)
                )
                for i in range(n)
            )
        )

    def apply(self, vec) -> tuple:
        if len(vec) != self.dim:
            raise ValueError("dimension mismatch")
        return tuple(_dot(row, vec) for row in self.rows)

    def __pow__(self, k: int) -> "Matrix":
        if k < 0:
            raise ValueError("negative matrix power")
        result = Matrix.identity(self.dim)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return f"Matrix({self.rows!r})"


def _dot(row, col):
    acc = None
    for a, b in zip(row, col):
        term = a * b
        acc = term if acc is None else acc + term
    return acc


def matrix_mul(a: Matrix, b: Matrix) -> Matrix:
    return a @ b


def matrix_apply(a: Matrix, vec) -> tuple:
    return a.apply(vec)


def row_apply(row, a: Matrix) -> tuple:
    """Row vector times matrix; the chain engine's one-step accumulator."""
    n = a.dim
    if len(row) != n:
        raise ValueError("dimension mismatch")
    return tuple(_dot(row, tuple(a.rows[i][j] for i in range(n))) for j in range(n))


def _lift_entry(entry) -> MultiPoly:
    if isinstance(entry, MultiPoly):
        return entry
    return MultiPoly.const(entry)


def det(m: Matrix):
    """Determinant by cofactor expansion (dims 1-3)."""
    r = m.rows
    if m.dim == 1:
        return r[0][0]
    if m.dim == 2:
        return r[0][0] * r[1][1] - r[0][1] * r[1][0]
    if m.dim == 3:
        return (
            r[0][0] * (r[1][1] * r[2][2] - r[1][2] * r[2][1])
            - r[0][1] * (r[1][0] * r[2][2] - r[1][2] * r[2][0])
            + r[0][2] * (r[1][0] * r[2][1] - r[1][1] * r[2][0])
        )
    raise ValueError("det supports dims 1-3 only")


def charpoly(m: Matrix, var: str = "y") -> MultiPoly:
    """Monic characteristic polynomial det(var*I - M), exact domains only."""
    rows = [[_lift_entry(e) for e in row] for row in m.rows]
    y = P(var)
    for row in rows:
        for e in row:
            if var in e.vars:
                raise ValueError(f"eigen-variable {var!r} already used by matrix entries")
    n = m.dim
    if n == 2:
        tr = rows[0][0] + rows[1][1]
        d = rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
        return y ** 2 - tr * y + d
    if n == 3:
        tr = rows[0][0] + rows[1][1] + rows[2][2]
        minors = (
            rows[1][1] * rows[2][2] - rows[1][2] * rows[2][1]
            + rows[0][0] * rows[2][2] - rows[0][2] * rows[2][0]
            + rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
        )
        d = det(Matrix(rows))
        return y ** 3 - tr * y ** 2 + minors * y - d
    raise ValueError("charpoly supports dims 2 and 3 only")
