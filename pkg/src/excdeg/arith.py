"""Exact arithmetic kernel: rationals, sparse multivariate polynomials and
the truncated ring Q[h]/(h^2).

A polynomial is a dict from exponent tuples (one entry per variable of an
ordered variable tuple) to nonzero Fraction coefficients; the zero
polynomial is the empty dict.  No operation mutates its arguments, so
values can be shared freely, including across worker threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Iterator, Mapping, Optional, Sequence, Tuple

Rat = Fraction
Exponent = Tuple[int, ...]


def _as_rat(c) -> Rat:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    raise TypeError(f"expected an exact rational, got {type(c).__name__}")


def grevlex_key(exp: Exponent):
    """Sort key under which max() picks the graded-reverse-lex leading term."""
    return (sum(exp), tuple(-e for e in reversed(exp)))


class MPoly:
    """Sparse multivariate polynomial over Q with named, ordered variables."""

    __slots__ = ("vars", "terms")

    def __init__(self, vars: Sequence[str], terms: Optional[Mapping[Exponent, Rat]] = None):
        self.vars: Tuple[str, ...] = tuple(vars)
        n = len(self.vars)
        clean: Dict[Exponent, Rat] = {}
        if terms:
            for exp, c in terms.items():
                c = _as_rat(c)
                if not c:
                    continue
                exp = tuple(exp)
                if len(exp) != n:
                    raise ValueError(f"exponent {exp} does not match {n} variables")
                clean[exp] = c
        self.terms = clean

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "MPoly":
        return cls(vars)

    @classmethod
    def const(cls, vars: Sequence[str], c) -> "MPoly":
        c = _as_rat(c)
        if not c:
            return cls(vars)
        return cls(vars, {(0,) * len(vars): c})

    @classmethod
    def variable(cls, vars: Sequence[str], name: str) -> "MPoly":
        vars = tuple(vars)
        idx = vars.index(name)
        exp = [0] * len(vars)
        exp[idx] = 1
        return cls(vars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, vars: Sequence[str], exp: Exponent, c=1) -> "MPoly":
        return cls(vars, {tuple(exp): _as_rat(c)})

    # -- basic structure ---------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other) -> bool:
        if isinstance(other, MPoly):
            return self.vars == other.vars and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self.terms == MPoly.const(self.vars, other).terms
        return NotImplemented

    def __hash__(self):
        return hash((self.vars, frozenset(self.terms.items())))

    def sort_key(self):
        """Deterministic total order on polynomials of one ring."""
        return tuple(sorted(self.terms.items()))

    def items_sorted(self) -> Iterator[Tuple[Exponent, Rat]]:
        return iter(sorted(self.terms.items(), key=lambda t: grevlex_key(t[0]), reverse=True))

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return max((e[i] for e in self.terms), default=0)

    def min_degree_in(self, name: str) -> int:
        i = self.vars.index(name)
        return min((e[i] for e in self.terms), default=0)

    def coeff(self, exp: Exponent) -> Rat:
        return self.terms.get(tuple(exp), Fraction(0))

    def constant_term(self) -> Rat:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def free_vars(self) -> Tuple[str, ...]:
        """Variables that actually occur."""
        n = len(self.vars)
        seen = [False] * n
        for exp in self.terms:
            for i in range(n):
                if exp[i]:
                    seen[i] = True
        return tuple(v for v, s in zip(self.vars, seen) if s)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "MPoly":
        if isinstance(other, MPoly):
            if other.vars != self.vars:
                raise ValueError(f"variable mismatch: {self.vars} vs {other.vars}")
            return other
        return MPoly.const(self.vars, other)

    def __add__(self, other) -> "MPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            s = out.get(exp, Fraction(0)) + c
            if s:
                out[exp] = s
            else:
                out.pop(exp, None)
        p = MPoly(self.vars)
        p.terms = out
        return p

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        p = MPoly(self.vars)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other) -> "MPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MPoly":
        return (-self) + self._coerce(other)

    def __mul__(self, other) -> "MPoly":
        if isinstance(other, (int, Fraction)):
            c = _as_rat(other)
            p = MPoly(self.vars)
            if c:
                p.terms = {e: cc * c for e, cc in self.terms.items()}
            return p
        other = self._coerce(other)
        out: Dict[Exponent, Rat] = {}
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        for eb, cb in b.items():
            for ea, ca in a.items():
                exp = tuple(x + y for x, y in zip(ea, eb))
                s = out.get(exp, Fraction(0)) + ca * cb
                if s:
                    out[exp] = s
                else:
                    del out[exp]
        p = MPoly(self.vars)
        p.terms = out
        return p

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "MPoly":
        if k < 0:
            raise ValueError("negative power")
        result = MPoly.const(self.vars, 1)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base if k > 1 else base
            k >>= 1
        return result

    # -- calculus and evaluation -------------------------------------------

    def deriv(self, name: str) -> "MPoly":
        i = self.vars.index(name)
        out: Dict[Exponent, Rat] = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            nexp = list(exp)
            k = nexp[i]
            nexp[i] = k - 1
            nexp = tuple(nexp)
            s = out.get(nexp, Fraction(0)) + c * k
            if s:
                out[nexp] = s
            else:
                out.pop(nexp, None)
        p = MPoly(self.vars)
        p.terms = out
        return p

    def evaluate(self, assign: Mapping[str, Rat]) -> Rat:
        """Evaluate with every occurring variable assigned."""
        vals = []
        for v in self.vars:
            vals.append(_as_rat(assign[v]) if v in assign else None)
        tot = Fraction(0)
        for exp, c in self.terms.items():
            t = c
            for i, e in enumerate(exp):
                if e:
                    if vals[i] is None:
                        raise ValueError(f"variable {self.vars[i]} unassigned")
                    t *= vals[i] ** e
            tot += t
        return tot

    def eval_origin(self) -> Rat:
        """Value with every variable set to zero."""
        return self.constant_term()

    def restrict_axis(self, name: str) -> "MPoly":
        """Set every variable except `name` to zero; result is univariate."""
        i = self.vars.index(name)
        out: Dict[Exponent, Rat] = {}
        for exp, c in self.terms.items():
            if all(e == 0 for j, e in enumerate(exp) if j != i):
                key = (exp[i],)
                out[key] = out.get(key, Fraction(0)) + c
        p = MPoly((name,))
        p.terms = {e: c for e, c in out.items() if c}
        return p

    def substitute(self, mapping: Mapping[str, "MPoly"], out_vars: Optional[Sequence[str]] = None,
                   _cache: Optional[dict] = None) -> "MPoly":
        """Substitute polynomials for variables.

        Variables absent from `mapping` must exist in the output ring and map
        to themselves.  Referencing an unknown variable is rejected.
        """
        if out_vars is None:
            sample = next(iter(mapping.values()), None)
            out_vars = sample.vars if sample is not None else self.vars
        out_vars = tuple(out_vars)
        for name in mapping:
            if name not in self.vars:
                raise ValueError(f"substitution references unknown variable {name!r}")
        images: Dict[str, MPoly] = {}
        for v in self.free_vars():
            if v in mapping:
                img = mapping[v]
                if img.vars != out_vars:
                    raise ValueError("substitution image in wrong ring")
                images[v] = img
            else:
                images[v] = MPoly.variable(out_vars, v)
        cache = _cache if _cache is not None else {}
        zero_out = MPoly.zero(out_vars)
        result = zero_out

        def power(v: str, k: int) -> MPoly:
            key = (v, k)
            hit = cache.get(key)
            if hit is not None:
                return hit
            if k == 1:
                val = images[v]
            else:
                val = power(v, k - 1) * images[v]
            cache[key] = val
            return val

        for exp, c in self.terms.items():
            t = MPoly.const(out_vars, c)
            for i, e in enumerate(exp):
                if e:
                    t = t * power(self.vars[i], e)
            result = result + t
        return result

    def rename_ring(self, out_vars: Sequence[str]) -> "MPoly":
        """Re-embed into another ring containing all occurring variables."""
        out_vars = tuple(out_vars)
        pos = {v: i for i, v in enumerate(out_vars)}
        n = len(out_vars)
        out: Dict[Exponent, Rat] = {}
        for exp, c in self.terms.items():
            nexp = [0] * n
            for i, e in enumerate(exp):
                if e:
                    v = self.vars[i]
                    if v not in pos:
                        raise ValueError(f"variable {v} absent from target ring")
                    nexp[pos[v]] = e
            out[tuple(nexp)] = c
        p = MPoly(out_vars)
        p.terms = out
        return p

    def primitive(self) -> Tuple["MPoly", Rat]:
        """Return (primitive integer polynomial, scalar) with self = scalar*prim."""
        if not self.terms:
            return self, Fraction(1)
        den = 1
        for c in self.terms.values():
            den = den * c.denominator // gcd(den, c.denominator)
        num = 0
        for c in self.terms.values():
            num = gcd(num, abs(c.numerator * (den // c.denominator)))
        scale = Fraction(num, den)
        lead = self.terms[max(self.terms, key=grevlex_key)]
        if lead < 0:
            scale = -scale
        p = MPoly(self.vars)
        p.terms = {e: c / scale for e, c in self.terms.items()}
        return p, scale

    def __repr__(self) -> str:
        return f"MPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.items_sorted():
            factors = []
            for v, e in zip(self.vars, exp):
                if e == 1:
                    factors.append(v)
                elif e > 1:
                    factors.append(f"{v}^{e}")
            mono = "*".join(factors)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append(f"-{mono}")
            else:
                parts.append(f"{c}*{mono}")
        s = " + ".join(parts)
        return s.replace("+ -", "- ")


# -- exact division ----------------------------------------------------------


def exact_divide(p: MPoly, name: str, max_power: Optional[int] = None) -> Tuple[MPoly, int]:
    """Divide out the largest power of a variable, capped at `max_power`.

    Returns (p / name**m, m) with m maximal such that name**m divides p
    (m = 0 when the variable does not divide p; the zero polynomial has
    m = 0 by convention).
    """
    if not p.terms:
        return p, 0
    m = p.min_degree_in(name)
    if max_power is not None:
        m = min(m, max_power)
    if m == 0:
        return p, 0
    i = p.vars.index(name)
    out = {}
    for exp, c in p.terms.items():
        nexp = list(exp)
        nexp[i] -= m
        out[tuple(nexp)] = c
    q = MPoly(p.vars)
    q.terms = out
    return q, m


def poly_div_exact(p: MPoly, d: MPoly) -> MPoly:
    """Exact division by an arbitrary nonzero polynomial; raises if inexact."""
    if d.is_zero:
        raise ZeroDivisionError("division by zero polynomial")
    if p.is_zero:
        return p
    if p.vars != d.vars:
        raise ValueError("variable mismatch in division")
    lm = max(d.terms, key=grevlex_key)
    lc = d.terms[lm]
    rest = [(e, c) for e, c in d.terms.items() if e != lm]
    work = dict(p.terms)
    q: Dict[Exponent, Rat] = {}
    while work:
        m = max(work, key=grevlex_key)
        c = work[m]
        qexp = tuple(a - b for a, b in zip(m, lm))
        if any(e < 0 for e in qexp):
            raise ValueError("inexact polynomial division")
        qc = c / lc
        q[qexp] = q.get(qexp, Fraction(0)) + qc
        del work[m]
        for e, cc in rest:
            t = tuple(a + b for a, b in zip(qexp, e))
            s = work.get(t, Fraction(0)) - qc * cc
            if s:
                work[t] = s
            else:
                work.pop(t, None)
    out = MPoly(p.vars)
    out.terms = {e: c for e, c in q.items() if c}
    return out


# -- univariate helpers ------------------------------------------------------


def univ_coeffs(p: MPoly) -> Tuple[Rat, ...]:
    """Coefficient list (low to high) of a univariate polynomial."""
    if len(p.vars) != 1:
        raise ValueError("not univariate")
    d = p.total_degree()
    out = [Fraction(0)] * (d + 1)
    for exp, c in p.terms.items():
        out[exp[0]] = c
    return tuple(out)


def _univ_trim(cs):
    cs = list(cs)
    while cs and not cs[-1]:
        cs.pop()
    return cs


def _univ_mod(a, b):
    a = _univ_trim(a)
    b = _univ_trim(b)
    while len(a) >= len(b):
        f = a[-1] / b[-1]
        k = len(a) - len(b)
        for i, c in enumerate(b):
            a[i + k] -= f * c
        a = _univ_trim(a)
        if not a:
            break
    return a


def univ_gcd(coeff_lists: Iterable[Sequence[Rat]]) -> Tuple[Rat, ...]:
    """Monic gcd of univariate polynomials given as coefficient lists."""
    g: list = []
    for cs in coeff_lists:
        cs = _univ_trim(list(cs))
        if not cs:
            continue
        if not g:
            g = cs
        else:
            while cs:
                g, cs = cs, _univ_mod(g, cs)
        if len(g) == 1:
            break
    if not g:
        return ()
    lead = g[-1]
    return tuple(c / lead for c in g)


def rational_roots(coeffs: Sequence[Rat]) -> Tuple[Tuple[Tuple[Rat, int], ...], int]:
    """Rational roots with multiplicities, plus the degree of the rootless
    remainder.  Input is a coefficient list, low to high."""
    cs = _univ_trim(list(coeffs))
    if not cs:
        raise ValueError("zero polynomial has every root")
    den = 1
    for c in cs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in cs]
    roots = []
    k = 0
    while ints and ints[0] == 0:
        ints = ints[1:]
        k += 1
    if k:
        roots.append((Fraction(0), k))

    def divisors(n):
        n = abs(n)
        out = set()
        i = 1
        while i * i <= n:
            if n % i == 0:
                out.add(i)
                out.add(n // i)
            i += 1
        return sorted(out)

    changed = True
    while len(ints) > 1 and changed:
        changed = False
        a0, an = ints[0], ints[-1]
        for pnum in divisors(a0):
            for pden in divisors(an):
                for sign in (1, -1):
                    r = Fraction(sign * pnum, pden)
                    # synthetic division test
                    acc = Fraction(0)
                    for c in reversed(ints):
                        acc = acc * r + c
                    if acc == 0:
                        mult = 0
                        while True:
                            quo = []
                            acc = Fraction(0)
                            for c in reversed(ints):
                                acc = acc * r + c
                                quo.append(acc)
                            if acc != 0:
                                break
                            quo = quo[:-1][::-1]
                            ints2 = quo
                            # clear denominators again
                            dd = 1
                            for c in ints2:
                                c = Fraction(c)
                                dd = dd * c.denominator // gcd(dd, c.denominator)
                            ints = [int(Fraction(c) * dd) for c in ints2]
                            mult += 1
                            if len(ints) == 1:
                                break
                        roots.append((r, mult))
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    return tuple(sorted(roots)), len(ints) - 1


# -- the ring Q[h]/(h^2) -----------------------------------------------------


@dataclass(frozen=True)
class HClass:
    """Element c0 + c1*h of Q[h]/(h^2): a weight plus a curve-class part."""

    c0: Rat
    c1: Rat

    @staticmethod
    def of(c0, c1=0) -> "HClass":
        return HClass(_as_rat(c0), _as_rat(c1))

    def __add__(self, other) -> "HClass":
        other = other if isinstance(other, HClass) else HClass.of(other)
        return HClass(self.c0 + other.c0, self.c1 + other.c1)

    __radd__ = __add__

    def __neg__(self) -> "HClass":
        return HClass(-self.c0, -self.c1)

    def __sub__(self, other) -> "HClass":
        other = other if isinstance(other, HClass) else HClass.of(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other) -> "HClass":
        other = other if isinstance(other, HClass) else HClass.of(other)
        return HClass(self.c0 * other.c0, self.c0 * other.c1 + self.c1 * other.c0)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "HClass":
        if k < 0:
            raise ValueError("negative power")
        out = HClass.of(1)
        for _ in range(k):
            out = out * self
        return out

    def __truediv__(self, other) -> "HClass":
        other = other if isinstance(other, HClass) else HClass.of(other)
        return hclass_div(self, other)


def hclass_div(n: HClass, d: HClass) -> HClass:
    """Exact division in Q[h]/(h^2); the divisor needs a nonzero constant part.

    A zero constant part means a degenerate (weight-zero) normal root, which
    only happens for a non-generic weight choice; the caller must abort.
    """
    if d.c0 == 0:
        raise ZeroDivisionError("degenerate normal root: weight part is zero "
                                "(non-generic weight vector)")
    q0 = n.c0 / d.c0
    q1 = (n.c1 - q0 * d.c1) / d.c0
    return HClass(q0, q1)


# -- parsing (CLI and tests) -------------------------------------------------


def parse_poly(text: str, vars: Sequence[str]) -> MPoly:
    """Parse '+ - * ^' polynomial expressions with rational coefficients.

    Accepts e.g. 'x0^2*x3 - x0*x1*x2 + 1/3*x1^3'; '**' works as '^'.
    """
    vars = tuple(vars)
    s = text.replace("**", "^")
    tokens = []
    i = 0
    while i < len(s):
        ch = s[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit():
            j = i
            while j < len(s) and s[j].isdigit():
                j += 1
            tokens.append(("num", int(s[i:j])))
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < len(s) and (s[j].isalnum() or s[j] == "_"):
                j += 1
            tokens.append(("var", s[i:j]))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append((ch, ch))
            i += 1
            continue
        raise ValueError(f"unexpected character {ch!r} in polynomial")
    pos = 0

    def peek():
        return tokens[pos][0] if pos < len(tokens) else None

    def take(kind=None):
        nonlocal pos
        if pos >= len(tokens):
            raise ValueError("unexpected end of polynomial")
        k, v = tokens[pos]
        if kind and k != kind:
            raise ValueError(f"expected {kind}, found {v!r}")
        pos += 1
        return v

    def parse_expr() -> MPoly:
        t = parse_term()
        while peek() in ("+", "-"):
            op = take()
            u = parse_term()
            t = t + u if op == "+" else t - u
        return t

    def parse_term() -> MPoly:
        t = parse_factor()
        while True:
            if peek() == "*":
                take()
                t = t * parse_factor()
            elif peek() == "/":
                take()
                d = parse_factor()
                dc = d.constant_term()
                if d.terms and (len(d.terms) != 1 or not dc):
                    raise ValueError("division only by nonzero constants")
                if not dc:
                    raise ValueError("division by zero")
                t = t * Fraction(1, 1) * Fraction(dc.denominator, dc.numerator)
            else:
                return t

    def parse_factor() -> MPoly:
        if peek() == "-":
            take()
            return -parse_factor()
        if peek() == "+":
            take()
            return parse_factor()
        base = parse_atom()
        if peek() == "^":
            take()
            neg = False
            if peek() == "-":
                raise ValueError("negative exponents not supported")
            k = take("num")
            return base ** k
        return base

    def parse_atom() -> MPoly:
        k = peek()
        if k == "num":
            return MPoly.const(vars, take("num"))
        if k == "var":
            name = take("var")
            if name not in vars:
                raise ValueError(f"unknown variable {name!r}")
            return MPoly.variable(vars, name)
        if k == "(":
            take("(")
            e = parse_expr()
            take(")")
            return e
        raise ValueError(f"unexpected token in polynomial: {tokens[pos][1]!r}")

    out = parse_expr()
    if pos != len(tokens):
        raise ValueError("trailing input in polynomial")
    return out
