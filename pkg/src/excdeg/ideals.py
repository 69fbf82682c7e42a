"""Groebner-basis toolkit over exact rationals.

Buchberger with the sugar selection strategy and the two classical pair
criteria (coprime leading terms, chain criterion); the default monomial
order is graded reverse lexicographic.  Everything else -- intersection,
colon, saturation, radical membership -- reduces to elimination with a
block order.  All outputs are deterministic: generators are canonicalized,
bases are reduced, monic and sorted.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import Exponent, MPoly, Rat, grevlex_key, poly_div_exact

Terms = Dict[Exponent, Rat]


class GrevLex:
    def key(self, exp: Exponent):
        return grevlex_key(exp)


class BlockElim:
    """Eliminates the first `nfront` variables: any monomial containing one
    beats every monomial that does not."""

    def __init__(self, nfront: int):
        self.nfront = nfront

    def key(self, exp: Exponent):
        f, b = exp[: self.nfront], exp[self.nfront:]
        return (grevlex_key(f), grevlex_key(b))


def _lm(terms: Terms, keyf) -> Exponent:
    return max(terms, key=keyf)


def _divides(a: Exponent, b: Exponent) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _primitive(terms: Terms) -> Terms:
    from math import gcd
    den = 1
    for c in terms.values():
        den = den * c.denominator // gcd(den, c.denominator)
    num = 0
    for c in terms.values():
        num = gcd(num, abs(c.numerator * (den // c.denominator)))
    if not num:
        return dict(terms)
    scale = Fraction(den, num)
    return {e: c * scale for e, c in terms.items()}


def _normal_form(terms: Terms, basis: List[Tuple[Exponent, Rat, Terms]], keyf) -> Terms:
    """Full normal form of `terms` against (lm, lc, terms) triples."""
    work = dict(terms)
    result: Terms = {}
    while work:
        m = max(work, key=keyf)
        c = work[m]
        hit = None
        for lm, lc, g in basis:
            if _divides(lm, m):
                hit = (lm, lc, g)
                break
        if hit is None:
            result[m] = c
            del work[m]
            continue
        lm, lc, g = hit
        shift = tuple(a - b for a, b in zip(m, lm))
        f = c / lc
        for e, cc in g.items():
            t = tuple(a + b for a, b in zip(e, shift))
            s = work.get(t, Fraction(0)) - f * cc
            if s:
                work[t] = s
            else:
                work.pop(t, None)
    return result


def _buchberger(gens: List[Terms], keyf) -> List[Terms]:
    # interreduce the input first
    polys = [dict(g) for g in gens if g]
    while True:
        polys2 = []
        changed = False
        for i, p in enumerate(polys):
            others = [( _lm(q, keyf), q[_lm(q, keyf)], q) for j, q in enumerate(polys2)]
            r = _normal_form(p, others, keyf)
            if r:
                polys2.append(_primitive(r))
            if r != p:
                changed = True
        polys = polys2
        if not changed:
            break
    if not polys:
        return []

    basis: List[Terms] = list(polys)
    lms = [_lm(g, keyf) for g in basis]
    sugars = [max(sum(e) for e in g) for g in basis]

    def lcm(a, b):
        return tuple(max(x, y) for x, y in zip(a, b))

    pairs = set()
    for i in range(len(basis)):
        for j in range(i):
            pairs.add((j, i))

    def pair_sugar(i, j):
        l = lcm(lms[i], lms[j])
        return max(sugars[i] + sum(l) - sum(lms[i]), sugars[j] + sum(l) - sum(lms[j]))

    while pairs:
        # sugar strategy: smallest sugar, ties by lcm order then indices
        best = min(pairs, key=lambda p: (pair_sugar(*p), keyf(lcm(lms[p[0]], lms[p[1]])), p))
        pairs.discard(best)
        i, j = best
        li, lj = lms[i], lms[j]
        l = lcm(li, lj)
        # product criterion
        if all(a + b == c for a, b, c in zip(li, lj, l)):
            continue
        # chain criterion
        skip = False
        for k in range(len(basis)):
            if k in (i, j):
                continue
            if _divides(lms[k], l):
                pik = (min(i, k), max(i, k))
                pjk = (min(j, k), max(j, k))
                if pik not in pairs and pjk not in pairs:
                    skip = True
                    break
        if skip:
            continue
        ci, cj = basis[i][li], basis[j][lj]
        s: Terms = {}
        shift_i = tuple(a - b for a, b in zip(l, li))
        shift_j = tuple(a - b for a, b in zip(l, lj))
        for e, c in basis[i].items():
            t = tuple(a + b for a, b in zip(e, shift_i))
            s[t] = s.get(t, Fraction(0)) + c / ci
        for e, c in basis[j].items():
            t = tuple(a + b for a, b in zip(e, shift_j))
            v = s.get(t, Fraction(0)) - c / cj
            if v:
                s[t] = v
            else:
                s.pop(t, None)
        red = [(lm, basis[k][lm], basis[k]) for k, lm in enumerate(lms)]
        r = _normal_form(s, red, keyf)
        if not r:
            continue
        r = _primitive(r)
        basis.append(r)
        lms.append(_lm(r, keyf))
        sugars.append(max(pair_sugar(i, j), max(sum(e) for e in r)))
        new = len(basis) - 1
        for k in range(new):
            pairs.add((k, new))
    # minimalize: drop members whose lm is divisible by another lm
    keep = []
    for i, g in enumerate(basis):
        if any(j != i and _divides(lms[j], lms[i]) and (j < i or lms[j] != lms[i])
               for j in range(len(basis))):
            continue
        keep.append(i)
    # tail-reduce against each other
    final: List[Terms] = []
    for idx, i in enumerate(keep):
        others = [(lms[j], basis[j][lms[j]], basis[j]) for j in keep if j != i]
        r = _normal_form(basis[i], others, keyf)
        if r:
            final.append(r)
    # monic, sorted by leading monomial descending
    out = []
    for g in final:
        lm = _lm(g, keyf)
        lc = g[lm]
        out.append({e: c / lc for e, c in g.items()})
    out.sort(key=lambda g: keyf(_lm(g, keyf)), reverse=True)
    return out


class Ideal:
    """An ideal of Q[vars], carrying a cached reduced Groebner basis."""

    __slots__ = ("vars", "gens", "_gb")

    def __init__(self, vars: Sequence[str], gens: Iterable[MPoly]):
        self.vars = tuple(vars)
        canon = {}
        for g in gens:
            if g.vars != self.vars:
                g = g.rename_ring(self.vars)
            if g.is_zero:
                continue
            p, _ = g.primitive()
            canon[tuple(sorted(p.terms.items()))] = p
        self.gens: Tuple[MPoly, ...] = tuple(sorted(canon.values(), key=MPoly.sort_key))
        self._gb: Optional[Tuple[MPoly, ...]] = None

    # -- construction helpers ----------------------------------------------

    @classmethod
    def unit(cls, vars: Sequence[str]) -> "Ideal":
        return cls(vars, [MPoly.const(vars, 1)])

    @classmethod
    def zero(cls, vars: Sequence[str]) -> "Ideal":
        return cls(vars, [])

    def _wrap(self, terms_list: List[Terms]) -> Tuple[MPoly, ...]:
        out = []
        for t in terms_list:
            p = MPoly(self.vars)
            p.terms = dict(t)
            out.append(p)
        return tuple(out)

    # -- Groebner machinery --------------------------------------------------

    def groebner(self) -> Tuple[MPoly, ...]:
        """Reduced, monic grevlex Groebner basis (cached, canonical)."""
        if self._gb is None:
            keyf = GrevLex().key
            basis = _buchberger([g.terms for g in self.gens], keyf)
            self._gb = self._wrap(basis)
        return self._gb

    def normal_form(self, p: MPoly) -> MPoly:
        if p.vars != self.vars:
            p = p.rename_ring(self.vars)
        keyf = GrevLex().key
        gb = self.groebner()
        basis = [(_lm(g.terms, keyf), g.terms[_lm(g.terms, keyf)], g.terms) for g in gb]
        r = _normal_form(p.terms, basis, keyf)
        out = MPoly(self.vars)
        out.terms = r
        return out

    def contains(self, p: MPoly) -> bool:
        return self.normal_form(p).is_zero

    def contains_ideal(self, other: "Ideal") -> bool:
        return all(self.contains(g) for g in other.gens)

    @property
    def is_unit(self) -> bool:
        # cheap pre-check: a nonzero constant generator
        for g in self.gens:
            if len(g.terms) == 1 and g.constant_term():
                return True
        gb = self.groebner()
        return len(gb) == 1 and len(gb[0].terms) == 1 and gb[0].constant_term() == 1

    @property
    def is_trivial_zero(self) -> bool:
        return not self.gens

    def equals(self, other: "Ideal") -> bool:
        if self.vars != other.vars:
            raise ValueError("ideals live in different rings")
        return [g.terms for g in self.groebner()] == [g.terms for g in other.groebner()]

    # -- elimination and derived operations ----------------------------------

    def eliminate(self, kill: Sequence[str]) -> "Ideal":
        """Intersection with the subring omitting `kill` variables."""
        kill = tuple(kill)
        keep = tuple(v for v in self.vars if v not in kill)
        perm = kill + keep
        reordered = [g.rename_ring(perm) for g in self.gens]
        keyf = BlockElim(len(kill)).key
        basis = _buchberger([g.terms for g in reordered], keyf)
        nfront = len(kill)
        out = []
        for t in basis:
            if all(all(e == 0 for e in exp[:nfront]) for exp in t):
                p = MPoly(perm)
                p.terms = dict(t)
                out.append(p.rename_ring(keep))
        return Ideal(keep, out)

    def with_ring(self, vars: Sequence[str]) -> "Ideal":
        return Ideal(vars, [g.rename_ring(vars) for g in self.gens])

    def saturate(self, f: MPoly) -> "Ideal":
        """I : f^infinity via the extra-variable elimination trick."""
        if f.is_zero:
            raise ValueError("cannot saturate by zero")
        if self.is_trivial_zero:
            return self
        # dividing each generator by its own f-content is sound and shrinks input
        gens = []
        for g in self.gens:
            for v in f.free_vars():
                if len(f.terms) == 1:
                    g, _ = _exact_var_divide(g, v)
            gens.append(g)
        y = _fresh("ysat", self.vars)
        ring = (y,) + self.vars
        ext = [g.rename_ring(ring) for g in gens]
        rel = MPoly.const(ring, 1) - MPoly.variable(ring, y) * f.rename_ring(ring)
        return Ideal(ring, ext + [rel]).eliminate((y,)).with_ring(self.vars)

    def intersect(self, other: "Ideal") -> "Ideal":
        if self.vars != other.vars:
            raise ValueError("ideals live in different rings")
        if self.is_trivial_zero or other.is_trivial_zero:
            return Ideal.zero(self.vars)
        t = _fresh("tint", self.vars)
        ring = (t,) + self.vars
        tp = MPoly.variable(ring, t)
        one = MPoly.const(ring, 1)
        gens = [tp * g.rename_ring(ring) for g in self.gens]
        gens += [(one - tp) * g.rename_ring(ring) for g in other.gens]
        return Ideal(ring, gens).eliminate((t,)).with_ring(self.vars)

    def colon(self, f: MPoly) -> "Ideal":
        """I : f."""
        inter = self.intersect(Ideal(self.vars, [f]))
        f = f.rename_ring(self.vars)
        return Ideal(self.vars, [poly_div_exact(g, f) for g in inter.gens])

    def colon_ideal(self, other: "Ideal") -> "Ideal":
        out: Optional[Ideal] = None
        for g in other.gens:
            c = self.colon(g)
            out = c if out is None else out.intersect(c)
        if out is None:
            return Ideal.unit(self.vars)
        return out

    def saturate_ideal(self, other: "Ideal") -> "Ideal":
        """I : J^infinity, iterating the ideal quotient until it stabilizes."""
        cur = self
        while True:
            nxt = cur.colon_ideal(other)
            if nxt.equals(cur):
                return cur
            cur = nxt

    def radical_contains(self, f: MPoly) -> bool:
        """Membership of f in the radical (Rabinowitsch trick)."""
        y = _fresh("yrad", self.vars)
        ring = (y,) + self.vars
        gens = [g.rename_ring(ring) for g in self.gens]
        rel = MPoly.const(ring, 1) - MPoly.variable(ring, y) * f.rename_ring(ring)
        return Ideal(ring, gens + [rel]).is_unit

    def __repr__(self):
        return f"Ideal({', '.join(str(g) for g in self.gens)})"


def _fresh(stem: str, vars: Sequence[str]) -> str:
    name = stem
    k = 0
    while name in vars:
        k += 1
        name = f"{stem}{k}"
    return name


def _exact_var_divide(g: MPoly, name: str):
    from .arith import exact_divide
    if name in g.vars:
        return exact_divide(g, name)
    return g, 0


# -- spec-level convenience wrappers ------------------------------------------


def groebner(i: Ideal) -> Ideal:
    """The ideal presented by its reduced Groebner basis."""
    out = Ideal(i.vars, i.groebner())
    out._gb = out.gens
    return out


def saturate(i: Ideal, f: MPoly) -> Ideal:
    return i.saturate(f)


def ideal_equal(i: Ideal, j: Ideal) -> bool:
    return i.equals(j)
