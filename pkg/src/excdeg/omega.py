"""The defining 1-form of a quadric/cubic pair: omega = (3f dg - 2g df)/h.

A 1-form is held as its four cubic coefficients A0..A3 with the Euler
relation sum(x_i A_i) = 0.  For chart work the same form is flattened into
"entries": one coefficient polynomial in the chart coordinates for every
(cubic monomial, dx_i) slot.  The entry vector is the homogeneous
coordinate vector of the induced map to the P^44 of twisted 1-forms; a
fixed point of the parameter space is resolved exactly when its entry
vector does not vanish there.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .arith import MPoly, Rat, exact_divide, poly_div_exact, univ_gcd, univ_coeffs

XVARS = ("x0", "x1", "x2", "x3")

# an entry key is (cubic exponent 4-tuple, differential index)
EntryKey = Tuple[Tuple[int, int, int, int], int]
Entries = Dict[EntryKey, MPoly]


class DivisibilityError(ValueError):
    """3f dg - 2g df is not divisible by the plane equation.

    This is exactly the failure of the divisibility condition; the witness
    records which differential's coefficient obstructs.
    """

    def __init__(self, index: int, remainder: MPoly):
        self.index = index
        self.remainder = remainder
        super().__init__(f"coefficient of dx{index} is not divisible by the plane "
                         f"equation (remainder {remainder})")


@dataclass(frozen=True)
class DiffForm:
    """A twisted 1-form A0 dx0 + ... + A3 dx3 with homogeneous cubic A_i."""

    coeffs: Tuple[MPoly, MPoly, MPoly, MPoly]

    @property
    def is_zero(self) -> bool:
        return all(c.is_zero for c in self.coeffs)

    def euler_defect(self) -> MPoly:
        """sum x_i * A_i; zero for an honest twisted form."""
        vars = self.coeffs[0].vars
        out = MPoly.zero(vars)
        for i, c in enumerate(self.coeffs):
            out = out + MPoly.variable(vars, XVARS[i]) * c
        return out

    def scaled(self, c) -> "DiffForm":
        return DiffForm(tuple(a * c for a in self.coeffs))


@dataclass(frozen=True)
class WClass:
    """Equivariant data of the tautological pull-back at a fixed locus.

    `lam` is the fiber weight; `degree` is the degree of the induced map of
    a fixed line to P^44 (zero at isolated points).  The restricted
    equivariant first Chern class is lam - degree*h.
    """

    lam: int
    degree: int = 0


def theta(f: MPoly, g: MPoly) -> Tuple[MPoly, MPoly, MPoly, MPoly]:
    """The four coefficients of 3f dg - 2g df."""
    out = []
    for xv in XVARS:
        out.append(f * g.deriv(xv) * 3 - g * f.deriv(xv) * 2)
    return tuple(out)


def omega_of_pair(f: MPoly, g: MPoly, h: MPoly) -> DiffForm:
    """(3f dg - 2g df)/h with the divisibility checked coefficient by
    coefficient; the Euler contraction is re-verified on the result."""
    coeffs = []
    for i, t in enumerate(theta(f, g)):
        if t.is_zero:
            coeffs.append(t)
            continue
        try:
            q = poly_div_exact(t, h.rename_ring(t.vars))
        except ValueError:
            raise DivisibilityError(i, t) from None
        coeffs.append(q)
    form = DiffForm(tuple(coeffs))
    if not form.is_zero and not form.euler_defect().is_zero:
        raise AssertionError("Euler contraction failed after division")
    return form


def collect_entries(form: DiffForm, coord_vars: Sequence[str]) -> Entries:
    """Split the A_i into per-(monomial, dx_i) coefficient polynomials in
    the chart coordinates."""
    coord_vars = tuple(coord_vars)
    xpos = {v: i for i, v in enumerate(XVARS)}
    out: Entries = {}
    for i, a in enumerate(form.coeffs):
        if a.is_zero:
            continue
        vars = a.vars
        split: Dict[Tuple[int, int, int, int], Dict] = {}
        for exp, c in a.terms.items():
            xexp = [0, 0, 0, 0]
            cexp = []
            for v, e in zip(vars, exp):
                if v in xpos:
                    xexp[xpos[v]] = e
                else:
                    cexp.append((v, e))
            key = tuple(xexp)
            split.setdefault(key, {})[tuple(cexp)] = c
        for xexp, terms in split.items():
            p = MPoly.zero(coord_vars)
            acc: Dict[Tuple[int, ...], Rat] = {}
            for cexp, c in terms.items():
                full = [0] * len(coord_vars)
                for v, e in cexp:
                    full[coord_vars.index(v)] = e
                k = tuple(full)
                acc[k] = acc.get(k, Fraction(0)) + c
            p.terms = {k: c for k, c in acc.items() if c}
            if p.terms:
                out[(xexp, i)] = p
    return out


def substitute_entries(entries: Entries, mapping: Mapping[str, MPoly],
                       out_vars: Sequence[str]) -> Entries:
    cache: dict = {}
    out: Entries = {}
    for key, p in entries.items():
        q = p.substitute(mapping, out_vars, _cache=cache)
        if not q.is_zero:
            out[key] = q
    return out


def remove_content(entries: Entries, var: str) -> Tuple[Entries, int]:
    """Divide the whole entry vector by the largest common power of a
    (necessarily exceptional) chart coordinate."""
    if not entries:
        return entries, 0
    m = min(p.min_degree_in(var) for p in entries.values())
    if m == 0:
        return entries, 0
    out = {k: exact_divide(p, var, m)[0] for k, p in entries.items()}
    return out, m


def entries_at_origin(entries: Entries) -> Dict[EntryKey, Rat]:
    """The entry vector evaluated at the chart origin."""
    out = {}
    for k, p in entries.items():
        c = p.eval_origin()
        if c:
            out[k] = c
    return out


def entries_on_axis(entries: Entries, free: str) -> Dict[EntryKey, MPoly]:
    """The entry vector restricted to a coordinate axis (univariate)."""
    out = {}
    for k, p in entries.items():
        q = p.restrict_axis(free)
        if not q.is_zero:
            out[k] = q
    return out


def axis_gcd_clean(vec: Dict[EntryKey, MPoly]) -> Tuple[Dict[EntryKey, MPoly], int]:
    """Remove the gcd of a univariate entry vector (the rational-map
    extension across points a later blowup separates).  Returns the cleaned
    vector and the degree of the removed gcd."""
    if not vec:
        return vec, 0
    g = univ_gcd([univ_coeffs(p) for p in vec.values()])
    deg = len(g) - 1
    if deg <= 0:
        return vec, 0
    some = next(iter(vec.values()))
    gp = MPoly(some.vars)
    gp.terms = {(i,): c for i, c in enumerate(g) if c}
    out = {k: poly_div_exact(p, gp) for k, p in vec.items()}
    return out, deg


def w_class_from_values(values: Mapping[EntryKey, Rat],
                        weight_of_key, dot) -> Tuple[object, int]:
    """Common weight of the surviving entries of an isolated fixed point.

    `weight_of_key` maps an entry key to its 4-vector weight; unequal
    weights signal a bookkeeping bug and abort the run.
    """
    if not values:
        raise AssertionError("entry vector vanished at a fixed point: "
                             "the locus meets the indeterminacy locus")
    lams = {weight_of_key(k) for k in values}
    if len(lams) != 1:
        raise AssertionError(f"surviving entries carry unequal weights: {sorted(lams)}")
    return lams.pop(), 0
