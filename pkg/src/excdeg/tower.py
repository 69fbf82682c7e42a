"""Chart model of the parameter-space tower and its torus-fixed loci.

The parameter space is a fiber bundle over the variety of complete flags:
the P^3 of adapted quadrics gets one point blown up fiberwise (the graph
closure of the linear projection away from the squared plane equation),
adapted cubics form a P^4-bundle over that, and four fiberwise blowups --
along a curve C of (square, cube) powers of a moving plane, the transform
E' of the exceptional plane over the double plane, a ruled surface R inside
the first exceptional divisor, and a line L inside the transform of E' --
resolve the rational map from pairs to twisted 1-forms.

Everything fiberwise is computed once over the standard flag, with torus
weights carried as integer 4-vectors (coefficients of (w0..w3)); the other
23 flags are relabelings.  Fixed loci are enumerated structurally: each
locus owns the affine chart chain in which it is a coordinate origin
(isolated point) or a coordinate axis (pointwise-fixed line).  A blowup
center is always smooth with semi-invariant echelon generators; a center
fixed point sitting at a chart origin spawns one exceptional locus per
normal-weight value (an isolated point for multiplicity one, a fixed line
for multiplicity two), and a center meeting a fixed line at an interior
point additionally twists the line's normal roots down along the center's
conormal directions.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .arith import MPoly, Rat, exact_divide, rational_roots, univ_coeffs, univ_gcd
from .flags import (FixedFlag, STANDARD_FLAG, Weight4, WeightVector, W4_ZERO,
                    flag_tangent_vectors, w4_add, w4_dot, w4_neg, w4_scale, w4_sub,
                    w4_unit)
from .ideals import Ideal
from . import omega as om

XV = om.XVARS

# stage numbering of the four blowups
STAGE_LETTER = {1: "s", 2: "t", 3: "v", 4: "z"}
STAGE_CODIM = {1: 6, 2: 5, 3: 5, 4: 6}
STAGE_NAME = {1: "C", 2: "E'", 3: "R", 4: "L"}

# monomial bases at the standard flag
MON_QUAD = [(2, 0, 0, 0), (1, 1, 0, 0), (1, 0, 1, 0), (0, 2, 0, 0)]
MON_CUBIC7 = [(3, 0, 0, 0), (2, 1, 0, 0), (2, 0, 1, 0), (2, 0, 0, 1),
              (1, 2, 0, 0), (1, 1, 1, 0), (0, 3, 0, 0)]
MON_UBAR = [(1, 1, 0, 0), (1, 0, 1, 0), (0, 2, 0, 0)]

CHI_QUAD = [tuple(m) for m in MON_QUAD]
CHI_CUBIC7 = [tuple(m) for m in MON_CUBIC7]
CHI_UBAR = [tuple(m) for m in MON_UBAR]


class GeometryError(AssertionError):
    """The fixed-locus recursion met geometry it does not support."""


def poly_w4(p: MPoly, wmap: Dict[str, Weight4]) -> Weight4:
    """The common weight 4-vector of a semi-invariant polynomial."""
    seen = set()
    for exp in p.terms:
        w = W4_ZERO
        for name, e in zip(p.vars, exp):
            if e:
                w = w4_add(w, w4_scale(wmap[name], e))
        seen.add(w)
        if len(seen) > 1:
            raise GeometryError(f"polynomial is not semi-invariant: {p}")
    if not seen:
        raise GeometryError("zero polynomial has no weight")
    return seen.pop()


# ---------------------------------------------------------------------------
# charts


class Chart:
    """One affine chart of one stage of the tower, over the standard flag.

    `coords` always has 7 names; `wmap` their weight 4-vectors.  `subst`
    expresses the parent chart's coordinates in this chart's.  The
    accumulated exceptional equations stay monomials in the chart
    coordinates; `exc_by_stage` records them per blowup stage.
    """

    __slots__ = ("key", "coords", "wmap", "parent", "subst", "created_stage",
                 "exc_by_stage", "f", "g", "meta", "_entries", "_centers", "_mideal",
                 "_echelons")

    def __init__(self, key, coords, wmap, parent=None, subst=None, created_stage=0,
                 exc_by_stage=None, f=None, g=None, meta=None):
        self.key = tuple(key)
        self.coords = tuple(coords)
        self.wmap = dict(wmap)
        self.parent = parent
        self.subst = subst
        self.created_stage = created_stage
        self.exc_by_stage = dict(exc_by_stage or {})
        self.f = f
        self.g = g
        self.meta = meta or {}
        self._entries = None
        self._centers: Dict[int, Ideal] = {}
        self._mideal: Optional[Ideal] = None
        self._echelons = {}

    def __repr__(self):
        return f"Chart{self.key}"

    @property
    def name(self) -> str:
        return "/".join(self.key)

    def exc_vars(self) -> Tuple[str, ...]:
        names = set()
        for mono in self.exc_by_stage.values():
            names.update(mono.free_vars())
        return tuple(sorted(names))

    # -- the coefficient vector of the 1-form in this chart ------------------

    def entries(self) -> om.Entries:
        if self._entries is None:
            if self.parent is None:
                form = om.omega_of_pair(self.f, self.g,
                                        MPoly.variable(self.f.vars, "x0"))
                ent = om.collect_entries(form, self.coords)
            else:
                ent = om.substitute_entries(self.parent.entries(), self.subst, self.coords)
            for v in self.exc_vars():
                ent, _ = om.remove_content(ent, v)
            if not ent:
                raise GeometryError(f"1-form vector vanished identically on {self}")
            self._entries = ent
        return self._entries

    def indeterminacy_ideal(self) -> Ideal:
        gens = list(self.entries().values())
        return Ideal(self.coords, gens)

    def entry_weight(self, key) -> Weight4:
        xexp, i = key
        return w4_add(tuple(xexp), w4_unit(i))


def _mk(vars, name):
    return MPoly.variable(vars, name)


def _const(vars, c):
    return MPoly.const(vars, c)


def _xchart_table():
    """The six affine charts of the blown-up quadric bundle.

    Each entry: (name, coords, coordinate weights, b-vector, u-vector,
    coefficients of the adapted-cubic direction, weight of that direction).
    The b-vector gives the quadric's coefficients on x0^2, x0*x1, x0*x2,
    x1^2; the u-vector the projection point's on the last three.
    """
    chi = {"x0x1": (1, 1, 0, 0), "x0x2": (1, 0, 1, 0), "x1sq": (0, 2, 0, 0),
           "x0sq": (2, 0, 0, 0)}

    def wt(m, base):
        return w4_sub(chi[m], chi[base])

    table = []

    def entry(name, coords, wvecs, bexp, uexp, qnorm, ubase):
        table.append({
            "name": name, "coords": tuple(coords),
            "wmap": dict(zip(coords, wvecs)),
            "b": bexp, "u": uexp, "qnorm": qnorm,
            "qchi": w4_add((0, 1, 0, 0), chi[ubase]),
        })

    R1 = ("b1", "u2", "u3")
    entry("b0u1", R1, [wt("x0x1", "x0sq"), wt("x0x2", "x0x1"), wt("x1sq", "x0x1")],
          lambda V: [_const(V, 1), _mk(V, "b1"), _mk(V, "b1") * _mk(V, "u2"),
                     _mk(V, "b1") * _mk(V, "u3")],
          lambda V: [_const(V, 1), _mk(V, "u2"), _mk(V, "u3")],
          Fraction(1, 3), "x0x1")
    R2 = ("b2", "u1", "u3")
    entry("b0u2", R2, [wt("x0x2", "x0sq"), wt("x0x1", "x0x2"), wt("x1sq", "x0x2")],
          lambda V: [_const(V, 1), _mk(V, "b2") * _mk(V, "u1"), _mk(V, "b2"),
                     _mk(V, "b2") * _mk(V, "u3")],
          lambda V: [_mk(V, "u1"), _const(V, 1), _mk(V, "u3")],
          Fraction(1, 3), "x0x2")
    R3 = ("b3", "u1", "u2")
    entry("b0u3", R3, [wt("x1sq", "x0sq"), wt("x0x1", "x1sq"), wt("x0x2", "x1sq")],
          lambda V: [_const(V, 1), _mk(V, "b3") * _mk(V, "u1"), _mk(V, "b3") * _mk(V, "u2"),
                     _mk(V, "b3")],
          lambda V: [_mk(V, "u1"), _mk(V, "u2"), _const(V, 1)],
          Fraction(1, 2), "x1sq")
    R4 = ("b0", "u2", "u3")
    entry("b1", R4, [wt("x0sq", "x0x1"), wt("x0x2", "x0x1"), wt("x1sq", "x0x1")],
          lambda V: [_mk(V, "b0"), _const(V, 1), _mk(V, "u2"), _mk(V, "u3")],
          lambda V: [_const(V, 1), _mk(V, "u2"), _mk(V, "u3")],
          Fraction(1, 3), "x0x1")
    R5 = ("b0", "u1", "u3")
    entry("b2", R5, [wt("x0sq", "x0x2"), wt("x0x1", "x0x2"), wt("x1sq", "x0x2")],
          lambda V: [_mk(V, "b0"), _mk(V, "u1"), _const(V, 1), _mk(V, "u3")],
          lambda V: [_mk(V, "u1"), _const(V, 1), _mk(V, "u3")],
          Fraction(1, 3), "x0x2")
    R6 = ("b0", "u1", "u2")
    entry("b3", R6, [wt("x0sq", "x1sq"), wt("x0x1", "x1sq"), wt("x0x2", "x1sq")],
          lambda V: [_mk(V, "b0"), _mk(V, "u1"), _mk(V, "u2"), _const(V, 1)],
          lambda V: [_mk(V, "u1"), _mk(V, "u2"), _const(V, 1)],
          Fraction(1, 2), "x1sq")
    return table


XCHARTS = _xchart_table()
XCHART_BY_NAME = {c["name"]: c for c in XCHARTS}

FIBER_SLOTS = ("a0", "a1", "a2", "a3", "a4")
FIBER_CHI = [(3, 0, 0, 0), (2, 1, 0, 0), (2, 0, 1, 0), (2, 0, 0, 1)]  # + qchi per chart


def _q_cubic(V, uvec, qnorm):
    """The adapted-cubic direction 3u1*x0*x1^2 + 3u2*x0*x1*x2 + 2u3*x1^3,
    normalized by the chart's unit projection coordinate."""
    m_c4 = MPoly.monomial(V, _embed_exp((1, 2, 0, 0), V))
    m_c5 = MPoly.monomial(V, _embed_exp((1, 1, 1, 0), V))
    m_c6 = MPoly.monomial(V, _embed_exp((0, 3, 0, 0), V))
    u1, u2, u3 = uvec
    q = u1 * m_c4 * 3 + u2 * m_c5 * 3 + u3 * m_c6 * 2
    return q * qnorm


def _embed_exp(xexp, V):
    exp = [0] * len(V)
    for i, e in enumerate(xexp):
        exp[V.index(XV[i])] = e
    return tuple(exp)


def make_ychart(xname: str, fiber: str) -> Chart:
    """A top-stage chart: one projection chart of the quadric bundle plus
    one fiber chart of the cubic bundle."""
    xc = XCHART_BY_NAME[xname]
    k = FIBER_SLOTS.index(fiber)
    qchi = xc["qchi"]
    chis = FIBER_CHI + [qchi]
    coords = xc["coords"] + tuple(s for s in FIBER_SLOTS if s != fiber)
    wmap = dict(xc["wmap"])
    for s, chi in zip(FIBER_SLOTS, chis):
        if s != fiber:
            wmap[s] = w4_sub(chi, chis[k])
    V = XV + coords
    bvec = [p.rename_ring(V) for p in xc["b"](coords)]
    uvec = [p.rename_ring(V) for p in xc["u"](coords)]
    g = MPoly.zero(V)
    for bexpr, mono in zip(bvec, MON_QUAD):
        g = g + bexpr * MPoly.monomial(V, _embed_exp(mono, V))
    qcubic = _q_cubic(V, uvec, xc["qnorm"])
    basis = [MPoly.monomial(V, _embed_exp(m, V)) for m in MON_CUBIC7[:4]] + [qcubic]
    f = MPoly.zero(V)
    fslot_exprs = []
    for s, b in zip(FIBER_SLOTS, basis):
        coeff = _const(V, 1) if s == fiber else _mk(V, s)
        f = f + coeff * b
        fslot_exprs.append(coeff)
    # coefficient expressions of f on the 7 cubic monomials (for the
    # center parametrizations), over the coordinate ring only
    Vc = coords
    qparts = [p.rename_ring(Vc) * (3 * xc["qnorm"]) for p in xc["u"](coords)]
    qparts[2] = xc["u"](coords)[2].rename_ring(Vc) * (2 * xc["qnorm"])
    aq = _const(Vc, 1) if fiber == "a4" else _mk(Vc, "a4")
    fvec = []
    for i, s in enumerate(FIBER_SLOTS[:4]):
        fvec.append(_const(Vc, 1) if s == fiber else _mk(Vc, s))
    fvec += [aq * qparts[0], aq * qparts[1], aq * qparts[2]]
    meta = {
        "bvec": [p.rename_ring(Vc) for p in xc["b"](coords)],
        "uvec": [p.rename_ring(Vc) for p in xc["u"](coords)],
        "fvec": fvec,
    }
    return Chart(key=(xname, fiber), coords=coords, wmap=wmap, f=f, g=g, meta=meta)


def all_ycharts() -> List[Chart]:
    return [make_ychart(xc["name"], s) for xc in XCHARTS for s in FIBER_SLOTS]


# ---------------------------------------------------------------------------
# echelon form of center ideals and the blowup construction


@dataclass(frozen=True)
class EchelonGen:
    """A center generator c*(var - expr) with expr over the free coords."""

    var: str
    expr: MPoly
    scale: Rat
    weight: Weight4

    def poly(self, vars) -> MPoly:
        p = MPoly.variable(vars, self.var) - self.expr.rename_ring(vars)
        return p * self.scale


def echelonize(ideal: Ideal, wmap: Dict[str, Weight4]) -> Optional[List[EchelonGen]]:
    """Solve a smooth center's ideal as var_i = expr_i(free coordinates).

    Works off the reduced Groebner basis; returns None when the generators
    cannot be brought to that shape (non-smooth or non-graph center).
    """
    vars = ideal.vars
    work = [g for g in ideal.groebner()]
    if any(len(g.terms) == 1 and g.constant_term() for g in work):
        return None  # unit ideal: nothing to solve
    solved: Dict[str, MPoly] = {}

    def substitute_solved(p: MPoly) -> MPoly:
        if not solved:
            return p
        needed = [v for v in p.free_vars() if v in solved]
        if not needed:
            return p
        return p.substitute({v: solved[v] for v in needed}, vars)

    progress = True
    while progress:
        progress = False
        nxt = []
        for g in sorted(work, key=MPoly.sort_key):
            g = substitute_solved(g)
            if g.is_zero:
                continue
            pick = None
            for v in sorted(g.free_vars(), key=vars.index):
                unit = tuple(1 if x == v else 0 for x in vars)
                c = g.coeff(unit)
                if not c:
                    continue
                vi = vars.index(v)
                if any(exp[vi] and exp != unit for exp in g.terms):
                    continue
                pick = (v, c, unit)
                break
            if pick is None:
                nxt.append(g)
                continue
            v, c, unit = pick
            rest = g - MPoly.monomial(vars, unit, c)
            expr = rest * Fraction(-1, 1) * (Fraction(1) / c)
            solved = {u: e.substitute({v: expr}, vars) if v in e.free_vars() else e
                      for u, e in solved.items()}
            solved[v] = expr
            progress = True
        work = nxt
    if any(not substitute_solved(g).is_zero for g in work):
        return None
    out = []
    for v in sorted(solved, key=vars.index):
        expr = solved[v]
        if any(u in solved for u in expr.free_vars()):
            return None
        w = wmap[v]
        if not expr.is_zero and poly_w4(expr, wmap) != w:
            raise GeometryError(f"center generator {v} - {expr} is not semi-invariant")
        out.append(EchelonGen(v, expr, Fraction(1), w))
    return out


def _fresh_name(base: str, taken) -> str:
    name = base
    while name in taken:
        name += "_"
    return name


def blow_chart(chart: Chart, stage: int, gens: Sequence[EchelonGen], k: int,
               child_tag: Optional[str] = None) -> Chart:
    """The blowup chart with exceptional equation gens[k], echelon-solved."""
    letter = STAGE_LETTER[stage]
    lead = {g.var for g in gens}
    frees = [c for c in chart.coords if c not in lead]
    exc_gen = gens[k]
    taken = set(frees)
    if exc_gen.expr.is_zero and exc_gen.scale == 1:
        excname = exc_gen.var
    else:
        excname = _fresh_name(f"{letter}x", set(chart.coords))
    taken.add(excname)
    ratio_names = {}
    for i, g in enumerate(gens):
        if i == k:
            continue
        nm = _fresh_name(f"{letter}{i}", taken)
        ratio_names[i] = nm
        taken.add(nm)
    coords = tuple(ratio_names[i] for i in range(len(gens)) if i != k) \
        + (excname,) + tuple(frees)
    wmap = {}
    for i, g in enumerate(gens):
        if i != k:
            wmap[ratio_names[i]] = w4_sub(g.weight, exc_gen.weight)
    wmap[excname] = exc_gen.weight
    for fcoord in frees:
        wmap[fcoord] = chart.wmap[fcoord]
    exc = MPoly.variable(coords, excname)
    subst = {}
    for i, g in enumerate(gens):
        expr = g.expr.rename_ring(coords)
        if i == k:
            subst[g.var] = expr + exc * (Fraction(1) / g.scale)
        else:
            subst[g.var] = expr + MPoly.variable(coords, ratio_names[i]) * exc \
                * (Fraction(1) / g.scale)
    for fcoord in frees:
        subst[fcoord] = MPoly.variable(coords, fcoord)
    exc_by_stage = {}
    for st, mono in chart.exc_by_stage.items():
        img = mono.substitute(subst, coords)
        img_prim, _ = img.primitive()
        if len(img_prim.terms) != 1:
            raise GeometryError(f"exceptional equation of stage {st} is no longer "
                                f"a monomial after the stage-{stage} blowup")
        exc_by_stage[st] = img_prim
    exc_by_stage[stage] = MPoly.variable(coords, excname)
    tag = child_tag if child_tag is not None else f"{STAGE_NAME[stage]}@{gens[k].var}"
    return Chart(key=chart.key + (tag,), coords=coords, wmap=wmap, parent=chart,
                 subst=subst, created_stage=stage, exc_by_stage=exc_by_stage)


# ---------------------------------------------------------------------------
# the four blowup centers, per chart


def _minors(exprs: Sequence[MPoly], targets: Sequence[MPoly]) -> List[MPoly]:
    out = []
    n = len(exprs)
    for i in range(n):
        for j in range(i + 1, n):
            m = exprs[i] * targets[j] - exprs[j] * targets[i]
            if not m.is_zero:
                out.append(m)
    return out


def _center_C_base(chart: Chart) -> Ideal:
    """The curve of (plane^2, plane^3) pairs through the flag's line, as the
    closure of its rational parametrization by the pencil parameter."""
    coords = chart.coords
    R = coords + ("tau",)
    tau = MPoly.variable(R, "tau")
    one = MPoly.const(R, 1)
    zero = MPoly.zero(R)
    lsq = [one, tau * 2, zero, tau * tau]
    lcub = [one, tau * 3, zero, zero, tau * tau * 3, zero, tau ** 3]
    lu = [tau * 2, zero, tau * tau]
    eqs = []
    eqs += _minors([p.rename_ring(R) for p in chart.meta["bvec"]], lsq)
    eqs += _minors([p.rename_ring(R) for p in chart.meta["uvec"]], lu)
    eqs += _minors([p.rename_ring(R) for p in chart.meta["fvec"]], lcub)
    ideal = Ideal(R, eqs)
    # the projection-point target vanishes at tau = 0; saturate that out
    ideal = ideal.saturate(tau)
    return ideal.eliminate(("tau",)).with_ring(coords)


def _center_E_base(chart: Chart) -> Ideal:
    """The exceptional-plane center: quadric = plane^2, cubic = plane^3."""
    coords = chart.coords
    R = coords
    one = MPoly.const(R, 1)
    zero = MPoly.zero(R)
    eqs = _minors(chart.meta["bvec"], [one, zero, zero, zero])
    eqs += _minors(chart.meta["fvec"], [one] + [zero] * 6)
    return Ideal(R, eqs)


def _transport(chart: Chart, ideal: Ideal) -> Ideal:
    """Strict transform of a parent-chart ideal into a blowup child."""
    gens = [g.substitute(chart.subst, chart.coords) for g in ideal.gens]
    out = Ideal(chart.coords, gens)
    mono = chart.exc_by_stage[chart.created_stage]
    for v in mono.free_vars():
        out = out.saturate(MPoly.variable(chart.coords, v))
    return out


def center_ideal(chart: Chart, stage: int) -> Ideal:
    """The stage's blowup center inside this chart."""
    if stage in chart._centers:
        return chart._centers[stage]
    if stage == 1:
        out = _center_C_base(chart) if chart.parent is None \
            else _transport(chart, center_ideal(chart.parent, 1))
    elif stage == 2:
        out = _center_E_base(chart) if chart.parent is None \
            else _transport(chart, center_ideal(chart.parent, 2))
    elif stage == 3:
        out = chart.indeterminacy_ideal().saturate_ideal(center_M(chart))
    elif stage == 4:
        out = center_M(chart)
    else:
        raise ValueError(f"unknown stage {stage}")
    chart._centers[stage] = out
    return out


def center_M(chart: Chart) -> Ideal:
    """The second indeterminacy component at the two-blowup stage: the part
    of the remaining indeterminacy not inside the first exceptional divisor.
    Its strict transform is the last blowup center."""
    if chart._mideal is not None:
        return chart._mideal
    if chart.created_stage >= 3:
        out = _transport(chart, center_M(chart.parent))
    else:
        out = chart.indeterminacy_ideal()
        mono = chart.exc_by_stage.get(1)
        if mono is not None:
            for v in mono.free_vars():
                out = out.saturate(MPoly.variable(chart.coords, v))
    chart._mideal = out
    return out


# ---------------------------------------------------------------------------
# fixed loci


@dataclass
class RootRec:
    """One normal Chern root of a fixed line: lam + a*h, tracked by the
    coordinate carrying it in the two end charts."""

    lam: Weight4
    a: int
    name_a: str
    name_b: str


@dataclass
class PointLocus:
    chart: Chart
    provenance: Tuple[str, ...]
    done: bool = False

    @property
    def kind(self):
        return "point"

    def tangent_vectors(self) -> List[Weight4]:
        return [self.chart.wmap[c] for c in self.chart.coords]

    def sort_key(self):
        return ("point", self.provenance)


@dataclass
class LineLocus:
    chart_a: Chart
    free_a: str
    chart_b: Chart
    free_b: str
    roots: List[RootRec]
    provenance: Tuple[str, ...]
    done: bool = False
    birth_chart: Chart = None
    birth_free: str = None

    @property
    def kind(self):
        return "line"

    def sort_key(self):
        return ("line", self.provenance)


def _gens_vanish_at_origin(ideal: Ideal) -> bool:
    return bool(ideal.gens) and all(g.eval_origin() == 0 for g in ideal.gens)


def _axis_restrictions(ideal: Ideal, free: str) -> List[MPoly]:
    return [g.restrict_axis(free) for g in ideal.gens]


def _axis_meeting(ideal: Ideal, free: str):
    """Where a center's ideal vanishes along a fixed line's chart axis.

    Returns 'none', ('inside',) when the whole axis lies in the center, or
    ('points', [(root, mult), ...], leftover_degree).
    """
    restr = [p for p in _axis_restrictions(ideal, free)]
    if not ideal.gens:
        return ("inside",)
    nonzero = [univ_coeffs(p) for p in restr if not p.is_zero]
    if not nonzero:
        return ("inside",)
    g = univ_gcd(nonzero)
    if len(g) == 1:
        return ("none",)
    roots, leftover = rational_roots(list(g))
    if leftover > 0:
        raise GeometryError("center meets a fixed line at a non-rational point")
    return ("points", roots)


class _TreeBuilder:
    """Builds the standard-flag fixed-locus inventory, once."""

    def __init__(self):
        self.points: List[PointLocus] = []
        self.lines: List[LineLocus] = []

    def run(self):
        for chart in all_ycharts():
            if any(v == W4_ZERO for v in chart.wmap.values()):
                raise GeometryError(f"zero coordinate weight at top stage in {chart}")
            self.points.append(PointLocus(chart, chart.key + ("origin",)))
        for stage in (1, 2, 3, 4):
            self._run_stage(stage)
        self._finalize()
        return self

    # -- stage driver --------------------------------------------------------

    def _run_stage(self, stage: int):
        new_points: List[PointLocus] = []
        new_lines: List[LineLocus] = []
        for pt in self.points:
            new_points.extend(self._step_point(pt, stage, new_lines))
        keep_lines = []
        for ln in self.lines:
            self._step_line(ln, stage, new_points, new_lines)
            keep_lines.append(ln)
        self.points = sorted(new_points, key=PointLocus.sort_key)
        self.lines = sorted(keep_lines + new_lines, key=LineLocus.sort_key)

    def _step_point(self, pt: PointLocus, stage: int, new_lines) -> List[PointLocus]:
        if pt.done:
            return [pt]
        vals = om.entries_at_origin(pt.chart.entries())
        if vals:
            pt.done = True
            return [pt]
        center = center_ideal(pt.chart, stage)
        if center.is_unit or not _gens_vanish_at_origin(center):
            return [pt]
        ech = echelonize(center, pt.chart.wmap)
        if ech is None:
            raise GeometryError(f"center {STAGE_NAME[stage]} not in echelon form at {pt.chart}")
        if len(ech) != STAGE_CODIM[stage]:
            raise GeometryError(
                f"center {STAGE_NAME[stage]} has codimension {len(ech)} at {pt.chart}, "
                f"expected {STAGE_CODIM[stage]}")
        if any(not g.expr.is_zero and g.expr.eval_origin() != 0 for g in ech):
            # solved exprs with constant terms would put the point off-center
            raise GeometryError("echelon form inconsistent with origin membership")
        return self._spawn_over_fixed_point(pt.chart, ech, stage, pt.provenance,
                                            new_lines)

    def _spawn_over_fixed_point(self, chart: Chart, ech, stage, provenance,
                                new_lines) -> List[PointLocus]:
        groups: Dict[Weight4, List[int]] = {}
        for i, g in enumerate(ech):
            groups.setdefault(g.weight, []).append(i)
        out = []
        for w, idxs in sorted(groups.items()):
            if len(idxs) == 1:
                k = idxs[0]
                child = blow_chart(chart, stage, ech, k)
                out.append(PointLocus(
                    child, provenance + (f"{STAGE_NAME[stage]}:{ech[k].var}",)))
            elif len(idxs) == 2:
                ka, kb = idxs
                ca = blow_chart(chart, stage, ech, ka)
                cb = blow_chart(chart, stage, ech, kb)
                new_lines.append(self._make_line(chart, ech, stage, ka, kb, ca, cb,
                                                 provenance))
            else:
                raise GeometryError(
                    f"normal weight of multiplicity {len(idxs)} at {chart}: "
                    "only isolated points and fixed lines are supported")
        return out

    def _make_line(self, chart, ech, stage, ka, kb, ca: Chart, cb: Chart,
                   provenance) -> LineLocus:
        lead = {g.var for g in ech}
        frees = [c for c in chart.coords if c not in lead]
        wa = ech[ka].weight
        roots = []
        exc_a_name = next(iter(ca.exc_by_stage[stage].free_vars()))
        exc_b_name = next(iter(cb.exc_by_stage[stage].free_vars()))
        # O(-1) root of the exceptional divisor
        roots.append(RootRec(wa, -1, exc_a_name, exc_b_name))
        # Hom roots toward the other normal directions
        for i, g in enumerate(ech):
            if i in (ka, kb):
                continue
            roots.append(RootRec(w4_sub(g.weight, wa), +1,
                                 _ratio_in(ca, stage, i), _ratio_in(cb, stage, i)))
        # center-tangent directions, untwisted
        for fcoord in frees:
            roots.append(RootRec(chart.wmap[fcoord], 0, fcoord, fcoord))
        line = LineLocus(
            chart_a=ca, free_a=_ratio_in(ca, stage, kb),
            chart_b=cb, free_b=_ratio_in(cb, stage, ka),
            roots=roots,
            provenance=provenance + (f"{STAGE_NAME[stage]}:line@{ech[ka].var}~{ech[kb].var}",),
        )
        line.birth_chart = line.chart_a
        line.birth_free = line.free_a
        self._check_line_chart(line)
        return line

    def _check_line_chart(self, line: LineLocus):
        """Chart-scan consistency: the weights of the canonical chart's
        nonzero-weight coordinates must match the root weights."""
        for chart, free in ((line.chart_a, line.free_a), (line.chart_b, line.free_b)):
            if chart.wmap[free] != W4_ZERO:
                raise GeometryError(f"fixed-line parameter {free} has nonzero weight")
            nz = sorted(chart.wmap[c] for c in chart.coords if c != free)
            rr = sorted(r.lam for r in line.roots)
            if nz != rr:
                raise GeometryError("line roots inconsistent with chart weights")
            names = {free}
            for r in line.roots:
                names.add(r.name_a if chart is line.chart_a else r.name_b)
            if names != set(chart.coords):
                raise GeometryError("line root names inconsistent with chart coordinates")

    # -- lines ----------------------------------------------------------------

    def _step_line(self, line: LineLocus, stage: int, new_points, new_lines):
        if line.done:
            return
        ind_a = line.chart_a.indeterminacy_ideal()
        state_a = _axis_meeting(ind_a, line.free_a)
        ind_b = line.chart_b.indeterminacy_ideal()
        state_b = _axis_meeting(ind_b, line.free_b)
        if state_a == ("none",) and state_b == ("none",):
            line.done = True
            return
        if state_a == ("inside",) or state_b == ("inside",):
            raise GeometryError("fixed line inside the indeterminacy locus")
        center_a = center_ideal(line.chart_a, stage)
        meet_a = _axis_meeting(center_a, line.free_a) if not center_a.is_unit else ("none",)
        if meet_a == ("inside",):
            raise GeometryError(f"fixed line inside center {STAGE_NAME[stage]}")
        roots_a = list(meet_a[1]) if meet_a[0] == "points" else []
        center_b = center_ideal(line.chart_b, stage)
        meet_b = _axis_meeting(center_b, line.free_b) if not center_b.is_unit else ("none",)
        if meet_b == ("inside",):
            raise GeometryError(f"fixed line inside center {STAGE_NAME[stage]}")
        roots_b = [r for r in (meet_b[1] if meet_b[0] == "points" else [])
                   if r[0] == 0]
        for u0, mult in roots_a:
            if mult != 1:
                raise GeometryError("center tangent to a fixed line")
            self._process_meeting(line, stage, "a", new_points, new_lines)
        for u0, mult in roots_b:
            if mult != 1:
                raise GeometryError("center tangent to a fixed line")
            self._process_meeting(line, stage, "b", new_points, new_lines,
                                  infinity_only=True)

    def _process_meeting(self, line: LineLocus, stage: int, side: str,
                         new_points, new_lines, infinity_only=False):
        chart = line.chart_a if side == "a" else line.chart_b
        free = line.free_a if side == "a" else line.free_b
        center = center_ideal(chart, stage)
        ech = echelonize(center, chart.wmap)
        if ech is None:
            raise GeometryError(f"center {STAGE_NAME[stage]} not echelon at {chart}")
        if len(ech) != STAGE_CODIM[stage]:
            raise GeometryError("unexpected center codimension at a line meeting")
        zero_gens = [i for i, g in enumerate(ech) if g.weight == W4_ZERO]
        if len(zero_gens) != 1:
            raise GeometryError("line meeting needs exactly one weight-zero generator")
        k0 = zero_gens[0]
        if ech[k0].var != free:
            raise GeometryError("weight-zero generator is not transverse to the line")
        # twist the roots along the center's conormal directions
        u0 = ech[k0].expr.eval_origin()
        for i, g in enumerate(ech):
            if i == k0:
                continue
            hit = None
            for r in line.roots:
                nm = r.name_a if side == "a" else r.name_b
                if nm == g.var:
                    hit = r
                    break
            if hit is None or hit.lam != g.weight:
                raise GeometryError(f"no normal root matches conormal direction {g.var}")
            hit.a -= 1
        # the line continues as the axis of the new exceptional coordinate
        child0 = blow_chart(chart, stage, ech, k0, child_tag=f"{STAGE_NAME[stage]}@{free}={u0}")
        newfree = next(iter(child0.exc_by_stage[stage].free_vars()))
        rename = {g.var: _ratio_in(child0, stage, i) for i, g in enumerate(ech) if i != k0}
        for r in line.roots:
            if side == "a":
                r.name_a = rename.get(r.name_a, r.name_a)
            else:
                r.name_b = rename.get(r.name_b, r.name_b)
        if side == "a":
            line.chart_a, line.free_a = child0, newfree
        else:
            line.chart_b, line.free_b = child0, newfree
        self._check_line_chart(line)
        # exceptional loci over the meeting point: one per nonzero weight class
        groups: Dict[Weight4, List[int]] = {}
        for i, g in enumerate(ech):
            if i != k0:
                groups.setdefault(g.weight, []).append(i)
        prov = line.provenance + (f"{STAGE_NAME[stage]}@{free}={u0}",)
        for w, idxs in sorted(groups.items()):
            if len(idxs) == 1:
                k = idxs[0]
                child = blow_chart(chart, stage, ech, k)
                new_points.append(PointLocus(child, prov + (f"pt:{ech[k].var}",)))
            elif len(idxs) == 2:
                ka, kb = idxs
                ca = blow_chart(chart, stage, ech, ka)
                cb = blow_chart(chart, stage, ech, kb)
                new_lines.append(self._make_line(chart, ech, stage, ka, kb, ca, cb, prov))
            else:
                raise GeometryError("normal weight multiplicity >= 3 at a line meeting")
        # when the meeting is visible at the opposite end too, that chart must
        # also follow the blowup to stay a valid chart of the new stage
        if not infinity_only and u0 != 0:
            self._extend_far_side(line, stage, "b" if side == "a" else "a")

    def _extend_far_side(self, line: LineLocus, stage: int, side: str):
        chart = line.chart_a if side == "a" else line.chart_b
        free = line.free_a if side == "a" else line.free_b
        center = center_ideal(chart, stage)
        ech = echelonize(center, chart.wmap)
        if ech is None:
            raise GeometryError("far-side chart lost echelon form")
        zero_gens = [i for i, g in enumerate(ech) if g.weight == W4_ZERO]
        if len(zero_gens) != 1 or ech[zero_gens[0]].var != free:
            raise GeometryError("far-side meeting inconsistent")
        k0 = zero_gens[0]
        child0 = blow_chart(chart, stage, ech, k0, child_tag=f"{STAGE_NAME[stage]}@{free}~far")
        newfree = next(iter(child0.exc_by_stage[stage].free_vars()))
        rename = {g.var: _ratio_in(child0, stage, i) for i, g in enumerate(ech) if i != k0}
        for r in line.roots:
            if side == "a":
                r.name_a = rename.get(r.name_a, r.name_a)
            else:
                r.name_b = rename.get(r.name_b, r.name_b)
        if side == "a":
            line.chart_a, line.free_a = child0, newfree
        else:
            line.chart_b, line.free_b = child0, newfree
        self._check_line_chart(line)

    # -- final data ------------------------------------------------------------

    def _finalize(self):
        self.point_data = []
        for pt in self.points:
            vals = om.entries_at_origin(pt.chart.entries())
            lam, _ = om.w_class_from_values(vals, pt.chart.entry_weight, None)
            self.point_data.append({
                "provenance": pt.provenance,
                "chart": pt.chart,
                "tangent": tuple(pt.tangent_vectors()) + tuple(flag_tangent_vectors(
                    STANDARD_FLAG)),
                "wlam": lam,
            })
        self.line_data = []
        for ln in self.lines:
            ent = ln.birth_chart.entries()
            vec = om.entries_on_axis(ent, ln.birth_free)
            if not vec:
                raise GeometryError("1-form vanished along a fixed line")
            vec, _removed = om.axis_gcd_clean(vec)
            lams = {ln.birth_chart.entry_weight(k) for k in vec}
            if len(lams) != 1:
                raise GeometryError("entries along a fixed line carry unequal weights")
            d = max(p.total_degree() for p in vec.values())
            roots = tuple((r.lam, r.a) for r in ln.roots)
            self.line_data.append({
                "provenance": ln.provenance,
                "chart": ln.chart_a,
                "free": ln.free_a,
                "roots": roots + tuple((v, 0) for v in flag_tangent_vectors(STANDARD_FLAG)),
                "wlam": lams.pop(),
                "wdeg": d,
            })


def _ratio_in(chart: Chart, stage: int, i: int) -> str:
    base = f"{STAGE_LETTER[stage]}{i}"
    for c in chart.coords:
        if c == base or (c.startswith(base) and set(c[len(base):]) == {"_"}):
            return c
    raise KeyError(f"ratio coordinate {base} not in {chart.coords}")


# ---------------------------------------------------------------------------
# exhaustive per-neighborhood resolution check


def resolve_tree(xname: str) -> List[dict]:
    """Replay the blowup sequence over every chart branch of one projection
    neighborhood and report whether the 1-form's base locus empties out.

    Charts at each branching level overlap: the fiber charts of the cubic
    bundle where a coordinate slot is invertible, and the generator charts
    of each blowup where a ratio coordinate is invertible.  When a center
    fails to be a coordinate graph inside one chart, the chart's whole base
    locus is checked to lie inside sibling regions whose subtrees resolved
    on their own, and the branch is delegated there; failing that, the
    sweep aborts.
    """
    children = []
    for fiber in FIBER_SLOTS:
        chart = make_ychart(xname, fiber)
        sibs = [(f"{xname},{s}", MPoly.variable(chart.coords, s))
                for s in FIBER_SLOTS if s != fiber]
        children.append((f"{xname},{fiber}", chart, [], sibs))
    return _resolve_two_pass(children, 1)


def _resolve_two_pass(children, stage: int) -> List[dict]:
    """First pass: children that resolve unaided; second pass: failures may
    delegate their base locus to the regions of successful siblings."""
    leaves: List[dict] = []
    succeeded = set()
    retry = []
    for name, chart, inherited, sibs in children:
        try:
            got = _resolve_rec(chart, stage, inherited)
        except GeometryError:
            retry.append((name, chart, inherited, sibs))
            continue
        leaves.extend(got)
        if all(l["unit"] for l in got):
            succeeded.add(name)
    for name, chart, inherited, sibs in retry:
        overlaps = inherited + [(n, ov) for n, ov in sibs if n in succeeded]
        leaves.extend(_resolve_rec(chart, stage, overlaps))
    return leaves


def _resolve_rec(chart: Chart, stage: int, overlaps) -> List[dict]:
    ind = chart.indeterminacy_ideal()
    if ind.is_unit:
        return [{"chart": chart.name, "resolved_after_stage": stage - 1, "unit": True}]
    if stage > 4:
        return [{"chart": chart.name, "resolved_after_stage": None, "unit": False}]
    center = center_ideal(chart, stage)
    if center.is_unit:
        return _resolve_rec(chart, stage + 1, overlaps)
    ech = echelonize(center, chart.wmap)
    if ech is None:
        if overlaps and Ideal(chart.coords,
                              list(ind.gens) + [ov for _, ov in overlaps]).is_unit:
            return [{"chart": chart.name, "unit": True,
                     "delegated_to": sorted(n for n, _ in overlaps)}]
        raise GeometryError(f"stage-{stage} center is not echelonizable in {chart}")
    children = []
    for k in range(len(ech)):
        child = blow_chart(chart, stage, ech, k)
        inherited = [(n, ov.substitute(child.subst, child.coords))
                     for n, ov in overlaps]
        sibs = [(f"{chart.name}|{stage}@{j}",
                 MPoly.variable(child.coords, _ratio_in(child, stage, j)))
                for j in range(len(ech)) if j != k]
        children.append((f"{chart.name}|{stage}@{k}", child, inherited, sibs))
    return _resolve_two_pass(children, stage + 1)


_TREE_LOCK = threading.Lock()
_TREE: Optional[_TreeBuilder] = None


def standard_tree() -> _TreeBuilder:
    """The fixed-locus inventory over the standard flag (built once)."""
    global _TREE
    if _TREE is None:
        with _TREE_LOCK:
            if _TREE is None:
                _TREE = _TreeBuilder().run()
    return _TREE


# ---------------------------------------------------------------------------
# specialization to a flag and a concrete weight vector


@dataclass(frozen=True)
class FixedLocus:
    """A fixed locus with weights specialized at a flag and weight vector."""

    kind: str
    flag: str
    provenance: Tuple[str, ...]
    tangent: Tuple[int, ...] = ()
    roots: Tuple[Tuple[int, int], ...] = ()
    w_lambda: int = 0
    w_degree: int = 0


def enumerate_fixed_loci(flag: FixedFlag, w: WeightVector | Sequence[int]) -> List[FixedLocus]:
    """All torus-fixed loci of the resolved space over one fixed flag, with
    integer weights; aborts on a non-generic weight vector."""
    ws = tuple(w)
    tree = standard_tree()
    out = []
    for pd in tree.point_data:
        tangent = tuple(w4_dot(flag.relabel_w4(c), ws) for c in pd["tangent"])
        if any(t == 0 for t in tangent):
            raise ValueError(f"weight vector {ws} is non-generic at flag {flag.name}; "
                             "choose different weights")
        lam = w4_dot(flag.relabel_w4(pd["wlam"]), ws)
        if lam == 0:
            raise ValueError(f"weight vector {ws} kills a 1-form weight; "
                             "choose different weights")
        out.append(FixedLocus("point", flag.name, pd["provenance"], tangent=tangent,
                              w_lambda=lam))
    for ld in tree.line_data:
        roots = tuple((w4_dot(flag.relabel_w4(c), ws), a) for c, a in ld["roots"])
        if any(r[0] == 0 for r in roots):
            raise ValueError(f"weight vector {ws} is non-generic at flag {flag.name}; "
                             "choose different weights")
        lam = w4_dot(flag.relabel_w4(ld["wlam"]), ws)
        if lam == 0:
            raise ValueError(f"weight vector {ws} kills a 1-form weight; "
                             "choose different weights")
        out.append(FixedLocus("line", flag.name, ld["provenance"], roots=roots,
                              w_lambda=lam, w_degree=ld["wdeg"]))
    return out
