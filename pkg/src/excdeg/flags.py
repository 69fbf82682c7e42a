"""The one-parameter torus action on P^3 and the 24 fixed complete flags.

The torus scales the coordinate functions, x_i -> t^(w_i) x_i, with four
pairwise-distinct integer weights.  Its fixed flags are the coordinate
flags: for a permutation s of {0,1,2,3} the plane is {x_s0 = 0}, the line
{x_s0 = x_s1 = 0} and the point {x_s0 = x_s1 = x_s2 = 0}.

Weights of monomials are plain dot products.  Internally most of the
engine carries weights as integer 4-vectors (coefficients of (w0..w3)),
specialized to integers only at the very end; the helpers for that live
here too.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, List, Sequence, Tuple

Weight4 = Tuple[int, int, int, int]

W4_ZERO: Weight4 = (0, 0, 0, 0)

# defaults for the two mandatory runs; runtime genericity checks guard them
# ((3, 17, 5, 41) fails the check: 3*17 - 2*5 - 41 = 0 kills a tangent weight)
DEFAULT_WEIGHTS = (0, 1, 4, 13)
SECOND_WEIGHTS = (1, 7, 23, 59)


def w4(c0=0, c1=0, c2=0, c3=0) -> Weight4:
    return (c0, c1, c2, c3)


def w4_add(a: Weight4, b: Weight4) -> Weight4:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3])


def w4_sub(a: Weight4, b: Weight4) -> Weight4:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3])


def w4_neg(a: Weight4) -> Weight4:
    return (-a[0], -a[1], -a[2], -a[3])


def w4_scale(a: Weight4, k: int) -> Weight4:
    return (k * a[0], k * a[1], k * a[2], k * a[3])


def w4_dot(a: Weight4, w: Sequence[int]) -> int:
    return a[0] * w[0] + a[1] * w[1] + a[2] * w[2] + a[3] * w[3]


def w4_unit(i: int) -> Weight4:
    e = [0, 0, 0, 0]
    e[i] = 1
    return tuple(e)


@dataclass(frozen=True)
class WeightVector:
    """Concrete integer weights for the torus action, pairwise distinct."""

    w0: int
    w1: int
    w2: int
    w3: int

    def __post_init__(self):
        ws = self.as_tuple()
        if len(set(ws)) != 4:
            raise ValueError(f"weights must be pairwise distinct, got {ws}")

    @classmethod
    def of(cls, ws: Sequence[int]) -> "WeightVector":
        return cls(*map(int, ws))

    def as_tuple(self) -> Tuple[int, int, int, int]:
        return (self.w0, self.w1, self.w2, self.w3)

    def __iter__(self):
        return iter(self.as_tuple())

    def __getitem__(self, i):
        return self.as_tuple()[i]


@dataclass(frozen=True)
class FixedFlag:
    """A torus-fixed complete flag, encoded by a permutation of {0,1,2,3}.

    The plane is {x_perm[0] = 0}, the line adds x_perm[1] = 0, the point
    adds x_perm[2] = 0 (so the point is the coordinate point e_perm[3]).
    The identity permutation is the standard flag.
    """

    perm: Tuple[int, int, int, int]

    def __post_init__(self):
        if sorted(self.perm) != [0, 1, 2, 3]:
            raise ValueError(f"not a permutation of 0..3: {self.perm}")

    @property
    def name(self) -> str:
        return "".join(map(str, self.perm))

    @property
    def plane_var(self) -> int:
        return self.perm[0]

    @property
    def line_vars(self) -> Tuple[int, int]:
        return (self.perm[0], self.perm[1])

    @property
    def point_coords(self) -> Tuple[int, int, int, int]:
        pt = [0, 0, 0, 0]
        pt[self.perm[3]] = 1
        return tuple(pt)

    def relabel_exponent(self, exp: Sequence[int]) -> Tuple[int, ...]:
        """Send a monomial written at the standard flag to this flag."""
        out = [0, 0, 0, 0]
        for i, e in enumerate(exp):
            out[self.perm[i]] = e
        return tuple(out)

    def relabel_w4(self, c: Weight4) -> Weight4:
        """Transport a standard-flag weight 4-vector to this flag."""
        out = [0, 0, 0, 0]
        for i, e in enumerate(c):
            out[self.perm[i]] = e
        return tuple(out)


STANDARD_FLAG = FixedFlag((0, 1, 2, 3))


def enumerate_fixed_flags() -> List[FixedFlag]:
    """All 24 torus-fixed flags, in lexicographic permutation order."""
    return [FixedFlag(p) for p in permutations(range(4))]


def monomial_weight(exp: Sequence[int], w: WeightVector | Sequence[int]) -> int:
    """Dot product of an exponent vector with the weight vector."""
    ws = tuple(w)
    return sum(e * wi for e, wi in zip(exp, ws))


def form_term_weight(exp: Sequence[int], i: int, w: WeightVector | Sequence[int]) -> int:
    """Weight of the 1-form term x^exp * dx_i."""
    return monomial_weight(exp, w) + tuple(w)[i]


def flag_tangent_vectors(flag: FixedFlag) -> List[Weight4]:
    """Tangent weights of the flag variety at a fixed flag, as 4-vectors.

    Composed of the plane piece {w_sj - w_s0}, the line-in-plane piece and
    the point-in-line piece; for the standard flag this is
    {w_j - w_i : i < j}.  The sign convention is the one pinned by the
    projective-space oracles: a chart coordinate scaling as z -> t^m z
    contributes tangent weight m.
    """
    out = []
    p = flag.perm
    for i in range(4):
        for j in range(i + 1, 4):
            out.append(w4_sub(w4_unit(p[j]), w4_unit(p[i])))
    return out


def flag_tangent_weights(flag: FixedFlag, w: WeightVector | Sequence[int]) -> List[int]:
    """The 6 tangent weights of the flag variety at a fixed flag."""
    ws = tuple(w)
    vals = [w4_dot(c, ws) for c in flag_tangent_vectors(flag)]
    if any(v == 0 for v in vals):
        raise ValueError(f"degenerate weight vector {ws} at flag {flag.name}")
    return vals
