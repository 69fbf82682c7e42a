"""Fiberwise torus-weight multisets of the equivariant bundles in the
parameter-space construction.

Every bundle here restricts, at a fixed flag, to a direct sum of monomial
lines, so its fiber is described by the list of monomial weights.  At the
standard flag the monomial bases are:

  B      x0^2, x0*x1, x0*x2, x1^2          (special quadrics, rank 4)
  A      x0^3, x0^2*x1, x0^2*x2, x0^2*x3,
         x0*x1^2, x0*x1*x2, x1^3           (special cubics, rank 7)
  Bbar   B / <x0^2>                        (rank 3)
  Abar   A / (S1 . x0^2)                   (rank 3)

B' (rank 2) and A' (rank 5) live on the blown-up quadric bundle; their
fibers depend on the chosen point of P(Bbar), passed as that point's
monomial.  For other flags everything is relabelled through the flag's
permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .flags import FixedFlag, WeightVector, monomial_weight

Exp = Tuple[int, int, int, int]

# monomial tables at the standard flag
MON_X = [(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0), (0, 0, 0, 1)]
MON_B: List[Exp] = [(2, 0, 0, 0), (1, 1, 0, 0), (1, 0, 1, 0), (0, 2, 0, 0)]
MON_BBAR: List[Exp] = [(1, 1, 0, 0), (1, 0, 1, 0), (0, 2, 0, 0)]
MON_A: List[Exp] = [
    (3, 0, 0, 0), (2, 1, 0, 0), (2, 0, 1, 0), (2, 0, 0, 1),
    (1, 2, 0, 0), (1, 1, 1, 0), (0, 3, 0, 0),
]
MON_ABAR: List[Exp] = [(1, 2, 0, 0), (1, 1, 1, 0), (0, 3, 0, 0)]

RANKS = {
    "S1": 4, "Qdual": 2, "Pdual": 3, "B": 4, "A": 7,
    "Bbar": 3, "Abar": 3, "Bprime": 2, "Aprime": 5,
}


@dataclass(frozen=True)
class BundleSpec:
    """A named equivariant bundle, with optional parameters.

    `twist` is the k of O_plane(-k); `fiber_point` picks the point of
    P(Bbar) (as a standard-flag monomial from MON_BBAR) that B' and A'
    and the tautological sub-bundles depend on.
    """

    name: str
    twist: int = 0
    fiber_point: Optional[Exp] = None

    def rank(self) -> int:
        if self.name == "O_plane":
            return 1
        if self.name.startswith("taut_sub"):
            return 1
        if self.name not in RANKS:
            raise ValueError(f"unknown bundle {self.name!r}")
        return RANKS[self.name]


def _weights(monos: Sequence[Exp], flag: FixedFlag, w) -> List[int]:
    return [monomial_weight(flag.relabel_exponent(m), w) for m in monos]


def fiber_weights(spec: BundleSpec, flag: FixedFlag, w: WeightVector | Sequence[int]) -> List[int]:
    """Weights of the bundle's fiber at a fixed flag, as a sorted multiset."""
    ws = tuple(w)
    name = spec.name
    if name == "S1":
        out = _weights(MON_X, flag, ws)
    elif name == "O_plane":
        # O_plane(-k) is spanned by the k-th power of the plane equation
        k = spec.twist or 1
        out = [k * monomial_weight(flag.relabel_exponent((1, 0, 0, 0)), ws)]
    elif name == "Qdual":
        out = _weights([(1, 0, 0, 0), (0, 1, 0, 0)], flag, ws)
    elif name == "Pdual":
        out = _weights([(1, 0, 0, 0), (0, 1, 0, 0), (0, 0, 1, 0)], flag, ws)
    elif name == "B":
        out = _weights(MON_B, flag, ws)
    elif name == "A":
        out = _weights(MON_A, flag, ws)
    elif name == "Bbar":
        out = _weights(MON_BBAR, flag, ws)
    elif name == "Abar":
        out = _weights(MON_ABAR, flag, ws)
    elif name == "Bprime":
        pt = _require_point(spec)
        out = _weights([(2, 0, 0, 0), pt], flag, ws)
    elif name == "Aprime":
        pt = _require_point(spec)
        # S1 (x) O(-2) plus the pulled-back tautological line of P(Abar),
        # whose fiber is x_s1 times the chosen quadric class
        s1_part = [_madd(m, (2, 0, 0, 0)) for m in MON_X]
        taut = _madd(pt, (0, 1, 0, 0))
        out = _weights(s1_part + [taut], flag, ws)
    elif name == "taut_sub":
        pt = _require_point(spec)
        out = _weights([pt], flag, ws)
    else:
        raise ValueError(f"unknown bundle {name!r}")
    if len(out) != spec.rank():
        raise AssertionError(f"rank mismatch for {name}")
    return sorted(out)


def _require_point(spec: BundleSpec) -> Exp:
    if spec.fiber_point is None:
        raise ValueError(f"bundle {spec.name} needs a fiber_point argument")
    return spec.fiber_point


def _madd(a: Exp, b: Exp) -> Exp:
    return tuple(x + y for x, y in zip(a, b))


def check_ovAovB(flag: FixedFlag, w: WeightVector | Sequence[int], shift_index: int = 1) -> bool:
    """Abar must match Bbar shifted by the weight of Qdual/O(-1).

    That quotient's fiber is spanned by the line's second coordinate form,
    x_s1, of weight w_s1; `shift_index` deliberately corrupted serves as a
    negative control.
    """
    ws = tuple(w)
    shift = ws[flag.perm[shift_index]]
    abar = fiber_weights(BundleSpec("Abar"), flag, ws)
    bbar = fiber_weights(BundleSpec("Bbar"), flag, ws)
    return sorted(abar) == sorted(x + shift for x in bbar)
