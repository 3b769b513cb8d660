"""Spectral-gap arithmetic and certificates from finite representations.

Closed-form calculators stay in binary64 unless every input is rational
and the formula is rational, in which case they compute exactly.
Representation-level quantities (averaging operator norm, invariant
subspace) come from finite linear algebra with stated tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CheckFailed, ValidationError
from .ergcore import FinAction, GramCertificate, Perm, gram_check
from .coinduce import FreeGroupAction

_SQRT2 = math.sqrt(2.0)
_ORTHO_TOL = 1e-12
_POWER_TOL = 1e-10


def _is_rational(v) -> bool:
    return isinstance(v, (int, Fraction))


def _check_eps(eps, positive: bool) -> None:
    if _is_rational(eps):
        ok = (eps > 0 if positive else eps >= 0) and Fraction(eps) ** 2 <= 2
    else:
        e = float(eps)
        ok = (e > 0 if positive else e >= 0) and e <= _SQRT2
    if not ok:
        hi = "sqrt(2)"
        lo = "(0," if positive else "[0,"
        raise ValidationError(f"constant must lie in {lo} {hi}]")


@dataclass(frozen=True)
class KazhdanPair:
    """Generator count and gap constant, with 0 < eps <= sqrt(2)."""

    k: int
    eps: float

    def __post_init__(self):
        if self.k < 1:
            raise ValidationError("generator count must be positive")
        _check_eps(self.eps, positive=True)


def amplify(pair: KazhdanPair, n: int) -> float:
    """Gap constant for the n-fold generator power:
    sqrt(2*(1 - ((k - eps^2/2)/k)^n)). Non-decreasing in n, limit sqrt(2)."""
    if n < 1:
        raise ValidationError("power must be at least 1")
    k = pair.k
    e = float(pair.eps)
    ratio = (k - e * e / 2.0) / k
    return math.sqrt(2.0 * (1.0 - ratio**n))


_SELECTORS = ("eps_n", "pu", "cost_a", "cost_b", "cost_c")


def bounds(selector: str, n: int, eps):
    """Closed-form bound value for the chosen selector.

    eps_n ignores eps and is always a float; the other selectors are
    rational in eps^2 and return a Fraction when eps is rational.
    cost selectors are upper bounds read against the trivial band
    [1, n) from cost_band.
    """
    if selector not in _SELECTORS:
        raise ValidationError(f"unknown selector {selector!r}")
    if n < 1:
        raise ValidationError("the parameter n must be at least 1")
    if selector == "eps_n":
        return _SQRT2 * math.sqrt((2 * n - 1) / (2 * n + 1))
    _check_eps(eps, positive=False)
    rational = _is_rational(eps)
    e2 = Fraction(eps) ** 2 if rational else float(eps) ** 2
    if selector == "pu":
        val = 1 - e2 / 2
    elif selector == "cost_a":
        gap = Fraction(n - 1, 2 * n - 1) if rational else (n - 1) / (2 * n - 1)
        val = n * (1 - e2 / 2) + gap
    elif selector == "cost_b":
        val = n - (n - 1) * e2 / 8
    else:  # cost_c
        val = n - e2 / 2
    return val


def cost_band(n: int) -> tuple[int, int]:
    """The trivial cost band [1, n) accompanying every cost selector."""
    if n < 1:
        raise ValidationError("the parameter n must be at least 1")
    return (1, n)


def cor54_thresholds(eps):
    """The capture thresholds 1 - eps^2/2**j for j = 1..4.

    Listed from weakest to strictest; they are strictly increasing for
    every admissible eps, so the guarantees they select are nested.
    """
    _check_eps(eps, positive=True)
    e2 = Fraction(eps) ** 2 if _is_rational(eps) else float(eps) ** 2
    return tuple(1 - e2 / d for d in (2, 4, 8, 16))


def cor54_tier(c, eps) -> int:
    """How many capture thresholds the value c clears (0 to 4).

    Tier j means c > 1 - eps^2/2**j; since the thresholds increase in
    j, the count is the strongest guarantee tier that applies: 1 gives
    a finite-index invariant set, 2 bounds the index by 1/c, 3 forces
    index one, 4 adds the mass bound 4c - 3 on the index-one part.
    """
    tier = 0
    for j, t in enumerate(cor54_thresholds(eps), start=1):
        if c > t:
            tier = j
    return tier


# -- positive-definite table check ------------------------------------------------


@dataclass(frozen=True)
class Prop53Report:
    verdict: str  # PASS | VACUOUS | COUNTEREXAMPLE
    hypothesis_threshold: float
    conclusion_threshold: float
    min_over_q: float
    min_over_all: float
    witness: str | None


def prop53_check(
    phi_table: Mapping[str, complex],
    q: Iterable[str],
    eps,
    delta,
    identity: str = "1",
) -> Prop53Report:
    """Near-invariance propagation for a positive-definite table.

    If the real part of the table is at least 1 - delta^2*eps^2/2 on q,
    it must be at least 1 - 2*delta^2 everywhere. A table that meets
    the hypothesis but breaks the conclusion cannot come from a group
    with gap constant eps over q, so it is flagged COUNTEREXAMPLE as a
    diagnostic rather than rejected.
    """
    _check_eps(eps, positive=True)
    if not float(delta) > 0:
        raise ValidationError("delta must be positive")
    if identity not in phi_table:
        raise ValidationError(f"table has no identity entry {identity!r}")
    if complex(phi_table[identity]) != 1:
        raise ValidationError("the table value at the identity must be 1")
    q = tuple(q)
    missing = [name for name in q if name not in phi_table]
    if missing:
        raise ValidationError(f"names outside the table: {missing}")
    if not q:
        raise ValidationError("the generator set is empty")
    e = float(eps)
    d = float(delta)
    hyp = 1.0 - d * d * e * e / 2.0
    conc = 1.0 - 2.0 * d * d
    min_q = min(complex(phi_table[name]).real for name in q)
    min_all = min(complex(v).real for v in phi_table.values())
    if min_q < hyp:
        return Prop53Report("VACUOUS", hyp, conc, min_q, min_all, None)
    if min_all >= conc:
        return Prop53Report("PASS", hyp, conc, min_q, min_all, None)
    witness = min(
        (name for name, v in phi_table.items() if complex(v).real < conc),
        key=lambda name: complex(phi_table[name]).real,
    )
    return Prop53Report("COUNTEREXAMPLE", hyp, conc, min_q, min_all, witness)


# -- finite representations ---------------------------------------------------------


class FiniteRep:
    """A representation of the closure of a FinAction, either by
    permutations (exact) or by orthogonal matrices (tolerance 1e-12),
    validated as a homomorphism exhaustively."""

    def __init__(self, action: FinAction, images: Mapping):
        closure = action.closure()
        names = {e.name for e in closure}
        if set(images) != names:
            raise ValidationError("images must cover the closure exactly")
        kinds = {isinstance(v, Perm) for v in images.values()}
        if len(kinds) != 1:
            raise ValidationError("images must be all permutations or all matrices")
        self.kind = "perm" if kinds.pop() else "matrix"
        self.action = action
        self._elements = closure
        self._name_of_perm = {e.perm.images: e.name for e in closure}
        if self.kind == "perm":
            dims = {v.size for v in images.values()}
            if len(dims) != 1:
                raise ValidationError("images act on different dimensions")
            self.dimension = dims.pop()
            self._images = dict(images)
        else:
            mats = {}
            dim = None
            for name, v in images.items():
                arr = np.asarray(v, dtype=float)
                if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                    raise ValidationError(f"image of {name!r} is not square")
                if dim is None:
                    dim = arr.shape[0]
                elif arr.shape[0] != dim:
                    raise ValidationError("images act on different dimensions")
                if np.abs(arr.T @ arr - np.eye(dim)).max() > _ORTHO_TOL:
                    raise ValidationError(f"image of {name!r} is not orthogonal")
                mats[name] = arr
            self.dimension = dim
            self._images = mats
        for e1 in closure:
            for e2 in closure:
                prod = self._name_of_perm[(e1.perm * e2.perm).images]
                if self.kind == "perm":
                    if self._images[prod] != self._images[e1.name] * self._images[e2.name]:
                        raise ValidationError(
                            f"images break multiplicativity at ({e1.name}, {e2.name})"
                        )
                else:
                    lhs = self._images[e1.name] @ self._images[e2.name]
                    if np.abs(lhs - self._images[prod]).max() > _ORTHO_TOL:
                        raise ValidationError(
                            f"images break multiplicativity at ({e1.name}, {e2.name})"
                        )
        self._inv_basis: np.ndarray | None = None

    @staticmethod
    def natural(action: FinAction) -> "FiniteRep":
        """Each element acts by its own permutation of the space."""
        return FiniteRep(action, {e.name: e.perm for e in action.closure()})

    @staticmethod
    def regular(action: FinAction) -> "FiniteRep":
        """Left translation on the closure itself."""
        closure = action.closure()
        pos = {e.perm.images: i for i, e in enumerate(closure)}
        images = {}
        for e in closure:
            images[e.name] = Perm(
                tuple(pos[(e.perm * h.perm).images] for h in closure)
            )
        return FiniteRep(action, images)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self._elements)

    @property
    def identity_name(self) -> str:
        for e in self._elements:
            if e.perm.is_identity():
                return e.name
        raise CheckFailed("closure lost the identity")

    def inverse_name(self, name: str) -> str:
        for e in self._elements:
            if e.name == name:
                return self._name_of_perm[e.perm.inverse().images]
        raise ValidationError(f"no closure element named {name!r}")

    def apply(self, name: str, vec: np.ndarray) -> np.ndarray:
        img = self._images[name]
        if self.kind == "perm":
            out = np.empty_like(vec)
            out[np.array(img.images)] = vec
            return out
        return img @ vec

    def matrix(self, name: str) -> np.ndarray:
        img = self._images[name]
        if self.kind == "matrix":
            return img
        mat = np.zeros((self.dimension, self.dimension))
        for i, j in enumerate(img.images):
            mat[j, i] = 1.0
        return mat

    def invariant_basis(self) -> np.ndarray:
        """Orthonormal basis of the fixed subspace, (dimension, r).

        For permutation images this is exact: normalized indicators of
        the connected components of the union of the image graphs. For
        matrices it is read from the spectrum of the group average.
        """
        if self._inv_basis is not None:
            return self._inv_basis
        d = self.dimension
        if self.kind == "perm":
            parent = list(range(d))

            def find(a):
                while parent[a] != a:
                    parent[a] = parent[parent[a]]
                    a = parent[a]
                return a

            for img in self._images.values():
                for i, j in enumerate(img.images):
                    ra, rb = find(i), find(j)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
            comps: dict[int, list[int]] = {}
            for i in range(d):
                comps.setdefault(find(i), []).append(i)
            basis = np.zeros((d, len(comps)))
            for c, members in enumerate(sorted(comps.values())):
                basis[members, c] = 1.0 / math.sqrt(len(members))
            self._inv_basis = basis
            return basis
        avg = np.zeros((d, d))
        for name in self._images:
            avg += self.matrix(name)
        avg /= len(self._images)
        vals, vecs = np.linalg.eigh(avg)
        keep = vals > 0.5  # spectrum is {0, 1} up to tolerance
        basis = vecs[:, keep]
        if keep.any() and np.abs(avg @ basis - basis).max() > 1e-8:
            raise CheckFailed("group average is not a clean projection")
        self._inv_basis = basis
        return basis


@dataclass(frozen=True)
class AveragingReport:
    norm: float
    eps_cap: float
    k: int
    invariant_dimension: int
    iterations: int


def averaging_norm(rep: FiniteRep, q: Sequence[str]) -> AveragingReport:
    """Operator norm of the generator average on the complement of the
    fixed subspace, by deflated power iteration (tolerance 1e-10), and
    the per-representation cap min(sqrt(2), sqrt(2k(1 - norm))) on any
    gap constant valid for q against this representation."""
    q = list(q)
    names = set(rep.names)
    for name in q:
        if name not in names:
            raise ValidationError(f"generator {name!r} is outside the group")
    if len(set(q)) != len(q):
        raise ValidationError("generator list has repeats")
    if rep.identity_name not in q:
        raise ValidationError("the generator set must contain the identity")
    for name in q:
        if rep.inverse_name(name) not in q:
            raise ValidationError(f"generator set is not symmetric at {name!r}")
    k = len(q)
    basis = rep.invariant_basis()
    d = rep.dimension
    inv_dim = basis.shape[1]

    def project(v: np.ndarray) -> np.ndarray:
        return v - basis @ (basis.T @ v)

    def t_apply(v: np.ndarray) -> np.ndarray:
        out = np.zeros_like(v)
        for name in q:
            out += rep.apply(name, v)
        return out / k

    if inv_dim >= d:
        return AveragingReport(0.0, _SQRT2, k, inv_dim, 0)
    v = project(np.arange(1, d + 1, dtype=float))
    if np.linalg.norm(v) < 1e-14:
        v = None
        for i in range(d):
            cand = np.zeros(d)
            cand[i] = 1.0
            cand = project(cand)
            if np.linalg.norm(cand) > 1e-8:
                v = cand
                break
        if v is None:
            return AveragingReport(0.0, _SQRT2, k, inv_dim, 0)
    v /= np.linalg.norm(v)
    # iterate T^T T = T^2 on the complement; the square keeps it PSD
    lam = 0.0
    iters = 0
    for iters in range(1, 100001):
        w = project(t_apply(t_apply(v)))
        nw = np.linalg.norm(w)
        if nw < 1e-300:
            lam = 0.0
            break
        new_lam = float(v @ w)
        v = w / nw
        if abs(new_lam - lam) <= _POWER_TOL * max(1.0, abs(new_lam)):
            lam = new_lam
            break
        lam = new_lam
    norm = math.sqrt(max(lam, 0.0))
    eps_cap = min(_SQRT2, math.sqrt(max(0.0, 2.0 * k * (1.0 - norm))))
    return AveragingReport(norm, eps_cap, k, inv_dim, iters)


# -- transfer of positive-definite functions ------------------------------------------


@dataclass(frozen=True)
class TransferredForm:
    values: dict
    certificate: GramCertificate


def pd_transfer(
    psi: Mapping[str, object],
    a0: FreeGroupAction,
    action: FinAction,
    certify_input: bool = False,
) -> TransferredForm:
    """Push a positive-definite table on the small group to the large
    one: phi(g) = sum over d of psi(d) * measure{x : g x = d x}.

    Both actions must move the same space. The output table is
    certified positive by an exact Gram check over the closure of the
    large action.
    """
    if a0.base.space.size != action.space.size:
        raise ValidationError("the two actions live on different spaces")
    names = {e.name for e in a0.elements}
    if set(psi) != names:
        raise ValidationError("table must be keyed by the small group exactly")
    m = action.space.size
    small = [(e.name, e.perm) for e in a0.elements]
    if certify_input:
        table = {name: Fraction(v) for name, v in psi.items()}
        gram = [
            [
                table[a0.name_of((p1.inverse() * p2))]
                for _, p2 in small
            ]
            for _, p1 in small
        ]
        cert = gram_check(gram, "positive")
        if not cert.ok:
            raise ValidationError("input table is not positive-definite")
    closure = action.closure()
    values: dict = {}
    for e in closure:
        total = Fraction(0)
        for name, p in small:
            agree = sum(1 for x in range(m) if e.perm(x) == p(x))
            if agree:
                total += Fraction(psi[name]) * Fraction(agree, m)
        values[e.name] = total
    by_name = {e.name: e.perm for e in closure}
    name_of = {e.perm.images: e.name for e in closure}
    order = [e.name for e in closure]
    gram = [
        [
            values[name_of[(by_name[n1].inverse() * by_name[n2]).images]]
            for n2 in order
        ]
        for n1 in order
    ]
    cert = gram_check(gram, "positive")
    if not cert.ok:
        raise CheckFailed("transferred table failed the positivity certificate")
    return TransferredForm(values=values, certificate=cert)
