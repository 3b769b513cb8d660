"""Co-induction on finite models.

A free action of a small group Delta on X induces E; a larger group
Gamma acting on X induces an ambient F with constant index N. The
transport data (slot permutation, Delta-element vector) turns any
ambient-class-preserving map of X into a skew-product map of
X x Y^N for any Delta-action on Y, and the exact measure identities
of that construction are checked by independent counting routes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .errors import CheckFailed, ValidationError, get_cap
from .ergcore import EqRel, FinAction, FinSpace, GroupElement, Perm, in_full_group, orbit_relation, phi
from .subrel import ChoiceSystem, choice_functions, index_cocycle


class FreeGroupAction:
    """A generated action, closed into its full element group, with the
    certificate that no non-identity element fixes a point.

    Freeness makes the element carrying one point to another unique,
    which is what the transport vectors below rely on.
    """

    def __init__(self, base: FinAction, cap: int | None = None):
        self.base = base
        self.elements: tuple[GroupElement, ...] = base.closure(cap)
        self._by_name = {e.name: e for e in self.elements}
        self._by_images = {e.perm.images: e for e in self.elements}
        ident = None
        for e in self.elements:
            if e.perm.is_identity():
                ident = e.name
            elif e.perm.fixed_points():
                raise ValidationError(
                    f"element {e.name} fixes {e.perm.fixed_points()[0]}; the action is not free"
                )
        if ident is None:
            raise CheckFailed("closure lost the identity")
        self.identity_name = ident
        self._transport: dict[tuple[int, int], str] = {}
        for e in self.elements:
            for x in range(base.space.size):
                self._transport[(x, e.perm(x))] = e.name

    @property
    def size(self) -> int:
        return len(self.elements)

    def element(self, name: str) -> GroupElement:
        try:
            return self._by_name[name]
        except KeyError:
            raise ValidationError(f"no element named {name!r}") from None

    def perm_of(self, name: str) -> Perm:
        return self.element(name).perm

    def name_of(self, p: Perm) -> str:
        try:
            return self._by_images[p.images].name
        except KeyError:
            raise ValidationError("permutation is not an element of the group") from None

    def mult(self, left: str, right: str) -> str:
        return self.name_of(self.perm_of(left) * self.perm_of(right))

    def inverse_name(self, name: str) -> str:
        return self.name_of(self.perm_of(name).inverse())

    def transporter(self, src: int, dst: int) -> str:
        """The unique element carrying src to dst."""
        try:
            return self._transport[(src, dst)]
        except KeyError:
            raise ValidationError(
                f"no element carries {src} to {dst}; the points are in different orbits"
            ) from None

    def orbit_relation(self) -> EqRel:
        return orbit_relation(self.base)


class TargetAction:
    """An action of the closed group on a second space, keyed by element
    name, validated as a homomorphism by exhaustive multiplication."""

    def __init__(
        self,
        group: FreeGroupAction,
        space: FinSpace,
        images: Mapping[str, Perm],
    ):
        names = {e.name for e in group.elements}
        if set(images) != names:
            missing = sorted(names - set(images))
            extra = sorted(set(images) - names)
            raise ValidationError(
                f"image table must cover the group exactly (missing {missing}, extra {extra})"
            )
        for name, p in images.items():
            if p.size != space.size:
                raise ValidationError(f"image of {name} acts on the wrong space")
        for n1 in names:
            for n2 in names:
                if images[group.mult(n1, n2)] != images[n1] * images[n2]:
                    raise ValidationError(
                        f"images break multiplicativity at ({n1}, {n2})"
                    )
        self.group = group
        self.space = space
        self._images = dict(images)

    @staticmethod
    def trivial(group: FreeGroupAction, space: FinSpace) -> "TargetAction":
        ident = Perm.identity(space.size)
        return TargetAction(group, space, {e.name: ident for e in group.elements})

    def perm(self, name: str) -> Perm:
        try:
            return self._images[name]
        except KeyError:
            raise ValidationError(f"no image for element {name!r}") from None


def delta_bar(
    cs: ChoiceSystem, a0: FreeGroupAction, x: int, y: int
) -> tuple[str, ...]:
    """Transport vector between the choice slots of two related points.

    Entry n is the unique group element carrying choice(x, pi^-1(n)) to
    choice(y, n), where pi is the slot permutation of (x, y). Requires
    the E-classes of cs to be exactly the orbits of a0.
    """
    if cs.E != a0.orbit_relation():
        raise ValidationError("choice-system classes differ from the group orbits")
    pi = index_cocycle(cs, x, y)
    pinv = pi.inverse()
    return tuple(
        a0.transporter(cs.choice(x, pinv(n)), cs.choice(y, n))
        for n in range(cs.strata[x])
    )


def semidirect_mul(
    a0: FreeGroupAction,
    first: tuple[Perm, tuple[str, ...]],
    second: tuple[Perm, tuple[str, ...]],
) -> tuple[Perm, tuple[str, ...]]:
    """Product in the wreath-style group of (slot permutation, transport
    vector) pairs: (p1, d1)(p2, d2) = (p1 p2, n -> d1[n] * d2[p1^-1(n)])."""
    p1, d1 = first
    p2, d2 = second
    p1inv = p1.inverse()
    return (p1 * p2, tuple(a0.mult(d1[n], d2[p1inv(n)]) for n in range(len(d1))))


@dataclass(frozen=True)
class MixingIdentityReport:
    p: Fraction
    phi_value: Fraction
    lhs_factorized: Fraction
    lhs_materialized: Fraction | None
    rhs: Fraction
    verdict: str


@dataclass(frozen=True)
class PairingReport:
    norm_sq: Fraction
    phi_kn_value: Fraction
    lhs_factorized: Fraction
    lhs_materialized: Fraction | None
    rhs: Fraction
    verdict: str


class CoinducedSystem:
    """The skew-product data of a co-induction instance.

    Holds the base free action (a0), the ambient action (b0), the
    target action (a), the choice system, and accessors for the product
    maps. The product space X x Y^N is materialized only under a cap;
    identities fall back to factorized counting above it.
    """

    def __init__(
        self,
        a0: FreeGroupAction,
        b0: FinAction,
        a: TargetAction,
        cs: ChoiceSystem,
        cap: int | None = None,
    ):
        self.a0 = a0
        self.b0 = b0
        self.a = a
        self.cs = cs
        strata = set(cs.strata)
        if len(strata) != 1:
            per_class = sorted(
                (cls[0], cs.strata[cls[0]]) for cls in cs.F.classes
            )
            raise ValidationError(f"index not constant across ambient classes: {per_class}")
        self.N = strata.pop()
        self.x_size = cs.size
        self.y_size = a.space.size
        self.product_size = self.x_size * self.y_size**self.N
        self._cap = get_cap("product", cap)
        self.materialized = self.product_size <= self._cap
        self._perm_cache: dict[tuple[int, ...], Perm] = {}

    # -- product coordinates ------------------------------------------------

    def encode(self, x: int, ybar: Sequence[int]) -> int:
        idx = x
        for v in ybar:
            idx = idx * self.y_size + v
        return idx

    def decode(self, idx: int) -> tuple[int, tuple[int, ...]]:
        digits = []
        for _ in range(self.N):
            idx, d = divmod(idx, self.y_size)
            digits.append(d)
        return idx, tuple(reversed(digits))

    # -- transport ------------------------------------------------------------

    def rho(self, x: int, y: int) -> tuple[Perm, tuple[str, ...]]:
        """Pair transport: slot permutation and element vector from x to y."""
        return index_cocycle(self.cs, x, y), delta_bar(self.cs, self.a0, x, y)

    def apply_transport(
        self, pi: Perm, dbar: tuple[str, ...], ybar: Sequence[int]
    ) -> tuple[int, ...]:
        pinv = pi.inverse()
        return tuple(
            self.a.perm(dbar[n])(ybar[pinv(n)]) for n in range(self.N)
        )

    def point_map(self, g: Perm, x: int, ybar: Sequence[int]) -> tuple[int, tuple[int, ...]]:
        """One step of the skew product for any ambient-class-preserving g."""
        pi, dbar = self.rho(x, g(x))
        return g(x), self.apply_transport(pi, dbar, ybar)

    def product_perm(self, g: Perm) -> Perm:
        """The materialized product permutation of g (requires the cap)."""
        if not self.materialized:
            raise ValidationError(
                f"product space of size {self.product_size} exceeds the cap {self._cap}"
            )
        if g.images in self._perm_cache:
            return self._perm_cache[g.images]
        if not in_full_group(self.cs.F, g):
            raise ValidationError("the map must preserve each ambient class")
        images = [0] * self.product_size
        ybars = _tuples(self.y_size, self.N)
        for x in range(self.x_size):
            pi, dbar = self.rho(x, g(x))
            gx = g(x)
            for ybar in ybars:
                nx, nybar = gx, self.apply_transport(pi, dbar, ybar)
                images[self.encode(x, ybar)] = self.encode(nx, nybar)
        perm = Perm(images)
        self._perm_cache[g.images] = perm
        return perm

    def a_prime_perm(self, delta_name: str) -> Perm:
        return self.product_perm(self.a0.perm_of(delta_name))

    def resolve_gamma(self, gamma) -> Perm:
        """Accept a generator label or closure name of b0, or a raw permutation."""
        if isinstance(gamma, str):
            if gamma in self.b0.labels:
                return self.b0.generator(gamma)
            return self.b0.element(gamma).perm
        if isinstance(gamma, Perm):
            return gamma
        raise ValidationError("group element must be a name or a permutation")


def _tuples(base: int, length: int) -> list[tuple[int, ...]]:
    out = [()]
    for _ in range(length):
        out = [t + (v,) for t in out for v in range(base)]
    return out


def coinduced_action(
    a0: FreeGroupAction,
    b0: FinAction,
    a: TargetAction,
    cap: int | None = None,
) -> CoinducedSystem:
    """Build and validate the skew-product system of (a0, b0, a).

    Checks: orbits of a0 refine orbits of b0 with constant index; the
    product maps of the b0 closure are permutations forming an action;
    freeness of the ambient action passes to the product action;
    the small-group product action is free; and the three factor maps
    (onto b0, onto a, onto a0) are equivariant. Structural checks that
    need the product space run only when it fits under the cap.
    """
    e_rel = a0.orbit_relation()
    f_rel = orbit_relation(b0)
    if e_rel.size != f_rel.size:
        raise ValidationError("the two base actions live on different spaces")
    if not e_rel.refines(f_rel):
        raise ValidationError("orbits of the small group must refine the ambient orbits")
    if a.group is not a0:
        raise ValidationError("target action is keyed to a different group")
    cs = choice_functions(e_rel, f_rel)
    sys = CoinducedSystem(a0, b0, a, cs, cap)
    if not sys.materialized:
        return sys

    gammas = b0.closure()
    b_perms = {g.name: sys.product_perm(g.perm) for g in gammas}
    # action law: the product map of a composite is the composite of maps
    name_of = {g.perm.images: g.name for g in gammas}
    for g1 in gammas:
        for g2 in gammas:
            composite = name_of[(g1.perm * g2.perm).images]
            if b_perms[composite] != b_perms[g1.name] * b_perms[g2.name]:
                raise CheckFailed("product maps do not compose as an action")
    b0_free = all(
        not g.perm.fixed_points() for g in gammas if not g.perm.is_identity()
    )
    if b0_free:
        for g in gammas:
            if not g.perm.is_identity() and b_perms[g.name].fixed_points():
                raise CheckFailed("freeness of the ambient action was lost in the product")
    for d in a0.elements:
        ap = sys.a_prime_perm(d.name)
        if not d.perm.is_identity() and ap.fixed_points():
            raise CheckFailed("the small-group product action is not free")
    # factor equivariance
    for g in gammas:
        bp = b_perms[g.name]
        for idx in range(sys.product_size):
            x, _ = sys.decode(idx)
            nx, _ = sys.decode(bp(idx))
            if nx != g.perm(x):
                raise CheckFailed("projection to the base space is not equivariant")
    for d in a0.elements:
        ap = sys.a_prime_perm(d.name)
        ay = a.perm(d.name)
        for idx in range(sys.product_size):
            x, ybar = sys.decode(idx)
            nx, nybar = sys.decode(ap(idx))
            if nx != d.perm(x):
                raise CheckFailed("projection of the small action to the base is not equivariant")
            if nybar[0] != ay(ybar[0]):
                raise CheckFailed("first-coordinate projection onto the target action failed")
    return sys


def check_rho_cocycle(sys: CoinducedSystem) -> int:
    """Exhaustively verify the transport cocycle identity over the closure.

    For all closure elements g1, g2 and every point x, the transport of
    g1*g2 at x must equal the product of the transport of g1 at g2(x)
    with the transport of g2 at x. Returns the number of verified
    triples; raises on any violation.
    """
    gammas = sys.b0.closure()
    count = 0
    for g1 in gammas:
        for g2 in gammas:
            composite = g1.perm * g2.perm
            for x in range(sys.x_size):
                lhs = sys.rho(x, composite(x))
                rhs = semidirect_mul(
                    sys.a0,
                    sys.rho(g2.perm(x), g1.perm(g2.perm(x))),
                    sys.rho(x, g2.perm(x)),
                )
                if lhs != rhs:
                    raise CheckFailed(
                        f"transport cocycle identity fails at ({g1.name}, {g2.name}, {x})"
                    )
                count += 1
    return count


def phi_kn(
    cs: ChoiceSystem, action: FinAction, k: int, n: int, gamma
) -> Fraction:
    """Exact measure of {x : the slot permutation of (x, gamma(x)) sends k to n}.

    Requires a constant index; reduces to phi(E, gamma) at k = n = 0.
    """
    strata = set(cs.strata)
    if len(strata) != 1:
        raise ValidationError("slot statistics need a constant index")
    n_slots = strata.pop()
    if not (0 <= k < n_slots and 0 <= n < n_slots):
        raise ValidationError(f"slot indices must lie below {n_slots}")
    if isinstance(gamma, str):
        if gamma in action.labels:
            g = action.generator(gamma)
        else:
            g = action.element(gamma).perm
    else:
        g = gamma
    if not in_full_group(cs.F, g):
        raise ValidationError("the map must preserve each ambient class")
    hits = sum(
        1 for x in range(cs.size) if index_cocycle(cs, x, g(x))(k) == n
    )
    return Fraction(hits, cs.size)


def check_thm33_identity(
    sys: CoinducedSystem, b_set: Sequence[int], gamma
) -> MixingIdentityReport:
    """Exact overlap identity for cylinder sets over the first coordinate.

    With B an invariant subset of the target space of mass p and
    B0 = {(x, ybar) : ybar_0 in B}, the product-measure overlap of
    g.B0 with B0 equals p*phi(E, g) + p^2*(1 - phi(E, g)). Computed by
    factorized counting and, when the product is materialized, by
    direct enumeration; both must agree with the closed form exactly.
    """
    g = sys.resolve_gamma(gamma)
    if not in_full_group(sys.cs.F, g):
        raise ValidationError("the map must preserve each ambient class")
    b_pts = sorted(set(int(v) for v in b_set))
    if not set(b_pts) <= set(range(sys.y_size)):
        raise ValidationError("subset leaves the target space")
    for d in sys.a0.elements:
        if {sys.a.perm(d.name)(y) for y in b_pts} != set(b_pts):
            raise ValidationError(f"subset is not invariant under element {d.name}")
    p = Fraction(len(b_pts), sys.y_size)
    phi_val = phi(sys.cs.E, g)
    rhs = p * phi_val + p * p * (1 - phi_val)

    b_lookup = set(b_pts)
    num = Fraction(0)
    for x in range(sys.x_size):
        pi, dbar = sys.rho(x, g(x))
        j = pi.inverse()(0)
        dperm = sys.a.perm(dbar[0])
        if j == 0:
            hits = sum(1 for y in b_pts if dperm(y) in b_lookup)
            num += Fraction(hits, sys.y_size)
        else:
            hits = sum(1 for y in range(sys.y_size) if dperm(y) in b_lookup)
            num += p * Fraction(hits, sys.y_size)
    lhs_fact = num / sys.x_size

    lhs_mat = None
    if sys.materialized:
        bp = sys.product_perm(g)
        count = 0
        for idx in range(sys.product_size):
            _, ybar = sys.decode(idx)
            if ybar[0] not in b_lookup:
                continue
            _, nybar = sys.decode(bp(idx))
            if nybar[0] in b_lookup:
                count += 1
        lhs_mat = Fraction(count, sys.product_size)
        if lhs_mat != lhs_fact:
            raise CheckFailed("factorized and materialized overlap counts disagree")
    if lhs_fact != rhs:
        raise CheckFailed("overlap identity violated")
    return MixingIdentityReport(
        p=p,
        phi_value=phi_val,
        lhs_factorized=lhs_fact,
        lhs_materialized=lhs_mat,
        rhs=rhs,
        verdict="pass",
    )


def check_prop34_pairing(
    sys: CoinducedSystem, f: Sequence, k: int, n: int, gamma
) -> PairingReport:
    """Exact pairing identity for mean-zero invariant observables.

    For f on the target space with zero mean, invariant under the small
    action, the pairing of the n-th coordinate copy of f moved by g
    against the k-th copy equals (slot statistic at (k, n)) * ||f||^2.
    Factorized and materialized routes must both match exactly.
    """
    g = sys.resolve_gamma(gamma)
    if not in_full_group(sys.cs.F, g):
        raise ValidationError("the map must preserve each ambient class")
    if not (0 <= k < sys.N and 0 <= n < sys.N):
        raise ValidationError(f"slot indices must lie below {sys.N}")
    vals = [Fraction(v) for v in f]
    if len(vals) != sys.y_size:
        raise ValidationError("observable length differs from the target space")
    if sum(vals) != 0:
        raise ValidationError("observable must have zero mean")
    for d in sys.a0.elements:
        dp = sys.a.perm(d.name)
        if any(vals[dp(y)] != vals[y] for y in range(sys.y_size)):
            raise ValidationError(f"observable is not invariant under element {d.name}")
    norm_sq = sum((v * v for v in vals), Fraction(0)) / sys.y_size
    phi_val = phi_kn(sys.cs, sys.b0, k, n, g)
    rhs = phi_val * norm_sq

    mean = Fraction(0)  # zero mean is a precondition; keep the term explicit
    num = Fraction(0)
    for x in range(sys.x_size):
        pi, dbar = sys.rho(x, g(x))
        j = pi.inverse()(n)
        dperm = sys.a.perm(dbar[n])
        if j == k:
            num += sum(
                (vals[dperm(y)] * vals[y] for y in range(sys.y_size)),
                Fraction(0),
            ) / sys.y_size
        else:
            moved_mean = sum(
                (vals[dperm(y)] for y in range(sys.y_size)), Fraction(0)
            ) / sys.y_size
            num += moved_mean * mean
    lhs_fact = num / sys.x_size

    lhs_mat = None
    if sys.materialized:
        bp = sys.product_perm(g)
        total = Fraction(0)
        for idx in range(sys.product_size):
            _, ybar = sys.decode(idx)
            _, nybar = sys.decode(bp(idx))
            total += vals[nybar[n]] * vals[ybar[k]]
        lhs_mat = total / sys.product_size
        if lhs_mat != lhs_fact:
            raise CheckFailed("factorized and materialized pairings disagree")
    if lhs_fact != rhs:
        raise CheckFailed("pairing identity violated")
    return PairingReport(
        norm_sq=norm_sq,
        phi_kn_value=phi_val,
        lhs_factorized=lhs_fact,
        lhs_materialized=lhs_mat,
        rhs=rhs,
        verdict="pass",
    )


def choice_perm(cs: ChoiceSystem, n: int) -> Perm | None:
    """The map x -> choice(x, n) as a permutation, when it is one."""
    strata = set(cs.strata)
    if len(strata) != 1 or n >= strata.pop():
        return None
    images = [cs.choice(x, n) for x in range(cs.size)]
    if sorted(images) != list(range(cs.size)):
        return None
    return Perm(images)
