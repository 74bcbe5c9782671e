"""Theta series of ray class characters and their weight families.

A finite-order character eta of conductor c over an imaginary quadratic
field K gives the classical cusp form sum eta(a) q^(N a) of weight 1, and
the weight-k avatars eta_k = eta <lambda>^(k-1) give its higher-weight
companions.  When the working prime p is inert and divides c, every
coefficient index divisible by p dies (an ideal of norm divisible by p is
divisible by the inert prime, hence not coprime to c), so U_p kills the
whole line: these forms never become ordinary and the usual eigenvariety
machinery does not see them.

Two family constructions package all the eta_k at once.  The disc family
stores each coefficient as a binomial series in the shifted variable
(T - p)/(p^a gamma) and converges on the weights k = 1 mod p^a; the
group-ring family stores eta(a) <lambda(a)>^(-1) [<lambda(a)>] with exact
group-like coefficients and specializes at every arithmetic weight,
including weights twisted by p-power roots of unity.  Specialization is
coefficient-wise and commutes with the Hecke action; the diamond factor is
carried in the same coefficient ring so the operators act on the family
itself, unspecialized.
"""

import math

import gmpy2

from .characters import HeckeChar, character_to_spec, eta_weight_value
from .cyclotomic import CycVec
from .errors import DomainError, PrecisionLoss, Unsupported
from .hecke import DiamondAction, QExpansion
from .padic import RampedElem, Zp2, binom_gamma_coeffs
from .series import GroupRing, IwasawaSeries, Weight


def epsilon_K(field, n):
    """The quadratic character of K/Q: the Kronecker symbol of the discriminant."""
    return int(gmpy2.kronecker(-field.d_K, n))


def _reject_eisenstein(eta):
    # eta = eta^sigma forces the induced representation to split, so the
    # would-be theta series is Eisenstein, not cuspidal
    if eta.is_galois_stable():
        raise DomainError(
            "character equals its conjugate; the theta series degenerates "
            "to an Eisenstein series")


def _require_primitive(eta):
    if eta.conductor != eta.group.modulus:
        raise DomainError(
            f"character has conductor {eta.conductor!r} but lives at level "
            f"{eta.group.modulus!r}; rebuild it on its conductor")


def theta_classical(eta, k=1, lam=None, Q=200, ideals=None):
    """Weight-k theta series of eta as a q-expansion, a_0 = 0.

    a_n sums eta_k over the ideals of norm n prime to the conductor, with
    eta_k = eta * <lambda>^(k-1).  With lam given the coefficients are
    p-adic scalars; without it only k = 1 makes sense and the values stay
    in the exact cyclotomic group ring Z[x]/(x^M - 1) on eta's value group.
    The declared level is d_K * N(c) and the diamond factor packages
    chi_k(d) d^(k-1) for the weight-k nebentypus chi_k.  ideals, when
    given, replaces the internal enumeration (a cached list); entries off
    the support or past Q are filtered here, not trusted.
    """
    _reject_eisenstein(eta)
    _require_primitive(eta)
    group = eta.group
    field = group.field
    mod = group.modulus
    level = field.d_K * mod.norm
    if lam is None:
        if k != 1:
            raise DomainError("weights above 1 move along lambda; pass lam")
        M = eta.M

        def value(I):
            return CycVec.root(M, eta.value_exponent(I))

        def char_factor(d):
            return CycVec.root(M, eta.rational_exponent(d)).scale(
                epsilon_K(field, d))

        zero = CycVec.zero(M)
        p = None
    else:
        if lam.field != field:
            raise DomainError("lambda belongs to a different field")
        ctx = Zp2(lam.p, lam.prec)

        def value(I):
            return eta_weight_value(eta, lam, k, I)

        def char_factor(d):
            return value(field.principal(d, 0)) * epsilon_K(field, d)

        zero = ctx(0)
        p = lam.p
    coeffs = [zero] * (Q + 1)
    if ideals is None:
        ideals = field.enumerate_ideals(Q, coprime_to=mod)
    else:
        ideals = (I for I in ideals if I.norm <= Q and I.is_coprime(mod))
    for I in ideals:
        coeffs[I.norm] = coeffs[I.norm] + value(I)
    char = DiamondAction(level, char_factor, p=p)
    return QExpansion(coeffs, level, char=char, weight=k, zero=zero)


class ThetaFamily:
    """q-expansion with family-ring coefficients interpolating the g_k.

    series holds the coefficients together with the level and the family
    diamond factor, so the Hecke operators act directly.  kind is "col"
    (one-variable disc series, weights k = 1 mod p^a) or "hida" (rank-2
    group ring, every arithmetic weight).
    """

    __slots__ = ("kind", "eta", "lam", "series", "ring", "disc_cap",
                 "tame_level")

    def __init__(self, kind, eta, lam, series, ring, disc_cap, tame_level):
        self.kind = kind
        self.eta = eta
        self.lam = lam
        self.series = series
        self.ring = ring
        self.disc_cap = disc_cap
        self.tame_level = tame_level

    @property
    def Q(self):
        return self.series.Q

    @property
    def level(self):
        return self.series.level

    def coefficient(self, n):
        return self.series.a(n)

    def specialize(self, w):
        return specialize_family(self, w)

    def to_json_dict(self):
        if self.kind == "col":
            ring = {"kind": "col", "p": self.lam.p, "precision": self.lam.prec,
                    "disc_cap": self.disc_cap, "carrier": self.lam.a_exp}
            coeffs = [c.to_json_dict() for c in self.series.coeffs]
        else:
            ring = {"kind": "hida", "p": self.lam.p, "precision": self.lam.prec,
                    "rank": self.ring.rank,
                    "coord_precision": self.ring.coord_prec}
            coeffs = [_group_elem_dict(c) for c in self.series.coeffs]
        return {"weight_ring": ring, "Q": self.series.Q, "level": self.level,
                "tame_level": self.tame_level,
                "character": character_to_spec(self.eta),
                "coefficients": coeffs}

    def __repr__(self):
        return (f"ThetaFamily({self.kind}, Q={self.Q}, level={self.level}, "
                f"tame={self.tame_level})")


def _group_elem_dict(elem):
    items = sorted(elem.items.items())
    return {"items": [[list(k), c.to_digits()] for k, c in items]}


def _family_setup(eta, lam):
    _reject_eisenstein(eta)
    _require_primitive(eta)
    group = eta.group
    field = group.field
    if lam.field != field:
        raise DomainError("lambda belongs to a different field")
    if group.p != lam.p or group.r < 1:
        raise Unsupported(
            "the conductor must be divisible by the inert prime; a prime-to-p "
            "conductor leads to ordinary p-stabilizations, out of scope here")
    level = field.d_K * group.modulus.norm
    tame = level // lam.p ** (2 * group.r)
    return field, level, tame


def _col_shape(lam, D):
    return ("T",), (D,), (lam.a_exp,)


def _col_avatar(eta, lam, I, D, ctx, inv1p):
    """eta(I) (1 + (T-p)/(1+p))^s(I) on the disc variable, truncated at D."""
    mons = binom_gamma_coeffs(lam.s_carrier(I), lam.a_exp, D)
    root = eta.padic_value(I, lam.embedding)
    coeffs = {}
    for j, m in enumerate(mons):
        c = m * (root * inv1p[j])
        if not c.is_zero():
            coeffs[(j,)] = c
    variables, caps, scales = _col_shape(lam, D)
    return IwasawaSeries(ctx, variables, caps, coeffs, scales)


def build_g_col(eta, lam, Q=200, D=None):
    """The disc family: coefficients are shifted-disc binomial series.

    D caps the stored powers of (T - p)/(p^a gamma).  Dropped tail terms
    specialize to values of valuation at least (D+1)(p-2)/(p-1), so the
    build refuses a cap that cannot certify the working precision at the
    classical weights.
    """
    field, level, tame = _family_setup(eta, lam)
    p = lam.p
    if D is None:
        D = 2 * lam.prec
    if (D + 1) * (p - 2) < lam.prec * (p - 1):
        raise PrecisionLoss(
            f"disc cap {D} certifies fewer than {lam.prec} digits at "
            f"classical weights")
    ctx = Zp2(p, lam.prec)
    one = ctx(1)
    inv = (one + ctx(p)).inverse()
    inv1p = [one]
    for _ in range(D):
        inv1p.append(inv1p[-1] * inv)
    variables, caps, scales = _col_shape(lam, D)
    zero = IwasawaSeries(ctx, variables, caps, {}, scales)
    coeffs = [zero] * (Q + 1)
    for I in field.enumerate_ideals(Q, coprime_to=eta.group.modulus):
        term = _col_avatar(eta, lam, I, D, ctx, inv1p)
        coeffs[I.norm] = coeffs[I.norm] + term

    def char_factor(d):
        I = field.principal(d, 0)
        return _col_avatar(eta, lam, I, D, ctx, inv1p) * epsilon_K(field, d)

    char = DiamondAction(level, char_factor, p=p)
    series = QExpansion(coeffs, level, char=char, weight="col", zero=zero)
    return ThetaFamily("col", eta, lam, series, None, D, tame)


def build_g_hida(eta, lam, Q=200):
    """The group-ring family: coefficients eta(a) <lambda(a)>^(-1) [<lambda(a)>].

    Group-likes are exact, so every arithmetic weight specializes, twisted
    ones included.  Needs the free rank-2 coordinate frame on the one-units,
    which exists exactly when p does not divide the class number (the
    lambda construction already guarantees that).
    """
    field, level, tame = _family_setup(eta, lam)
    ctx = Zp2(lam.p, lam.prec)
    ring = GroupRing(ctx, rank=2)

    def avatar(I):
        coords = ring.coords_of(lam._angle_hi(I))
        scalar = eta.padic_value(I, lam.embedding) * lam.angle(I).inverse()
        return ring.group_like(coords, scalar)

    zero = ring.zero()
    coeffs = [zero] * (Q + 1)
    for I in field.enumerate_ideals(Q, coprime_to=eta.group.modulus):
        coeffs[I.norm] = coeffs[I.norm] + avatar(I)

    def char_factor(d):
        return avatar(field.principal(d, 0)) * epsilon_K(field, d)

    char = DiamondAction(level, char_factor, p=lam.p)
    series = QExpansion(coeffs, level, char=char, weight="hida", zero=zero)
    return ThetaFamily("hida", eta, lam, series, ring, None, tame)


def specialize_family(fam, w):
    """Apply an arithmetic weight to every coefficient.

    Accepts an integer k or a Weight.  The result carries weight tag k, the
    family level, and the specialized diamond factor, so Hecke operators
    applied before and after specialization agree coefficient by
    coefficient.  Twisted weights are only meaningful on the group-ring
    family (the disc variable raises WeightOutOfRadius) and push the
    coefficients into the Phi_{p^r} quotient ring; the declared level then
    grows by the recorded p-power (see hida_twist_profile).
    """
    if isinstance(w, int):
        w = Weight(w)
    if fam.kind == "col":
        def spec(c):
            return c.specialize(w)
    else:
        def spec(c):
            return fam.ring.specialize(c, w)
    coeffs = [spec(c) for c in fam.series.coeffs]
    level = fam.series.level
    if not w.is_trivial_eps():
        level *= fam.lam.p ** (2 * hida_twist_profile(fam, w)["extra_p_exponent"])
    family_char = fam.series.char

    def char_factor(d):
        return spec(family_char.factor(d))

    char = DiamondAction(level, char_factor, p=fam.lam.p)
    zero = coeffs[0] - coeffs[0]
    return QExpansion(coeffs, level, char=char, weight=w.k, zero=zero)


def default_instance(prec=8):
    """The smallest clean instance: p = 5 inert in Q(sqrt(-7)), class number
    one, carrier exponent 0, and eta the order-12 character of conductor 5.

    Returns (field, group, eta, lam).
    """
    from .characters import build_lambda, dual_generator
    from .quadfield import QuadField

    field = QuadField(7)
    group = field.ray_class_group(p=5, r=1)
    eta = dual_generator(group)
    lam = build_lambda(field, 5, prec)
    return field, group, eta, lam


def _p_order(I, field, p):
    pid = field.ideal(1, 1, p)
    for P, e in I.factor():
        if P == pid:
            return e
    return 0


def hida_twist_profile(fam, w):
    """Conductor bookkeeping for a twisted weight on the group-ring family.

    The finite-order part of the specialized character is eta times the
    twist evaluated through the angle map.  Its conductor is computed on a
    ray class group deep enough to see the twist; reported are the p-power
    jump past eta's own conductor, the matching level, and the rational
    restriction of the twist (the nebentypus shift), all computed rather
    than asserted.
    """
    if fam.kind != "hida":
        raise Unsupported("twisted weights live on the group-ring family")
    if w.is_trivial_eps():
        raise DomainError("the twist profile of an untwisted weight is empty")
    eta, lam, ring = fam.eta, fam.lam, fam.ring
    field = eta.group.field
    p, t = lam.p, w.eps_r
    pt = p ** t

    def twist_exp(I):
        coords = ring.coords_of(lam._angle_hi(I))
        return sum(e * c for e, c in zip(w.eps_exps, coords)) % pt

    deep = field.ray_class_group(c0=eta.group.c0, p=p,
                                 r=max(eta.group.r, t + 1))
    M2 = math.lcm(*deep.gen_orders)
    exps = tuple(
        ((M2 // eta.M) * eta.value_exponent(P)
         + (M2 // pt) * twist_exp(P)) % M2
        for P in deep.generators)
    finite = HeckeChar(deep, exps)
    cond = finite.conductor
    e_extra = _p_order(cond, field, p) - eta.group.r
    eps_w = {n: twist_exp(field.principal(n, 0))
             for n in range(2, 20)
             if math.gcd(n, p * fam.series.level) == 1}
    return {
        "weight": w.k,
        "twist_order": pt,
        "extra_p_exponent": e_extra,
        "conductor": [cond.a, cond.b, cond.content],
        "level": fam.series.level * p ** (2 * e_extra),
        "nebentypus_shift": eps_w,
    }
