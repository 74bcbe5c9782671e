"""Characters of ray class groups and the p-adic weight direction.

A character is an exponent vector over one fixed primitive root of unity
whose order M is the lcm of the generator orders, so products, powers,
Galois conjugates, and restrictions all stay exact integer arithmetic.
The companion object built by ``build_lambda`` carries the direction used
to move theta coefficients between weights: the one-unit angle of each
ideal prime to p, its coordinate on log(1+p), and (over class number one)
a full value pinned by a canonical residue character.
"""

import functools
import math

from .errors import DomainError, NonUnit, NotCoprime, NotSelfDual, Unsupported
from .padic import Zp2, angle, pexp, plog, smallest_qnr, sqrt_1unit, teichmuller
from .quadfield import QuadField, _factorize


@functools.lru_cache(maxsize=None)
def _residue_dlog_table(p, n0):
    """First-in-lex generator of F_{p^2}^x and its complete dlog table.

    Coordinates are on the basis {1, delta}, delta^2 = n0, matching the
    coordinate pair of a PadicElem reduced mod p.
    """
    n = p * p - 1
    primes = sorted(_factorize(n))

    def mul(u, v):
        return ((u[0] * v[0] + u[1] * v[1] * n0) % p,
                (u[0] * v[1] + u[1] * v[0]) % p)

    def power(u, e):
        acc = (1, 0)
        while e:
            if e & 1:
                acc = mul(acc, u)
            u = mul(u, u)
            e >>= 1
        return acc

    for c0 in range(p):
        for c1 in range(p):
            g = (c0, c1)
            if g == (0, 0) or any(power(g, n // ell) == (1, 0) for ell in primes):
                continue
            table = {}
            cur = (1, 0)
            for e in range(n):
                table[cur] = e
                cur = mul(cur, g)
            return g, table
    raise DomainError(f"found no generator of F_{p}^2; p is not prime")


class OkEmbedding:
    """Ring map O_K -> Z_{p^2} for an inert prime, with residue dlogs.

    Pins the square root of -d_K whose reduction is r*delta with the
    smallest r in 1..p-1, the matching image of omega = (1+sqrt(-d_K))/2,
    and zeta = the Teichmueller lift of the table generator, a root of
    unity of order p^2 - 1.
    """

    def __init__(self, field, ctx):
        if field.prime_splitting(ctx.p).kind != "inert":
            raise Unsupported(f"{ctx.p} is not inert in Q(sqrt(-{field.d_K}))")
        self.field = field
        self.ctx = ctx
        p = ctx.p
        # -d_K and the stored QNR share the nontrivial square class mod p,
        # so their ratio has a rational root r; r*delta seeds the lift.
        target = -field.d_K * pow(ctx.qnr, -1, p) % p
        r = min(t for t in range(1, p) if t * t % p == target)
        seed = ctx(0, r)
        self.sqrt_md = seed * sqrt_1unit(ctx(-field.d_K) * (seed * seed).inverse())
        self.omega = (ctx.one() + self.sqrt_md) / 2
        self.mult_order = p * p - 1
        self.generator, self._dlog = _residue_dlog_table(p, ctx.qnr)
        self.zeta = teichmuller(ctx(*self.generator))

    def embed(self, x, y):
        """Image of x + y*omega."""
        return self.ctx(x) + self.omega * y

    def residue_dlog(self, x, y):
        """Discrete log of x + y*omega in the residue field's unit group."""
        el = self.embed(x, y)
        key = (el.c0 % self.ctx.p, el.c1 % self.ctx.p)
        if key == (0, 0):
            raise NonUnit(f"({x}, {y}) is divisible by {self.ctx.p}")
        return self._dlog[key]

    def root_of_unity(self, m, e=1):
        """zeta_m^e for the canonical m-th root; m must divide p^2 - 1."""
        if self.mult_order % m:
            raise Unsupported(
                f"Z_{{p^2}} for p = {self.ctx.p} has no root of unity of order {m}")
        return self.zeta ** (self.mult_order // m * (e % m))


def _same_group(g1, g2):
    return g1 is g2 or (g1.field == g2.field and g1.modulus == g2.modulus
                        and g1.p == g2.p and g1.r == g2.r)


class HeckeChar:
    """Finite-order character of a ray class group.

    ``exponents[j]`` is the image of generator j, written as a power of the
    primitive M-th root of unity with M = lcm of the generator orders.  The
    entry must be a multiple of M / order(generator j), which is exactly the
    condition that the assignment extends to a homomorphism.
    """

    __slots__ = ("group", "M", "exponents", "_conductor")

    def __init__(self, group, exponents):
        orders = group.gen_orders
        if len(exponents) != len(orders):
            raise DomainError(f"need {len(orders)} exponents, got {len(exponents)}")
        M = math.lcm(*orders) if orders else 1
        vals = []
        for v, n in zip(exponents, orders):
            if v % (M // n):
                raise DomainError(
                    f"exponent {v} on a generator of order {n} is not a multiple of {M // n}")
            vals.append(v % M)
        self.group = group
        self.M = M
        self.exponents = tuple(vals)
        self._conductor = None

    def __repr__(self):
        return f"HeckeChar({self.exponents} / zeta_{self.M})"

    def vec_exponent(self, vec):
        """Exponent of the value on a class vector."""
        return sum(v * c for v, c in zip(self.exponents, vec)) % self.M

    def value_exponent(self, I):
        """e with eta(I) = zeta_M^e; NotCoprime off the support."""
        return self.vec_exponent(self.group.class_of(I))

    def rational_exponent(self, n):
        """Exponent on the rational ideal (n)."""
        return self.value_exponent(self.group.field.principal(n, 0))

    def padic_value(self, I, emb):
        """Value as a Teichmueller root of unity in Z_{p^2}."""
        return emb.root_of_unity(self.M, self.value_exponent(I))

    @property
    def order(self):
        return self.M // math.gcd(self.M, *self.exponents) if self.exponents else 1

    @property
    def is_trivial(self):
        return not any(self.exponents)

    def __mul__(self, other):
        if not isinstance(other, HeckeChar):
            return NotImplemented
        if not _same_group(self.group, other.group):
            raise DomainError("characters live on different groups")
        return HeckeChar(self.group,
                         tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, k):
        return HeckeChar(self.group, tuple(v * k for v in self.exponents))

    def __eq__(self, other):
        return (isinstance(other, HeckeChar) and _same_group(self.group, other.group)
                and self.exponents == other.exponents)

    def __hash__(self):
        m = self.group.modulus
        return hash((self.group.field.d_K, m.a, m.b, m.content,
                     self.group.p, self.group.r, self.exponents))

    def sigma(self):
        """The conjugate character I -> eta(Ibar)."""
        cols = self.group.sigma_cols()
        return HeckeChar(self.group, tuple(self.vec_exponent(c) for c in cols))

    def is_galois_stable(self):
        return self == self.sigma()

    @property
    def conductor(self):
        """Smallest level the character factors through.

        Scans divisors of the modulus by norm; triviality on the kernel of
        the drop to each level is decided on the full kernel class list, and
        the first hit is the divisibility-minimal one (two incomparable
        trivializing levels would force a smaller trivializing gcd).
        """
        if self._conductor is None:
            for D in self.group.modulus.divisors():
                if all(self.vec_exponent(w) == 0
                       for w in self.group.ray_kernel_classes(D)):
                    self._conductor = D
                    break
        return self._conductor

    def tame_part(self):
        """Drop the p-tower coordinates, keeping the prime-to-p component."""
        exps = list(self.exponents)
        for i in self.group.gamma_indices:
            exps[i] = 0
        return HeckeChar(self.group, tuple(exps))


def trivial_character(group):
    return HeckeChar(group, (0,) * group.rank)


def dual_generator(group):
    """A character of maximal order: generator j maps to zeta_M^(M/n_j)."""
    M = math.lcm(*group.gen_orders) if group.gen_orders else 1
    return HeckeChar(group, tuple(M // n for n in group.gen_orders))


def character_to_spec(char):
    """JSON-ready description: field, modulus shape, generator images."""
    group = char.group
    c0 = group.c0
    spec = {"d_K": group.field.d_K,
            "c0": [c0.a, c0.b, c0.content],
            "r": group.r,
            "generator_images": list(char.exponents)}
    if group.p is not None:
        spec["p"] = group.p
    return spec


def character_from_spec(data):
    """Rebuild a character from its spec; the group is reconstructed too."""
    field = QuadField(data["d_K"])
    a, b, content = data["c0"]
    group = field.ray_class_group(c0=field.ideal(a, b, content),
                                  p=data.get("p"), r=data.get("r", 0))
    return HeckeChar(group, tuple(data["generator_images"]))


def rational_classes(group):
    """Classes of the rational ideals (n) prime to the modulus.

    The class of (n) only depends on n modulo the rational sublattice of
    the modulus, so n runs over one period.
    """
    m = group.modulus
    out = set()
    for n in range(1, m.content * m.a + 1):
        I = group.field.principal(n, 0)
        if I.is_coprime(m):
            out.add(group.class_of(I))
    return out


class CharPair:
    """Symmetric and twisted components of a self-dual character pair."""

    __slots__ = ("phi", "psi", "phi_tame", "psi_tame", "flags")

    def __init__(self, phi, psi, phi_tame, psi_tame, flags):
        self.phi = phi
        self.psi = psi
        self.phi_tame = phi_tame
        self.psi_tame = psi_tame
        self.flags = flags


def phi_psi_split(eta1, eta2):
    """Split (eta1, eta2) into phi = eta1*eta2 and psi = eta1*eta2^sigma.

    The pair must be self-dual: eta1*eta2 has to vanish on every rational
    class, else NotSelfDual.  Flags record whether phi is unramified at p
    and whether the anti-symmetric part psi/psi^sigma is nontrivial; both
    are computed, never assumed.
    """
    if not _same_group(eta1.group, eta2.group):
        raise DomainError("the two characters live on different groups")
    group = eta1.group
    phi = eta1 * eta2
    bad = sorted(w for w in rational_classes(group) if phi.vec_exponent(w))
    if bad:
        raise NotSelfDual(f"eta1*eta2 is nontrivial on rational classes, e.g. {bad[0]}")
    psi = eta1 * eta2.sigma()
    psi_minus = psi * psi.sigma() ** (-1)
    if group.p is not None:
        p_ideal = group.field.ideal(1, 1, group.p)
        phi_prime_to_p = phi.conductor.is_coprime(p_ideal)
    else:
        phi_prime_to_p = True
    flags = {"phi_conductor_prime_to_p": phi_prime_to_p,
             "psi_minus_nontrivial": not psi_minus.is_trivial}
    return CharPair(phi, psi, phi.tame_part(), psi.tame_part(), flags)


class LambdaChar:
    """Weight-moving data on ideals prime to p.

    angle(I) is the 1-unit <lambda(I)> with <lambda((alpha))> = <alpha>,
    extended from principal ideals by exact h_K-th roots of the logarithm
    (p never divides h_K here).  s_carrier(I) = p^a_exp * s(I) writes
    angle(I) = (1+p)^{s(I)} in the coordinate s; in the supported range the
    carrier exponent a_exp is 0 and every s(I) is already integral.

    full_value(I) pins lambda itself over class number one: the residue
    character x -> zeta^{eps*dlog(x)} with the smallest exponent eps that
    inverts every torsion unit makes eps(alpha)*alpha independent of the
    generator, hence multiplicative in I.
    """

    def __init__(self, field, p, prec):
        if field.prime_splitting(p).kind != "inert":
            raise Unsupported(f"{p} is not inert in Q(sqrt(-{field.d_K}))")
        if field.h_K % p == 0:
            raise Unsupported(f"p = {p} divides the class number {field.h_K}")
        self.field = field
        self.p = p
        self.prec = prec
        # Three guard digits: one for the p-shift inside s_carrier, the
        # rest as slack for the log/exp round trips.
        self._hi = Zp2(p, prec + 3)
        self.embedding = OkEmbedding(field, self._hi)
        self._p_ideal = field.ideal(1, 1, p)
        # The mod-p ray group has order h_K * (p^2 - 1) / #(torsion image);
        # the constructor guards make every factor prime to p.
        self.a_exp = 0
        self._log1p_unit_inv = plog(self._hi(1 + p)).divexact_p(1).inverse()
        self._angles = {}
        if field.h_K == 1:
            dlogs = [self.embedding.residue_dlog(x, y) for x, y in field.torsion_units()]
            n = self.embedding.mult_order
            self._eps_exp = next(e for e in range(1, n)
                                 if all((e + 1) * d % n == 0 for d in dlogs))
        else:
            self._eps_exp = None

    def _generator(self, I):
        if not I.is_coprime(self._p_ideal):
            raise NotCoprime(f"{I!r} is not prime to {self.p}")
        return self.field.principal_generators(I ** self.field.h_K)[0]

    def _angle_hi(self, I):
        got = self._angles.get(I)
        if got is None:
            unit = angle(self.embedding.embed(*self._generator(I)))
            if self.field.h_K > 1:
                unit = pexp(plog(unit).divexact_int(self.field.h_K))
            got = self._angles[I] = unit
        return got

    def angle(self, I):
        """<lambda(I)>, a 1-unit of Z_{p^2}."""
        return self._angle_hi(I).with_prec(self.prec)

    def s_carrier(self, I):
        """p^a_exp * s(I) with angle(I) = (1+p)^{s(I)}; integral by construction."""
        t = plog(self._angle_hi(I)).divexact_p(1) * self._log1p_unit_inv
        return (t * self.p ** self.a_exp).with_prec(self.prec)

    def full_value(self, I):
        """lambda(I) itself, torsion part included; class number one only."""
        alpha = self._one_generator(I)
        emb = self.embedding
        e = self._eps_exp * emb.residue_dlog(*alpha)
        return (emb.zeta ** (e % emb.mult_order) * emb.embed(*alpha)).with_prec(self.prec)

    def torsion_exponent(self, I):
        """dlog of the Teichmueller part of lambda(I); class number one only."""
        alpha = self._one_generator(I)
        return ((self._eps_exp + 1) * self.embedding.residue_dlog(*alpha)
                % self.embedding.mult_order)

    def _one_generator(self, I):
        if self._eps_exp is None:
            raise Unsupported(
                "a full lambda needs class number one; only the angle is canonical here")
        return self._generator(I)


def build_lambda(field, p, prec=8):
    """Construct the weight direction for an inert prime not dividing h_K."""
    return LambdaChar(field, p, prec)


def eta_weight_value(eta, lam, k, I):
    """eta_k(I) = eta(I) * <lambda(I)>^(k-1), the weight-k avatar of eta."""
    return eta.padic_value(I, lam.embedding) * lam.angle(I) ** (k - 1)
