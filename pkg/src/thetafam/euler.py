"""Local factors at p: the unbalanced zeta integral, Gauss-sum root numbers,
and the anticyclotomic multiplier, cross-checked on exact grids.

Everything here is exact.  Root numbers are held as Gauss sums over the
unramified quadratic extension, computed in Z[x]/(x^m - 1) with
m = p^n (p^2 - 1), and only ever divided by powers of p that are certified
to divide on the power basis.  Rational a_p inputs go through Fraction,
p-adic unit inputs stay in the quadratic p-adic ring; no floats anywhere.

All functions are pure, so grid checks can be parallelized freely.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

from .cyclotomic import CycVec, PadicCyc, power_basis_divexact
from .errors import (CaseMismatch, DomainError, InconsistencyFound,
                     NotPrimitive)
from .padic import PadicElem, Zp2, teichmuller


def _prime_factors(n):
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


@lru_cache(maxsize=None)
def _tame_generator_residue(p):
    """Coordinates (a, b) of the first a + b*delta generating the residue
    field's unit group, in lexicographic scan order.  Deterministic, so the
    exponent coordinates below mean the same thing in every run."""
    ctx = Zp2(p, 1)
    order = p * p - 1
    one = ctx.one()
    for a in range(p):
        for b in range(p):
            if a == 0 and b == 0:
                continue
            g = ctx(a, b)
            if all(g ** (order // q) != one for q in _prime_factors(order)):
                return (a, b)
    raise DomainError(f"no generator of the residue field at p={p}")


@lru_cache(maxsize=None)
def _unit_table(p, n):
    """Every unit of Z_{p^2}/p^n as (i, j1, j2, trace mod p^n).

    The unit is g^i (1+p)^j1 (1+p delta)^j2 with g the cached Teichmueller
    generator; i runs mod p^2-1 and j1, j2 mod p^(n-1).  The two one-units
    are independent because their logs span p Z_{p^2} over Z_p.
    """
    ctx = Zp2(p, n)
    a, b = _tame_generator_residue(p)
    g = teichmuller(ctx(a, b))
    q = p ** (n - 1)
    t1, t2 = ctx(1 + p), ctx(1, p)
    if t1 ** q != ctx.one() or t2 ** q != ctx.one():
        raise DomainError("one-unit orders are off; enumeration is unsound")
    rows = []
    u_i = ctx.one()
    for i in range(p * p - 1):
        u1 = u_i
        for j1 in range(q):
            u2 = u1
            for j2 in range(q):
                rows.append((i, j1, j2, u2.trace().c0 % p ** n))
                u2 = u2 * t2
            u1 = u1 * t1
        u_i = u_i * g
    if u_i != ctx.one():
        raise DomainError("tame generator order is off; enumeration is unsound")
    return tuple(rows)


class UnitChar:
    """Character of the units of Z_{p^2}/p^n, as generator exponents.

    tame is the exponent on the cached Teichmueller generator (mod p^2-1);
    wild holds the exponents on 1+p and 1+p*delta (mod p^(n-1)).  Values are
    abstract roots of unity; nothing here depends on an embedding.
    """

    __slots__ = ("p", "n", "tame", "wild")

    def __init__(self, p, n, tame, wild=(0, 0)):
        if n < 1:
            raise DomainError(f"modulus exponent must be >= 1, got {n}")
        q = p ** (n - 1)
        self.p = p
        self.n = n
        self.tame = tame % (p * p - 1)
        self.wild = (wild[0] % q, wild[1] % q)

    @property
    def level(self):
        """Exact conductor exponent: 0 for the trivial character."""
        depth = 0
        for w in self.wild:
            if w:
                v = 0
                while w % self.p == 0:
                    w //= self.p
                    v += 1
                depth = max(depth, self.n - 1 - v)
        if depth:
            return depth + 1
        return 1 if self.tame else 0

    def inverse(self):
        q = self.p ** (self.n - 1)
        return UnitChar(self.p, self.n, -self.tame,
                        ((-self.wild[0]) % q, (-self.wild[1]) % q))

    def at_minus_one(self):
        """chi(-1); -1 is torsion, halfway around the tame cycle."""
        return -1 if self.tame % 2 else 1

    def restricts_trivially_to_qp(self):
        """True when the character kills the image of Z_p^* in the units.

        That image is generated by the (p+1)-th power of the tame generator
        together with 1+p, so the test is divisibility of the exponents.
        """
        return (self.tame * (self.p + 1)) % (self.p * self.p - 1) == 0 \
            and self.wild[0] == 0

    def key(self):
        return (self.p, self.n, self.tame, self.wild)

    def __eq__(self, other):
        return isinstance(other, UnitChar) and other.key() == self.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        if self.n == 1:
            return f"UnitChar(p={self.p}, n=1, tame={self.tame})"
        return f"UnitChar(p={self.p}, n={self.n}, tame={self.tame}, wild={self.wild})"


@lru_cache(maxsize=None)
def gauss_sum(chi):
    """Sum of chi(u) e(Tr(u)/p^n) over units mod p^n, in Z[x]/(x^m - 1).

    m = p^n (p^2-1); the additive root e(1/p^n) sits at x^(p^2-1), the tame
    value at x^(p^n) and the wild value at x^(p(p^2-1)).  Coefficients stay
    nonnegative, one count per unit, so products downstream take the packed
    convolution path.
    """
    p, n = chi.p, chi.n
    tame_ord = p * p - 1
    m = p ** n * tame_ord
    q = p ** (n - 1)
    acc = [0] * m
    w1, w2 = chi.wild
    for i, j1, j2, tr in _unit_table(p, n):
        e = (chi.tame * i % tame_ord) * p ** n + tr * tame_ord
        if q > 1:
            e += ((w1 * j1 + w2 * j2) % q) * (p * tame_ord)
        acc[e % m] += 1
    return CycVec(m, acc)


class RootNumber:
    """W(chi) = G(chi)/p^n, held exactly as the integral Gauss sum.

    The division never happens in Z[zeta_m]; consumers either cancel W
    against its conjugate (unitary()) or push the sum into a p-adic
    cyclotomic ring where dividing by p^n is exact (padic_image).
    """

    __slots__ = ("chi", "gauss")

    def __init__(self, chi, gauss):
        self.chi = chi
        self.gauss = gauss

    @property
    def p(self):
        return self.chi.p

    @property
    def n(self):
        return self.chi.n

    @property
    def m(self):
        return self.gauss.m

    def unitary(self):
        """Whether G * conj(G) == p^(2n) holds in Z[zeta_m]."""
        target = CycVec.from_int(self.m, self.p ** (2 * self.n))
        return (self.gauss * self.gauss.conj()).equal_mod_phi(target)

    @property
    def sign(self):
        """+1 or -1 when W is rational, else None."""
        pn = self.p ** self.n
        if self.gauss.equal_mod_phi(CycVec.from_int(self.m, pn)):
            return 1
        if self.gauss.equal_mod_phi(CycVec.from_int(self.m, -pn)):
            return -1
        return None

    def padic_image(self, ctx=None):
        """W as an element of Zp2[zeta_{p^n}], exact division by p^n.

        zeta_{p^2-1} goes to the Teichmueller generator's power, zeta_{p^n}
        to the formal root of the p^n-th cyclotomic quotient; the extra n
        digits of working precision pay for the division.
        """
        p, n = self.p, self.n
        if ctx is None:
            ctx = Zp2(p, 8)
        hi = Zp2(p, ctx.N + n)
        a, b = _tame_generator_residue(p)
        teich = teichmuller(hi(a, b))
        tame_ord = p * p - 1
        inv_tame = pow(tame_ord, -1, p ** n)
        inv_pn = pow(p ** n, -1, tame_ord)
        acc = PadicCyc.from_scalar(hi(0), n)
        for e, coeff in enumerate(self.gauss.c):
            if not coeff:
                continue
            s = e * inv_tame % p ** n
            t = e * inv_pn % tame_ord
            acc = acc + PadicCyc.zeta_power(hi, s, n).scale(teich ** t * coeff)
        coords = [c.divexact_p(n) for c in acc.coeffs]
        return PadicCyc(n, [c.with_prec(ctx.N) for c in coords])

    def __repr__(self):
        s = self.sign
        shown = f"{s:+d}" if s is not None else f"G/{self.p}^{self.n}"
        return f"RootNumber({self.chi!r} -> {shown})"


def root_number(chi):
    """The normalized Gauss sum of a primitive character, unitarity certified."""
    if chi.level != chi.n:
        raise NotPrimitive(
            f"conductor exponent is {chi.level}, not the stated level {chi.n}")
    rn = RootNumber(chi, gauss_sum(chi))
    if not rn.unitary():
        raise InconsistencyFound(f"G * conj(G) != p^(2n) for {chi!r}")
    return rn


# -- the three-case local factor -------------------------------------------

@dataclass(frozen=True)
class LocalFactorInput:
    """Inputs of the local factor at p.

    case is "p-old" or "p-new"; a_p is a p-adic unit or the exact rational
    +-1; n is the conductor exponent of the twisting character at p, with
    eta its table on the units mod p^n (None when n = 0).  p is only needed
    when neither a_p nor eta carries it.
    """
    case: str
    k: int
    a_p: object
    n: int
    eta: UnitChar | None = None
    p: int | None = None


def _infer_p(a_p, eta, p):
    if p is not None:
        return p
    if isinstance(a_p, PadicElem):
        return a_p.p
    if eta is not None:
        return eta.p
    raise DomainError("cannot infer p; pass it explicitly")


def _check_ap(a_p):
    if isinstance(a_p, PadicElem):
        if not a_p.is_unit():
            raise DomainError(f"a_p must be a p-adic unit, got {a_p!r}")
        return a_p
    if isinstance(a_p, int):
        a_p = Fraction(a_p)
    if isinstance(a_p, Fraction):
        if a_p not in (1, -1):
            raise DomainError(f"exact rational a_p must be +-1, got {a_p}")
        return a_p
    raise DomainError(f"unsupported a_p type {type(a_p).__name__}")


def _inv_square(a_p):
    if isinstance(a_p, PadicElem):
        return (a_p * a_p).inverse()
    return 1 / (a_p * a_p)


class RamifiedFactor:
    """The ramified local factor (p/a_p^2)^n p^(n(k-2)) / W, as a formal pair.

    scalar is the rational or p-adic prefactor; root carries W exactly.  The
    inverse of W is never formed: multiplying back by W cancels it through
    the certified identity G * conj(G) = p^(2n).
    """

    __slots__ = ("scalar", "root")

    def __init__(self, scalar, root):
        self.scalar = scalar
        self.root = root

    def unit_certificate(self):
        """(G * conj(G)) / p^(2n) as a ring element; must come out 1."""
        prod = self.root.gauss * self.root.gauss.conj()
        try:
            return power_basis_divexact(prod, self.root.p ** (2 * self.root.n))
        except DomainError as exc:
            raise InconsistencyFound(f"W is not unitary: {exc}") from exc

    def times_root_number(self):
        """The product with W, i.e. the bare scalar, cancellation certified."""
        unit = self.unit_certificate()
        if not unit.equal_mod_phi(CycVec.from_int(unit.m, 1)):
            raise InconsistencyFound(
                f"G * conj(G) != p^(2n) for {self.root.chi!r}")
        return self.scalar

    def rational_value(self):
        """scalar/W when W is +-1; DomainError on irrational W."""
        s = self.root.sign
        if s is None:
            raise DomainError("root number is not rational")
        return self.scalar * s

    def __repr__(self):
        return f"RamifiedFactor({self.scalar} / W, W={self.root!r})"


def unb_factor(inp):
    """The local factor at p in the unbalanced range, by the three cases.

    Unramified p-old gives the square (1 - p^(k-2)/a_p^2)^2; unramified
    p-new forces k = 2 and gives the single factor 1 - a_p^(-2); ramified
    of level n gives (p/a_p^2)^n p^(n(k-2)) / W as a RamifiedFactor.
    """
    if inp.case not in ("p-old", "p-new"):
        raise DomainError(f"case must be p-old or p-new, got {inp.case!r}")
    if inp.k < 2 or inp.k % 2:
        raise DomainError(f"weight must be even and >= 2, got {inp.k}")
    if inp.n < 0:
        raise DomainError(f"conductor exponent must be >= 0, got {inp.n}")
    a_p = _check_ap(inp.a_p)
    p = _infer_p(a_p, inp.eta, inp.p)
    if inp.n == 0:
        if inp.eta is not None:
            raise CaseMismatch("n = 0 needs the unramified hypothesis; "
                               "no character table belongs here")
        base = 1 - _inv_square(a_p) * p ** (inp.k - 2)
        if inp.case == "p-new":
            if inp.k != 2:
                raise CaseMismatch("the p-new unramified case only occurs "
                                   "with k = 2")
            return base
        return base * base
    if inp.eta is None:
        raise CaseMismatch(f"ramified level n = {inp.n} needs a character table")
    if inp.eta.p != p or inp.eta.n != inp.n:
        raise CaseMismatch(
            f"character table is mod {inp.eta.p}^{inp.eta.n}, "
            f"inputs say {p}^{inp.n}")
    scalar = _inv_square(a_p) ** inp.n * p ** (inp.n * (inp.k - 1))
    return RamifiedFactor(scalar, root_number(inp.eta))


def anticyc_multiplier(k, a_p, n, p=None, p_new=False):
    """The p-adic multiplier of the anticyclotomic interpolation table.

    (p/a_p^2)^n p^(n(k-2)) when the twist is ramified (n > 0); at n = 0 the
    p-old shape is the square (1 - p^(k-2)/a_p^2)^2 and the p-new shape
    drops the square.
    """
    if k < 2 or k % 2:
        raise DomainError(f"weight must be even and >= 2, got {k}")
    a_p = _check_ap(a_p)
    p = _infer_p(a_p, None, p)
    if n > 0:
        return _inv_square(a_p) ** n * p ** (n * (k - 1))
    base = 1 - _inv_square(a_p) * p ** (k - 2)
    return base if p_new else base * base


# -- the archimedean-normalization constant ---------------------------------

@dataclass(frozen=True)
class CpValue:
    """Exact constant split as rational * sqrt(d_K)^delta_exp * factors.

    rational soaks up the sign, the two Gamma factors, c, u_K^2 and the
    even part of the discriminant power; delta_exp in {0, 1} flags the
    leftover square root; factors carries ingested non-rational scalars
    (the local sign and the twist value) untouched, in that order.
    """
    rational: Fraction
    delta_exp: int
    factors: tuple = ()


def cp_constant(k, j, c, d_K, u_K, eps_p=1, twist=1):
    """The interpolation constant at weight k and twist exponent j.

    Needs |j| < k/2 so both Gamma arguments are positive integers.  eps_p
    and twist are ingested scalars; rational ones are folded in, anything
    else rides along in CpValue.factors.
    """
    if k < 2 or k % 2:
        raise DomainError(f"weight must be even and >= 2, got {k}")
    if 2 * abs(j) >= k:
        raise DomainError(f"need |j| < k/2, got j={j} at k={k}")
    sign = -1 if ((2 + 2 * j - k) // 2) % 2 else 1
    rational = Fraction(sign * factorial(k // 2 + j - 1)
                        * factorial(k // 2 - j - 1) * c * u_K * u_K)
    rational *= Fraction(d_K) ** ((k - 2) // 2)
    factors = []
    for ingested in (eps_p, twist):
        if isinstance(ingested, (int, Fraction)):
            rational *= ingested
        else:
            factors.append(ingested)
    return CpValue(rational, (k - 1) % 2, tuple(factors))


# -- consistency of the two multiplier routes -------------------------------

def _fmt(x):
    if isinstance(x, Fraction):
        return str(x)
    return repr(x)


def default_grid(p=5, prec=12, unit_samples=None):
    """The desk grid: weights 2..6, conductor exponents 0..2, five a_p.

    Rows are (k, n, case, a_p, eta).  Unramified rows run p-old for every
    a_p and p-new at k = 2 with rational a_p; ramified rows run two
    characters per level.  unit_samples overrides the three p-adic units.
    """
    ctx = Zp2(p, prec)
    if unit_samples is None:
        unit_samples = (ctx(2), ctx(3), ctx(2, 1))
    a_ps = (Fraction(1), Fraction(-1)) + tuple(unit_samples)
    chars = {
        1: (UnitChar(p, 1, 1), UnitChar(p, 1, p - 1)),
        2: (UnitChar(p, 2, 1, (1, 0)), UnitChar(p, 2, p - 1, (0, 1))),
    }
    rows = []
    for k in (2, 4, 6):
        for a_p in a_ps:
            rows.append((k, 0, "p-old", a_p, None))
            if k == 2 and isinstance(a_p, Fraction):
                rows.append((k, 0, "p-new", a_p, None))
            for n in (1, 2):
                for eta in chars[n]:
                    rows.append((k, n, "p-old", a_p, eta))
    return rows


def consistency_check(grid=None, p=5):
    """Assert the two multiplier routes agree on every grid point, exactly.

    Unramified rows compare the local factor with the anticyclotomic entry
    as ring elements; ramified rows multiply the root number back in
    (certified cancellation) before comparing.  Any failure aborts with the
    offending tuple.
    """
    if grid is None:
        grid = default_grid(p)
    report = []
    for k, n, case, a_p, eta in grid:
        e_p = anticyc_multiplier(k, a_p, n, p=p, p_new=(case == "p-new"))
        val = unb_factor(LocalFactorInput(case, k, a_p, n, eta, p=p))
        if n == 0:
            identity = "I == e_p"
            lhs = val
        else:
            identity = "I * W == e_p"
            lhs = val.times_root_number()
        if lhs != e_p:
            raise InconsistencyFound(
                f"{identity} fails at k={k} n={n} case={case} "
                f"a_p={_fmt(a_p)}: {_fmt(lhs)} != {_fmt(e_p)}")
        report.append({
            "k": k,
            "n": n,
            "case": case,
            "a_p": _fmt(a_p),
            "character": repr(eta) if eta is not None else "",
            "identity": identity,
            "value": _fmt(e_p),
            "root_number": _fmt_root(val) if n else "",
            "ok": True,
        })
    return report


def _fmt_root(val):
    s = val.root.sign
    return f"{s:+d}" if s is not None else f"G/{val.root.p}^{val.root.n}"
