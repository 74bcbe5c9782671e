"""Multiplicative-reduction parametrization at p: the period q_E, the branch
logarithm pinned by log(q_E) = 0, forward uniformization, and two-sided
point combinations.

The period comes out of the modular j-series by a contracting fixed-point
iteration, entirely in exact p-adic arithmetic.  Points enter as coordinates
on the multiplicative group; the forward (X, Y) series exist only to check
that such a coordinate really sits on the curve.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import comb

from .errors import (DomainError, InconsistencyFound, MissingFrobenius,
                     NoConvergence, NotMultiplicative)
from .padic import PadicElem, Zp2, angle, plog


# -- integer q-series --------------------------------------------------------

def _sigma(n, k):
    return sum(d ** k for d in range(1, n + 1) if n % d == 0)


@lru_cache(maxsize=None)
def sigma_series(k, count):
    """0, sigma_k(1), ..., sigma_k(count): the weight k+1 Eisenstein tail."""
    return (0,) + tuple(_sigma(n, k) for n in range(1, count + 1))


def _mul_trunc(a, b, count):
    out = [0] * (count + 1)
    for i, ai in enumerate(a[:count + 1]):
        if ai:
            for j, bj in enumerate(b[:count + 1 - i]):
                if bj:
                    out[i + j] += ai * bj
    return tuple(out)


def _div_trunc(num, den, count):
    # den[0] must be a unit of Z; here it is always 1
    if den[0] != 1:
        raise DomainError("series division needs constant term 1")
    out = [0] * (count + 1)
    for n in range(count + 1):
        acc = num[n] if n < len(num) else 0
        for j in range(1, n + 1):
            if j < len(den) and den[j]:
                acc -= den[j] * out[n - j]
        out[n] = acc
    return tuple(out)


@lru_cache(maxsize=None)
def delta_over_q_series(count):
    """The 24th power of the eta product without its leading q."""
    out = (1,) + (0,) * count
    n = 1
    while n <= count:
        fac = [0] * (count + 1)
        for j in range(0, count // n + 1):
            fac[n * j] = (-1) ** j * comb(24, j) if j <= 24 else 0
        out = _mul_trunc(out, tuple(fac), count)
        n += 1
    return out


@lru_cache(maxsize=None)
def e4_series(count):
    return (1,) + tuple(240 * s for s in sigma_series(3, count)[1:])


@lru_cache(maxsize=None)
def j_q_coefficients(count):
    """Coefficients of q*j(q): 1, 744, 196884, ...  Exact division."""
    e4 = e4_series(count)
    num = _mul_trunc(_mul_trunc(e4, e4, count), e4, count)
    return _div_trunc(num, delta_over_q_series(count), count)


# -- rational plumbing -------------------------------------------------------

def _ord_p(x, p):
    x = Fraction(x)
    if x == 0:
        raise DomainError("the zero fraction has no valuation")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def _embed_unit(ctx, x):
    """A p-unit Fraction as an element of the p-adic ring."""
    x = Fraction(x)
    return ctx(x.numerator) * ctx(x.denominator).inverse()


def _eval_series(coeffs, q, ctx):
    """sum_{n >= 1} coeffs[n] q^n, truncated where powers of q vanish."""
    v = q.valuation()
    acc = ctx.zero()
    power = ctx.one()
    for n in range(1, len(coeffs)):
        power = power * q
        if coeffs[n]:
            acc = acc + power * coeffs[n]
        if (n + 1) * v >= ctx.N:
            break
    return acc


def tate_period(j, p, N=8):
    """The period q with j(q) = j, for ord_p(j) < 0.

    Rearranging q j(q) = 1 gives q = p^v u^{-1} (1 + sum_{n>=0} c_n q^{n+1})
    with u the unit part of j; the right side contracts by p^v per pass, so
    iterating to a fixed point is exact and the valuation bookkeeping is
    immediate: ord(q) = -ord(j).
    """
    j = Fraction(j)
    v = -_ord_p(j, p)
    if v < 1:
        raise NotMultiplicative(f"need ord_p(j) < 0, got {-v}")
    work = N + v + 2
    ctx = Zp2(p, work)
    u_inv = _embed_unit(ctx, j * Fraction(p) ** v).inverse()
    coeffs = j_q_coefficients(work // v + 1)
    lead = ctx.one() * p ** v * u_inv
    q = lead
    for _ in range(work // v + 3):
        q_next = lead * (1 + _eval_series(coeffs, q, ctx))
        if q_next == q:
            return q.with_prec(N + v)
        q = q_next
    raise NoConvergence("period iteration did not stabilize")


def _j_from_a_invariants(ainvs):
    a1, a2, a3, a4, a6 = (Fraction(a) for a in ainvs)
    b2 = a1 * a1 + 4 * a2
    b4 = 2 * a4 + a1 * a3
    b6 = a3 * a3 + 4 * a6
    c4 = b2 * b2 - 24 * b4
    c6 = -b2 ** 3 + 36 * b2 * b4 - 216 * b6
    disc = (c4 ** 3 - c6 * c6) / 1728
    if disc == 0:
        raise DomainError("singular a-invariants")
    return c4 ** 3 / disc


class TateCurve:
    """Curve over Q with ord_p(j) < 0, held by its period.

    alpha is the reduction flag: +1 split, -1 non-split.  The constructor
    certifies the defining property j(q_E) = j by the unit-part identity
    u = E4(q)^3 / (Delta(q)/p^v) mod p^N.
    """

    def __init__(self, p, alpha, a_invariants=None, j=None, N=8):
        if alpha not in (1, -1):
            raise DomainError(f"alpha must be +-1, got {alpha}")
        if (a_invariants is None) == (j is None):
            raise DomainError("pass exactly one of a_invariants, j")
        if a_invariants is not None:
            j = _j_from_a_invariants(a_invariants)
        self.p = p
        self.alpha = alpha
        self.a_invariants = None if a_invariants is None else tuple(a_invariants)
        self.j = Fraction(j)
        self.N = N
        self.q_E = tate_period(self.j, p, N)
        self.v = self.q_E.valuation()
        self._ctx = Zp2(p, self.q_E.prec)
        w = self.q_E.divexact_p(self.v)
        self._log_unit = plog(angle(w))
        self._certify()

    def _certify(self):
        # j(q) = E4^3 / (q dq) with dq the weight-12 product over q, so the
        # unit part of j must come back as E4^3 / (w dq), w = q_E / p^v.
        ctx = self._ctx
        terms = ctx.N // self.v + 2
        e4 = _eval_series(e4_series(terms), self.q_E, ctx) + 1
        dq = _eval_series(delta_over_q_series(terms), self.q_E, ctx) + 1
        w = self.q_E.divexact_p(self.v)
        u = _embed_unit(ctx, self.j * Fraction(self.p) ** self.v)
        if not (e4 ** 3 * (w * dq).inverse()).same_mod(u, self.N):
            raise InconsistencyFound("period does not reproduce j")

    # -- the branch logarithm ---------------------------------------------

    def log(self, u):
        """log_{q_E}: kills torsion and q_E, log on one-units, extended by
        ord(u)/ord(q_E) on the valuation axis."""
        if u.is_zero():
            raise DomainError("log of zero")
        w = u.valuation()
        base = plog(angle(u.divexact_p(w)))
        if w == 0:
            return base
        s, vu = 0, self.v
        while vu % self.p == 0:
            vu //= self.p
            s += 1
        corr = self._log_unit * w * self._ctx(vu).inverse()
        return base - corr.divexact_p(s)

    log_qE = log
    log_E = log

    # -- forward uniformization (validation only) ---------------------------

    def curve_coefficients(self):
        """a4, a6 of the uniformized equation y^2 + xy = x^3 + a4 x + a6."""
        ctx = self._ctx
        terms = ctx.N // self.v + 2
        s3 = _eval_series(sigma_series(3, terms), self.q_E, ctx)
        s5 = _eval_series(sigma_series(5, terms), self.q_E, ctx)
        a4 = s3 * (-5)
        a6 = (s3 * (-5) + s5 * (-7)) * ctx(12).inverse()
        return a4, a6

    def point_from_u(self, u):
        """(X, Y) of the coordinate u, by the standard double series.

        Needs a unit u with u != 1 in the residue field, so every 1 - q^n u
        and 1 - u in sight is invertible.
        """
        ctx = self._ctx
        if u.valuation() != 0 or (u - 1).valuation() != 0:
            raise DomainError("forward series needs a unit off the identity")
        uinv = u.inverse()
        one = ctx.one()
        x = u * (one - u).inverse() ** 2
        y = u * u * ((one - u).inverse()) ** 3
        qn = one
        for n in range(1, ctx.N // self.v + 2):
            qn = qn * self.q_E
            a = qn * u
            b = qn * uinv
            x = x + a * (one - a).inverse() ** 2 + b * (one - b).inverse() ** 2
            y = y + a * a * (one - a).inverse() ** 3 - b * (one - b).inverse() ** 3
        terms = ctx.N // self.v + 2
        s1 = _eval_series(sigma_series(1, terms), self.q_E, ctx)
        return x - 2 * s1, y + s1

    def on_curve_residual(self, u):
        """y^2 + xy - x^3 - a4 x - a6 at the forward image of u."""
        x, y = self.point_from_u(u)
        a4, a6 = self.curve_coefficients()
        return y * y + x * y - x ** 3 - a4 * x - a6

    def descriptor(self):
        d = {"p": self.p, "alpha": self.alpha, "precision": self.N}
        if self.a_invariants is not None:
            d["a_invariants"] = [int(a) for a in self.a_invariants]
        else:
            d["j"] = [self.j.numerator, self.j.denominator]
        return d

    @classmethod
    def from_descriptor(cls, d):
        if "a_invariants" in d:
            return cls(d["p"], d["alpha"], a_invariants=d["a_invariants"],
                       N=d.get("precision", 8))
        num, den = d["j"]
        return cls(d["p"], d["alpha"], j=Fraction(num, den),
                   N=d.get("precision", 8))


class HeegnerPointData:
    """A point through the parametrization: the coordinate u, its Frobenius
    conjugate, and what is known about the character that cut it out.

    phi1_at_p only means something when quadratic is set; it is the +-1
    through which Frobenius acts on the point.
    """

    __slots__ = ("u", "u_frob", "quadratic", "phi1_at_p", "discriminants",
                 "label")

    def __init__(self, u, u_frob=None, quadratic=False, phi1_at_p=None,
                 discriminants=None, label=""):
        if quadratic and phi1_at_p not in (1, -1):
            raise DomainError("a quadratic point needs phi1_at_p = +-1")
        self.u = u
        self.u_frob = u_frob
        self.quadratic = quadratic
        self.phi1_at_p = phi1_at_p
        self.discriminants = tuple(discriminants) if discriminants else None
        self.label = label

    def to_json_dict(self):
        d = {"u": self.u.to_digits(), "quadratic": self.quadratic,
             "label": self.label}
        if self.u_frob is not None:
            d["u_frob"] = self.u_frob.to_digits()
        if self.phi1_at_p is not None:
            d["phi1_at_p"] = self.phi1_at_p
        if self.discriminants is not None:
            d["discriminants"] = list(self.discriminants)
        return d

    @classmethod
    def from_json_dict(cls, d, ctx):
        u = ctx.from_digits(d["u"], len(d["u"][0]))
        uf = None
        if "u_frob" in d:
            uf = ctx.from_digits(d["u_frob"], len(d["u_frob"][0]))
        return cls(u, uf, d.get("quadratic", False), d.get("phi1_at_p"),
                   d.get("discriminants"), d.get("label", ""))


def heegner_combine(curve, point, alpha=None):
    """Logs of the two combinations u (u^Frob)^(+-alpha).

    For a quadratic character the Frobenius conjugate is the phi1_at_p
    multiple of the point, which is asserted on the logs; the case table
    (one side doubled, the other zero) then falls out by cancellation.
    """
    if alpha is None:
        alpha = curve.alpha
    if alpha not in (1, -1):
        raise DomainError(f"alpha must be +-1, got {alpha}")
    if point.u_frob is None:
        raise MissingFrobenius(f"point {point.label!r} has no Frobenius data")
    lu = curve.log(point.u)
    lf = curve.log(point.u_frob)
    if point.quadratic:
        if not lf.same_mod(lu * point.phi1_at_p):
            raise InconsistencyFound(
                "Frobenius log is not the declared multiple of the point log")
    return lu + lf * alpha, lu - lf * alpha
