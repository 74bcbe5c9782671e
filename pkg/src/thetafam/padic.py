"""Exact arithmetic in the unramified quadratic extension of Z_p mod p^N.

Elements live on the basis {1, delta} with delta^2 the smallest positive
quadratic non-residue mod p, so the representation is deterministic.  All
coordinates are canonical residues mod p^prec; precision is absolute, tracked
per element, and combines as min() under ring operations.  Guard digits for
series (log, exp, binomials) are handled internally: inputs are exact
residues, so lifting to a scratch modulus and certifying the final precision
is always legitimate.
"""

from __future__ import annotations

import gmpy2

from .errors import DomainError, NonUnit, PrecisionLoss


def _is_odd_prime(p):
    return p >= 3 and gmpy2.is_prime(p)


def smallest_qnr(p):
    """Smallest positive quadratic non-residue mod p."""
    n = 2
    while gmpy2.kronecker(n, p) != -1:
        n += 1
    return n


class PadicElem:
    """One element of Z_{p^2} known mod p^prec, coordinates (c0, c1) on {1, delta}."""

    __slots__ = ("p", "prec", "c0", "c1", "_qnr")

    def __init__(self, p, prec, c0, c1=0, _qnr=None):
        if prec < 1:
            raise PrecisionLoss(f"no digits left (prec={prec})")
        self.p = p
        self.prec = prec
        m = p ** prec
        self.c0 = int(c0) % m
        self.c1 = int(c1) % m
        self._qnr = _qnr if _qnr is not None else smallest_qnr(p)

    # -- basic structure -------------------------------------------------

    def _like(self, c0, c1, prec=None):
        return PadicElem(self.p, self.prec if prec is None else prec, c0, c1, self._qnr)

    def _join(self, other):
        if isinstance(other, int):
            other = PadicElem(self.p, self.prec, other, 0, self._qnr)
        elif not isinstance(other, PadicElem):
            return None, None
        if other.p != self.p:
            raise TypeError(f"mixed primes {self.p} and {other.p}")
        return other, min(self.prec, other.prec)

    def with_prec(self, prec):
        if prec > self.prec:
            raise PrecisionLoss(f"cannot raise precision {self.prec} -> {prec}")
        return self._like(self.c0, self.c1, prec)

    def lift_unreduced(self, prec):
        """Same residue reinterpreted mod p^prec.  Only valid for exact inputs."""
        return PadicElem(self.p, prec, self.c0, self.c1, self._qnr)

    def is_zero(self):
        return self.c0 == 0 and self.c1 == 0

    def is_rational(self):
        """True when the element lies in Z_p (no delta component)."""
        return self.c1 == 0

    def valuation(self):
        """min(v_p(c0), v_p(c1)); prec when the element is 0 mod p^prec."""
        if self.is_zero():
            return self.prec
        v = 0
        c0, c1 = self.c0, self.c1
        while c0 % self.p == 0 and c1 % self.p == 0:
            c0 //= self.p
            c1 //= self.p
            v += 1
        return v

    def is_unit(self):
        return self.c0 % self.p != 0 or self.c1 % self.p != 0

    # -- ring operations -------------------------------------------------

    def __add__(self, other):
        other, prec = self._join(other)
        if other is None:
            return NotImplemented
        return self._like(self.c0 + other.c0, self.c1 + other.c1, prec)

    __radd__ = __add__

    def __neg__(self):
        return self._like(-self.c0, -self.c1)

    def __sub__(self, other):
        other, prec = self._join(other)
        if other is None:
            return NotImplemented
        return self._like(self.c0 - other.c0, self.c1 - other.c1, prec)

    def __rsub__(self, other):
        other, _ = self._join(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other, prec = self._join(other)
        if other is None:
            return NotImplemented
        c0 = self.c0 * other.c0 + self.c1 * other.c1 * self._qnr
        c1 = self.c0 * other.c1 + self.c1 * other.c0
        return self._like(c0, c1, prec)

    __rmul__ = __mul__

    def conj(self):
        """Frobenius conjugate, delta -> -delta."""
        return self._like(self.c0, -self.c1)

    def trace(self):
        return self._like(2 * self.c0, 0)

    def norm(self):
        return self._like(self.c0 * self.c0 - self._qnr * self.c1 * self.c1, 0)

    def inverse(self):
        if not self.is_unit():
            raise NonUnit(f"not invertible: {self}")
        m = self.p ** self.prec
        nrm = (self.c0 * self.c0 - self._qnr * self.c1 * self.c1) % m
        ninv = int(gmpy2.invert(nrm, m))
        return self._like(self.c0 * ninv, -self.c1 * ninv)

    def __pow__(self, e):
        if e < 0:
            return self.inverse() ** (-e)
        result = self._like(1, 0)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def divexact_p(self, v):
        """Divide by p^v; both coordinates must vanish mod p^v.  Costs v digits."""
        if v == 0:
            return self
        pv = self.p ** v
        if self.c0 % pv or self.c1 % pv:
            raise DomainError(f"not divisible by p^{v}: {self}")
        return PadicElem(self.p, self.prec - v, self.c0 // pv, self.c1 // pv, self._qnr)

    def divexact_int(self, n):
        """Divide by a nonzero integer, splitting off its p-part exactly."""
        if n < 0:
            return (-self).divexact_int(-n)
        v = 0
        while n % self.p == 0:
            n //= self.p
            v += 1
        m = self.p ** self.prec
        ninv = int(gmpy2.invert(n, m))
        return self._like(self.c0 * ninv, self.c1 * ninv).divexact_p(v)

    def __truediv__(self, other):
        if isinstance(other, int):
            return self.divexact_int(other)
        other, _ = self._join(other)
        if other is None:
            return NotImplemented
        return self * other.inverse()

    # -- comparison / hashing / serialization -----------------------------

    def __eq__(self, other):
        if isinstance(other, int):
            other = PadicElem(self.p, self.prec, other, 0, self._qnr)
        return (isinstance(other, PadicElem) and other.p == self.p
                and other.prec == self.prec and other.c0 == self.c0 and other.c1 == self.c1)

    def same_mod(self, other, k=None):
        """Congruence mod p^k (default: the joint precision)."""
        other, prec = self._join(other)
        if other is None:
            raise TypeError(f"cannot compare with {other!r}")
        k = prec if k is None else k
        if k > prec:
            raise PrecisionLoss(f"cannot compare mod p^{k} at precision {prec}")
        pk = self.p ** k
        return (self.c0 - other.c0) % pk == 0 and (self.c1 - other.c1) % pk == 0

    def __hash__(self):
        return hash((self.p, self.prec, self.c0, self.c1))

    def __repr__(self):
        if self.c1 == 0:
            body = f"{self.c0}"
        else:
            body = f"{self.c0} + {self.c1}*d"
        return f"({body} + O({self.p}^{self.prec}))"

    def to_digits(self):
        """Base-p digit lists [digits(c0), digits(c1)], length prec each."""
        def digs(c):
            out = []
            for _ in range(self.prec):
                out.append(c % self.p)
                c //= self.p
            return out
        return [digs(self.c0), digs(self.c1)]


class Zp2:
    """Constructor context: fixed prime p and default precision N."""

    def __init__(self, p, N):
        if not _is_odd_prime(p):
            raise DomainError(f"p must be an odd prime, got {p}")
        if N < 1:
            raise DomainError(f"precision must be >= 1, got {N}")
        self.p = p
        self.N = N
        self.qnr = smallest_qnr(p)

    def __call__(self, c0, c1=0, prec=None):
        return PadicElem(self.p, prec or self.N, c0, c1, self.qnr)

    def zero(self, prec=None):
        return self(0, 0, prec)

    def one(self, prec=None):
        return self(1, 0, prec)

    def delta(self, prec=None):
        return self(0, 1, prec)

    def from_digits(self, digit_lists, prec=None):
        prec = prec or self.N
        c0 = sum(d * self.p ** i for i, d in enumerate(digit_lists[0]))
        c1 = sum(d * self.p ** i for i, d in enumerate(digit_lists[1]))
        return self(c0, c1, prec)


# -- Teichmueller, log, exp, square roots ---------------------------------

def teichmuller(u):
    """The root of unity congruent to u mod p; NonUnit on non-units.

    Iterating z -> z^(p^2) at fixed modulus converges since it at least
    doubles the number of correct digits per step.
    """
    if not u.is_unit():
        raise NonUnit(f"teichmuller needs a unit, got {u}")
    z = u
    e = u.p * u.p
    for _ in range(u.prec + 1):
        z2 = z ** e
        if z2 == z:
            return z
        z = z2
    return z


def angle(u):
    """The one-unit part <u> = u / teichmuller(u)."""
    return u * teichmuller(u).inverse()


def _vp_int(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _log_terms_needed(p, prec):
    """Largest n with n - v_p(n) < prec; all later log terms clear p^prec.

    n - v_p(n) is not monotone (it dips at powers of p), but a violation at
    n > prec + 40 would need v_p(n) > 40, impossible below p^40, so a finite
    scan settles it.
    """
    worst = prec
    for n in range(1, prec + 41):
        if n - _vp_int(n, p) < prec:
            worst = max(worst, n)
    return worst


def plog(u):
    """p-adic logarithm on 1 + pZ_{p^2}, by the truncated alternating series."""
    x = u - 1
    if x.valuation() < 1:
        raise DomainError(f"plog needs u = 1 mod p, got {u}")
    prec = u.prec
    D = _log_terms_needed(u.p, prec)
    guard = 1
    d = D
    while d >= u.p:
        d //= u.p
        guard += 1
    W = prec + guard
    xw = x.lift_unreduced(W)
    acc = PadicElem(u.p, W, 0, 0, x._qnr)
    power = PadicElem(u.p, W, 1, 0, x._qnr)
    for n in range(1, D + 1):
        power = power * xw
        term = power.divexact_int(n).lift_unreduced(W)
        if n % 2 == 0:
            term = -term
        acc = acc + term
    return acc.with_prec(prec)


def _exp_terms_needed(p, prec):
    """Largest n with n - v_p(n!) < prec; later exp terms clear p^prec.

    n - v_p(n!) = (n(p-2) + s_p(n))/(p-1) can dip at powers of p, so scan
    the finite window where violations can occur.
    """
    hi = (prec * (p - 1)) // (p - 2) + 2
    worst = prec
    for n in range(1, hi + 8):
        if n - _vp_factorial(n, p) < prec:
            worst = max(worst, n)
    return worst


def pexp(x):
    """p-adic exponential on pZ_{p^2}, truncated power series with exact division."""
    if x.valuation() < 1:
        raise DomainError(f"pexp needs v_p(x) >= 1, got {x}")
    prec = x.prec
    D = _exp_terms_needed(x.p, prec)
    # v_p(D!) guard digits so every n! division stays exact
    vfact = _vp_factorial(D, x.p)
    W = prec + vfact + 1
    xw = x.lift_unreduced(W)
    acc = PadicElem(x.p, W, 1, 0, x._qnr)
    power = PadicElem(x.p, W, 1, 0, x._qnr)
    fact = 1
    for n in range(1, D + 1):
        power = power * xw
        fact *= n
        acc = acc + power.divexact_int(fact).lift_unreduced(W)
    return acc.with_prec(prec)


def sqrt_1unit(x):
    """Square root in 1 + pZ_{p^2} of x = 1 mod p, by Hensel/Newton.

    Invariant: v(y^2 - x) doubles per step ((y + x/y)/2 squares the error),
    so ceil(log2(prec)) + 1 iterations close the gap from v = 1.
    """
    if (x - 1).valuation() < 1:
        raise DomainError(f"sqrt_1unit needs x = 1 mod p, got {x}")
    y = x._like(1, 0)
    for _ in range(max(1, x.prec).bit_length() + 1):
        y = (y + x * y.inverse()).divexact_int(2)
    return y


def sqrt_one_unit(s):
    """The root of X^2 - s * omega(s)^{-1} lying in 1 + pZ_p, for s in Z_p^x."""
    if not s.is_unit():
        raise NonUnit(f"sqrt_one_unit needs a unit, got {s}")
    if not s.is_rational():
        raise DomainError(f"sqrt_one_unit is defined on Z_p, got {s}")
    return sqrt_1unit(s * teichmuller(s).inverse())


# -- gamma-ramped elements and binomial series -----------------------------

class RampedElem:
    """Element of Z_{p^2}[gamma], gamma^(p-1) = p, coordinates on gamma^0..gamma^(p-2)."""

    __slots__ = ("p", "coeffs")

    def __init__(self, coeffs):
        self.coeffs = tuple(coeffs)
        self.p = self.coeffs[0].p
        if len(self.coeffs) != self.p - 1:
            raise DomainError(f"need {self.p - 1} gamma coordinates, got {len(self.coeffs)}")

    @classmethod
    def monomial(cls, c, r):
        """c * gamma^r with 0 <= r < p - 1."""
        zero = c._like(0, 0)
        return cls([c if i == r else zero for i in range(c.p - 1)])

    @classmethod
    def from_padic(cls, c):
        return cls.monomial(c, 0)

    def __add__(self, other):
        return RampedElem([a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return RampedElem([-a for a in self.coeffs])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.coeffs[0]._like(other, 0)
        if isinstance(other, PadicElem):
            return RampedElem([a * other for a in self.coeffs])
        if not isinstance(other, RampedElem):
            return NotImplemented
        k = self.p - 1
        prec = min(min(a.prec for a in self.coeffs), min(b.prec for b in other.coeffs))
        acc = [self.coeffs[0]._like(0, 0, prec) for _ in range(k)]
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if b.is_zero():
                    continue
                t = a * b
                r = i + j
                if r >= k:
                    # gamma^(p-1) = p
                    r -= k
                    t = t * self.coeffs[0]._like(self.p, 0)
                acc[r] = acc[r] + t
        return RampedElem(acc)

    __rmul__ = __mul__

    def __eq__(self, other):
        return isinstance(other, RampedElem) and self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def gamma_degree(self):
        """Largest r with a nonzero gamma^r coordinate, or -1 for zero."""
        for r in range(self.p - 2, -1, -1):
            if not self.coeffs[r].is_zero():
                return r
        return -1

    def scalar_part(self):
        """The gamma^0 coordinate, asserting the rest vanish."""
        if self.gamma_degree() > 0:
            raise DomainError(f"not a scalar: gamma degree {self.gamma_degree()}")
        return self.coeffs[0]

    def __repr__(self):
        terms = [f"({c})*g^{r}" for r, c in enumerate(self.coeffs) if not c.is_zero()]
        return " + ".join(terms) if terms else "0"


def _vp_factorial(n, p):
    e = 0
    q = n
    while q:
        q //= p
        e += q
    return e


def _digit_sum(n, p):
    s = 0
    while n:
        s += n % p
        n //= p
    return s


def binom_gamma_coeffs(t, a, D):
    """binom(s, n) * (p^a gamma)^n for n = 0..D, each a gamma-monomial.

    The binomial argument s may have denominator p^a, so it is passed as
    the integral element t = p^a * s. Writing n! = p^E * M the value is
    (prod_{j<n} (t - j p^a)) * M^{-1} * gamma^{s_p(n)}, and
    s_p(n) = n mod (p-1) keeps every reduction exact with no p-division.
    """
    p = t.p
    mod = p ** t.prec
    out = [RampedElem.monomial(t._like(1, 0), 0)]
    num = t._like(1, 0)
    m_unit = 1  # running prime-to-p part of n!
    for n in range(1, D + 1):
        num = num * (t - t._like((n - 1) * p ** a, 0))
        q = n
        while q % p == 0:
            q //= p
        m_unit = m_unit * q % mod
        sp = _digit_sum(n, p)
        c = num * t._like(int(gmpy2.invert(m_unit, mod)), 0)
        c = c * t._like(p ** (sp // (p - 1)), 0)
        out.append(RampedElem.monomial(c, sp % (p - 1)))
    return out


def binom_eval(t, a, T0, D, target_prec=None):
    """Evaluate sum_{n <= D} binom(s, n) T0^n for v_p(T0) >= a + 1.

    As in binom_gamma_coeffs, s is passed as the integral t = p^a * s.
    Each term is exactly p-integral: T0/(p^a gamma) = (T0/p^(a+1)) gamma^(p-2)
    and the gamma powers cancel term by term because s_p(n) = n mod (p-1).
    Raises PrecisionLoss when the tail past D cannot be certified below the
    target precision.
    """
    p = t.p
    if T0.valuation() < a + 1:
        raise DomainError(f"need v_p(T0) >= {a + 1}, got {T0.valuation()}")
    target = target_prec or min(t.prec, T0.prec)
    w0 = T0.divexact_p(a + 1)
    vw0 = w0.valuation() if not w0.is_zero() else w0.prec
    # dropped terms have valuation >= n(1 + v(w0)) - v_p(n!), increasing in n
    n1 = D + 1
    tail = n1 * (1 + vw0) - _vp_factorial(n1, p)
    if tail < target:
        raise PrecisionLoss(
            f"cap D={D} certifies only p^-{tail}, need p^-{target}")
    mod = p ** t.prec
    acc = t._like(1, 0)
    num = t._like(1, 0)
    w0pow = t._like(1, 0)
    m_unit = 1
    for n in range(1, D + 1):
        num = num * (t - t._like((n - 1) * p ** a, 0))
        w0pow = w0pow * w0
        q = n
        while q % p == 0:
            q //= p
        m_unit = m_unit * q % mod
        efact = _vp_factorial(n, p)
        # term = num * w0^n * p^(n - E) / M, and n - E = s_p(n) + n(p-2) all
        # collapsing through gamma^(p-1) = p; net p-power is n - E >= 0
        term = num * w0pow
        term = term * t._like(int(gmpy2.invert(m_unit, mod)), 0)
        term = term * t._like(p ** (n - efact), 0)
        acc = acc + term
    return acc.with_prec(min(target, acc.prec))


def binom_int(c, n):
    """binom(c, n) for c in the Z_p line of Z_{p^2}.

    Integrality of the result needs c rational over Z_p (true for group
    coordinates, which is the intended use); a non-exact division raises
    DomainError rather than inventing digits. The result is determined
    only mod p^(prec - v_p(n!)): perturbing c by p^prec moves the
    numerator by a multiple of p^prec and dividing by n! eats v_p(n!) of
    that. Callers wanting full target precision must lift c first.
    """
    if n == 0:
        return c._like(1, 0)
    num = c._like(1, 0)
    for j in range(n):
        num = num * (c - c._like(j, 0))
    p = c.p
    efact = _vp_factorial(n, p)
    fact = 1
    for j in range(2, n + 1):
        fact *= j
    m_unit = fact // p ** efact
    num = num * c._like(int(gmpy2.invert(m_unit % p ** c.prec, p ** c.prec)), 0)
    return num.divexact_p(efact)
