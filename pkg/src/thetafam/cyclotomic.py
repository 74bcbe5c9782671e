"""Exact cyclotomic arithmetic for Gauss sums and p-power twists.

Gauss-sum work happens in the group ring Z[x]/(x^m - 1): integer coefficient
vectors indexed by exponents mod m, multiplied by cyclic convolution and
compared after canonical reduction modulo the m-th cyclotomic polynomial.
Convolutions are Kronecker-packed through gmpy2 big integers, so the m = 600
products stay fast without any approximate arithmetic.

A second small quotient ring carries polynomial coefficients over the p-adic
kernel modulo Phi_{p^r}, for specializations twisted by p-power order
characters.
"""

from __future__ import annotations

from functools import lru_cache

import gmpy2

from .errors import DomainError


def _divisors(m):
    out = [d for d in range(1, m + 1) if m % d == 0]
    return out


def _poly_divexact(num, den):
    """Exact division of integer polynomials (low degree first), den monic."""
    num = list(num)
    dd = len(den) - 1
    if den[-1] != 1:
        raise DomainError("divisor must be monic")
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        out[i - dd] = c
        if c:
            for j, dj in enumerate(den):
                num[i - dd + j] -= c * dj
    if any(num[:dd]):
        raise DomainError("division is not exact")
    return tuple(out)


@lru_cache(maxsize=None)
def cyclotomic_poly(m):
    """Integer coefficients of Phi_m, constant term first."""
    if m == 1:
        return (-1, 1)
    num = tuple([-1] + [0] * (m - 1) + [1])
    for d in _divisors(m)[:-1]:
        num = _poly_divexact(num, cyclotomic_poly(d))
    return num


def _poly_rem(num, den):
    """Remainder of integer polynomial division by monic den."""
    num = list(num)
    dd = len(den) - 1
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c:
            for j, dj in enumerate(den):
                num[i - dd + j] -= c * dj
    return tuple(num[:dd])


def _convolve_schoolbook(a, b, m):
    out = [0] * m
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                if bj:
                    k = i + j
                    if k >= m:
                        k -= m
                    out[k] += ai * bj
    return out


def _convolve_kronecker(a, b, m):
    """Cyclic convolution of nonnegative vectors via one big multiply."""
    limb = max(max(a), max(b), 1).bit_length() * 2 + m.bit_length() + 1
    pa = pb = 0
    for i in range(m - 1, -1, -1):
        pa = (pa << limb) | a[i]
        pb = (pb << limb) | b[i]
    prod = int(gmpy2.mpz(pa) * gmpy2.mpz(pb))
    mask = (1 << limb) - 1
    out = [0] * m
    for k in range(2 * m - 1):
        c = prod & mask
        prod >>= limb
        i = k if k < m else k - m
        out[i] += c
    return out


class CycVec:
    """Element of Z[x]/(x^m - 1), the exponent-mod-m group ring over Z."""

    __slots__ = ("m", "c")

    def __init__(self, m, coeffs):
        self.m = m
        self.c = tuple(coeffs)
        if len(self.c) != m:
            raise DomainError(f"need {m} coefficients, got {len(self.c)}")

    @classmethod
    def zero(cls, m):
        return cls(m, [0] * m)

    @classmethod
    def root(cls, m, e):
        """The monomial x^e."""
        c = [0] * m
        c[e % m] = 1
        return cls(m, c)

    @classmethod
    def from_int(cls, m, n):
        c = [0] * m
        c[0] = n
        return cls(m, c)

    def _check(self, other):
        if not isinstance(other, CycVec) or other.m != self.m:
            raise TypeError(f"incompatible operand {other!r}")

    def __add__(self, other):
        self._check(other)
        return CycVec(self.m, [a + b for a, b in zip(self.c, other.c)])

    def __sub__(self, other):
        self._check(other)
        return CycVec(self.m, [a - b for a, b in zip(self.c, other.c)])

    def __neg__(self):
        return CycVec(self.m, [-a for a in self.c])

    def scale(self, k):
        return CycVec(self.m, [k * a for a in self.c])

    def __mul__(self, other):
        self._check(other)
        if min(self.c) >= 0 and min(other.c) >= 0:
            out = _convolve_kronecker(self.c, other.c, self.m)
        else:
            out = _convolve_schoolbook(self.c, other.c, self.m)
        return CycVec(self.m, out)

    def galois(self, j):
        """The ring automorphism x -> x^j, for j invertible mod m."""
        if gmpy2.gcd(j, self.m) != 1:
            raise DomainError(f"x -> x^{j} is not invertible mod {self.m}")
        out = [0] * self.m
        for i, a in enumerate(self.c):
            if a:
                out[i * j % self.m] += a
        return CycVec(self.m, out)

    def conj(self):
        """Complex conjugation x -> x^(-1)."""
        return self.galois(self.m - 1)

    def __eq__(self, other):
        return isinstance(other, CycVec) and other.m == self.m and other.c == self.c

    def __hash__(self):
        return hash((self.m, self.c))

    def reduce_phi(self):
        """Canonical coordinates on the power basis of Z[zeta_m]."""
        return _poly_rem(self.c, cyclotomic_poly(self.m))

    def equal_mod_phi(self, other):
        """Equality as elements of Z[zeta_m]."""
        self._check(other)
        return not any((self - other).reduce_phi())

    def is_zero_mod_phi(self):
        return not any(self.reduce_phi())

    def __repr__(self):
        terms = [f"{a}*x^{i}" for i, a in enumerate(self.c) if a]
        return f"CycVec({self.m}: {' + '.join(terms) if terms else '0'})"


def power_basis_divexact(vec, n):
    """vec / n in Z[zeta_m], asserting integer divisibility on the power basis.

    Returns a CycVec carrying the reduced representative.
    """
    r = vec.reduce_phi()
    if any(c % n for c in r):
        raise DomainError(f"not divisible by {n} in the power basis")
    out = [c // n for c in r] + [0] * (vec.m - len(r))
    return CycVec(vec.m, out)


class PadicCyc:
    """Element of R[x]/Phi_{p^r}(x), R the p-adic kernel, on 0..phi(p^r)-1."""

    __slots__ = ("r", "coeffs")

    def __init__(self, r, coeffs):
        self.r = r
        self.coeffs = tuple(coeffs)
        p = self.coeffs[0].p
        if len(self.coeffs) != p ** (r - 1) * (p - 1):
            raise DomainError(
                f"need {p ** (r - 1) * (p - 1)} coordinates, got {len(self.coeffs)}")

    @property
    def p(self):
        return self.coeffs[0].p

    @classmethod
    def from_scalar(cls, c, r=1):
        deg = c.p ** (r - 1) * (c.p - 1)
        zero = c._like(0, 0)
        return cls(r, [c] + [zero] * (deg - 1))

    @classmethod
    def zeta_power(cls, ctx, e, r=1):
        """The image of zeta_{p^r}^e, with ctx a p-adic constructor context."""
        p = ctx.p
        deg = p ** (r - 1) * (p - 1)
        e %= p ** r
        coeffs = [ctx(0)] * deg
        if e < deg:
            coeffs[e] = ctx(1)
            return cls(r, coeffs)
        # zeta^deg = -(1 + zeta^q + ... + zeta^(q(p-2))), q = p^(r-1)
        q = p ** (r - 1)
        shift = e - deg
        out = cls(r, coeffs)
        for i in range(p - 1):
            out = out - cls.zeta_power(ctx, i * q + shift, r)
        return out

    def _check(self, other):
        if not isinstance(other, PadicCyc) or other.r != self.r or other.p != self.p:
            raise TypeError(f"incompatible operand {other!r}")

    def __add__(self, other):
        self._check(other)
        return PadicCyc(self.r, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return PadicCyc(self.r, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return PadicCyc(self.r, [-a for a in self.coeffs])

    def scale(self, c):
        return PadicCyc(self.r, [a * c for a in self.coeffs])

    def __mul__(self, other):
        if not isinstance(other, PadicCyc):
            return self.scale(other)
        self._check(other)
        deg = len(self.coeffs)
        q = self.p ** (self.r - 1)
        zero = self.coeffs[0]._like(0, 0)
        full = [zero] * (2 * deg - 1)
        for i, a in enumerate(self.coeffs):
            if a.is_zero():
                continue
            for j, b in enumerate(other.coeffs):
                if not b.is_zero():
                    full[i + j] = full[i + j] + a * b
        # fold x^deg = -(1 + x^q + ... + x^(q(p-2))) from the top down
        for k in range(2 * deg - 2, deg - 1, -1):
            a = full[k]
            if a.is_zero():
                continue
            full[k] = zero
            for i in range(self.p - 1):
                full[k - deg + i * q] = full[k - deg + i * q] - a
        return PadicCyc(self.r, full[:deg])

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, PadicCyc) and other.r == self.r
                and other.coeffs == self.coeffs)

    def __hash__(self):
        return hash((self.r, self.coeffs))

    def is_zero(self):
        return all(c.is_zero() for c in self.coeffs)

    def constant_part(self):
        """The scalar coordinate, asserting the zeta coordinates vanish."""
        if any(not c.is_zero() for c in self.coeffs[1:]):
            raise DomainError("has nontrivial root-of-unity coordinates")
        return self.coeffs[0]

    def __repr__(self):
        return f"PadicCyc(r={self.r}, {list(self.coeffs)!r})"
