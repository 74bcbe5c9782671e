"""Imaginary quadratic fields of odd discriminant and their ideal arithmetic.

The ring of integers of K = Q(sqrt(-d_K)) is Z[omega] with
omega = (1 + sqrt(-d_K))/2, so elements are integer pairs (x, y) meaning
x + y*omega, and omega^2 = omega - q for q = (1 + d_K)/4. An integral ideal
is content * (a*Z + (beta + omega)*Z), stored canonically as the triple
(a, b, content) with b = 2*beta + 1 odd and 1 <= b < 2a; equality is
structural and hashing is cheap.

Ray class groups are built by enumeration: units of O_K modulo the modulus
are listed, quotiented by the image of the global units, and decomposed into
cyclic factors, with discrete logs served from a table. Moduli are therefore
capped (norm 10^6, group order 10^5 by default) and larger requests are
refused rather than attempted.
"""

from __future__ import annotations

import csv
import math
from itertools import product as _cartesian
from typing import Iterator, NamedTuple

import gmpy2

from .errors import DomainError, ModulusTooLarge, NotCoprime, ParseError, Unsupported


def _xgcd(a: int, b: int):
    """Extended gcd: returns (g, s, t) with s*a + t*b = g >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        quo = old_r // r
        old_r, r = r, old_r - quo * r
        old_s, s = s, old_s - quo * s
        old_t, t = t, old_t - quo * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _factorize(n: int) -> dict:
    """Prime factorization by trial division; inputs stay desk scale."""
    out = {}
    i = 2
    while i * i <= n:
        while n % i == 0:
            out[i] = out.get(i, 0) + 1
            n //= i
        i += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _reduced_forms(d: int):
    """Reduced primitive forms (A, B, C) of discriminant -d, sorted.

    Squarefree d makes every form of discriminant -d primitive, so no gcd
    filter is needed.
    """
    forms = []
    for A in range(1, math.isqrt(d // 3) + 1):
        for B in range(-A + 1, A + 1):
            if B % 2 == 0:
                continue
            num = B * B + d
            if num % (4 * A):
                continue
            C = num // (4 * A)
            if C < A:
                continue
            if C == A and B < 0:
                continue
            forms.append((A, B, C))
    return tuple(sorted(forms))


def _reduce_form(form):
    """Reduce a positive definite form (A, B, C) to its canonical class representative."""
    A, B, C = form
    while True:
        k = (A - B) // (2 * A)
        if k:
            C += k * (B + k * A)
            B += 2 * k * A
        if C < A or (C == A and B < 0):
            A, B, C = C, -B, A
            continue
        return (A, B, C)


class Splitting(NamedTuple):
    kind: str
    primes: tuple


class QuadField:
    """Q(sqrt(-d_K)) for squarefree positive d_K = 3 (mod 4), the odd-discriminant case."""

    __slots__ = ("d_K", "q", "reduced_forms", "h_K")

    def __init__(self, d_K: int):
        if d_K <= 0 or d_K % 4 != 3:
            raise DomainError("need positive d_K = 3 (mod 4) so the discriminant -d_K is odd")
        if any(e > 1 for e in _factorize(d_K).values()):
            raise DomainError(f"d_K = {d_K} is not squarefree")
        self.d_K = d_K
        self.q = (1 + d_K) // 4
        self.reduced_forms = _reduced_forms(d_K)
        self.h_K = len(self.reduced_forms)

    def __eq__(self, other):
        return isinstance(other, QuadField) and other.d_K == self.d_K

    def __hash__(self):
        return hash(("QuadField", self.d_K))

    def __repr__(self):
        return f"QuadField(d_K={self.d_K})"

    @property
    def u_K(self) -> int:
        return 3 if self.d_K == 3 else 1

    def torsion_units(self):
        """Unit group of O_K as (x, y) pairs; six roots of unity only for d_K = 3."""
        if self.d_K == 3:
            return ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))
        return ((1, 0), (-1, 0))

    def norm_element(self, x: int, y: int) -> int:
        return x * x + x * y + self.q * y * y

    def conj_element(self, x: int, y: int):
        return (x + y, -y)

    def ideal(self, a: int, b: int, content: int = 1) -> "IdealRep":
        return IdealRep(self, a, b, content)

    @property
    def unit_ideal(self) -> "IdealRep":
        return IdealRep(self, 1, 1, 1)

    def principal(self, x: int, y: int) -> "IdealRep":
        """The ideal generated by x + y*omega."""
        if x == 0 and y == 0:
            raise DomainError("zero is not an ideal generator")
        return _hnf_from_rows(self, [(x, y), (-self.q * y, x + y)])

    def prime_splitting(self, ell: int) -> Splitting:
        if not _is_prime(ell):
            raise DomainError(f"{ell} is not prime")
        k = int(gmpy2.kronecker(-self.d_K, ell))
        if k == -1:
            return Splitting("inert", (self.ideal(1, 1, ell),))
        roots = [b for b in range(ell) if (b * b + b + self.q) % ell == 0]
        if k == 0:
            return Splitting("ramified", (self.ideal(ell, 2 * roots[0] + 1),))
        lo, hi = roots
        return Splitting("split", (self.ideal(ell, 2 * lo + 1), self.ideal(ell, 2 * hi + 1)))

    def enumerate_ideals(self, Nmax: int, coprime_to: "IdealRep | None" = None) -> Iterator["IdealRep"]:
        """Integral ideals of norm <= Nmax, each exactly once, sorted by (norm, a, b)."""
        for n in range(1, Nmax + 1):
            bucket = []
            c = 1
            while c * c <= n:
                if n % (c * c) == 0:
                    a = n // (c * c)
                    for beta in range(a):
                        if (beta * beta + beta + self.q) % a == 0:
                            bucket.append(IdealRep(self, a, 2 * beta + 1, c))
                c += 1
            bucket.sort(key=lambda I: (I.a, I.b))
            for I in bucket:
                if coprime_to is None or I.is_coprime(coprime_to):
                    yield I

    def principal_generators(self, I: "IdealRep"):
        """All (x, y) with (x + y*omega) = I, sorted; empty when I is not principal."""
        a = I.a
        prim = I.primitive()
        seen = set()
        for y in range(-math.isqrt(4 * a // self.d_K), math.isqrt(4 * a // self.d_K) + 1):
            s = 4 * a - self.d_K * y * y
            if s < 0:
                continue
            t = math.isqrt(s)
            if t * t != s:
                continue
            for tt in {t, -t}:
                if (tt - y) % 2:
                    continue
                x = (tt - y) // 2
                if (x, y) != (0, 0) and self.principal(x, y) == prim:
                    seen.add((I.content * x, I.content * y))
        return sorted(seen)

    def ray_class_group(self, c0=None, p=None, r: int = 0, max_norm: int = 10**6,
                        max_order: int = 10**5) -> "RayClassGroup":
        return RayClassGroup(self, c0=c0, p=p, r=r, max_norm=max_norm, max_order=max_order)


def _hnf_from_rows(field: QuadField, rows) -> "IdealRep":
    """Hermite form of the Z-module spanned by rows (x, y) = x + y*omega.

    The module must be a nonzero integral ideal; content, a and beta are read
    off the lattice basis [content*a, 0], [content*(beta + omega)].
    """
    xv, g = 0, 0
    for x, y in rows:
        if y:
            g2, s, t = _xgcd(g, y)
            xv, g = s * xv + t * x, g2
    if g == 0:
        raise DomainError("rows span no omega component; not an ideal")
    n = 0
    for x, y in rows:
        n = math.gcd(n, x - (y // g) * xv)
    if n == 0:
        raise DomainError("rows span a rank-1 module; not an ideal")
    if xv % g or n % g:
        raise DomainError("rows do not span an ideal of O_K")
    a = n // g
    beta = (xv // g) % a
    return IdealRep(field, a, 2 * beta + 1, g)


class IdealRep:
    """content * (a Z + (beta + omega) Z) with b = 2*beta + 1, canonical and hashable."""

    __slots__ = ("field", "a", "b", "content")

    def __init__(self, field: QuadField, a: int, b: int, content: int = 1):
        if a < 1 or content < 1:
            raise DomainError("ideal triple needs a >= 1 and content >= 1")
        if b % 2 == 0 or not 1 <= b < 2 * a:
            raise DomainError(f"b = {b} must be odd with 1 <= b < 2a = {2 * a}")
        if (b * b + field.d_K) % (4 * a):
            raise DomainError(f"(a, b) = ({a}, {b}) violates b^2 = -d_K mod 4a")
        self.field = field
        self.a = a
        self.b = b
        self.content = content

    @property
    def beta(self) -> int:
        return (self.b - 1) // 2

    @property
    def norm(self) -> int:
        return self.content * self.content * self.a

    @property
    def is_unit_ideal(self) -> bool:
        return self.norm == 1

    def primitive(self) -> "IdealRep":
        return IdealRep(self.field, self.a, self.b, 1)

    def conj(self) -> "IdealRep":
        beta_bar = (-self.beta - 1) % self.a
        return IdealRep(self.field, self.a, 2 * beta_bar + 1, self.content)

    def form(self):
        """Norm form (A, B, C) of the primitive part, before reduction."""
        return (self.a, self.b, (self.b * self.b + self.field.d_K) // (4 * self.a))

    def _rows(self):
        return [(self.content * self.a, 0), (self.content * self.beta, self.content)]

    def contains(self, x: int, y: int) -> bool:
        """Whether the element x + y*omega lies in this ideal."""
        c = self.content
        if x % c or y % c:
            return False
        return ((x // c) - (y // c) * self.beta) % self.a == 0

    def divides(self, other: "IdealRep") -> bool:
        return all(self.contains(x, y) for x, y in other._rows())

    def gcd(self, other: "IdealRep") -> "IdealRep":
        """Ideal sum, which is the gcd of ideals."""
        return _hnf_from_rows(self.field, self._rows() + other._rows())

    def is_coprime(self, other: "IdealRep") -> bool:
        return self.gcd(other).is_unit_ideal

    def factor(self):
        """Prime ideal factorization as a sorted list of (prime, exponent)."""
        out = []
        for ell in sorted(_factorize(self.norm)):
            for P in self.field.prime_splitting(ell).primes:
                e, power = 0, P
                while power.divides(self):
                    e += 1
                    power = power * P
                if e:
                    out.append((P, e))
        if math.prod(P.norm ** e for P, e in out) != self.norm:
            raise DomainError("factorization lost mass; ideal data inconsistent")
        return out

    def divisors(self):
        """All ideal divisors, sorted by (norm, a, b)."""
        out = [self.field.unit_ideal]
        for P, e in self.factor():
            powers = [self.field.unit_ideal]
            for _ in range(e):
                powers.append(powers[-1] * P)
            out = [D * Pk for D in out for Pk in powers]
        return sorted(out)

    def __mul__(self, other):
        if not isinstance(other, IdealRep):
            return NotImplemented
        if other.field != self.field:
            raise DomainError("ideals from different fields")
        b1, b2 = self.beta, other.beta
        q = self.field.q
        rows = [
            (self.a * other.a, 0),
            (self.a * b2, self.a),
            (other.a * b1, other.a),
            (b1 * b2 - q, b1 + b2 + 1),
        ]
        prim = _hnf_from_rows(self.field, rows)
        return IdealRep(self.field, prim.a, prim.b, prim.content * self.content * other.content)

    def __pow__(self, n: int):
        if n < 0:
            raise DomainError("ideal powers are nonnegative here")
        out = self.field.unit_ideal
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        return (isinstance(other, IdealRep) and other.field == self.field
                and (other.a, other.b, other.content) == (self.a, self.b, self.content))

    def __hash__(self):
        return hash((self.field.d_K, self.a, self.b, self.content))

    def __lt__(self, other):
        return (self.norm, self.a, self.b) < (other.norm, other.a, other.b)

    def __repr__(self):
        return f"IdealRep(a={self.a}, b={self.b}, content={self.content}, d_K={self.field.d_K})"


def _gpow(x, e: int, mul, ident):
    out = ident
    base = x
    while e:
        if e & 1:
            out = mul(out, base)
        base = mul(base, base)
        e >>= 1
    return out


def _ell_basis(P, mul, ident, ell: int):
    """Basis of a finite abelian ell-group given as an explicit element list.

    Picks an element of maximal order, recurses on the quotient by canonical
    coset representatives, and corrects the lifted generators so the result
    is a genuine direct-sum basis. Cost is quadratic in len(P), which the
    modulus caps keep small.
    """
    if len(P) == 1:
        return [], []
    best = None
    for x in sorted(P):
        k, y = 0, x
        while y != ident:
            y = _gpow(y, ell, mul, ident)
            k += 1
        if best is None or k > best[0]:
            best = (k, x)
    k, g = best
    ng = ell ** k
    powers = [ident]
    for _ in range(ng - 1):
        powers.append(mul(powers[-1], g))
    pow_index = {v: i for i, v in enumerate(powers)}

    def canon(x):
        return min(mul(x, t) for t in powers)

    quotient = sorted({canon(x) for x in P})
    sub_basis, sub_orders = _ell_basis(
        quotient, lambda u, v: canon(mul(u, v)), canon(ident), ell)
    basis, orders = [g], [ng]
    for h, m in zip(sub_basis, sub_orders):
        t = pow_index[_gpow(h, m, mul, ident)]
        if t % m:
            raise DomainError("maximal-order invariant violated; group data inconsistent")
        basis.append(mul(h, powers[(ng - t // m) % ng]))
        orders.append(m)
    return basis, orders


def _abelian_structure(elements, mul, ident):
    """Cyclic decomposition of an explicit finite abelian group.

    Returns (basis, orders, dlog) where orders are prime powers, the map
    (e_1, ..., e_k) -> prod basis[i]^e_i is a bijection, and dlog inverts it.
    """
    n = len(elements)
    basis, orders = [], []
    fac = _factorize(n)
    for ell in sorted(fac):
        cof = n // ell ** fac[ell]
        syl = sorted({_gpow(x, cof, mul, ident) for x in elements})
        if len(syl) != ell ** fac[ell]:
            raise DomainError("Sylow extraction failed; group data inconsistent")
        b, o = _ell_basis(syl, mul, ident, ell)
        basis.extend(b)
        orders.extend(o)
    table = {ident: (0,) * len(basis)}
    for i, (g, o) in enumerate(zip(basis, orders)):
        filled = list(table.items())
        acc = ident
        for e in range(1, o):
            acc = mul(acc, g)
            for x, vec in filled:
                table[mul(x, acc)] = vec[:i] + (e,) + vec[i + 1:]
    if len(table) != n:
        raise DomainError("discrete-log table collision; group data inconsistent")
    return basis, orders, table


class _Residues:
    """O_K modulo an ideal, on canonical representatives (x, y) with x < content*a, y < content."""

    __slots__ = ("field", "modulus", "ca", "c", "beta", "q", "prime_divisors", "one")

    def __init__(self, field: QuadField, modulus: IdealRep):
        self.field = field
        self.modulus = modulus
        self.ca = modulus.content * modulus.a
        self.c = modulus.content
        self.beta = modulus.beta
        self.q = field.q
        self.prime_divisors = tuple(P for P, _ in modulus.factor())
        self.one = self.reduce((1, 0))

    def reduce(self, el):
        x, y = el
        t = y % self.c
        x -= ((y - t) // self.c) * (self.c * self.beta)
        return (x % self.ca, t)

    def add(self, e1, e2):
        return self.reduce((e1[0] + e2[0], e1[1] + e2[1]))

    def mul(self, e1, e2):
        x1, y1 = e1
        x2, y2 = e2
        return self.reduce((x1 * x2 - self.q * y1 * y2, x1 * y2 + x2 * y1 + y1 * y2))

    def conj(self, el):
        x, y = el
        return self.reduce((x + y, -y))

    def is_unit(self, el) -> bool:
        x, y = el
        return all(not P.contains(x, y) for P in self.prime_divisors)

    def elements(self):
        for y in range(self.c):
            for x in range(self.ca):
                yield (x, y)


class RayClassGroup:
    """Cl_K(c0 * p^r) with generators, prime-power orders, and table-based discrete logs.

    Two shapes are supported: any modulus over a field with h_K = 1, and the
    plain class group (trivial modulus) for any h_K. Ray moduli over fields
    with nontrivial class group would need an extension-splitting step that
    no supported instance exercises, so they are refused.
    """

    def __init__(self, field: QuadField, c0=None, p=None, r: int = 0,
                 max_norm: int = 10**6, max_order: int = 10**5):
        if c0 is None:
            c0 = field.unit_ideal
        if c0.field != field:
            raise DomainError("modulus belongs to a different field")
        if r < 0:
            raise DomainError("tower level r must be >= 0")
        if r > 0:
            if p is None or not _is_prime(p):
                raise DomainError("a prime p is required when r > 0")
            if field.prime_splitting(p).kind != "inert":
                raise Unsupported(f"p = {p} is not inert in Q(sqrt(-{field.d_K}))")
            p_ideal = field.ideal(1, 1, p)
            if not c0.is_coprime(p_ideal):
                raise DomainError("c0 must be coprime to p")
            modulus = c0 * p_ideal ** r
        else:
            modulus = c0
        if modulus.norm > max_norm:
            raise ModulusTooLarge(f"modulus norm {modulus.norm} exceeds the cap {max_norm}")
        self.field = field
        self.c0 = c0
        self.p = p
        self.r = r
        self.modulus = modulus
        self._gminus = None
        self._sigma_cols = None

        if field.h_K == 1:
            self._init_ray(max_order)
        elif modulus.is_unit_ideal:
            self._init_class()
        else:
            raise Unsupported("ray moduli with h_K > 1 are out of scope; use the trivial modulus")

        if self.p:
            self.gamma_indices = tuple(
                i for i, o in enumerate(self.gen_orders) if o % self.p == 0)
        else:
            self.gamma_indices = ()
        self.delta_indices = tuple(
            i for i in range(len(self.gen_orders)) if i not in self.gamma_indices)

    def _init_ray(self, max_order: int):
        rng = _Residues(self.field, self.modulus)
        torsion = sorted({rng.reduce(u) for u in self.field.torsion_units()})

        def canon(el):
            return min(rng.mul(el, t) for t in torsion)

        units = [el for el in rng.elements() if rng.is_unit(el)]
        reps = sorted({canon(el) for el in units})
        if len(reps) > max_order:
            raise ModulusTooLarge(f"group order {len(reps)} exceeds the table cap {max_order}")
        basis, orders, table = _abelian_structure(
            reps, lambda u, v: canon(rng.mul(u, v)), canon(rng.one))
        self._mode = "ray"
        self._rng = rng
        self._canon = canon
        self._table = table
        self.order = len(reps)
        self.gen_orders = tuple(orders)
        self.generators = tuple(self.field.principal(x, y) for (x, y) in basis)
        self.unit_count = len(units)
        self.torsion_image_size = len(torsion)

    def _init_class(self):
        field = self.field
        d = field.d_K

        def ideal_of(fm):
            A, B, _ = fm
            return IdealRep(field, A, B % (2 * A), 1)

        def mul(f1, f2):
            prod = ideal_of(f1) * ideal_of(f2)
            return _reduce_form(prod.form())

        basis, orders, table = _abelian_structure(
            sorted(field.reduced_forms), mul, _reduce_form((1, 1, field.q)))
        self._mode = "class"
        self._table = table
        self.order = field.h_K
        self.gen_orders = tuple(orders)
        self.generators = tuple(ideal_of(fm) for fm in basis)
        self.unit_count = 1
        self.torsion_image_size = 1

    @property
    def rank(self) -> int:
        return len(self.gen_orders)

    def class_of(self, I: IdealRep):
        """Exponent vector of the class of I on the stored generators."""
        if I.field != self.field:
            raise DomainError("ideal from a different field")
        if not I.is_coprime(self.modulus):
            raise NotCoprime(f"{I!r} shares a factor with the modulus")
        if self._mode == "class":
            return self._table[_reduce_form(I.form())]
        x, y = self.principal_generator(I)
        return self._table[self._canon(self._rng.reduce((x, y)))]

    def principal_generator(self, I: IdealRep):
        """Deterministic generator of I; total because h_K = 1 in ray mode."""
        gens = self.field.principal_generators(I)
        if not gens:
            raise DomainError(f"{I!r} is not principal")
        return gens[0]

    def vec_add(self, v, w):
        return tuple((a + b) % o for a, b, o in zip(v, w, self.gen_orders))

    def vec_scale(self, k: int, v):
        return tuple((k * a) % o for a, o in zip(v, self.gen_orders))

    def sigma_cols(self):
        """Images of the generators under ideal conjugation, as class vectors."""
        if self._sigma_cols is None:
            if self.modulus.conj() != self.modulus:
                raise Unsupported("conjugation needs a sigma-stable modulus")
            self._sigma_cols = tuple(self.class_of(P.conj()) for P in self.generators)
        return self._sigma_cols

    def conj_vector(self, vec):
        cols = self.sigma_cols()
        out = (0,) * self.rank
        for j, e in enumerate(vec):
            if e:
                out = self.vec_add(out, self.vec_scale(e, cols[j]))
        return out

    def ray_kernel_classes(self, divisor: IdealRep):
        """Classes of (alpha), alpha = 1 mod divisor: the kernel of the drop to level divisor."""
        if not divisor.divides(self.modulus):
            raise DomainError("divisor must divide the modulus")
        if self._mode == "class":
            return {(0,) * self.rank}
        rng = self._rng
        zero = rng.reduce((0, 0))
        cosets = {zero}
        frontier = [zero]
        rows = divisor._rows()
        while frontier:
            el = frontier.pop()
            for row in rows:
                nxt = rng.add(el, row)
                if nxt not in cosets:
                    cosets.add(nxt)
                    frontier.append(nxt)
        out = set()
        for t in cosets:
            alpha = rng.add(t, rng.one)
            if rng.is_unit(alpha):
                out.add(self._table[self._canon(alpha)])
        return out

    def gamma_minus(self):
        """Anticyclotomic quotient of the p-part at this level: (orders, project).

        project maps a full class vector to its coordinates in the quotient of
        the p-part by the image of 1 + sigma.
        """
        if self._gminus is not None:
            return self._gminus
        gi = self.gamma_indices
        if not gi:
            self._gminus = ((), lambda vec: ())
            return self._gminus
        gorders = tuple(self.gen_orders[i] for i in gi)
        dim = len(gorders)

        def restrict(vec):
            return tuple(vec[i] for i in gi)

        def vadd(u, v):
            return tuple((u[i] + v[i]) % gorders[i] for i in range(dim))

        gens_h = []
        for i in gi:
            e = tuple(1 if j == i else 0 for j in range(self.rank))
            se = self.conj_vector(e)
            if any(se[j] for j in self.delta_indices):
                raise DomainError("conjugation mixed the p-part into the torsion part")
            gens_h.append(restrict(self.vec_add(e, se)))
        zero = (0,) * dim
        H = {zero}
        frontier = [zero]
        while frontier:
            v = frontier.pop()
            for h in gens_h:
                nxt = vadd(v, h)
                if nxt not in H:
                    H.add(nxt)
                    frontier.append(nxt)

        def vcanon(v):
            return min(vadd(v, h) for h in H)

        reps = sorted({vcanon(v) for v in _cartesian(*[range(o) for o in gorders])})
        _, orders2, table2 = _abelian_structure(
            reps, lambda u, v: vcanon(vadd(u, v)), vcanon(zero))

        def project(vec):
            return table2[vcanon(restrict(vec))]

        self._gminus = (tuple(orders2), project)
        return self._gminus


_CACHE_HEADER = ["norm", "a", "b", "content"]


def write_ideal_cache(field: QuadField, Nmax: int, path, coprime_to=None) -> int:
    """Write the ideal list as CSV rows norm,a,b,content sorted by (norm, a, b)."""
    count = 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_CACHE_HEADER)
        for I in field.enumerate_ideals(Nmax, coprime_to=coprime_to):
            writer.writerow([I.norm, I.a, I.b, I.content])
            count += 1
    return count


def read_ideal_cache(field: QuadField, path):
    """Read a CSV ideal cache back, revalidating every triple."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != _CACHE_HEADER:
            raise ParseError(f"bad ideal cache header: {header}")
        for lineno, row in enumerate(reader, start=2):
            try:
                norm, a, b, content = map(int, row)
            except ValueError as exc:
                raise ParseError(f"line {lineno}: {row}") from exc
            I = field.ideal(a, b, content)
            if I.norm != norm:
                raise ParseError(f"line {lineno}: norm {norm} does not match triple")
            out.append(I)
    return out
