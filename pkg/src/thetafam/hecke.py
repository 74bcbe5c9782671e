"""Hecke operators on truncated q-expansions over any coefficient ring.

Coefficients only need ring arithmetic (+, -, *), so the same operator code
runs on exact p-adic scalars, cyclotomic integer vectors, rationals, and
family rings (Iwasawa series, group-ring elements).  Caps are tracked
honestly: T_ell and U_p shrink the reliable range by a factor of ell or p,
and nothing is ever extrapolated past it.

The ordinary projector comes in two forms.  The literal one iterates U_p
with factorially growing exponents and certifies the limit by agreement of
successive iterates on the surviving cap; it can only conclude for inputs
that die or stabilize quickly.  The span form acts on a finite U_p-stable
basis through a validated matrix, where the same factorial limit is exact
linear algebra and never loses q-range.
"""

import math

from .errors import CapExhausted, CapOverflow, DomainError, NoConvergence
from .quadfield import _is_prime


class DiamondAction:
    """Multiplier data for the second Hecke term: d -> <d>_R chi(d) / d.

    ``factor_fn(d)`` returns the combined ring value for d prime to the
    level; factor() returns None when d shares a factor with the level,
    encoding the chi(ell) = 0 convention.  Multiplicativity over coprime
    arguments is part of the contract and is checked by tests, not here.
    """

    __slots__ = ("level", "p", "_fn")

    def __init__(self, level, factor_fn, p=None):
        if level < 1:
            raise DomainError(f"level must be positive, got {level}")
        self.level = level
        self.p = p
        self._fn = factor_fn

    def factor(self, d):
        if d < 1:
            raise DomainError(f"diamond argument must be positive, got {d}")
        if math.gcd(d, self.level) > 1:
            return None
        return self._fn(d)


class QExpansion:
    """Coefficients a_0..a_Q with declared level, character, and weight tag."""

    __slots__ = ("coeffs", "level", "char", "weight", "zero")

    def __init__(self, coeffs, level, char=None, weight=None, zero=None):
        coeffs = tuple(coeffs)
        if len(coeffs) < 2:
            raise DomainError("a q-expansion needs at least a_0 and a_1")
        self.coeffs = coeffs
        self.level = level
        self.char = char
        self.weight = weight
        self.zero = zero if zero is not None else coeffs[0] - coeffs[0]

    @property
    def Q(self):
        return len(self.coeffs) - 1

    def a(self, n):
        if n > self.Q:
            raise CapExhausted(f"a_{n} is past the cap {self.Q}")
        return self.coeffs[n]

    def truncate(self, Q):
        if Q > self.Q:
            raise CapOverflow(f"cannot extend the cap {self.Q} to {Q}")
        return QExpansion(self.coeffs[:Q + 1], self.level, self.char,
                          self.weight, self.zero)

    def replace(self, coeffs=None, **meta):
        new = QExpansion(self.coeffs if coeffs is None else coeffs,
                         meta.get("level", self.level),
                         meta.get("char", self.char),
                         meta.get("weight", self.weight),
                         self.zero)
        return new

    def __add__(self, other):
        if not isinstance(other, QExpansion):
            return NotImplemented
        if other.level != self.level:
            raise DomainError("cannot add expansions of different levels")
        Q = min(self.Q, other.Q)
        return QExpansion([a + b for a, b in zip(self.coeffs[:Q + 1], other.coeffs[:Q + 1])],
                          self.level, self.char, self.weight, self.zero)

    def __sub__(self, other):
        return self + other.scale(-1)

    def scale(self, c):
        return QExpansion([a * c for a in self.coeffs], self.level,
                          self.char, self.weight, self.zero)

    def agrees_with(self, other, cap=None):
        """Coefficient-wise equality on the joint (or given) cap."""
        m = min(self.Q, other.Q)
        if cap is not None:
            if cap > m:
                raise CapOverflow(f"cap {cap} is past the joint range {m}")
            m = cap
        return all(self.coeffs[n] == other.coeffs[n] for n in range(m + 1))

    def is_zero(self):
        return all(c == self.zero for c in self.coeffs)

    def __repr__(self):
        return f"QExpansion(Q={self.Q}, level={self.level}, weight={self.weight})"


def hecke_T(ell, xi):
    """T_ell: a_n -> a_{n ell} + <ell> chi(ell) ell^{-1} a_{n/ell}.

    The second term is the character factor stored on the expansion; it
    vanishes when ell divides the level, which makes T_ell = U_ell there.
    The output cap is floor(Q/ell).
    """
    if not _is_prime(ell):
        raise DomainError(f"T_ell needs a prime, got {ell}")
    if xi.char is not None and xi.char.p == ell:
        raise DomainError("the p direction is handled by hecke_U_p")
    Qout = xi.Q // ell
    if Qout < 1:
        raise CapExhausted(f"cap {xi.Q} cannot support T_{ell}")
    fac = xi.char.factor(ell) if xi.char is not None else None
    out = []
    for n in range(Qout + 1):
        c = xi.coeffs[n * ell]
        if fac is not None and n % ell == 0:
            c = c + fac * xi.coeffs[n // ell]
        out.append(c)
    return xi.replace(coeffs=out)


def hecke_U_p(xi, p):
    """U_p: a_n -> a_{np}; the cap shrinks to floor(Q/p)."""
    Qout = xi.Q // p
    if Qout < 1:
        raise CapExhausted(f"cap {xi.Q} cannot support U_{p}")
    return xi.replace(coeffs=[xi.coeffs[n * p] for n in range(Qout + 1)])


def hecke_V_p(xi, p):
    """V_p: a_n -> a_{n/p} (zero off multiples of p); the cap grows to pQ."""
    out = [xi.zero] * (p * xi.Q + 1)
    for n in range(xi.Q + 1):
        out[p * n] = xi.coeffs[n]
    return xi.replace(coeffs=out)


def p_deplete(xi, p):
    """1 - V_p U_p: zero out the p-divisible coefficients (a_0 included)."""
    return xi.replace(coeffs=[xi.zero if n % p == 0 else c
                              for n, c in enumerate(xi.coeffs)])


def family_product(xi1, xi2, mul=None, out_cap=None):
    """Cauchy product; pass mul to multiply through a tensor embedding."""
    cap = min(xi1.Q, xi2.Q)
    if out_cap is not None:
        if out_cap > cap:
            raise CapOverflow(f"cap {out_cap} exceeds the computable range {cap}")
        cap = out_cap
    if mul is None:
        mul = lambda a, b: a * b
    out = []
    for n in range(cap + 1):
        acc = mul(xi1.coeffs[0], xi2.coeffs[n])
        for i in range(1, n + 1):
            acc = acc + mul(xi1.coeffs[i], xi2.coeffs[n - i])
        out.append(acc)
    level = xi1.level * xi2.level // math.gcd(xi1.level, xi2.level)
    return QExpansion(out, level)


def ord_project(xi, p, max_n=7):
    """Ordinary projector by iterated U_p^{n!}, certified on surviving caps.

    The iterate U_p^{n!} xi is accepted once applying the same exponent
    again reproduces it: that pins U_p^{k n!} xi for every k, and the full
    factorial sequence eventually runs through multiples of n!.  Agreement
    of merely successive iterates is not sound (torsion eigenvalues can
    match by coincidence before stabilizing).  Inputs that never certify
    within max_n rounds, or whose q-range dies first, raise NoConvergence:
    the truncation cannot certify a limit, which is different from the
    limit failing to exist.
    """
    cur = xi
    applied = 0
    for n in range(1, max_n + 1):
        target = math.factorial(n)
        while applied < target:
            if cur.Q < p:
                raise NoConvergence(
                    f"q-range exhausted after U_p^{applied}; no certificate")
            cur = hecke_U_p(cur, p)
            applied += 1
        peek = cur
        for _ in range(target):
            if peek.Q < p:
                raise NoConvergence(
                    f"q-range exhausted while certifying U_p^{target}")
            peek = hecke_U_p(peek, p)
        if cur.agrees_with(peek):
            return cur
    raise NoConvergence(f"U_p^{math.factorial(max_n)} has not stabilized")


# -- finite ordinary spans --------------------------------------------------

def _mat_mul(A, B):
    rows, inner, cols = len(A), len(B), len(B[0])
    out = []
    for i in range(rows):
        row = []
        for j in range(cols):
            acc = A[i][0] * B[0][j]
            for t in range(1, inner):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


def _mat_pow(A, e):
    if e < 1:
        raise DomainError("matrix powers start at 1 here")
    result = None
    base = A
    while e:
        if e & 1:
            result = base if result is None else _mat_mul(result, base)
        base = _mat_mul(base, base)
        e >>= 1
    return result


def matrix_ordinary_limit(A, max_n=7):
    """lim A^{n!} by A^{(n-1)!} -> (A^{(n-1)!})^n, accepted when idempotent.

    The limit is an idempotent, and any idempotent power A^m equals the
    limit because m divides n! from some point on; checking idempotence
    rather than equality of successive powers avoids torsion coincidences.
    """
    M = tuple(tuple(row) for row in A)
    for n in range(2, max_n + 2):
        if _mat_mul(M, M) == M:
            return M
        M = _mat_pow(M, n)
    if _mat_mul(M, M) == M:
        return M
    raise NoConvergence(f"A^{max_n}! has not stabilized")


class OrdinarySpan:
    """U_p-stable span of q-expansions with a validated matrix action.

    matrix[i][j] is the coefficient of basis[i] in U_p(basis[j]).  The claim
    is replayed against the literal operator on every basis element before
    anything else runs, so a wrong matrix cannot slip into the projector.
    """

    def __init__(self, basis, matrix, p):
        if not basis:
            raise DomainError("empty span")
        self.basis = tuple(basis)
        self.matrix = tuple(tuple(row) for row in matrix)
        self.p = p
        dim = len(self.basis)
        if len(self.matrix) != dim or any(len(r) != dim for r in self.matrix):
            raise DomainError(f"matrix shape does not match a basis of size {dim}")
        for j, b in enumerate(basis):
            literal = hecke_U_p(b, p)
            claimed = self.combo([self.matrix[i][j] for i in range(dim)], literal.Q)
            if not literal.agrees_with(claimed):
                raise DomainError(f"claimed U_p action is wrong on basis element {j}")

    @property
    def dim(self):
        return len(self.basis)

    def combo(self, coords, cap=None):
        """The linear combination sum coords[i] * basis[i]."""
        if len(coords) != self.dim:
            raise DomainError(f"need {self.dim} coordinates")
        acc = self.basis[0].scale(coords[0])
        for c, b in zip(coords[1:], self.basis[1:]):
            acc = acc + b.scale(c)
        return acc if cap is None else acc.truncate(min(cap, acc.Q))

    def apply_matrix(self, M, coords):
        return tuple(sum((M[i][j] * coords[j] for j in range(1, self.dim)),
                         start=M[i][0] * coords[0]) for i in range(self.dim))

    def project_ordinary(self, coords, max_n=7):
        """Coordinates of e_ord applied to the combination with these coords."""
        E = matrix_ordinary_limit(self.matrix, max_n)
        return self.apply_matrix(E, coords)
