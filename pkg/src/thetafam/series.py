"""Truncated Iwasawa-algebra plumbing over the p-adic kernel.

Three coefficient worlds share one surface here.  Plain one- or multivariable
truncated series over Z_{p^2} carry the classical T = (weight) variable and
its tensor products.  A variable may instead be marked as a shifted-disc
variable X = (T - p)/(p^a gamma); its coefficients are gamma-ramped and its
admissible classical weights are exactly k = 1 mod p^a.  Formal group-ring
elements over a free pro-p group stay unexpanded: products add coordinates
and specialization exponentiates exactly, so no truncation error ever enters
that route.

Weights act by T -> eps(1+p) (1+p)^k - 1; a nontrivial eps takes values in
p-power roots of unity and pushes results into the Phi_{p^r} quotient ring.
"""

from __future__ import annotations

import json

from .cyclotomic import PadicCyc
from .errors import (
    CapMismatch,
    CapOverflow,
    DomainError,
    PrecisionLoss,
    Unsupported,
    WeightOutOfRadius,
)
from .padic import PadicElem, RampedElem, Zp2, _vp_int as _vp, pexp, plog


class Weight:
    """Arithmetic weight (k, eps) with eps valued in mu_{p^r} (r = 0: trivial).

    eps is recorded by exponents: on a rank-g group ring, eps_exps[i] is the
    zeta_{p^r} exponent of the i-th generator; on the T-line the single entry
    gives eps(1+p).
    """

    __slots__ = ("k", "eps_r", "eps_exps")

    def __init__(self, k, eps_r=0, eps_exps=()):
        if eps_r < 0:
            raise DomainError(f"bad eps level {eps_r}")
        if eps_r == 0 and any(eps_exps):
            raise DomainError("nontrivial eps exponents need eps_r >= 1")
        self.k = k
        self.eps_r = eps_r
        self.eps_exps = tuple(eps_exps)

    @property
    def classical(self):
        return self.k >= 2

    def is_trivial_eps(self):
        p_r = self.eps_r
        return p_r == 0 or not any(self.eps_exps)

    def t_value(self, ctx):
        """eps(1+p) (1+p)^k - 1, a PadicElem (PadicCyc when eps is ramified)."""
        base = ctx(1 + ctx.p) ** self.k
        if self.is_trivial_eps():
            return base - 1
        e = self.eps_exps[0] if self.eps_exps else 0
        zeta = PadicCyc.zeta_power(ctx, e, self.eps_r)
        return zeta.scale(base) - PadicCyc.from_scalar(ctx(1), self.eps_r)

    def __repr__(self):
        if self.is_trivial_eps():
            return f"Weight(k={self.k})"
        return f"Weight(k={self.k}, eps=zeta_{{p^{self.eps_r}}}^{list(self.eps_exps)})"


def _value_pow_cache(value, one):
    powers = [one]

    def power(e):
        while len(powers) <= e:
            powers.append(powers[-1] * value)
        return powers[e]

    return power


class IwasawaSeries:
    """Truncated polynomial in named variables with exact p-adic coefficients.

    col_scales[i] = a marks variable i as the shifted-disc variable
    (T - p)/(p^a gamma), whose coefficients are RampedElem; None marks a
    plain Lambda variable.  Products drop monomials past the caps and set
    the truncated flag rather than failing.
    """

    __slots__ = ("ctx", "variables", "caps", "col_scales", "coeffs", "truncated")

    def __init__(self, ctx, variables, caps, coeffs=None, col_scales=None,
                 truncated=False):
        self.ctx = ctx
        self.variables = tuple(variables)
        self.caps = tuple(caps)
        if len(self.caps) != len(self.variables):
            raise CapMismatch("one cap per variable")
        self.col_scales = (tuple(col_scales) if col_scales is not None
                           else (None,) * len(self.variables))
        self.truncated = truncated
        self.coeffs = {}
        for mono, c in (coeffs or {}).items():
            mono = tuple(mono)
            if len(mono) != len(self.variables):
                raise CapMismatch(f"monomial {mono} does not fit {self.variables}")
            if any(e > cap for e, cap in zip(mono, self.caps)):
                raise CapOverflow(f"monomial {mono} exceeds caps {self.caps}")
            if not c.is_zero():
                self.coeffs[mono] = c

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, ctx, variables, caps, c, col_scales=None):
        zero_mono = (0,) * len(tuple(variables))
        return cls(ctx, variables, caps, {zero_mono: c}, col_scales)

    @classmethod
    def var(cls, ctx, variables, caps, name, col_scales=None):
        variables = tuple(variables)
        i = variables.index(name)
        mono = tuple(1 if j == i else 0 for j in range(len(variables)))
        one = ctx(1)
        if col_scales is not None and col_scales[i] is not None:
            one = RampedElem.from_padic(one)
        return cls(ctx, variables, caps, {mono: one}, col_scales)

    def _shape(self):
        return (self.variables, self.caps, self.col_scales)

    def _check(self, other):
        if not isinstance(other, IwasawaSeries) or other._shape() != self._shape():
            raise CapMismatch(
                f"incompatible series shapes: {self!r} vs {other!r}")

    def _zero_coeff(self):
        if any(a is not None for a in self.col_scales):
            return RampedElem.from_padic(self.ctx(0))
        return self.ctx(0)

    # -- ring structure ------------------------------------------------------

    def __add__(self, other):
        self._check(other)
        out = dict(self.coeffs)
        for mono, c in other.coeffs.items():
            out[mono] = out[mono] + c if mono in out else c
        return IwasawaSeries(self.ctx, self.variables, self.caps, out,
                             self.col_scales, self.truncated or other.truncated)

    def __neg__(self):
        return IwasawaSeries(self.ctx, self.variables, self.caps,
                             {m: -c for m, c in self.coeffs.items()},
                             self.col_scales, self.truncated)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            other = self.ctx(other)
        if isinstance(other, PadicElem):
            return IwasawaSeries(self.ctx, self.variables, self.caps,
                                 {m: c * other for m, c in self.coeffs.items()},
                                 self.col_scales, self.truncated)
        self._check(other)
        out = {}
        dropped = False
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                mono = tuple(a + b for a, b in zip(m1, m2))
                if any(e > cap for e, cap in zip(mono, self.caps)):
                    dropped = True
                    continue
                prod = c1 * c2
                out[mono] = out[mono] + prod if mono in out else prod
        return IwasawaSeries(self.ctx, self.variables, self.caps, out,
                             self.col_scales,
                             self.truncated or other.truncated or dropped)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, IwasawaSeries) and other._shape() == self._shape()
                and other.coeffs == self.coeffs)

    def coefficient(self, mono):
        return self.coeffs.get(tuple(mono), self._zero_coeff())

    def degree(self):
        return max((sum(m) for m in self.coeffs), default=-1)

    # -- specialization ------------------------------------------------------

    def _point_value(self, i, w):
        """The substitution value for variable i at weight w."""
        a = self.col_scales[i]
        if a is None:
            return w.t_value(self.ctx)
        if not w.is_trivial_eps():
            # eps(1+p)(1+p)^k - 1 - p is a unit times a fractional power of p,
            # hence outside the shifted disc
            raise WeightOutOfRadius(
                f"twisted weight leaves the (T-p)/(p^{a} gamma) disc")
        if (w.k - 1) % self.ctx.p ** a:
            raise WeightOutOfRadius(
                f"need k = 1 mod p^{a}, got k={w.k}")
        # lift so the exact division by p^(a+1) keeps full precision
        lift = Zp2(self.ctx.p, self.ctx.N + a + 1)
        T0 = lift(1 + self.ctx.p) ** w.k - 1
        w0 = (T0 - lift(self.ctx.p)).divexact_p(a + 1)
        return RampedElem.monomial(w0, self.ctx.p - 2)

    def specialize(self, w):
        """Evaluate at a Weight (or {variable: Weight}); exact on the stored part.

        Returns a PadicElem when the result is scalar, a RampedElem if gamma
        coordinates survive (they cancel for series built from the binomial
        contract), and a PadicCyc under a ramified eps.
        """
        if isinstance(w, Weight):
            if len(self.variables) != 1:
                raise DomainError("a single Weight fits only one variable")
            wmap = {self.variables[0]: w}
        else:
            wmap = dict(w)
            missing = set(self.variables) - set(wmap)
            if missing:
                raise DomainError(f"no weight for {sorted(missing)}")
        values = [self._point_value(i, wmap[v]) for i, v in enumerate(self.variables)]
        ramped = any(isinstance(v, RampedElem) for v in values)
        cyc = [v for v in values if isinstance(v, PadicCyc)]
        if ramped and cyc:
            raise Unsupported("ramified eps on a shifted-disc variable")
        if cyc:
            r = cyc[0].r
            one = PadicCyc.from_scalar(self.ctx(1), r)
            values = [v if isinstance(v, PadicCyc)
                      else PadicCyc.from_scalar(v, r) for v in values]
            acc = PadicCyc.from_scalar(self.ctx(0), r)
        elif ramped:
            one = RampedElem.from_padic(self.ctx(1))
            values = [v if isinstance(v, RampedElem)
                      else RampedElem.from_padic(v) for v in values]
            acc = RampedElem.from_padic(self.ctx(0))
        else:
            one = self.ctx(1)
            acc = self.ctx(0)
        pows = [_value_pow_cache(v, one) for v in values]
        for mono, c in self.coeffs.items():
            if ramped and isinstance(c, PadicElem):
                term = RampedElem.from_padic(c)
            elif cyc and isinstance(c, PadicElem):
                term = PadicCyc.from_scalar(c, r)
            else:
                term = c
            for i, e in enumerate(mono):
                if e:
                    term = term * pows[i](e)
            acc = acc + term
        if isinstance(acc, RampedElem) and acc.gamma_degree() <= 0:
            return acc.coeffs[0]
        return acc

    def derivative_at(self, w=None):
        """d/dk along the weight line, or the literal d/dT at T = 0 (w None).

        One-variable series only.  The k-line rule is
        d/dk F((1+p)^k - 1) = log_p(1+p) (1+p)^k F'(T) at T = (1+p)^k - 1.
        """
        if len(self.variables) != 1:
            raise DomainError("derivative_at needs a one-variable series")
        if self.col_scales[0] is not None:
            raise Unsupported("derivative_at is defined for plain T-variables")
        if w is None:
            return self.coeffs.get((1,), self.ctx(0))
        T0 = w.t_value(self.ctx)
        if isinstance(T0, PadicCyc):
            raise Unsupported("derivative along a twisted line")
        acc = self.ctx(0)
        tpow = self.ctx(1)
        for n in range(1, self.caps[0] + 1):
            c = self.coeffs.get((n,))
            if c is not None:
                acc = acc + c * n * tpow
            tpow = tpow * T0
        u = self.ctx(1 + self.ctx.p)
        return plog(u) * u ** w.k * acc

    # -- serialization -------------------------------------------------------

    def to_json_dict(self):
        def enc(c):
            if isinstance(c, RampedElem):
                return {"gamma": [x.to_digits() for x in c.coeffs]}
            return c.to_digits()

        items = sorted(self.coeffs.items(), key=lambda kv: (sum(kv[0]), kv[0]))
        return {
            "variables": list(self.variables),
            "caps": list(self.caps),
            "prime": self.ctx.p,
            "precision": self.ctx.N,
            "col_scales": [a for a in self.col_scales],
            "truncated": self.truncated,
            "coefficients": [[list(m), enc(c)] for m, c in items],
        }

    @classmethod
    def from_json_dict(cls, d):
        ctx = Zp2(d["prime"], d["precision"])

        def dec(e):
            if isinstance(e, dict):
                return RampedElem([_elem_from_digits(ctx, x) for x in e["gamma"]])
            return _elem_from_digits(ctx, e)

        coeffs = {tuple(m): dec(e) for m, e in d["coefficients"]}
        return cls(ctx, d["variables"], d["caps"], coeffs,
                   [a for a in d["col_scales"]], d["truncated"])

    def to_json(self):
        return json.dumps(self.to_json_dict(), sort_keys=True,
                          separators=(",", ":"))

    @classmethod
    def from_json(cls, s):
        return cls.from_json_dict(json.loads(s))

    def __repr__(self):
        return (f"IwasawaSeries({'/'.join(self.variables)}, "
                f"{len(self.coeffs)} terms, caps={self.caps})")


def _elem_from_digits(ctx, digit_lists, prec=None):
    prec = prec if prec is not None else len(digit_lists[0])
    c0 = sum(d * ctx.p ** i for i, d in enumerate(digit_lists[0]))
    c1 = sum(d * ctx.p ** i for i, d in enumerate(digit_lists[1]))
    return ctx(c0, c1, prec)


def embed_tensor(parts):
    """The tensor-product element prod_i a_i on the concatenated variables.

    Specializing the result at (w_1, ..., w_n) equals the product of the
    componentwise specializations; the induced weight on the common Lambda
    structure is the sum of the component weights.
    """
    names = [v for s in parts for v in s.variables]
    if len(set(names)) != len(names):
        raise CapMismatch(f"variable names collide: {names}")
    ctx = parts[0].ctx
    caps = tuple(c for s in parts for c in s.caps)
    scales = tuple(a for s in parts for a in s.col_scales)
    total = len(names)
    out = IwasawaSeries.constant(ctx, names, caps, ctx(1), scales)
    offset = 0
    for s in parts:
        lifted = {}
        for mono, c in s.coeffs.items():
            big = [0] * total
            big[offset:offset + len(mono)] = mono
            lifted[tuple(big)] = c
        out = out * IwasawaSeries(ctx, names, caps, lifted, scales, s.truncated)
        offset += len(s.variables)
    return out


def lambda_structure_image(ctx, variables, caps):
    """The image of T under the canonical map into the tensor ring:
    prod_i (1 + T_i) - 1, so arithmetic weights add."""
    out = IwasawaSeries.constant(ctx, variables, caps, ctx(1))
    for name in variables:
        t = IwasawaSeries.var(ctx, variables, caps, name)
        out = out * (t + IwasawaSeries.constant(ctx, variables, caps, ctx(1)))
    return out - IwasawaSeries.constant(ctx, variables, caps, ctx(1))


# -- formal group rings ------------------------------------------------------

class GroupRing:
    """Group-ring context over a free pro-p group of fixed rank.

    Coordinates are taken against fixed one-unit generators (default rank 2:
    1+p and 1+p*delta, the generators of the image of the local units) and
    stored as canonical ints with two guard digits above the value precision.
    Products add coordinates exactly; specialization exponentiates exactly.
    """

    def __init__(self, ctx, rank=2, generators=None, coord_prec=None):
        self.ctx = ctx
        self.rank = rank
        self.coord_prec = coord_prec if coord_prec is not None else ctx.N + 2
        wp = self.coord_prec + 2
        self.work = Zp2(ctx.p, wp)
        if generators is None:
            p = ctx.p
            if rank == 1:
                generators = [self.work(1 + p)]
            elif rank == 2:
                generators = [self.work(1 + p), self.work(1, p)]
            else:
                raise DomainError("default generators exist for rank 1 and 2 only")
        self.generators = [g.lift_unreduced(wp) if g.prec < wp else g.with_prec(wp)
                           for g in generators]
        self.gen_logs = [plog(g) for g in self.generators]

    def zero(self):
        return GroupRingElem(self, {})

    def group_like(self, coords, scalar=None):
        """scalar * [u] for u with the given generator coordinates."""
        coords = self._canon(coords)
        return GroupRingElem(self, {coords: scalar if scalar is not None
                                    else self.ctx(1)})

    def _canon(self, coords):
        m = self.ctx.p ** self.coord_prec
        coords = tuple(int(c) % m for c in coords)
        if len(coords) != self.rank:
            raise DomainError(f"need {self.rank} coordinates, got {len(coords)}")
        return coords

    def coords_of(self, u):
        """Solve [u] = prod gen_i^(c_i) through the logarithm lattice.

        u must carry at least coord_prec + 1 digits; the divisions by the
        valuation-1 generator logs cost one digit.
        """
        if u.prec < self.coord_prec + 1:
            raise PrecisionLoss(
                f"need {self.coord_prec + 1} digits to take coordinates, "
                f"got {u.prec}")
        x = plog(u)
        if self.rank == 1:
            lg = self.gen_logs[0]
            v = lg.valuation()
            c = x.divexact_p(v) * lg.divexact_p(v).inverse()
            if not c.is_rational():
                raise DomainError(f"{u} is not on the rank-1 line")
            return (c.c0,)
        if self.rank == 2:
            l1, l2 = self.gen_logs
            if not l1.is_rational() or l1.valuation() != 1 or _vp(l2.c1, self.ctx.p) != 1:
                raise DomainError("coordinate solving needs the standard generators")
            b = l2._like(l2.c1, 0, l2.prec)
            a = l2._like(l2.c0, 0, l2.prec)
            y = x._like(x.c1, 0, x.prec)
            xr = x._like(x.c0, 0, x.prec)
            c2 = y.divexact_p(1) * b.divexact_p(1).inverse()
            c1 = (xr - c2 * a).divexact_p(1) * l1.divexact_p(1).inverse()
            return (c1.c0, c2.c0)
        raise DomainError("coordinates implemented for rank 1 and 2")

    def unit_from_coords(self, coords):
        """prod gen_i^(c_i) at working precision."""
        acc = self.work(0)
        for c, lg in zip(self._canon(coords), self.gen_logs):
            acc = acc + lg * c
        return pexp(acc)

    def specialize(self, elem, w):
        """sum c_u eps(u) u^k, exact: [u] -> pexp(k log u) up to the guard digits."""
        if elem.ring is not self:
            raise DomainError("element belongs to a different group ring")
        if not w.is_trivial_eps():
            return self._specialize_twisted(elem, w)
        acc = self.ctx(0)
        for coords, c in elem.items.items():
            t = self.work(0)
            for ci, lg in zip(coords, self.gen_logs):
                t = t + lg * (w.k * ci)
            acc = acc + c * pexp(t).with_prec(self.ctx.N)
        return acc

    def _specialize_twisted(self, elem, w):
        r = w.eps_r
        exps = w.eps_exps
        if len(exps) != self.rank:
            raise DomainError(f"need {self.rank} eps exponents, got {len(exps)}")
        pr = self.ctx.p ** r
        acc = PadicCyc.from_scalar(self.ctx(0), r)
        for coords, c in elem.items.items():
            t = self.work(0)
            e = 0
            for ci, lg, ei in zip(coords, self.gen_logs, exps):
                t = t + lg * (w.k * ci)
                e = (e + ei * ci) % pr
            val = c * pexp(t).with_prec(self.ctx.N)
            acc = acc + PadicCyc.zeta_power(self.ctx, e, r).scale(val)
        return acc

    def specialize_map(self, elem, gen_values):
        """sum c_u prod v_i^(c_i) for arbitrary one-unit targets gen_values.

        Values flow at their own precision; the result must still certify
        the context precision, else PrecisionLoss surfaces here.
        """
        logs = [plog(v) for v in gen_values]
        acc = self.ctx(0)
        for coords, c in elem.items.items():
            t = self.work(0)
            for ci, lg in zip(coords, logs):
                t = t + lg * ci
            acc = acc + c * pexp(t).with_prec(self.ctx.N)
        return acc


class GroupRingElem:
    """Finite formal sum of group-likes c * [coords], coordinates exact."""

    __slots__ = ("ring", "items")

    def __init__(self, ring, items):
        self.ring = ring
        self.items = {}
        for coords, c in items.items():
            if not c.is_zero():
                self.items[tuple(coords)] = c

    def _check(self, other):
        if not isinstance(other, GroupRingElem) or other.ring is not self.ring:
            raise TypeError("incompatible group-ring operands")

    def __add__(self, other):
        self._check(other)
        out = dict(self.items)
        for k, c in other.items.items():
            out[k] = out[k] + c if k in out else c
        return GroupRingElem(self.ring, out)

    def __neg__(self):
        return GroupRingElem(self.ring, {k: -c for k, c in self.items.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (PadicElem, int)):
            return GroupRingElem(self.ring,
                                 {k: c * other for k, c in self.items.items()})
        self._check(other)
        m = self.ring.ctx.p ** self.ring.coord_prec
        out = {}
        for k1, c1 in self.items.items():
            for k2, c2 in other.items.items():
                k = tuple((a + b) % m for a, b in zip(k1, k2))
                prod = c1 * c2
                out[k] = out[k] + prod if k in out else prod
        return GroupRingElem(self.ring, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (isinstance(other, GroupRingElem) and other.ring is self.ring
                and other.items == self.items)

    def is_zero(self):
        return not self.items

    def support_size(self):
        return len(self.items)

    def __repr__(self):
        return f"GroupRingElem({len(self.items)} group-likes)"
