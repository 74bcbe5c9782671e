"""Unbalanced restriction machinery for products of two families.

The central object is a three-leg weight space: a formal product of three
one-unit lines, one per factor of the would-be triple.  A twist character
distributes half of the cyclotomic direction over the legs with signs
(+, -, -), so that twisting the third family and multiplying by the second
yields an element whose specializations at unbalanced classical points
(k, 1, 1) match the classical depleted products with m = (k - 2)/2 extra
derivatives.  Downstream of the product sit the test-vector stretch, the
eigen-coordinate extraction against an ingested ordinary basis, and the
one-variable restrictions of the assembled value along declared lines.

Everything is exact: group-ring coordinates are canonical integers, the
solves run over Z/p^N with unit pivots, and the one-variable fits use
divided differences whose divisions either come out exact or raise.
"""

from fractions import Fraction

from .errors import (CapExhausted, CapMismatch, DomainError, EigenAmbiguous,
                     InconsistencyFound, InsufficientSamples, PrecisionLoss,
                     RankDeficient)
from .hecke import QExpansion, family_product
from .padic import (PadicElem, Zp2, angle, binom_int, pexp, plog, sqrt_1unit,
                    teichmuller)
from .series import GroupRing, IwasawaSeries, Weight
from . import euler


# -- the three-leg weight space ----------------------------------------------

def triple_ring(ctx):
    """Three independent one-unit legs, each generated by 1 + p.

    Products add coordinates legwise; specializing an element with per-leg
    targets (1+p)^(k_i) realizes the point of weight (k_1, k_2, k_3).
    """
    return GroupRing(ctx, rank=3, generators=[ctx(1 + ctx.p)] * 3)


def unit_exponent(ring, n):
    """The exponent e with <n> = (1+p)^e, as a canonical coordinate residue.

    n must be prime to p.  The quotient of logarithms lands on the Z_p line
    by construction; a non-rational result would mean the one-unit part of
    an integer escaped Z_p, so it is surfaced loudly instead of coerced.
    """
    w = ring.work
    n = int(n)
    if n < 1 or n % w.p == 0:
        raise DomainError(f"need a positive integer prime to {w.p}, got {n}")
    num = plog(angle(w(n))).divexact_p(1)
    den = plog(w(1 + w.p)).divexact_p(1)
    c = num * den.inverse()
    if not c.is_rational():
        raise DomainError(f"<{n}> is not on the one-unit line")
    return c.c0 % (w.p ** ring.coord_prec)


def leg_targets(ring, weights):
    """(1+p)^(k_i) at working precision, one target per leg."""
    if len(weights) != ring.rank:
        raise DomainError(f"need {ring.rank} leg weights, got {len(weights)}")
    base = ring.work(1 + ring.work.p)
    return [base ** int(k) for k in weights]


def specialize_coefficients(xi, ring, weights):
    """Map a ring-coefficient expansion to scalars at per-leg weights."""
    vals = leg_targets(ring, weights)
    out = [ring.specialize_map(c, vals) for c in xi.coeffs]
    return QExpansion(out, xi.level, char=None, weight=None,
                      zero=ring.ctx(0))


# -- the twist character -----------------------------------------------------

class TwistChar:
    """Three-leg character splitting the square root of the weight twist.

    Theta(n), defined for n prime to p, is omega^(-a-1)(n) times the
    group-like with exponent e/2 spread over the legs with the configured
    signs, where <n> = (1+p)^e.  The integer a is the self-duality
    exponent of the tame characters; multiplicativity is exact because
    exponents add and the Teichmuller part is itself a character.
    """

    __slots__ = ("ring", "a", "half_signs")

    def __init__(self, ring, a, half_signs=(1, -1, -1)):
        if len(half_signs) != ring.rank:
            raise DomainError(
                f"need {ring.rank} half signs, got {len(half_signs)}")
        self.ring = ring
        self.a = int(a)
        self.half_signs = tuple(int(s) for s in half_signs)

    @classmethod
    def trivial(cls, ring):
        """Tame part identically one and no half twist.

        Twisting by this drops exactly the p-divisible coefficients, the
        depletion operator in disguise.
        """
        return cls(ring, -1, (0,) * ring.rank)

    def value(self, n):
        """Theta(n) as a ring element; n must be prime to p."""
        ctx = self.ring.ctx
        n = int(n)
        if n < 1 or n % ctx.p == 0:
            raise DomainError(f"Theta is defined away from p, got {n}")
        tame = teichmuller(ctx(n)) ** (-(self.a + 1))
        m = ctx.p ** self.ring.coord_prec
        half = unit_exponent(self.ring, n) * pow(2, -1, m) % m
        coords = tuple(s * half % m for s in self.half_signs)
        return self.ring.group_like(coords, tame)

    def specialized_value(self, n, weights):
        """The scalar Theta(n) becomes at per-leg weights.

        omega^(-a-1)(n) <n>^(sum_i s_i k_i / 2); the half exponent has to
        come out integral, otherwise the point is not on the sampled grid.
        """
        ctx = self.ring.ctx
        n = int(n)
        if n < 1 or n % ctx.p == 0:
            raise DomainError(f"Theta is defined away from p, got {n}")
        twice = sum(s * int(k) for s, k in zip(self.half_signs, weights))
        if twice % 2:
            raise DomainError(
                f"half exponent {twice}/2 is not integral at {tuple(weights)}")
        tame = teichmuller(ctx(n)) ** (-(self.a + 1))
        return tame * angle(ctx(n)) ** (twice // 2)


def theta_twist(xi, theta):
    """xi with p-divisible coefficients dropped, the rest scaled by Theta(n)."""
    ring = theta.ring
    p = ring.ctx.p
    out = [xi.coeffs[n] * theta.value(n) if n % p else ring.zero()
           for n in range(xi.Q + 1)]
    return QExpansion(out, xi.level, char=xi.char, weight=xi.weight,
                      zero=ring.zero())


def twist_classical(xi, ctx, a, m):
    """Scalar route to the specialized twist: deplete, then apply the tame
    character omega^(-a-1-m) and m Serre derivatives coefficient-wise.

    Equals specializing the ring-level twist because n^m splits off its
    Teichmuller part exactly.
    """
    out = []
    for n in range(xi.Q + 1):
        if n % ctx.p == 0:
            out.append(xi.zero)
            continue
        t = teichmuller(ctx(n)) ** (-(a + 1 + m))
        out.append(xi.coeffs[n] * t * ctx(n) ** m)
    return xi.replace(coeffs=out)


def build_xi(g, h, theta, out_cap=None):
    """g times the Theta-twist of h, on the shared cap.

    The two families must be built to the same cap; a mismatch here is a
    configuration bug, not something to paper over with truncation.
    """
    if g.Q != h.Q:
        raise CapMismatch(f"family caps differ: {g.Q} vs {h.Q}")
    return family_product(g, theta_twist(h, theta), out_cap=out_cap)


def test_vector(xi, stretch, out_cap=None):
    """The stretched expansion b with b_(stretch * n) = a_n, zero elsewhere.

    Every index up to stretch * Q + stretch - 1 is known (mapped or a
    structural zero), so that is the largest honest cap; asking past it
    raises CapExhausted.  The declared level picks up the stretch factor.
    """
    stretch = int(stretch)
    if stretch < 1:
        raise DomainError(f"stretch must be >= 1, got {stretch}")
    hi = stretch * xi.Q + stretch - 1
    cap = stretch * xi.Q if out_cap is None else out_cap
    if cap > hi:
        raise CapExhausted(f"cap {cap} exceeds the known range {hi}")
    out = [xi.zero] * (cap + 1)
    for n in range(xi.Q + 1):
        if stretch * n > cap:
            break
        out[stretch * n] = xi.coeffs[n]
    return QExpansion(out, xi.level * stretch, char=None, weight=xi.weight,
                      zero=xi.zero)


# -- projection targets and bases ---------------------------------------------

def _scalar_eq(a, b):
    if isinstance(a, PadicElem) and isinstance(b, PadicElem):
        return a.same_mod(b)
    if isinstance(a, PadicElem):
        return a.same_mod(a._like(int(b), 0))
    if isinstance(b, PadicElem):
        return b.same_mod(b._like(int(a), 0))
    return a == b


def _is_pm_one(a):
    try:
        return _scalar_eq(a, 1) or _scalar_eq(a, -1)
    except (TypeError, ValueError):
        return False


class EigenData:
    """Declared eigen-structure of a projection target.

    Everything here is ingested bookkeeping: the tame level N_f, the
    p-depth s of the level N_f p^s, the weight, the separating eigenvalue
    list, the U_p eigenvalue, the congruence scalar eta_f, the p-new flag,
    and the depth t actually used by the test vector (recorded, with no
    minimality claim; defaults to the smallest admissible lift).
    """

    __slots__ = ("label", "level_tame", "s", "weight", "eigen", "a_p",
                 "eta_f", "lambda_N", "p_new", "lambda_E", "t")

    def __init__(self, label, level_tame, s, weight, eigen, a_p, eta_f,
                 lambda_N=None, p_new=False, lambda_E=None, t=None):
        if level_tame < 1 or s < 0:
            raise DomainError(f"bad level data ({level_tame}, {s})")
        if weight < 1:
            raise DomainError(f"bad weight {weight}")
        if p_new and weight == 2 and not _is_pm_one(a_p):
            raise DomainError(
                "a weight-two p-new target must have a_p in {1, -1}, "
                f"got {a_p}")
        self.label = label
        self.level_tame = int(level_tame)
        self.s = int(s)
        self.weight = int(weight)
        self.eigen = dict(eigen)
        self.a_p = a_p
        self.eta_f = eta_f
        self.lambda_N = lambda_N
        self.p_new = bool(p_new)
        self.lambda_E = lambda_E
        self.t = int(t) if t is not None else (self.s if p_new else 1)
        if self.t < (self.s if p_new else 1):
            raise DomainError(f"depth t = {self.t} below the admissible floor")


def _prime_divisors(n):
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


def gamma0_index(n_small, n_big):
    """[Gamma_0(n_small) : Gamma_0(n_big)] for n_small | n_big.

    (n_big / n_small) * prod (1 + 1/ell) over primes ell | n_big that do
    not divide n_small; always an integer.
    """
    if n_small < 1 or n_big % n_small:
        raise DomainError(f"{n_small} does not divide {n_big}")
    idx = Fraction(n_big, n_small)
    for ell in _prime_divisors(n_big):
        if n_small % ell:
            idx *= Fraction(ell + 1, ell)
    return int(idx)


class OrdinaryBasis:
    """Spanning expansions for one (level, weight) slot, with a full-rank
    row set located at construction.

    eigen carries the declared metadata per element (a dict of prime ->
    eigenvalue, plus optionally "a_p", or None for completion elements
    that are not eigenlines).  The row search walks q-indices from 1 and
    keeps those that extend the rank over the residue field; not reaching
    full rank within the cap is a RankDeficient basis, full stop.
    """

    __slots__ = ("elements", "eigen", "level", "weight", "pivots")

    def __init__(self, elements, eigen=None, level=None, weight=None):
        if not elements:
            raise DomainError("empty basis")
        self.elements = tuple(elements)
        self.eigen = (tuple(eigen) if eigen is not None
                      else (None,) * len(elements))
        if len(self.eigen) != len(self.elements):
            raise DomainError("eigen metadata length does not match the basis")
        self.level = level if level is not None else elements[0].level
        self.weight = weight if weight is not None else elements[0].weight
        self.pivots = self._find_pivots()

    @property
    def dim(self):
        return len(self.elements)

    @property
    def cap(self):
        return min(e.Q for e in self.elements)

    def _find_pivots(self):
        dim = self.dim
        rows = []
        reduced = []
        used_cols = []
        for n in range(1, self.cap + 1):
            vec = [e.coeffs[n] for e in self.elements]
            for r, col in zip(reduced, used_cols):
                factor = vec[col]
                vec = [a - factor * b for a, b in zip(vec, r)]
            pivot_col = next((j for j in range(dim)
                              if j not in used_cols and vec[j].is_unit()),
                             None)
            if pivot_col is None:
                continue
            inv = vec[pivot_col].inverse()
            reduced.append([a * inv for a in vec])
            used_cols.append(pivot_col)
            rows.append(n)
            if len(rows) == dim:
                return tuple(rows)
        raise RankDeficient(
            f"rank {len(rows)} out of {dim} within the cap {self.cap}")

    def matrix_at_pivots(self):
        return [[e.coeffs[n] for e in self.elements] for n in self.pivots]


def solve_unit_system(M, rhs):
    """Solve M c = rhs by elimination over the scalar ring.

    M must be invertible mod p (the pivot search above guarantees that on
    the located rows), so a unit pivot exists in every column at every
    step.
    """
    n = len(M)
    aug = [list(row) + [b] for row, b in zip(M, rhs)]
    for j in range(n):
        pivot = next((i for i in range(j, n) if aug[i][j].is_unit()), None)
        if pivot is None:
            raise RankDeficient(f"no unit pivot in column {j}")
        aug[j], aug[pivot] = aug[pivot], aug[j]
        inv = aug[j][j].inverse()
        aug[j] = [a * inv for a in aug[j]]
        for i in range(n):
            if i != j:
                f = aug[i][j]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[j])]
    return [aug[i][n] for i in range(n)]


def _matches_target(meta, target):
    if meta is None:
        return False
    shared = [ell for ell in target.eigen if ell in meta]
    if not shared:
        return False
    if not all(_scalar_eq(meta[ell], target.eigen[ell]) for ell in shared):
        return False
    if "a_p" in meta and target.a_p is not None:
        return _scalar_eq(meta["a_p"], target.a_p)
    return True


def embed_scalar(like, x):
    """A Fraction or int as a scalar in the context of an existing element.

    The denominator must be a p-unit for the embedding to mean anything.
    """
    if isinstance(x, PadicElem):
        return x
    fr = Fraction(x)
    if fr.denominator % like.p == 0:
        raise DomainError(f"{fr} has p in the denominator")
    num = like._like(fr.numerator, 0)
    if fr.denominator == 1:
        return num
    return num * like._like(fr.denominator, 0).inverse()


def eigen_project(xi, target, basis, constants=True):
    """Coordinate of xi along the target's line in the basis, scaled by
    the ingested eta_f and the index and p-depth constants.

    The solve runs on the full-rank rows found at load; the resulting
    combination is then replayed against every coefficient up to the joint
    cap, so an input outside the span raises RankDeficient rather than
    silently projecting.  The target is located through its declared
    eigenvalues; zero or several matches raise EigenAmbiguous.  The
    returned coordinate is taken against the q^1-normalized form on the
    matched line.
    """
    hits = [i for i, meta in enumerate(basis.eigen)
            if _matches_target(meta, target)]
    if len(hits) != 1:
        raise EigenAmbiguous(
            f"target {target.label!r} matches {len(hits)} basis lines")
    idx = hits[0]
    cap = min(xi.Q, basis.cap)
    if cap < basis.pivots[-1]:
        raise CapExhausted(
            f"input cap {xi.Q} does not reach the pivot row {basis.pivots[-1]}")
    coords = solve_unit_system(basis.matrix_at_pivots(),
                               [xi.coeffs[n] for n in basis.pivots])
    combo = basis.elements[0].scale(coords[0])
    for c, e in zip(coords[1:], basis.elements[1:]):
        combo = combo + e.scale(c)
    for n in range(cap + 1):
        if not _scalar_eq(combo.coeffs[n], xi.coeffs[n]):
            raise RankDeficient(
                f"the basis cannot represent the input (first defect at q^{n})")
    coord = coords[idx] * basis.elements[idx].coeffs[1]
    if not constants:
        return coord
    return finish_projection(coord, target, basis)


def finish_projection(coord, target, basis):
    """Apply eta_f, the level index, and the p-depth factor to a raw
    coordinate.

    The index compares the target's tame level with the tame part of the
    basis level.  The depth factor is (p^weight / a_p)^(t - floor) with
    the floor set by the case, s for p-new and 1 for p-stabilized; at the
    recorded minimal depth the factor is one and nothing moves.
    """
    p = coord.p
    value = coord * embed_scalar(coord, target.eta_f)
    tame = basis.level
    while tame % p == 0:
        tame //= p
    value = value * coord._like(gamma0_index(target.level_tame, tame), 0)
    d = target.t - (target.s if target.p_new else 1)
    if d:
        ap = embed_scalar(coord, target.a_p)
        value = (value * coord._like(p, 0) ** (target.weight * d)
                 * ap.inverse() ** d)
    return value


# -- assembled line restrictions ----------------------------------------------

class LpConfig:
    """Everything one line evaluation needs.

    ring and theta fix the weight space and the twist; g and h are the two
    family expansions with ring coefficients; target_for and basis_for map
    a sampled weight to the ingested projection data; a_p_profile feeds the
    local multiplier, with conductor exponents n_phi and n_psi (None skips
    that factor entirely); fudge holds per-prime one-unit scalars applied
    through inverse square roots; cap and arc_depth control the fit, and
    out_prec is the precision the fitted coefficients are certified at.
    lambda_assembled optionally carries a materialized ring element for
    the anticyclotomic direction.
    """

    __slots__ = ("ring", "theta", "g", "h", "target_for", "basis_for",
                 "a_p_profile", "n_phi", "n_psi", "fudge", "cap",
                 "arc_depth", "out_prec", "max_weight", "lambda_assembled",
                 "label")

    def __init__(self, ring, theta, g, h, target_for, basis_for,
                 a_p_profile, n_phi=0, n_psi=None, fudge=None, cap=4,
                 arc_depth=0, out_prec=None, max_weight=200,
                 lambda_assembled=None, label=""):
        self.ring = ring
        self.theta = theta
        self.g = g
        self.h = h
        self.target_for = target_for
        self.basis_for = basis_for
        self.a_p_profile = a_p_profile
        self.n_phi = n_phi
        self.n_psi = n_psi
        self.fudge = dict(fudge or {})
        for ell, f in self.fudge.items():
            if not isinstance(f, PadicElem) or (f - 1).valuation() < 1:
                raise DomainError(
                    f"fudge factor at {ell} must be a principal unit, got {f}")
        self.cap = int(cap)
        self.arc_depth = int(arc_depth)
        self.out_prec = (out_prec if out_prec is not None
                         else max(1, ring.ctx.N - self.cap - 2))
        self.max_weight = int(max_weight)
        self.lambda_assembled = lambda_assembled
        self.label = label


def pipeline_value(config, k, xi=None):
    """The assembled value at the lift (k, 1, 1).

    Builds the product, specializes it, extracts the target coordinate,
    and multiplies by the local multipliers and the fudge normalization.
    The local factors come from the same module the direct case table
    lives in, so a vanishing multiplier there is a vanishing value here.
    Passing a prebuilt xi skips the product, which is weight-independent.
    """
    k = int(k)
    if k < 2 or k % 2:
        raise DomainError(f"the sampled line needs even k >= 2, got {k}")
    ctx = config.ring.ctx
    target = config.target_for(k)
    basis = config.basis_for(k)
    if xi is None:
        xi = build_xi(config.g, config.h, config.theta)
    xi_w = specialize_coefficients(xi, config.ring, (k, 1, 1))
    value = eigen_project(xi_w, target, basis)
    a_p = config.a_p_profile(k)
    for n_cond in (config.n_phi, config.n_psi):
        if n_cond is None:
            continue
        mult = euler.anticyc_multiplier(k, a_p, n_cond, p=ctx.p,
                                        p_new=target.p_new)
        value = value * embed_scalar(value, mult)
    for f in config.fudge.values():
        value = value * sqrt_1unit(f).inverse()
    return value


def fit_series(ctx_out, nodes, values, cap, var="T"):
    """Exact Newton interpolation through (nodes[i], values[i]).

    Divided differences divide by node gaps whose p-valuations eat
    precision; a division that fails to be exact means the samples do not
    lie on any series of this degree and raises PrecisionLoss.  The
    returned coefficients are certified at ctx_out precision, and the
    certification is checked, not assumed.
    """
    if len(nodes) != len(values) or len(nodes) != cap + 1:
        raise InsufficientSamples(
            f"degree cap {cap} needs {cap + 1} samples, got {len(values)}")
    dd = list(values)
    for lvl in range(1, len(nodes)):
        for i in range(len(nodes) - 1, lvl - 1, -1):
            num = dd[i] - dd[i - 1]
            den = nodes[i] - nodes[i - lvl]
            if den.is_zero():
                raise InconsistencyFound((i, lvl), "coincident sample nodes")
            v = den.valuation()
            try:
                dd[i] = num.divexact_p(v) * den.divexact_p(v).inverse()
            except DomainError as exc:
                raise PrecisionLoss(
                    f"samples are not on a degree-{cap} series: {exc}")
    zero_w = nodes[0] - nodes[0]
    poly = [dd[-1]]
    for i in range(len(nodes) - 2, -1, -1):
        new = [zero_w] * (len(poly) + 1)
        for j, c in enumerate(poly):
            new[j + 1] = new[j + 1] + c
            new[j] = new[j] - c * nodes[i]
        new[0] = new[0] + dd[i]
        poly = new
    for j, c in enumerate(poly):
        if c.prec < ctx_out.N:
            raise PrecisionLoss(
                f"coefficient of degree {j} certifies only {c.prec} digits, "
                f"need {ctx_out.N}")
    coeffs = {(j,): ctx_out(c.c0, c.c1) for j, c in enumerate(poly)}
    return IwasawaSeries(ctx_out, (var,), (cap,), coeffs, truncated=True)


class LineReport:
    """A fitted one-variable restriction with its provenance: the sampled
    weights, the raw values, and the arc congruence depth."""

    __slots__ = ("series", "samples", "values", "line", "arc_depth")

    def __init__(self, series, samples, values, line, arc_depth):
        self.series = series
        self.samples = tuple(samples)
        self.values = tuple(values)
        self.line = line
        self.arc_depth = arc_depth


def lp_restrict_line(config, line):
    """One-variable restriction of the assembled pipeline along a line.

    line "k11" samples k = 2 + (p-1) p^m j for j = 0..cap (m the arc
    depth) and fits the T-series through the exact values; the report
    records the sample set.  line "2nunu" is the anticyclotomic direction
    at k = 2 and requires the materialized ring element on the config,
    since no classical weights sit on that line beyond the corner.
    """
    ctx = config.ring.ctx
    p = ctx.p
    if line == "2nunu":
        if config.lambda_assembled is None:
            raise DomainError(
                "the anticyclotomic line needs a materialized ring element")
        series = anticyclotomic_restrict(config.ring,
                                         config.lambda_assembled,
                                         config.cap, config.out_prec)
        return LineReport(series, (), (), line, config.arc_depth)
    if line != "k11":
        raise DomainError(f"unknown line {line!r}")
    step = (p - 1) * p ** config.arc_depth
    samples = [2 + step * j for j in range(config.cap + 1)]
    if samples[-1] > config.max_weight:
        have = sum(1 for k in samples if k <= config.max_weight)
        raise InsufficientSamples(
            f"cap {config.cap} needs {config.cap + 1} samples but only "
            f"{have} weights fit under {config.max_weight}")
    xi = build_xi(config.g, config.h, config.theta)
    values = [pipeline_value(config, k, xi=xi) for k in samples]
    one_plus_p = config.ring.work(1 + p)
    nodes = [one_plus_p ** k - 1 for k in samples]
    out_ctx = Zp2(p, config.out_prec)
    series = fit_series(out_ctx, nodes, values, config.cap)
    _certify_fit(series, samples, values, out_ctx)
    return LineReport(series, samples, values, line, config.arc_depth)


def _certify_fit(series, samples, values, out_ctx):
    """Replay the fitted series at every sample; a mismatch can only be an
    implementation fault, so it surfaces as an inconsistency."""
    for k, v in zip(samples, values):
        got = series.specialize(Weight(k))
        if not got.same_mod(v, min(got.prec, v.prec, out_ctx.N)):
            raise InconsistencyFound((k,), "fit does not reproduce its sample")


def anticyclotomic_restrict(ring, elem, cap, out_prec):
    """The k = 2 anticyclotomic direction of a materialized element.

    Legs two and three are re-expressed through half sum and half
    difference, then evaluated on the diagonal where the two induced
    characters coincide; leg one is specialized at weight two.  On a
    group-like [c1, c2, c3] the net effect is the scalar (1+p)^(2 c1)
    times (1+S)^(c2), expanded to the declared cap through exact integer
    binomials.
    """
    if elem.ring is not ring:
        raise DomainError("element belongs to a different ring")
    if ring.rank != 3:
        raise DomainError("the anticyclotomic direction needs three legs")
    work = ring.work
    ctx = ring.ctx
    p = ctx.p
    m = p ** ring.coord_prec
    inv2 = pow(2, -1, m)
    out_ctx = Zp2(p, out_prec)
    acc = [None] * (cap + 1)
    log_gamma = plog(work(1 + p))
    for coords, c in elem.items.items():
        c1, c2, c3 = coords
        s_nu = (c2 + c3) * inv2 % m
        s_mu = (c2 - c3) * inv2 % m
        diag = (s_nu + s_mu) % m
        scalar = c * pexp(log_gamma * (2 * c1))
        carrier = work(diag)
        for j in range(cap + 1):
            term = scalar * binom_int(carrier, j)
            acc[j] = term if acc[j] is None else acc[j] + term
    coeffs = {}
    for j, c in enumerate(acc):
        if c is None:
            c = ctx(0)
        if c.prec < out_prec:
            raise PrecisionLoss(
                f"binomial column {j} certifies only {c.prec} digits")
        coeffs[(j,)] = out_ctx(c.c0, c.c1)
    return IwasawaSeries(out_ctx, ("S",), (cap,), coeffs, truncated=True)
