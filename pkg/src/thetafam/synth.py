"""Deterministic synthetic fixtures with prescribed Hecke structure.

Nothing here is computed from arithmetic geometry: eigenvalue streams, span
matrices and family coefficients are all chosen, which is the point.  The
projection and restriction machinery downstream is supposed to work on
controlled inputs whose answers are known in advance, and every builder in
this module reproduces bit for bit from a string label, so fixtures written
to disk and fixtures rebuilt in tests cannot drift apart.
"""

import random
from fractions import Fraction

from .errors import DomainError
from .hecke import DiamondAction, OrdinarySpan, QExpansion, hecke_V_p
from .padic import PadicElem, Zp2
from .triple import (EigenData, LpConfig, OrdinaryBasis, TwistChar, build_xi,
                     specialize_coefficients, triple_ring, unit_exponent)


def smallest_factor_sieve(bound):
    """spf[n] = smallest prime factor of n, for 0 <= n <= bound."""
    spf = list(range(bound + 1))
    n = 2
    while n * n <= bound:
        if spf[n] == n:
            for m in range(n * n, bound + 1, n):
                if spf[m] == m:
                    spf[m] = n
        n += 1
    return spf


def eigen_coefficients(Q, p, a_ell, a_p, diamond, one):
    """Coefficient stream a_0 .. a_Q of a normalized eigenform.

    a_ell(ell) supplies the T_ell eigenvalue away from p, a_p the U_p
    eigenvalue, and diamond(ell) the second Hecke term factor (None when
    ell divides the level).  Prime powers follow

        a_{ell^(r+1)} = a_ell a_{ell^r} - diamond(ell) a_{ell^(r-1)},

    collapsing to a_{ell^r} = a_ell^r when the diamond factor is absent,
    and a_{p^r} = a_p^r always; coprime indices multiply.
    """
    zero = one - one
    spf = smallest_factor_sieve(max(Q, 2))
    tables = {}

    def prime_power(ell, r):
        tab = tables.get(ell)
        if tab is None:
            tab = [one, a_p if ell == p else a_ell(ell)]
            tables[ell] = tab
        while len(tab) <= r:
            if ell == p:
                tab.append(tab[-1] * tab[1])
            else:
                nxt = tab[1] * tab[-1]
                fac = diamond(ell)
                if fac is not None:
                    nxt = nxt - fac * tab[-2]
                tab.append(nxt)
        return tab[r]

    coeffs = [zero, one]
    for n in range(2, Q + 1):
        m, acc = n, one
        while m > 1:
            ell = spf[m]
            r = 0
            while m % ell == 0:
                m //= ell
                r += 1
            acc = acc * prime_power(ell, r)
        coeffs.append(acc)
    return coeffs


def unit_stream(ctx, label):
    """Deterministic rational p-adic units keyed by a string label.

    Seeding Random with a string hashes its bytes, not id(), so the stream
    is stable across runs and platforms.
    """
    rng = random.Random(f"units:{label}")
    span = ctx.p ** (ctx.N - 1)

    def draw():
        return ctx(rng.randrange(1, ctx.p) + ctx.p * rng.randrange(span))

    return draw


def synthetic_eigenform(ctx, label, k, Q, level=1, eigen=None, a_p=None,
                        char=None):
    """Weight-k eigenform fixture with declared small-prime eigenvalues.

    Primes up to Q missing from eigen get unit eigenvalues from the label
    stream, so rebuilding the same label reproduces the same expansion.
    char(d) supplies the nebentypus value on d prime to the level (trivial
    when omitted); the stored diamond factor is char(d) d^(k-1).  Returns
    the expansion together with the metadata a loader would cross-check:
    the eigenvalues actually used at the primes up to 13 and the U_p
    eigenvalue.
    """
    if a_p is None:
        a_p = ctx(0)
    declared = dict(eigen or {})
    draw = unit_stream(ctx, label)
    used = {}

    def a_ell(ell):
        if ell not in used:
            used[ell] = declared[ell] if ell in declared else draw()
        return used[ell]

    if char is None:
        char = lambda d: ctx(1)
    diamond = DiamondAction(level, lambda d: char(d) * ctx(d) ** (k - 1),
                            p=ctx.p)
    coeffs = eigen_coefficients(Q, ctx.p, a_ell, a_p, diamond.factor, ctx(1))
    xi = QExpansion(coeffs, level, char=diamond, weight=k, zero=ctx(0))
    meta = {ell: a_ell(ell) for ell in (2, 3, 5, 7, 11, 13) if ell != ctx.p}
    meta["a_p"] = a_p
    return xi, meta


# -- ordinary spans with prescribed U_p matrices -------------------------------

def _p_part_exponent(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _slope_stream(ctx, lam, Q, level):
    zero = ctx(0)
    coeffs = [zero]
    for n in range(1, Q + 1):
        v = _p_part_exponent(n, ctx.p)
        coeffs.append(ctx(1) if v == 0 else lam ** v)
    return QExpansion(coeffs, level, weight=2, zero=zero)


def ordinary_span_shear(ctx, alpha, Q, level=1):
    """U_p-stable span with matrix [[alpha, 1], [0, 0]] on (f1, V_p f1).

    f1 has a_n = alpha^(v_p(n)), a U_p eigenvector; its V_p image maps
    back to f1, giving the nilpotent shear block.  The ordinary projector
    here is [[1, 1/alpha], [0, 0]], which tests recompute independently as
    the projection onto the eigenline along ker U_p.
    """
    f1 = _slope_stream(ctx, alpha, Q, level)
    f2 = hecke_V_p(f1, ctx.p).truncate(Q)
    matrix = ((alpha, ctx(1)), (ctx(0), ctx(0)))
    return OrdinarySpan([f1, f2], matrix, ctx.p)


def ordinary_span_diag(ctx, u1, u2, Q, level=1):
    """Span with U_p acting as diag(u1, p u2): a unit eigenline next to a
    slope-one line.

    The certified projector keeps the first coordinate and kills the
    second, provided u1^(n!) lands exactly on 1 within the default rounds;
    pass torsion units (Teichmuller roots, +-1) when that matters, since a
    generic one-unit only stabilizes in the limit and raises instead.
    """
    f1 = _slope_stream(ctx, u1, Q, level)
    f2 = _slope_stream(ctx, ctx(ctx.p) * u2, Q, level)
    matrix = ((u1, ctx(0)), (ctx(0), ctx(ctx.p) * u2))
    return OrdinarySpan([f1, f2], matrix, ctx.p)


# -- families supported on one tensor leg --------------------------------------

def leg_coords(ring, leg, e):
    coords = [0] * ring.rank
    coords[leg] = e
    return tuple(coords)


def leg_family(ring, leg, label, Q, level=1):
    """Family q-expansion supported on one tensor leg.

    a_n = s_n [<n> on the leg] with unit scalars s_n from the label stream;
    coefficients at p-divisible n are plain scalars with no group part,
    mirroring how a family's U_p direction carries no diamond twist.
    Specializing the leg at weight k therefore gives a_n(k) = s_n <n>^k.
    """
    ctx = ring.ctx
    if not 0 <= leg < ring.rank:
        raise DomainError(f"leg must be in 0..{ring.rank - 1}, got {leg}")
    draw = unit_stream(ctx, f"leg{leg}:{label}")
    coeffs = [ring.zero(), ring.group_like((0,) * ring.rank)]
    for n in range(2, Q + 1):
        s = draw()
        if n % ctx.p == 0:
            coeffs.append(ring.group_like((0,) * ring.rank, s))
        else:
            e = unit_exponent(ring, n)
            coeffs.append(ring.group_like(leg_coords(ring, leg, e), s))
    return QExpansion(coeffs, level, weight=None, zero=ring.zero())


# -- the fully controlled line-restriction pipeline ----------------------------

def line_pipeline(ap2=1, p=5, prec=12, Q=48, cap=4, out_prec=8,
                  corner_euler=True, n_psi=None, fudge_on=True,
                  fudge_spec=None, gamma_profile="weight", eta=6,
                  level_tame=2, label="line"):
    """A restriction pipeline whose every input is controlled.

    Families sit on legs two and three; the basis at each sampled weight k
    consists of two synthetic eigenlines F1, F2 and the completion
    R = Xi_w - gamma1(k) F1 - gamma2 F2, with gamma2 a fixed unit and
    gamma1(k) = (1+p)^k (gamma_profile "weight") or a fixed unit ("const").
    The projection therefore reads back gamma1(k) exactly, and the
    assembled value is

        eta * C * gamma1(k) * multiplier(k) * prod fudge^(-1/2),

    with C the index constant for level_tame inside 14.  With corner_euler
    the multiplier comes from the local-factor module at conductor
    exponent zero: the target is p-new of weight two with a_p = ap2 in
    {1, -1} at the corner and an ordinary unit profile above it, so the
    corner value vanishes exactly.  The multiplier is not a polynomial in
    the line variable, so line fits need corner_euler=False; passing
    eta=1, level_tame=14, fudge_on=False on top of that makes the value
    profile exactly gamma1(k).  fudge_spec maps primes to integer
    principal units and overrides the built-in fudge pair.
    """
    if ap2 not in (1, -1):
        raise DomainError(f"the corner eigenvalue must be +-1, got {ap2}")
    if gamma_profile not in ("weight", "const"):
        raise DomainError(f"unknown gamma profile {gamma_profile!r}")
    ctx = Zp2(p, prec)
    ring = triple_ring(ctx)
    theta = TwistChar(ring, 0)
    g = leg_family(ring, 1, f"{label}:g", Q, level=2)
    h = leg_family(ring, 2, f"{label}:h", Q, level=7)
    eigen1 = {2: ctx(3), 3: ctx(2)}
    eigen2 = {2: ctx(7), 3: ctx(6)}
    gamma2 = ctx(1 + p)
    eta_f = eta if isinstance(eta, PadicElem) else ctx(eta)
    if fudge_spec is not None:
        fudge = {int(ell): ctx(int(v)) for ell, v in fudge_spec.items()}
    else:
        fudge = {3: ctx(1 + 2 * p), 7: ctx(1 + 3 * p)} if fudge_on else {}

    def a_p_profile(k):
        if k == 2:
            return Fraction(ap2)
        return ctx(2 + k % 3)

    def target_for(k):
        return EigenData(label=f"{label}:F1", level_tame=level_tame, s=1,
                         weight=k, eigen=eigen1, a_p=a_p_profile(k),
                         eta_f=eta_f, p_new=(k == 2))

    xi_lambda = build_xi(g, h, theta)

    def gamma1_at(k):
        if gamma_profile == "weight":
            return (ring.work(1 + p) ** k).with_prec(ctx.N)
        return ctx(4)

    def basis_for(k):
        ap = a_p_profile(k)
        ap_elem = ctx(int(ap)) if isinstance(ap, Fraction) else ap
        f1, _ = synthetic_eigenform(ctx, f"{label}:F1@{k}", k, Q, level=14,
                                    eigen=eigen1, a_p=ap_elem)
        f2, _ = synthetic_eigenform(ctx, f"{label}:F2@{k}", k, Q, level=14,
                                    eigen=eigen2, a_p=ctx(1 + p))
        xi_w = specialize_coefficients(xi_lambda, ring, (k, 1, 1))
        r = xi_w - f1.scale(gamma1_at(k)) - f2.scale(gamma2)
        meta1 = dict(eigen1)
        meta1["a_p"] = ap_elem
        meta2 = dict(eigen2)
        meta2["a_p"] = ctx(1 + p)
        return OrdinaryBasis([f1, f2, r], [meta1, meta2, None],
                             level=14, weight=k)

    return LpConfig(ring, theta, g, h, target_for, basis_for, a_p_profile,
                    n_phi=0 if corner_euler else None, n_psi=n_psi,
                    fudge=fudge, cap=cap, arc_depth=0, out_prec=out_prec,
                    lambda_assembled=ring.group_like((1, 1, 1)),
                    label=f"{label}:ap{ap2:+d}")
