"""Local factor, root number, and multiplier consistency tests.

The Gauss-sum oracle here is deliberately primitive: plain integers mod p
and mod p^2 for the quadratic extension (delta^2 = 2 at p = 5), complex
floats for the exponentials.  It shares no arithmetic with the library.
"""

import cmath
import json
import math
import random

from fractions import Fraction

import pytest

from thetafam.cyclotomic import CycVec, PadicCyc
from thetafam.errors import (CaseMismatch, DomainError, InconsistencyFound,
                             NotPrimitive)
from thetafam.euler import (CpValue, LocalFactorInput, RamifiedFactor,
                            UnitChar, anticyc_multiplier, consistency_check,
                            cp_constant, default_grid, gauss_sum, root_number,
                            unb_factor)
from thetafam.padic import Zp2

P = 5
QNR = 2  # delta^2, the defining constant of the quadratic extension at p=5


def mul2(u, v, mod):
    """(a + b delta)(c + d delta) on coordinate pairs, mod the given integer."""
    a, b = u
    c, d = v
    return ((a * c + QNR * b * d) % mod, (a * d + b * c) % mod)


def pow2(u, e, mod):
    out = (1, 0)
    while e:
        if e & 1:
            out = mul2(out, u, mod)
        u = mul2(u, u, mod)
        e >>= 1
    return out


def residue_units():
    """Powers of the generator (1, 2) of the residue field units."""
    g = (1, 2)
    out = [(1, 0)]
    for _ in range(P * P - 2):
        out.append(mul2(out[-1], g, P))
    assert len(set(out)) == P * P - 1
    return out


def float_gauss_level1(tame_exp):
    """Plain complex-float Gauss sum for a residue-field character."""
    total = 0j
    for i, u in enumerate(residue_units()):
        tr = 2 * u[0] % P
        total += cmath.exp(2j * cmath.pi * (tame_exp * i / (P * P - 1) + tr / P))
    return total


def float_gauss_level2(tame_exp, wild):
    """Same oracle one level up: own Teichmueller lift, own one-unit loops."""
    mod = P * P
    g = (1, 2)
    for _ in range(6):  # x -> x^(p^2) converges to the torsion lift mod p^2
        g = pow2(g, P * P, mod)
    total = 0j
    u_i = (1, 0)
    for i in range(P * P - 1):
        u1 = u_i
        for j1 in range(P):
            u2 = u1
            for j2 in range(P):
                tr = 2 * u2[0] % mod
                ang = (tame_exp * i / (P * P - 1)
                       + (wild[0] * j1 + wild[1] * j2) / P + tr / mod)
                total += cmath.exp(2j * cmath.pi * ang)
                u2 = mul2(u2, (1, P), mod)
            u1 = mul2(u1, (1 + P, 0), mod)
        u_i = mul2(u_i, g, mod)
    assert u_i == (1, 0)
    return total


def embed_float(vec):
    """Numerical value of a CycVec under x -> e(1/m)."""
    return sum(c * cmath.exp(2j * cmath.pi * e / vec.m)
               for e, c in enumerate(vec.c) if c)


class TestUnitChar:
    def test_conductor_levels(self):
        assert UnitChar(P, 1, 0).level == 0
        assert UnitChar(P, 1, 7).level == 1
        assert UnitChar(P, 2, 3, (0, 0)).level == 1
        assert UnitChar(P, 2, 0, (0, 0)).level == 0
        assert UnitChar(P, 2, 0, (1, 0)).level == 2
        assert UnitChar(P, 2, 11, (0, 4)).level == 2

    def test_exponent_reduction(self):
        assert UnitChar(P, 1, 25).tame == 1
        assert UnitChar(P, 1, -1).tame == 23
        assert UnitChar(P, 2, 1, (7, -2)).wild == (2, 3)

    def test_inverse_and_parity(self):
        chi = UnitChar(P, 2, 5, (1, 3))
        inv = chi.inverse()
        assert inv.tame == 19 and inv.wild == (4, 2)
        assert chi.at_minus_one() == -1
        assert UnitChar(P, 1, 8).at_minus_one() == 1

    def test_rational_restriction(self):
        # the image of Z_p^* is generated by the (p+1)-th tame power and 1+p
        assert UnitChar(P, 1, 4).restricts_trivially_to_qp()
        assert not UnitChar(P, 1, 6).restricts_trivially_to_qp()
        assert UnitChar(P, 2, 8, (0, 2)).restricts_trivially_to_qp()
        assert not UnitChar(P, 2, 8, (1, 0)).restricts_trivially_to_qp()


class TestGaussSums:
    def test_level_one_matches_float_oracle(self):
        for e in range(1, P * P - 1):
            exact = embed_float(gauss_sum(UnitChar(P, 1, e)))
            assert abs(exact - float_gauss_level1(e)) < 1e-8

    def test_level_two_matches_float_oracle(self):
        for tame, wild in ((0, (1, 0)), (1, (1, 0)), (4, (0, 1)), (13, (2, 3))):
            exact = embed_float(gauss_sum(UnitChar(P, 2, tame, wild)))
            assert abs(exact - float_gauss_level2(tame, wild)) < 1e-6

    def test_quadratic_character_sum_is_minus_five(self):
        g = gauss_sum(UnitChar(P, 1, 12))
        assert g.equal_mod_phi(CycVec.from_int(g.m, -P))

    def test_parity_law(self):
        # signs of the characters killing Q_p^* alternate with the exponent step
        signs = {}
        for e in (4, 8, 12, 16, 20):
            rn = root_number(UnitChar(P, 1, e))
            assert rn.sign == (-1) ** (e // 4)
            signs[e] = rn.sign
        for e1 in signs:
            for e2 in signs:
                j = (e2 - e1) // 4
                assert signs[e1] * signs[e2] == (-1) ** j

    def test_unitarity_level_one_exhaustive(self):
        for e in range(1, P * P - 1):
            rn = root_number(UnitChar(P, 1, e))
            assert rn.unitary()

    def test_unitarity_level_two_sampled(self):
        rng = random.Random(401)
        for _ in range(30):
            tame = rng.randrange(P * P - 1)
            wild = (rng.randrange(P), rng.randrange(P))
            if wild == (0, 0):
                wild = (1, rng.randrange(P))
            rn = root_number(UnitChar(P, 2, tame, wild))
            assert rn.unitary()

    def test_conjugate_pairing(self):
        # G(chi) G(chi^-1) = chi(-1) p^(2n), level 1 exhaustive, level 2 sampled
        rng = random.Random(402)
        chars = [UnitChar(P, 1, e) for e in range(1, P * P - 1)]
        for _ in range(8):
            chars.append(UnitChar(P, 2, rng.randrange(24),
                                  (rng.randrange(1, P), rng.randrange(P))))
        for chi in chars:
            g1 = gauss_sum(chi)
            g2 = gauss_sum(chi.inverse())
            want = CycVec.from_int(g1.m, chi.at_minus_one() * P ** (2 * chi.n))
            assert (g1 * g2).equal_mod_phi(want)

    def test_imprimitive_rejected(self):
        with pytest.raises(NotPrimitive):
            root_number(UnitChar(P, 1, 0))
        with pytest.raises(NotPrimitive):
            root_number(UnitChar(P, 2, 3, (0, 0)))

    def test_padic_image_of_signs(self):
        ctx = Zp2(P, 8)
        for e in (4, 8, 12, 16, 20):
            img = root_number(UnitChar(P, 1, e)).padic_image(ctx)
            assert img == PadicCyc.from_scalar(ctx((-1) ** (e // 4)), 1)

    def test_padic_image_pairing(self):
        ctx = Zp2(P, 8)
        chi = UnitChar(P, 2, 1, (1, 0))
        w1 = root_number(chi).padic_image(ctx)
        w2 = root_number(chi.inverse()).padic_image(ctx)
        assert w1 * w2 == PadicCyc.from_scalar(ctx(chi.at_minus_one()), 2)


class TestUnbFactor:
    def test_p_old_unramified(self):
        assert unb_factor(LocalFactorInput("p-old", 2, 1, 0, p=P)) == 0
        assert unb_factor(LocalFactorInput("p-old", 2, -1, 0, p=P)) == 0
        assert unb_factor(LocalFactorInput("p-old", 4, 1, 0, p=P)) == 576
        assert unb_factor(LocalFactorInput("p-old", 6, -1, 0, p=P)) \
            == Fraction(624) ** 2

    def test_p_new_unramified(self):
        assert unb_factor(LocalFactorInput("p-new", 2, 1, 0, p=P)) == 0
        assert unb_factor(LocalFactorInput("p-new", 2, -1, 0, p=P)) == 0
        with pytest.raises(CaseMismatch):
            unb_factor(LocalFactorInput("p-new", 4, 1, 0, p=P))

    def test_padic_unit_sample_against_rational_route(self):
        ctx = Zp2(P, 10)
        got = unb_factor(LocalFactorInput("p-old", 4, ctx(3), 0))
        # (1 - 25/9)^2 = 256/81, pushed into the ring independently
        want = ctx(256) * ctx(81).inverse()
        assert got == want

    def test_ramified_quadratic(self):
        rf = unb_factor(LocalFactorInput("p-old", 2, 1, 1, UnitChar(P, 1, 12)))
        assert isinstance(rf, RamifiedFactor)
        assert rf.scalar == 5
        assert rf.root.sign == -1
        assert rf.rational_value() == -5
        assert rf.times_root_number() == 5
        # the sign comes out of the independent float oracle too
        assert abs(float_gauss_level1(12) - (-5)) < 1e-9

    def test_ramified_scalar_growth(self):
        rf = unb_factor(LocalFactorInput(
            "p-old", 4, -1, 2, UnitChar(P, 2, 1, (1, 0))))
        assert rf.scalar == Fraction(5 ** 6)
        assert rf.times_root_number() == anticyc_multiplier(4, -1, 2, p=P)

    def test_irrational_root_has_no_rational_value(self):
        rf = unb_factor(LocalFactorInput("p-old", 2, 1, 1, UnitChar(P, 1, 1)))
        assert rf.root.sign is None
        with pytest.raises(DomainError):
            rf.rational_value()

    def test_validation(self):
        with pytest.raises(DomainError):
            unb_factor(LocalFactorInput("p-old", 3, 1, 0, p=P))
        with pytest.raises(DomainError):
            unb_factor(LocalFactorInput("sideways", 2, 1, 0, p=P))
        with pytest.raises(DomainError):
            unb_factor(LocalFactorInput("p-old", 2, 2, 0, p=P))
        with pytest.raises(DomainError):
            unb_factor(LocalFactorInput("p-old", 2, Zp2(P, 8)(10), 0))
        with pytest.raises(DomainError):
            unb_factor(LocalFactorInput("p-old", 2, 1, 0))  # no way to infer p
        with pytest.raises(CaseMismatch):
            unb_factor(LocalFactorInput("p-old", 2, 1, 1, p=P))
        with pytest.raises(CaseMismatch):
            unb_factor(LocalFactorInput("p-old", 2, 1, 0, UnitChar(P, 1, 12)))
        with pytest.raises(CaseMismatch):
            unb_factor(LocalFactorInput("p-old", 2, 1, 2, UnitChar(P, 1, 12)))
        with pytest.raises(NotPrimitive):
            unb_factor(LocalFactorInput("p-old", 2, 1, 2, UnitChar(P, 2, 3)))


class TestAnticycMultiplier:
    def test_table_rows(self):
        assert anticyc_multiplier(2, 1, 1, p=P) == 5
        assert anticyc_multiplier(2, 1, 0, p=P, p_new=True) == 0
        assert anticyc_multiplier(2, -1, 0, p=P, p_new=True) == 0
        assert anticyc_multiplier(6, 1, 2, p=P) == Fraction(5) ** 10

    def test_p_old_row_equals_unramified_factor(self):
        ctx = Zp2(P, 12)
        for k in (2, 4, 6):
            for a_p in (1, -1, ctx(2), ctx(3), ctx(1, 1)):
                lhs = anticyc_multiplier(k, a_p, 0, p=P)
                rhs = unb_factor(LocalFactorInput("p-old", k, a_p, 0, p=P))
                assert lhs == rhs

    def test_p_new_row_equals_single_factor(self):
        ctx = Zp2(P, 12)
        for a_p in (1, -1, ctx(2)):
            lhs = anticyc_multiplier(2, a_p, 0, p=P, p_new=True)
            rhs = unb_factor(LocalFactorInput("p-new", 2, a_p, 0, p=P))
            assert lhs == rhs


class TestCpConstant:
    def test_weight_two_center(self):
        cp = cp_constant(2, 0, 7, 23, 1)
        assert cp == CpValue(Fraction(7), 1, ())

    def test_gamma_factor(self):
        assert cp_constant(4, 1, 1, 7, 1).rational == 14  # Gamma(3) Gamma(1) d_K
        assert cp_constant(4, 0, 1, 7, 1).rational == -7

    def test_sign_alternates_in_j(self):
        vals = [cp_constant(6, j, 1, 7, 1).rational for j in range(-2, 3)]
        for a, b in zip(vals, vals[1:]):
            assert a * b < 0

    def test_unit_count_squares(self):
        assert cp_constant(2, 0, 1, 3, 3).rational == 9

    def test_discriminant_power(self):
        cp = cp_constant(6, 0, 1, 7, 1)
        # delta_K^5 = d_K^2 * delta_K, and Gamma(3)^2 = 4 with an even sign exponent
        assert cp.rational == (2 * 2) * 49 and cp.delta_exp == 1

    def test_ingested_factors(self):
        cp = cp_constant(2, 0, 1, 7, 1, eps_p=-1)
        assert cp.rational == -1 and cp.factors == ()
        marker = Zp2(P, 8)(1, 1)
        cp = cp_constant(2, 0, 1, 7, 1, eps_p=marker, twist=-1)
        assert cp.rational == -1 and cp.factors == (marker,)

    def test_domain(self):
        with pytest.raises(DomainError):
            cp_constant(2, 1, 1, 7, 1)
        with pytest.raises(DomainError):
            cp_constant(4, -2, 1, 7, 1)
        with pytest.raises(DomainError):
            cp_constant(5, 1, 1, 7, 1)


class TestConsistency:
    def test_default_grid(self):
        report = consistency_check()
        assert len(report) == 77
        assert all(row["ok"] for row in report)
        assert {row["identity"] for row in report} \
            == {"I == e_p", "I * W == e_p"}
        json.dumps(report)  # the CLI table emitter needs plain data

    def test_random_unit_samples(self):
        rng = random.Random(17)
        ctx = Zp2(P, 12)
        units = []
        while len(units) < 3:
            a, b = rng.randrange(5 ** 12), rng.randrange(5 ** 12)
            if a % P or b % P:
                units.append(ctx(a, b))
        consistency_check(default_grid(P, unit_samples=units))

    def test_corrupted_root_number_detected(self):
        from thetafam.euler import RootNumber
        chi = UnitChar(P, 1, 12)
        fake = RootNumber(chi, CycVec.from_int(P * (P * P - 1), 3))
        rf = RamifiedFactor(Fraction(5), fake)
        with pytest.raises(InconsistencyFound):
            rf.times_root_number()
