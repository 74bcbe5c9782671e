"""Ray class characters, their conductors, and the p-adic weight direction."""

import random

import pytest

from thetafam.characters import (
    HeckeChar,
    OkEmbedding,
    build_lambda,
    character_from_spec,
    character_to_spec,
    dual_generator,
    eta_weight_value,
    phi_psi_split,
    rational_classes,
    trivial_character,
)
from thetafam.errors import DomainError, NotCoprime, NotSelfDual, Unsupported
from thetafam.padic import Zp2, angle, pexp, plog
from thetafam.quadfield import QuadField


K7 = QuadField(7)
K23 = QuadField(23)
CTX = Zp2(5, 8)
FIVE = K7.ideal(1, 1, 5)


def ideal_pool(field, cap, avoid):
    return [I for I in field.enumerate_ideals(cap, coprime_to=avoid)
            if not I.is_unit_ideal]


class TestEmbedding:
    def test_defining_relations(self):
        for field, p in [(K7, 5), (K23, 5), (K7, 3)]:
            ctx = Zp2(p, 8)
            emb = OkEmbedding(field, ctx)
            q = (1 + field.d_K) // 4
            assert emb.sqrt_md * emb.sqrt_md == ctx(-field.d_K)
            assert emb.omega * emb.omega == emb.omega - q
            # norms transport: N(x + y*omega) = x^2 + xy + q y^2
            rng = random.Random(11)
            for _ in range(20):
                x, y = rng.randrange(-30, 31), rng.randrange(-30, 31)
                el = emb.embed(x, y)
                assert el * el.conj() == ctx(field.norm_element(x, y))

    def test_teichmuller_root_orders(self):
        emb = OkEmbedding(K7, CTX)
        assert emb.zeta ** 24 == CTX.one()
        assert emb.zeta ** 12 == CTX(-1)
        assert emb.zeta ** 8 != CTX.one()
        z12 = emb.root_of_unity(12)
        assert z12 ** 12 == CTX.one() and z12 ** 6 != CTX.one()
        with pytest.raises(Unsupported):
            emb.root_of_unity(7)

    def test_residue_dlog_is_a_homomorphism(self):
        emb = OkEmbedding(K7, CTX)
        rng = random.Random(23)
        pairs = []
        while len(pairs) < 15:
            x, y = rng.randrange(20), rng.randrange(20)
            if K7.norm_element(x, y) % 5:
                pairs.append((x, y))
        for (x1, y1), (x2, y2) in zip(pairs, pairs[1:]):
            prod = (x1 * x2 - K7.q * y1 * y2, x1 * y2 + y1 * x2 + y1 * y2)
            lhs = emb.residue_dlog(*prod)
            assert lhs == (emb.residue_dlog(x1, y1) + emb.residue_dlog(x2, y2)) % 24
        # the table generator is its own dlog-1 witness
        assert emb.residue_dlog(*emb.generator) == 1 or emb.generator[1] != 0

    def test_rejects_non_inert_primes(self):
        with pytest.raises(Unsupported):
            OkEmbedding(K7, Zp2(11, 6))  # -7 is a square mod 11: split
        with pytest.raises(Unsupported):
            OkEmbedding(K7, Zp2(7, 6))  # ramified


class TestHeckeChar:
    def test_dual_generator_shape(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        assert eta.M == 12
        assert eta.exponents == (3, 4)
        assert eta.order == 12
        # generator j really maps to exponents[j]
        for j, P in enumerate(G.generators):
            assert eta.value_exponent(P) == eta.exponents[j]

    def test_exponent_validation(self):
        G = K7.ray_class_group(p=5, r=1)
        with pytest.raises(DomainError):
            HeckeChar(G, (1, 4))  # 1 is not a multiple of 12/4
        with pytest.raises(DomainError):
            HeckeChar(G, (3,))

    def test_values_are_multiplicative(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        pool = ideal_pool(K7, 150, FIVE)
        rng = random.Random(5)
        for _ in range(60):
            A, B = rng.choice(pool), rng.choice(pool)
            assert eta.value_exponent(A * B) == (eta.value_exponent(A)
                                                 + eta.value_exponent(B)) % 12
        with pytest.raises(NotCoprime):
            eta.value_exponent(FIVE)

    def test_group_algebra(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        assert (eta * eta ** (-1)).is_trivial
        assert (eta ** 7).order == 12
        assert (eta ** 4).order == 3
        assert eta ** 13 == eta

    def test_sigma_is_frobenius_on_the_residue_group(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        assert eta.sigma() == eta ** 5
        assert eta.sigma().sigma() == eta
        assert not eta.is_galois_stable()
        assert (eta ** 6).is_galois_stable()
        pool = ideal_pool(K7, 120, FIVE)
        for I in pool[:25]:
            assert eta.sigma().value_exponent(I) == eta.value_exponent(I.conj())

    def test_class_group_character_conjugates_to_its_inverse(self):
        # conjugation inverts every class of Q(sqrt(-23)), so the cubic
        # character is moved to its inverse and is never Galois stable
        G = K23.ray_class_group()
        chi = dual_generator(G)
        assert chi.order == 3
        assert chi.sigma() == chi ** (-1)
        assert not chi.is_galois_stable()
        assert trivial_character(G).is_galois_stable()

    def test_conductors(self):
        G = K7.ray_class_group(p=5, r=1)
        assert dual_generator(G).conductor == FIVE
        assert trivial_character(G).conductor == K7.unit_ideal
        G25 = K7.ray_class_group(p=5, r=2)
        M = 60  # lcm of the generator orders (4, 3, 5, 5)
        tame = HeckeChar(G25, (M // 4, M // 3, 0, 0))
        wild = HeckeChar(G25, (0, 0, M // 5, 0))
        assert tame.conductor == FIVE
        assert wild.conductor == FIVE ** 2
        mixed = tame * wild
        assert mixed.conductor == FIVE ** 2
        assert mixed.tame_part() == tame
        assert tame.conductor.divides(FIVE)

    def test_padic_values(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        emb = OkEmbedding(K7, CTX)
        pool = ideal_pool(K7, 100, FIVE)
        rng = random.Random(7)
        for _ in range(25):
            A, B = rng.choice(pool), rng.choice(pool)
            assert eta.padic_value(A * B, emb) == eta.padic_value(A, emb) * eta.padic_value(B, emb)
        v = eta.padic_value(pool[0], emb)
        assert v ** 12 == CTX.one()
        # order 60 does not embed in the 24 roots of unity of Z_25
        G25 = K7.ray_class_group(p=5, r=2)
        wild = HeckeChar(G25, (0, 0, 12, 0))
        with pytest.raises(Unsupported):
            wild.padic_value(K7.principal(2, 1), emb)

    def test_spec_round_trip(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G) ** 5
        spec = character_to_spec(eta)
        assert spec["generator_images"] == [3, 8]
        back = character_from_spec(spec)
        assert back == eta
        assert back.conductor == eta.conductor
        spoiled = dict(spec, generator_images=[1, 4])
        with pytest.raises(DomainError):
            character_from_spec(spoiled)
        chi = dual_generator(K23.ray_class_group())
        assert character_from_spec(character_to_spec(chi)) == chi


class TestPhiPsiSplit:
    def test_inverse_pair(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        pair = phi_psi_split(eta, eta ** (-1))
        assert pair.phi.is_trivial
        assert pair.psi == eta ** (-4)
        assert pair.psi.order == 3
        assert pair.flags["phi_conductor_prime_to_p"]
        assert pair.flags["psi_minus_nontrivial"]
        # at this level there is no wild component to strip
        assert pair.psi_tame == pair.psi

    def test_rejects_pairs_with_rational_content(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        assert rational_classes(G) == {(0, 0), (2, 0)}
        with pytest.raises(NotSelfDual):
            phi_psi_split(eta, trivial_character(G))

    def test_rejects_mismatched_groups(self):
        eta = dual_generator(K7.ray_class_group(p=5, r=1))
        chi = dual_generator(K23.ray_class_group())
        with pytest.raises(DomainError):
            phi_psi_split(eta, chi)


class TestLambda:
    def test_pins_principal_one_units(self):
        # lambda((alpha)) = alpha whenever alpha = 1 mod 5, so the angle
        # direction really extends the identity on 1-units
        lam = build_lambda(K7, 5, 8)
        for x, y in [(6, 0), (1, 5), (11, 0), (6, 5), (1, -5), (-4, 10)]:
            I = K7.principal(x, y)
            assert lam.full_value(I) == lam.embedding.embed(x, y).with_prec(8)

    def test_full_value_is_multiplicative(self):
        lam = build_lambda(K7, 5, 8)
        pool = ideal_pool(K7, 80, FIVE)
        rng = random.Random(31)
        for _ in range(30):
            A, B = rng.choice(pool), rng.choice(pool)
            assert lam.full_value(A * B) == (lam.full_value(A) * lam.full_value(B)).with_prec(8)

    def test_angle_identities(self):
        lam = build_lambda(K7, 5, 8)
        pool = ideal_pool(K7, 80, FIVE)
        rng = random.Random(37)
        for _ in range(25):
            A, B = rng.choice(pool), rng.choice(pool)
            assert lam.angle(A * B) == lam.angle(A) * lam.angle(B)
        for I in pool[:12]:
            got = lam.angle(I) * lam.angle(I.conj())
            assert got == angle(CTX(I.norm))
            assert (lam.angle(I) - 1).valuation() >= 1

    def test_s_coordinate(self):
        lam = build_lambda(K7, 5, 8)
        assert lam.a_exp == 0
        # cross-check the carrier exponent against the actual group order
        order = K7.ray_class_group(p=5, r=1).order
        v = 0
        while order % 5 == 0:
            order //= 5
            v += 1
        assert v == lam.a_exp
        pool = ideal_pool(K7, 60, FIVE)
        log1p = plog(Zp2(5, 11)(6))
        for I in pool[:10]:
            s = lam.s_carrier(I)
            assert pexp((s * log1p).with_prec(8)) == lam.angle(I)
        rng = random.Random(41)
        for _ in range(15):
            A, B = rng.choice(pool), rng.choice(pool)
            assert lam.s_carrier(A * B) == lam.s_carrier(A) + lam.s_carrier(B)

    def test_class_number_three_angles(self):
        lam = build_lambda(K23, 5, 8)
        P2 = K23.prime_splitting(2).primes[0]
        Q3 = K23.prime_splitting(3).primes[0]
        assert lam.angle(P2 * Q3) == lam.angle(P2) * lam.angle(Q3)
        assert lam.angle(P2) * lam.angle(P2.conj()) == angle(Zp2(5, 8)(2))
        # cube of a class is principal; the cube root must undo it
        a = K23.principal_generators(P2 ** 3)[0]
        assert lam.angle(P2) ** 3 == angle(lam.embedding.embed(*a)).with_prec(8)
        with pytest.raises(Unsupported):
            lam.full_value(P2)
        with pytest.raises(Unsupported):
            lam.torsion_exponent(P2)

    def test_construction_guards(self):
        with pytest.raises(Unsupported):
            build_lambda(K7, 7, 6)  # ramified
        with pytest.raises(Unsupported):
            build_lambda(K7, 11, 6)  # split
        with pytest.raises(Unsupported):
            build_lambda(QuadField(47), 5, 6)  # 5 divides h = 5
        lam = build_lambda(K7, 5, 8)
        with pytest.raises(NotCoprime):
            lam.angle(FIVE * K7.principal(2, 1))


class TestWeightValues:
    def test_weight_one_is_the_character(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        lam = build_lambda(K7, 5, 8)
        emb = lam.embedding
        for I in ideal_pool(K7, 40, FIVE)[:8]:
            assert eta_weight_value(eta, lam, 1, I) == eta.padic_value(I, emb).with_prec(8)

    def test_higher_weights_on_one_unit_principals(self):
        # alpha = 1 mod 5 lands in the kernel of eta, and its angle is
        # alpha itself, so eta_k((alpha)) = alpha^(k-1) exactly
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        lam = build_lambda(K7, 5, 8)
        for x, y in [(6, 0), (1, 5), (11, 0)]:
            I = K7.principal(x, y)
            al = lam.embedding.embed(x, y).with_prec(8)
            for k in (1, 2, 3, 5):
                assert eta_weight_value(eta, lam, k, I) == al ** (k - 1)

    def test_weight_values_multiply(self):
        G = K7.ray_class_group(p=5, r=1)
        eta = dual_generator(G)
        lam = build_lambda(K7, 5, 8)
        pool = ideal_pool(K7, 70, FIVE)
        rng = random.Random(53)
        for _ in range(20):
            A, B = rng.choice(pool), rng.choice(pool)
            lhs = eta_weight_value(eta, lam, 3, A * B)
            assert lhs == eta_weight_value(eta, lam, 3, A) * eta_weight_value(eta, lam, 3, B)
