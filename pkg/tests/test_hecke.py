"""Hecke operators, caps, and the two ordinary projector routes."""

import math
import random

import gmpy2
import pytest

from thetafam.errors import CapExhausted, CapOverflow, DomainError, NoConvergence
from thetafam.hecke import (
    DiamondAction,
    OrdinarySpan,
    QExpansion,
    family_product,
    hecke_T,
    hecke_U_p,
    hecke_V_p,
    matrix_ordinary_limit,
    ord_project,
    p_deplete,
)
from thetafam.padic import Zp2, angle, teichmuller
from thetafam.quadfield import QuadField
from thetafam.series import GroupRing, Weight


CTX = Zp2(5, 8)
K7 = QuadField(7)


def ideal_count_series(Q):
    """r(n) = number of ideals of norm n in Q(sqrt(-7)).

    This is a weight-1 Hecke eigenform with character kronecker(-7, .)
    and a_1 = 1, which makes it a self-contained oracle for T_ell.
    """
    counts = [0] * (Q + 1)
    for I in K7.enumerate_ideals(Q):
        counts[I.norm] += 1
    char = DiamondAction(7, lambda d: int(gmpy2.kronecker(-7, d)), p=None)
    return QExpansion(counts, level=7, char=char, weight=1)


def random_series(Q, seed, char=None, level=7):
    rng = random.Random(seed)
    coeffs = [CTX(rng.randrange(5 ** 8)) for _ in range(Q + 1)]
    return QExpansion(coeffs, level=level, char=char)


def eigen_series(Q, alpha, seed, level=7):
    """a_n = alpha^{v_5(n)} * c(n / 5^{v_5(n)}): exact U_5 eigenvector."""
    rng = random.Random(seed)
    unit_part = {}
    coeffs = [CTX(0)]
    for n in range(1, Q + 1):
        m, v = n, 0
        while m % 5 == 0:
            m //= 5
            v += 1
        if m not in unit_part:
            unit_part[m] = CTX(1 + rng.randrange(5 ** 8 - 1))
        coeffs.append(alpha ** v * unit_part[m])
    return QExpansion(coeffs, level=level)


class TestTell:
    def test_first_coefficient_is_a_ell(self):
        xi = random_series(60, seed=1)
        for ell in (2, 3, 7, 11):
            assert hecke_T(ell, xi).a(1) == xi.a(ell)

    def test_ideal_counts_are_an_eigenform(self):
        r = ideal_count_series(420)
        for ell in (2, 3, 11, 13):
            got = hecke_T(ell, r)
            expect = r.scale(r.a(ell)).truncate(got.Q)
            assert got.agrees_with(expect)
        # inert primes have a_ell = 0, so T_ell kills the series
        assert hecke_T(3, r).is_zero()

    def test_level_divisors_drop_the_second_term(self):
        r = ideal_count_series(140)
        t7 = hecke_T(7, r)
        for n in range(1, t7.Q + 1):
            assert t7.a(n) == r.a(7 * n)

    def test_operators_commute(self):
        char = DiamondAction(7, lambda d: CTX(int(gmpy2.kronecker(-7, d))) * d)
        xi = random_series(180, seed=2, char=char)
        one = hecke_T(3, hecke_T(2, xi))
        other = hecke_T(2, hecke_T(3, xi))
        assert one.agrees_with(other)

    def test_linearity(self):
        char = DiamondAction(7, lambda d: CTX(d))
        a = random_series(90, seed=3, char=char)
        b = random_series(90, seed=4, char=char)
        c = CTX(1234567)
        lhs = hecke_T(2, a.scale(c) + b)
        rhs = hecke_T(2, a).scale(c) + hecke_T(2, b)
        assert lhs.agrees_with(rhs)

    def test_cap_bookkeeping(self):
        xi = random_series(100, seed=5)
        assert hecke_T(3, xi).Q == 33
        with pytest.raises(CapExhausted):
            hecke_T(101, xi)
        with pytest.raises(DomainError):
            hecke_T(4, xi)

    def test_p_direction_is_refused(self):
        char = DiamondAction(7, lambda d: CTX(d), p=5)
        xi = random_series(50, seed=6, char=char)
        with pytest.raises(DomainError):
            hecke_T(5, xi)


class TestUpVp:
    def test_up_vp_is_the_identity(self):
        xi = random_series(80, seed=7)
        back = hecke_U_p(hecke_V_p(xi, 5), 5)
        assert back.agrees_with(xi) and back.Q == xi.Q

    def test_vp_layout(self):
        xi = random_series(10, seed=8)
        v = hecke_V_p(xi, 5)
        assert v.Q == 50
        for n in range(v.Q + 1):
            if n % 5 == 0:
                assert v.a(n) == xi.a(n // 5)
            else:
                assert v.a(n) == CTX(0)

    def test_p_deplete(self):
        xi = random_series(100, seed=9)
        dep = p_deplete(xi, 5)
        assert dep.Q == xi.Q
        for n in range(1, 101):
            assert dep.a(n) == (CTX(0) if n % 5 == 0 else xi.a(n))
        # same thing as the operator identity 1 - V_p U_p on the joint range
        alt = xi - hecke_V_p(hecke_U_p(xi, 5), 5)
        assert dep.agrees_with(alt)
        assert p_deplete(dep, 5).agrees_with(dep)


class TestOrdProject:
    def test_depleted_series_project_to_zero(self):
        xi = p_deplete(random_series(300, seed=10), 5)
        e = ord_project(xi, 5)
        assert e.is_zero()

    def test_fixed_points_stay(self):
        xi = eigen_series(300, CTX(1), seed=11)
        e = ord_project(xi, 5)
        assert e.Q >= 1
        assert xi.agrees_with(e)

    def test_generic_unit_eigenvalue_cannot_be_certified(self):
        # alpha = 2 has huge multiplicative order mod 5^8, so successive
        # factorial iterates keep drifting until the q-range dies
        xi = eigen_series(300, CTX(2), seed=12)
        with pytest.raises(NoConvergence):
            ord_project(xi, 5)


class TestOrdinarySpan:
    def test_matrix_validation_catches_lies(self):
        b0 = eigen_series(100, CTX(-1), seed=13)
        with pytest.raises(DomainError):
            OrdinarySpan([b0], [[CTX(1)]], 5)  # true eigenvalue is -1
        OrdinarySpan([b0], [[CTX(-1)]], 5)

    def test_vp_preimage_projects_to_inverse_eigenvalue(self):
        # U_p on span{xi0, V_p xi0} is [[alpha, 1], [0, 0]]; the ordinary
        # component of V_p xi0 is alpha^{-1} xi0, from the 2x2 eigenbasis
        # (1,0) and (1,-alpha) solved by hand
        for alpha in (CTX(-1), teichmuller(CTX(2))):
            xi0 = eigen_series(250, alpha, seed=14)
            span = OrdinarySpan([xi0, hecke_V_p(xi0, 5)],
                                [[alpha, CTX(1)], [CTX(0), CTX(0)]], 5)
            coords = span.project_ordinary((CTX(0), CTX(1)))
            assert coords[0] == alpha.inverse()
            assert coords[1] == CTX(0)
            got = span.combo(coords)
            assert got.agrees_with(xi0.scale(alpha.inverse()))

    def test_projector_is_idempotent_on_random_inputs(self):
        alpha = CTX(-1)
        beta = CTX(5) * teichmuller(CTX(3))
        b0 = eigen_series(200, alpha, seed=15)
        b1 = eigen_series(200, beta, seed=16)
        span = OrdinarySpan([b0, b1], [[alpha, CTX(0)], [CTX(0), beta]], 5)
        E = matrix_ordinary_limit(span.matrix)
        rng = random.Random(17)
        for _ in range(20):
            coords = (CTX(rng.randrange(5 ** 8)), CTX(rng.randrange(5 ** 8)))
            once = span.project_ordinary(coords)
            twice = span.project_ordinary(once)
            assert once == twice
        assert _mat_eq(_mat_mul2(E, E), E)

    def test_complement_is_topologically_nilpotent(self):
        alpha = CTX(-1)
        beta = CTX(5) * teichmuller(CTX(3))
        A = ((alpha, CTX(0)), (CTX(0), beta))
        E = matrix_ordinary_limit(A)
        I2 = ((CTX(1), CTX(0)), (CTX(0), CTX(1)))
        comp = _mat_sub(I2, E)
        M = comp
        for m in range(1, 8):
            M = _mat_mul2(A, M)
            # after m steps every entry has valuation >= m
            assert all(c.is_zero() or c.valuation() >= m for row in M for c in row)
        M = _mat_mul2(A, M)
        assert all(c.is_zero() for row in M for c in row)

    def test_nonconvergent_matrix(self):
        with pytest.raises(NoConvergence):
            matrix_ordinary_limit(((CTX(2),),))


def _mat_mul2(A, B):
    n = len(A)
    return tuple(tuple(sum((A[i][t] * B[t][j] for t in range(1, n)),
                           start=A[i][0] * B[0][j]) for j in range(n))
                 for i in range(n))


def _mat_sub(A, B):
    return tuple(tuple(a - b for a, b in zip(ra, rb)) for ra, rb in zip(A, B))


def _mat_eq(A, B):
    return all(a == b for ra, rb in zip(A, B) for a, b in zip(ra, rb))


class TestFamilyProduct:
    def test_constant_one_and_q_times_q(self):
        one = QExpansion([CTX(1)] + [CTX(0)] * 30 + [CTX(1)] * 0, level=1)
        one = QExpansion([CTX(1) if n == 0 else CTX(0) for n in range(31)], level=1)
        xi = random_series(30, seed=18, level=1)
        assert family_product(one, xi).agrees_with(xi)
        q = QExpansion([CTX(1) if n == 1 else CTX(0) for n in range(31)], level=1)
        q2 = family_product(q, q)
        for n in range(q2.Q + 1):
            assert q2.a(n) == (CTX(1) if n == 2 else CTX(0))

    def test_cap_rules(self):
        a = random_series(40, seed=19, level=1)
        b = random_series(25, seed=20, level=1)
        assert family_product(a, b).Q == 25
        with pytest.raises(CapOverflow):
            family_product(a, b, out_cap=26)

    def test_product_matches_convolution_oracle(self):
        rng = random.Random(21)
        a = [rng.randrange(-50, 50) for _ in range(21)]
        b = [rng.randrange(-50, 50) for _ in range(21)]
        xa = QExpansion([CTX(c) for c in a], level=1)
        xb = QExpansion([CTX(c) for c in b], level=1)
        prod = family_product(xa, xb)
        for n in range(21):
            assert prod.a(n) == CTX(sum(a[i] * b[n - i] for i in range(n + 1)))


class TestSpecializationEquivariance:
    def test_group_ring_family_commutes_with_t_ell(self):
        # family coefficients [u_n] in a rank-1 group ring; the family
        # diamond factor [<d>] chi(d)/d specializes to chi(d) w^-k(d) d^{k-1},
        # which is the classical normalization the operator uses downstream
        ring = GroupRing(CTX, rank=1)
        rng = random.Random(22)
        units = [CTX(1) + CTX(5 * rng.randrange(5 ** 6)) for _ in range(61)]
        coeffs = [ring.group_like(ring.coords_of(u.lift_unreduced(11))) for u in units]
        zero = ring.zero()

        def fam_factor(d):
            dd = CTX(d).lift_unreduced(11)
            return ring.group_like(ring.coords_of(angle(dd)),
                                   CTX(int(gmpy2.kronecker(-7, d))) * dd.inverse().with_prec(8))

        fam = QExpansion(coeffs, level=7,
                         char=DiamondAction(7, fam_factor, p=5), zero=zero)
        for k in (1, 2, 4):
            w = Weight(k)

            def cl_factor(d, k=k):
                om = teichmuller(CTX(d))
                return CTX(int(gmpy2.kronecker(-7, d))) * om ** (-k) * d ** (k - 1)

            spec = QExpansion([ring.specialize(c, w) for c in fam.coeffs], level=7,
                              char=DiamondAction(7, cl_factor, p=5))
            for ell in (2, 3):
                fam_first = hecke_T(ell, fam)
                lhs = [ring.specialize(c, w) for c in fam_first.coeffs]
                rhs = hecke_T(ell, spec)
                assert all(x == y for x, y in zip(lhs, rhs.coeffs))
