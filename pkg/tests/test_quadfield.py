"""Field, ideal, and ray class group tests.

Oracles are kept deliberately naive: quadratic-residue scans, form
representation counts, and explicit coset enumeration, so each one is an
independent route to the same number.
"""

import random

import pytest

from thetafam.errors import DomainError, ModulusTooLarge, NotCoprime, ParseError, Unsupported
from thetafam.quadfield import (
    IdealRep,
    QuadField,
    _reduce_form,
    read_ideal_cache,
    write_ideal_cache,
)


def form_representation_count(form, n):
    """Number of integer pairs with A x^2 + B x y + C y^2 = n, by direct scan."""
    A, B, C = form
    d = 4 * A * C - B * B
    count = 0
    y = 0
    while A * 4 * n >= d * y * y:
        for yy in {y, -y}:
            s = 4 * A * n - d * yy * yy
            t = int(s ** 0.5)
            while t * t < s:
                t += 1
            while t * t > s:
                t -= 1
            if t * t != s:
                continue
            for tt in {t, -t}:
                if (tt - B * yy) % (2 * A) == 0:
                    count += 1
            if yy == 0:
                break
        y += 1
    return count


def ideal_counts(field, Nmax, coprime_to=None):
    counts = [0] * (Nmax + 1)
    for I in field.enumerate_ideals(Nmax, coprime_to=coprime_to):
        counts[I.norm] += 1
    return counts


def test_field_validation():
    with pytest.raises(DomainError):
        QuadField(5)  # even discriminant -20 shape, d_K = 1 mod 4
    with pytest.raises(DomainError):
        QuadField(75)  # 3 mod 4 but not squarefree
    with pytest.raises(DomainError):
        QuadField(-7)


def test_class_numbers_match_reduced_form_counts():
    assert QuadField(3).h_K == 1
    assert QuadField(7).reduced_forms == ((1, 1, 2),)
    assert set(QuadField(23).reduced_forms) == {(1, 1, 6), (2, 1, 3), (2, -1, 3)}
    assert QuadField(23).h_K == 3
    # u_K = #O_K^x / 2
    assert QuadField(3).u_K == 3 and QuadField(7).u_K == 1


def test_prime_splitting_inert_matches_residue_scan():
    # -7 mod 5 = 3 is not among the squares mod 5, computed by brute force
    squares = {x * x % 5 for x in range(5)}
    assert (-7) % 5 not in squares
    sp = QuadField(7).prime_splitting(5)
    assert sp.kind == "inert"
    (P,) = sp.primes
    assert P.norm == 25 and P.content == 5


def test_prime_splitting_ramified():
    sp = QuadField(7).prime_splitting(7)
    assert sp.kind == "ramified"
    (P,) = sp.primes
    assert P.norm == 7
    # the square of the ramified prime is (7)
    assert P * P == QuadField(7).ideal(1, 1, 7)


def test_prime_splitting_split_matches_residue_scan():
    # brute force: b^2 = -23 mod 8 has a solution, so 2 splits
    assert any((b * b + 23) % 8 == 0 for b in range(8))
    sp = QuadField(23).prime_splitting(2)
    assert sp.kind == "split"
    P, Q = sp.primes
    assert P != Q and P.conj() == Q
    assert P * Q == QuadField(23).ideal(1, 1, 2)


def test_ideal_validation_rejects_bad_triples():
    K = QuadField(7)
    with pytest.raises(DomainError):
        K.ideal(3, 1)  # 1 + 7 = 8 is not 0 mod 12
    with pytest.raises(DomainError):
        K.ideal(2, 4)  # even b
    with pytest.raises(DomainError):
        K.ideal(2, 7)  # b out of [1, 2a)


def test_ideal_product_is_norm_multiplicative():
    rnd = random.Random(11)
    for d in (7, 23):
        K = QuadField(d)
        pool = list(K.enumerate_ideals(60))
        for _ in range(60):
            I, J = rnd.choice(pool), rnd.choice(pool)
            IJ = I * J
            assert IJ.norm == I.norm * J.norm
            assert IJ.conj() == I.conj() * J.conj()


def test_ideal_times_conjugate_is_norm_ideal():
    K = QuadField(23)
    for I in K.enumerate_ideals(50):
        assert I * I.conj() == K.ideal(1, 1, I.norm)


def test_principal_ideal_construction():
    K = QuadField(7)
    # (omega) has norm q = 2
    I = K.principal(0, 1)
    assert I.norm == 2
    # rational integers give content ideals
    assert K.principal(10, 0) == K.ideal(1, 1, 10)
    # generators recovered, up to units
    assert (0, 1) in K.principal_generators(I)
    with pytest.raises(DomainError):
        K.principal(0, 0)


def test_enumerate_ideal_counts_match_form_oracle():
    for d in (7, 23):
        K = QuadField(d)
        counts = ideal_counts(K, 500)
        for n in range(1, 501):
            reps = sum(form_representation_count(f, n) for f in K.reduced_forms)
            assert reps % 2 == 0
            assert counts[n] == reps // 2, (d, n)


def test_enumerate_small_norm_inventory():
    K = QuadField(7)
    by_norm = {}
    for I in K.enumerate_ideals(10):
        by_norm.setdefault(I.norm, []).append(I)
    assert by_norm[1] == [K.unit_ideal]
    assert len(by_norm[2]) == 2  # 2 splits in Q(sqrt(-7))
    assert 5 not in by_norm  # 5 is inert: no ideal of norm 5
    assert len(by_norm[4]) == 3  # two split squares plus the content ideal (2)


def test_enumerate_coprime_filter():
    K = QuadField(7)
    five = K.ideal(1, 1, 5)
    norms = {I.norm for I in K.enumerate_ideals(200, coprime_to=five)}
    assert all(n % 5 for n in norms)
    # split modulus: removing one prime above 2 keeps its conjugate
    K23 = QuadField(23)
    P, Q = K23.prime_splitting(2).primes
    survivors = [I for I in K23.enumerate_ideals(2, coprime_to=P) if I.norm == 2]
    assert survivors == [Q]


def test_ideal_membership_and_divisibility():
    K = QuadField(7)
    P, Q = K.prime_splitting(2).primes
    assert P.contains(2, 0) and P.contains(*((P.beta, 1)))
    assert not P.contains(1, 0)
    assert P.divides(P * Q) and Q.divides(P * Q)
    assert not (P * P).divides(P * Q)
    assert P.gcd(Q).is_unit_ideal and not P.gcd(P * Q).is_unit_ideal


def test_ideal_factorization():
    K = QuadField(7)
    P, Q = K.prime_splitting(2).primes
    R = K.prime_splitting(7).primes[0]
    I = P * P * Q * R * K.ideal(1, 1, 5)
    fac = dict(I.factor())
    assert fac[P] == 2 and fac[Q] == 1 and fac[R] == 1
    assert fac[K.ideal(1, 1, 5)] == 1


def test_reduce_form_recovers_class_representative():
    rnd = random.Random(23)
    K = QuadField(23)
    for form in K.reduced_forms:
        A, B, C = form
        for _ in range(40):
            # apply a random SL2(Z) transform, then reduce back
            a, b = 1, 0
            c, dd = rnd.randrange(-4, 5), 1
            for _ in range(rnd.randrange(1, 4)):
                a, b, c, dd = c, dd, -a + rnd.randrange(-3, 4) * c, -b + rnd.randrange(-3, 4) * dd
            if a * dd - b * c != 1:
                continue
            A2 = A * a * a + B * a * c + C * c * c
            B2 = 2 * A * a * b + B * (a * dd + b * c) + 2 * C * c * dd
            C2 = A * b * b + B * b * dd + C * dd * dd
            assert B2 * B2 - 4 * A2 * C2 == -23
            if A2 < 0:
                continue
            assert _reduce_form((A2, B2, C2)) == form


def test_ray_class_group_order_formula_d7():
    """Direct coset enumeration of (O_K/5)^x / <+-1> as the order oracle."""
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    # oracle: residues x + y*omega mod 5, unit iff (x, y) != (0, 0) since 5 is inert
    units = [(x, y) for x in range(5) for y in range(5) if (x, y) != (0, 0)]
    orbits = {frozenset({(x, y), ((-x) % 5, (-y) % 5)}) for (x, y) in units}
    assert G.order == len(orbits) == 12
    assert G.order == K.h_K * G.unit_count // G.torsion_image_size
    # C12 split into prime-power cyclic factors
    assert sorted(G.gen_orders) == [3, 4]
    assert G.gamma_indices == ()


def test_ray_class_group_is_cyclic_of_order_12_d7():
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    # some ideal class must have full order 12
    pool = [I for I in K.enumerate_ideals(60) if I.is_coprime(G.modulus)]
    orders = set()
    for I in pool:
        v = G.class_of(I)
        k = 1
        w = v
        while any(w):
            w = G.vec_add(w, v)
            k += 1
        orders.add(k)
    assert max(orders) == 12


def test_class_of_is_a_homomorphism():
    rnd = random.Random(5)
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    pool = [I for I in K.enumerate_ideals(150) if I.is_coprime(G.modulus)]
    for _ in range(80):
        I, J = rnd.choice(pool), rnd.choice(pool)
        assert G.class_of(I * J) == G.vec_add(G.class_of(I), G.class_of(J))


def test_class_of_kills_ray_principals():
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    zero = (0,) * G.rank
    assert G.class_of(K.unit_ideal) == zero
    # alpha = 1 mod 5 O_K
    for x, y in [(6, 0), (1, 5), (6, 5), (11, 10), (1, -5)]:
        assert G.class_of(K.principal(x, y)) == zero, (x, y)


def test_class_of_rejects_non_coprime():
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    with pytest.raises(NotCoprime):
        G.class_of(K.ideal(1, 1, 5))
    with pytest.raises(NotCoprime):
        G.class_of(K.principal(5, 5))


def test_ray_class_group_d23_trivial_modulus():
    K = QuadField(23)
    G = K.ray_class_group()
    assert G.order == 3 and G.gen_orders == (3,)
    P, Q = K.prime_splitting(2).primes
    vP, vQ = G.class_of(P), G.class_of(Q)
    assert vP != (0,) and vQ != (0,)
    assert G.vec_add(vP, vQ) == (0,)  # P * Q = (2) is principal
    assert G.class_of(P * P) == vQ  # squaring lands on the conjugate class
    # principal ideals vanish
    assert G.class_of(K.principal(1, 1)) == (0,)
    assert G.class_of(K.principal(3, 2)) == (0,)


def test_class_group_order_matches_enumeration_of_classes():
    """Classes seen among ideals of norm <= 200 exhaust the group."""
    K = QuadField(23)
    G = K.ray_class_group()
    seen = {G.class_of(I) for I in K.enumerate_ideals(200)}
    assert len(seen) == G.order
    K7 = QuadField(7)
    G7 = K7.ray_class_group(p=5, r=1)
    seen7 = {G7.class_of(I) for I in K7.enumerate_ideals(200, coprime_to=G7.modulus)}
    assert len(seen7) == G7.order


def test_unsupported_and_too_large_moduli():
    with pytest.raises(Unsupported):
        QuadField(23).ray_class_group(p=5, r=1)  # h_K = 3 with a ray modulus
    with pytest.raises(ModulusTooLarge):
        QuadField(7).ray_class_group(p=5, r=9)
    with pytest.raises(Unsupported):
        QuadField(7).ray_class_group(p=2, r=1)  # 2 splits in Q(sqrt(-7))
    with pytest.raises(DomainError):
        QuadField(7).ray_class_group(c0=QuadField(7).ideal(1, 1, 5), p=5, r=1)


def test_sigma_action_matches_conjugate_classes():
    rnd = random.Random(17)
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    pool = [I for I in K.enumerate_ideals(120) if I.is_coprime(G.modulus)]
    for _ in range(40):
        I = rnd.choice(pool)
        assert G.conj_vector(G.class_of(I)) == G.class_of(I.conj())
    G23 = QuadField(23).ray_class_group()
    for I in QuadField(23).enumerate_ideals(60):
        assert G23.conj_vector(G23.class_of(I)) == G23.class_of(I.conj())


def test_tower_level_two_splits_into_delta_and_gamma():
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=2)
    assert G.order == 300
    delta_orders = [G.gen_orders[i] for i in G.delta_indices]
    gamma_orders = [G.gen_orders[i] for i in G.gamma_indices]
    assert sorted(delta_orders) == [3, 4]  # the level-one part persists
    assert gamma_orders == [5, 5]
    orders, project = G.gamma_minus()
    assert orders == (5,)
    # the quotient kills norms: classes of I * conj(I) project to 0
    for I in K.enumerate_ideals(40, coprime_to=G.modulus):
        v = G.class_of(I * I.conj())
        assert project(v) == (0,)
    # and it is onto: some class projects away from 0
    assert any(project(G.class_of(I)) != (0,)
               for I in K.enumerate_ideals(40, coprime_to=G.modulus))


def test_ray_kernel_classes():
    K = QuadField(7)
    G = K.ray_class_group(p=5, r=1)
    # dropping all the way to level (1) frees every class: h_K = 1
    assert len(G.ray_kernel_classes(K.unit_ideal)) == G.order
    # dropping to the modulus itself frees nothing
    assert G.ray_kernel_classes(G.modulus) == {(0,) * G.rank}
    # at level (25) -> (5) the kernel is the 25-part of order 25
    G2 = K.ray_class_group(p=5, r=2)
    ker = G2.ray_kernel_classes(K.ideal(1, 1, 5))
    assert len(ker) == 25
    zero = (0,) * G2.rank
    assert zero in ker
    for v in ker:
        assert all(v[i] == 0 for i in G2.delta_indices)


def test_ideal_cache_roundtrip(tmp_path):
    K = QuadField(23)
    path = tmp_path / "ideals.csv"
    n = write_ideal_cache(K, 80, path)
    back = read_ideal_cache(K, path)
    assert len(back) == n
    assert back == list(K.enumerate_ideals(80))
    first = path.read_bytes()
    write_ideal_cache(K, 80, path)
    assert path.read_bytes() == first  # byte-identical rewrite
    # tampered rows are rejected
    lines = first.decode().splitlines()
    lines[1] = "3,2,1,1"
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises((ParseError, DomainError)):
        read_ideal_cache(K, path)


def test_enumeration_is_sorted_and_duplicate_free():
    K = QuadField(23)
    ideals = list(K.enumerate_ideals(300))
    keys = [(I.norm, I.a, I.b) for I in ideals]
    assert keys == sorted(keys)
    assert len(set(ideals)) == len(ideals)
