"""Mahler module tests: fitting, evaluation, norms, products, characters."""

import random
from fractions import Fraction

import pytest

from padic_slopes.mahler import (
    DecayReport,
    TailBound,
    ZERO_TAIL,
    amice_scale,
    character,
    decay_report,
    eval_fn,
    fit_values,
    int_binom,
    make_fn,
    mul,
    norm_r,
    vp_factorial,
)
from padic_slopes.rings import FpLaurent, MixedAnnulus, Qp, RingError, Zp, make_ring


def test_fit_z_squared():
    # z^2 = binom(z,1) + 2 binom(z,2): coeffs (0, 1, 2)
    r = make_ring(Zp(3, 6))
    f = fit_values([r.from_int(z * z) for z in range(3)])
    assert [f.coeff((n,)).lift() for n in range(3)] == [0, 1, 2]


def test_fit_constant():
    r = make_ring(Zp(3, 6))
    f = fit_values([r.from_int(1) for _ in range(4)])
    assert f.coeff((0,)).lift() == 1
    assert all(f.coeff((n,)).is_zero_at_prec() for n in range(1, 4))


def test_fit_bilinear_k2():
    # values of z1*z2 on {0,1,2}^2 -> a_(1,1) = 1, all others 0
    r = make_ring(Zp(3, 6))
    grid = {(a, b): r.from_int(a * b) for a in range(3) for b in range(3)}
    # independent oracle: iterated differences along each axis by hand
    d1 = {(n, b): grid[(n + 1, b)] - grid[(n, b)] for n in range(2) for b in range(3)}
    assert d1[(1, 2)].lift() == 2  # sanity of the oracle arithmetic
    f = fit_values(grid)
    for n, c in f.coeffs.items():
        if n == (1, 1):
            assert c.lift() == 1
        else:
            assert c.is_zero_at_prec()


def test_incomplete_grid_rejected():
    r = make_ring(Zp(3, 6))
    grid = {(a, b): r.from_int(a * b) for a in range(3) for b in range(3)}
    del grid[(2, 2)]
    with pytest.raises(RingError, match="incomplete grid"):
        fit_values(grid)


def test_eval_z_squared_at_3():
    r = make_ring(Zp(3, 6))
    f = fit_values([r.from_int(z * z) for z in range(3)])
    assert eval_fn(f, 3).lift() == 9


def test_eval_constant():
    r = make_ring(Zp(5, 4))
    f = fit_values([r.from_int(1) for _ in range(3)])
    for z in (0, 7, 123):
        assert eval_fn(f, z).lift() == 1


def test_eval_character_matches_modexp_oracle():
    # character with a_n = p^n is z -> (1+p)^z; compare with binary modexp
    p, N = 3, 6
    r = make_ring(Zp(p, N))
    g = character(r, r.from_int(1 + p), cutoff=14)
    z = 1 + p
    oracle = pow(1 + p, z, p ** N)  # modular exponentiation oracle
    got = eval_fn(g, z)
    assert got.truncate(got.prec).payload == oracle % p ** got.prec


def test_roundtrip_1000_random_fns():
    rng = random.Random(0xA11CE)
    for spec in (Zp(3, 8), FpLaurent(2, 10)):
        r = make_ring(spec)
        for _ in range(500):
            D = rng.randrange(1, 6)
            if spec.kind == "Zp":
                coeffs = {(n,): r.from_int(rng.randrange(3 ** 8)) for n in range(D + 1)}
            else:
                coeffs = {(n,): r.from_terms([(rng.randrange(0, 10), 1)])
                          for n in range(D + 1)}
            f = make_fn(spec, coeffs, tail=ZERO_TAIL)
            refit = fit_values([eval_fn(f, z) for z in range(D + 1)])
            for n in range(D + 1):
                assert refit.coeff((n,)).agrees(coeffs[(n,)])


def test_norm_isometry_scaled_basis():
    # f = alpha^(ceil(r n)) binom(z, n) has |f|_r = 1
    r_rad = Fraction(2, 3)
    for spec in (Qp(3, 8), FpLaurent(2, 10)):
        ring = make_ring(spec)
        for n in range(6):
            e = -((-2 * n) // 3)  # ceil(2n/3)
            coeffs = {(n,): ring.alpha() ** e}
            f = make_fn(spec, coeffs, cutoff=n, tail=ZERO_TAIL)
            nv = norm_r(f, r_rad)
            assert nv.value == 1 and nv.certified


def test_norm_unit_constant():
    ring = make_ring(Qp(3, 8))
    f = make_fn(Qp(3, 8), {(0,): ring.one()}, tail=ZERO_TAIL)
    assert norm_r(f, Fraction(1)).value == 1


def test_norm_single_a1():
    # coeffs a_1 = 1 in Qp(3, .), r = 1: norm = |alpha^{-1}|^1 = 3
    ring = make_ring(Qp(3, 8))
    f = make_fn(Qp(3, 8), {(1,): ring.one()}, tail=ZERO_TAIL)
    nv = norm_r(f, Fraction(1))
    assert nv.value == 3 and nv.certified


def test_norm_uncertified_without_tail():
    ring = make_ring(Qp(3, 8))
    f = make_fn(Qp(3, 8), {(1,): ring.one()})
    assert not norm_r(f, Fraction(1)).certified


def test_decay_character_margin_zero():
    # lambda(1) - 1 = p, r = 1 in Zp(3,6): margin 0 at every degree
    ring = make_ring(Zp(3, 6))
    g = character(ring, ring.from_int(4), cutoff=5)
    rep = decay_report(g, Fraction(1))
    nonvac = [(d, m) for d, m in rep.witness if m is not None]
    assert all(m == 0 for _, m in nonvac)
    assert rep.certified


def test_decay_polynomial_vacuous():
    ring = make_ring(Zp(3, 6))
    f = fit_values([ring.from_int(z * z) for z in range(6)])
    rep = decay_report(f, Fraction(1, 2))
    assert all(m is None for d, m in rep.witness if d > 2)
    assert rep.certified


def test_decay_constant_coeffs_fail():
    ring = make_ring(Zp(3, 6))
    coeffs = {(n,): ring.one() for n in range(7)}
    f = make_fn(Zp(3, 6), coeffs, tail=ZERO_TAIL)
    rep = decay_report(f, Fraction(1))
    margins = [m for _, m in rep.witness if m is not None]
    assert margins == [-n for n in range(7)]
    assert not rep.certified


def binom_product_oracle(ring, i, j, side):
    """Pointwise values of binom(z,i)binom(z,j) differenced by hand."""
    vals = [ring.from_int(int_binom(z, i) * int_binom(z, j)) for z in range(side + 1)]
    out = []
    row = list(vals)
    out.append(row[0])
    for _ in range(side):
        row = [row[t + 1] - row[t] for t in range(len(row) - 1)]
        out.append(row[0])
    return out


def test_mul_binom_identities():
    ring = make_ring(Zp(3, 8))
    spec = Zp(3, 8)

    def basis(n, cutoff):
        coeffs = {(m,): ring.one() if m == n else ring.from_int(0) for m in range(cutoff + 1)}
        return make_fn(spec, coeffs, cutoff=cutoff, tail=ZERO_TAIL)

    # binom(z,1)^2 = binom(z,1) + 2 binom(z,2)
    b1 = basis(1, 4)
    prod = mul(b1, b1)
    assert prod.coeff((1,)).lift() == 1
    assert prod.coeff((2,)).lift() == 2
    assert prod.coeff((3,)).is_zero_at_prec()

    # f * 1 = f
    one = basis(0, 4)
    f = fit_values([ring.from_int(z ** 3 + 2 * z) for z in range(5)])
    same = mul(f, one)
    for n in range(5):
        assert same.coeff((n,)).agrees(f.coeff((n,)))

    # binom(z,1) binom(z,2) = 2 binom(z,2) + 3 binom(z,3), against the oracle
    oracle = binom_product_oracle(ring, 1, 2, 4)
    assert [c.lift() for c in oracle[:4]] == [0, 0, 2, 3]
    b2 = basis(2, 4)
    prod2 = mul(b1, b2)
    assert prod2.coeff((2,)).lift() == 2
    assert prod2.coeff((3,)).lift() == 3


def test_character_examples():
    # (1+p)^z over Zp(3,6): a_n = 3^n
    ring = make_ring(Zp(3, 6))
    g = character(ring, ring.from_int(4), cutoff=5)
    for n in range(6):
        c = g.coeff((n,))
        if n < 6:
            assert c.agrees(ring.from_int(3 ** n))

    # trivial character: coeffs (1, 0, 0, ...)
    triv = character(ring, ring.one(), cutoff=4)
    assert triv.coeff((0,)).lift() == 1
    assert all(triv.coeff((n,)).is_zero_at_prec() for n in range(1, 5))

    # boundary (1+T)^z over FpLaurent(2,8): a_n = T^n exactly
    rt = make_ring(FpLaurent(2, 8))
    gb = character(rt, rt.from_terms([(0, 1), (1, 1)]), cutoff=7)
    for n in range(8):
        assert gb.coeff((n,)).payload == ((n, 1),)

    # a unit lambda(1)-1 is rejected
    with pytest.raises(RingError, match="not locally analytic"):
        character(ring, ring.from_int(2), cutoff=3)


def test_character_homomorphism_random_pairs():
    rng = random.Random(31337)
    ring = make_ring(Zp(3, 7))
    g = character(ring, ring.from_int(1 + 3), cutoff=16)
    for _ in range(200):
        x, y = rng.randrange(3 ** 7), rng.randrange(3 ** 7)
        lhs = eval_fn(g, x + y)
        rhs = eval_fn(g, x) * eval_fn(g, y)
        assert lhs.agrees(rhs, prec=min(lhs.prec, rhs.prec))


def test_vp_factorial():
    # independent factorial-factorization oracle
    import math

    def oracle(n, p):
        f, v = math.factorial(n), 0
        while f % p == 0:
            v, f = v + 1, f // p
        return v

    assert vp_factorial(10, 2) == 8 == oracle(10, 2)
    assert vp_factorial(0, 5) == 0
    assert vp_factorial(9, 3) == 4 == oracle(9, 3)
    for n in (1, 7, 23, 100, 243):
        for p in (2, 3, 5):
            assert vp_factorial(n, p) == oracle(n, p)


def test_vp_factorial_bounds():
    import math

    for p in (2, 3, 5):
        for n in range(0, 10001, 37):
            v = vp_factorial(n, p)
            assert v <= Fraction(n, p - 1)
            assert Fraction(n, p - 1) - (math.log(n + 1) / math.log(p)) <= v


def test_amice_scale():
    assert amice_scale((3 ** 2,), 2, 3) == 0  # floor(p^h/p^h)! = 1!
    assert amice_scale((0, 0), 1, 3) == 0
    assert amice_scale((10,), 1, 2) == 3  # v_2(5!) = 3


def test_mul_product_decay():
    # certified factors at radius r stay certified at tested s < r
    ring = make_ring(Qp(3, 10))
    f = character(ring, ring.from_int(1 + 9), cutoff=8)   # rate 2
    g = character(ring, ring.from_int(1 + 9), cutoff=8)
    h = mul(f, g)
    for s in (Fraction(1), Fraction(3, 2)):
        assert decay_report(h, s).certified
        assert decay_report(f, s).certified
