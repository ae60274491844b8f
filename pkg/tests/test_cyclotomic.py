import pytest
from hypothesis import given, settings, strategies as st

from noether.cyclotomic import (
    CycInt,
    check_conductor,
    conjugate,
    content,
    cyclotomic_value,
    eval_mod,
    evaluate,
    format_cycint,
    mul,
    norm,
    norm_by_conjugates,
    norm_matrix,
    parse,
    reduce_poly,
)
from noether.errors import ArgumentError, ParseError, PreconditionError
from noether.linalg import IMatrix

from conftest import sympy_norm

PRIMES = [3, 5, 7, 11, 13]


def cycints(q, bound=4):
    return st.lists(st.integers(-bound, bound), min_size=q - 1, max_size=q - 1).map(
        lambda c: CycInt(q, tuple(c)))


def cyc_pairs(bound=4):
    return st.sampled_from(PRIMES).flatmap(lambda q: st.tuples(cycints(q, bound), cycints(q, bound)))


class TestConstruction:
    def test_conductor_must_be_odd_prime(self):
        for bad in (1, 2, 4, 9, 15):
            with pytest.raises(ArgumentError):
                check_conductor(bad)
        assert check_conductor(29) == 29

    def test_coefficient_count(self):
        with pytest.raises(ArgumentError):
            CycInt(5, (1, 2, 3))

    def test_top_power_folds(self):
        assert CycInt.zeta(5, 4).coeffs == (-1, -1, -1, -1)
        assert CycInt.zeta(5, 5) == CycInt.constant(5, 1)
        assert CycInt.zeta(5, -1) == CycInt.zeta(5, 4)

    def test_reduce_poly_folds_exponents(self):
        assert reduce_poly([0, 0, 0, 0, 0, 0, 1], 5) == CycInt.zeta(5, 1)

    def test_from_dict(self):
        x = CycInt.from_dict(7, {0: 1, 1: 1, 6: 1})
        assert x == CycInt(7, (0, 0, -1, -1, -1, -1))


class TestArithmetic:
    def test_zeta_has_order_q(self):
        z = CycInt.zeta(7)
        acc = CycInt.constant(7, 1)
        for _ in range(7):
            acc = acc * z
        assert acc == CycInt.constant(7, 1)

    def test_sum_of_powers_is_zero(self):
        total = CycInt.constant(5, 0)
        for i in range(5):
            total = total + CycInt.zeta(5, i)
        assert total.is_zero()

    def test_different_rings(self):
        with pytest.raises(ArgumentError):
            CycInt.zeta(3) + CycInt.zeta(5)

    @given(cyc_pairs())
    def test_ring_laws(self, xy):
        x, y = xy
        assert x * y == y * x
        assert (x + y) - y == x
        assert -(-x) == x

    @given(st.sampled_from(PRIMES).flatmap(lambda q: st.tuples(cycints(q), cycints(q), cycints(q))))
    @settings(max_examples=50)
    def test_distributive(self, xyz):
        x, y, z = xyz
        assert x * (y + z) == x * y + x * z

    def test_conjugate_requires_unit_exponent(self):
        with pytest.raises(ArgumentError):
            conjugate(CycInt.zeta(5), 5)

    @given(cyc_pairs(), st.integers(1, 12))
    def test_conjugation_is_ring_map(self, xy, k):
        x, y = xy
        if k % x.n == 0:
            return
        assert conjugate(x * y, k) == conjugate(x, k) * conjugate(y, k)


class TestNorm:
    @pytest.mark.parametrize("q, coeffs, value", [
        (29, {0: 1, 1: 1, 4: 1}, 5801),
        (29, {0: 1, 1: -1, 4: 1}, 18097),
        (5, {0: 1, 1: -1}, 5),
        (3, {0: 1, 1: 3}, 7),
        (7, {0: 1}, 1),
        (31, {0: -1, 1: -1, 3: 1}, 5953),
        (41, {0: 1, 2: 1, 5: 1}, 432059),
    ])
    def test_known_values(self, q, coeffs, value):
        x = CycInt.from_dict(q, coeffs)
        assert norm(x) == value
        assert norm_by_conjugates(x) == value

    def test_zero(self):
        assert norm(CycInt.constant(7, 0)) == 0

    def test_quadratic_form_at_three(self):
        # N(a + b z) = a^2 - ab + b^2 for q = 3
        for a in range(-4, 5):
            for b in range(-4, 5):
                assert norm(CycInt(3, (a, b))) == a * a - a * b + b * b

    def test_norm_matrix_layout_n5(self):
        # column j holds x z^j; pinned against a hand expansion
        M = norm_matrix(CycInt(5, (1, 2, 3, 4)))
        assert M == IMatrix([[1, -4, 1, 1], [2, -3, -3, 2], [3, -2, -2, -2], [4, -1, -1, -1]])

    def test_norm_matrix_columns_are_products(self):
        x = CycInt(7, (3, -1, 0, 2, 5, -2))
        M = norm_matrix(x)
        for j in range(6):
            assert M.col(j) == (x * CycInt.zeta(7, j)).coeffs

    @given(st.sampled_from(PRIMES).flatmap(cycints))
    @settings(max_examples=40)
    def test_matches_resultant_oracle(self, x):
        assert norm(x) == sympy_norm(x.n, x.coeffs)

    @given(cyc_pairs(3))
    @settings(max_examples=60)
    def test_multiplicative(self, xy):
        x, y = xy
        assert norm(x * y) == norm(x) * norm(y)

    @given(st.sampled_from(PRIMES).flatmap(cycints), st.integers(1, 12))
    def test_galois_invariant(self, x, k):
        if k % x.n:
            assert norm(conjugate(x, k)) == norm(x)

    @given(st.sampled_from(PRIMES).flatmap(cycints))
    def test_non_negative(self, x):
        assert norm(x) >= 0


class TestEvaluation:
    def test_evaluate(self):
        assert evaluate(CycInt(3, (1, 3)), 2) == 7

    def test_cyclotomic_value(self):
        assert cyclotomic_value(3, 2) == 7
        assert cyclotomic_value(5, 1) == 5

    def test_eval_mod_homomorphism(self):
        # 2 has order 3 mod 7
        x, y = CycInt(3, (1, 3)), CycInt(3, (-2, 5))
        assert eval_mod(x, 2, 7) == 0
        assert eval_mod(x * y, 2, 7) == eval_mod(x, 2, 7) * eval_mod(y, 2, 7) % 7

    def test_eval_mod_rejects_non_root(self):
        with pytest.raises(PreconditionError):
            eval_mod(CycInt(3, (1, 1)), 3, 7)
        with pytest.raises(ArgumentError):
            eval_mod(CycInt(3, (1, 1)), 2, 1)

    def test_content(self):
        assert content(CycInt(5, (2, 4, 0, -6))) == 2
        assert content(CycInt.constant(5, 0)) == 0


class TestText:
    @pytest.mark.parametrize("text, q, coeffs", [
        ("1 + z + z^4", 29, {0: 1, 1: 1, 4: 1}),
        ("-1 - z + z^3", 31, {0: -1, 1: -1, 3: 1}),
        ("2*z^3 - 5", 7, {0: -5, 3: 2}),
        ("z**2", 5, {2: 1}),
        ("1 - z", 5, {0: 1, 1: -1}),
        ("3 + 2*z + z", 3, {0: 3, 1: 3}),
    ])
    def test_parse(self, text, q, coeffs):
        assert parse(text, q) == CycInt.from_dict(q, coeffs)

    @pytest.mark.parametrize("bad", ["", "1 +", "1 + y", "z^", "1 2", "+"])
    def test_parse_errors(self, bad):
        with pytest.raises(ParseError):
            parse(bad, 5)

    def test_format(self):
        assert format_cycint(CycInt(29, (1, 1, 0, 0, 1) + (0,) * 23)) == "1 + z + z^4"
        assert format_cycint(CycInt(5, (-1, -1, -1, -1))) == "-1 - z - z^2 - z^3"
        assert format_cycint(CycInt(5, (0, 0, 0, 2))) == "2*z^3"
        assert format_cycint(CycInt(5, (0, 0, 0, 0))) == "0"

    @given(st.sampled_from(PRIMES).flatmap(lambda q: cycints(q, 20)))
    def test_round_trip(self, x):
        assert parse(str(x), x.n) == x
