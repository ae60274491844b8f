import io

import pytest
from hypothesis import given, settings, strategies as st

from noether.cyclotomic import CycInt, conjugate, content, eval_mod, norm, norm_by_conjugates, parse
from noether.errors import ArgumentError, ConsistencyError, ReproductionError
from noether.reduction import GroupSpec, Verdict, validate_witness
from noether.search import (
    CSV_COLUMNS,
    ERRATA,
    PUBLISHED_TRIPLES,
    SearchConfig,
    TripleRecord,
    candidate_count,
    prime_power_family,
    find_r,
    find_twist,
    find_witness,
    iter_norm_solutions,
    orbit_key,
    reproduce_examples,
    reproduce_triple,
    select_triples,
    solve_norm_equation,
    witness_from_element,
    write_csv,
)

from conftest import sympy_norm


class TestConfig:
    @pytest.mark.parametrize("kw", [{"coeff_bound": 0}, {"max_candidates": -1}, {"limit": 0}, {"jobs": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ArgumentError):
            SearchConfig(**kw)

    def test_defaults(self):
        cfg = SearchConfig()
        assert cfg.coeff_bound == 2 and cfg.max_candidates == 10**6


class TestSolveNorm:
    def test_q3_target7(self):
        sols = solve_norm_equation(3, 7, SearchConfig(coeff_bound=3))
        assert CycInt(3, (1, 3)) in sols
        # every a + b z with a^2 - ab + b^2 = 7 in the box, found by brute force
        brute = {(a, b) for a in range(-3, 4) for b in range(-3, 4) if a * a - a * b + b * b == 7}
        assert {x.coeffs for x in sols} == brute

    def test_enumeration_order(self):
        sols = solve_norm_equation(3, 7, SearchConfig(coeff_bound=3))
        keys = [(sum(1 for c in x.coeffs if c), max(map(abs, x.coeffs))) for x in sols]
        assert keys == sorted(keys)
        assert sols[0] == CycInt(3, (-2, 1))

    @pytest.mark.parametrize("q", [3, 5, 7, 11])
    def test_target_q_contains_associate_of_one_minus_zeta(self, q):
        sols = solve_norm_equation(q, q, SearchConfig(coeff_bound=1))
        keys = {orbit_key(x) for x in sols}
        one_minus = CycInt.constant(q, 1) - CycInt.zeta(q)
        assert orbit_key(one_minus) in keys

    def test_published_element_found(self):
        cfg = SearchConfig(coeff_bound=1, max_candidates=30000)
        sols = solve_norm_equation(29, 5801, cfg)
        assert parse("1 + z + z^4", 29) in sols
        for x in sols[:20]:
            assert norm_by_conjugates(x) == 5801
            assert content(x) == 1

    @given(st.sampled_from([3, 5, 7]), st.integers(2, 60))
    @settings(max_examples=25, deadline=None)
    def test_solutions_verify_independently(self, q, target):
        for x in solve_norm_equation(q, target, SearchConfig(coeff_bound=2, max_candidates=5000)):
            assert sympy_norm(q, x.coeffs) == target

    def test_prime_target_prunes_content(self):
        # 2 + 2z has norm 4 * 1 at q = 3 but content 2
        sols = solve_norm_equation(3, 4, SearchConfig(coeff_bound=2))
        assert CycInt(3, (2, 2)) in sols
        sols = solve_norm_equation(5, 16, SearchConfig(coeff_bound=2))
        assert CycInt(5, (2, 0, 0, 0)) in sols
        sols_prime = solve_norm_equation(3, 7, SearchConfig(coeff_bound=3))
        assert all(content(x) == 1 for x in sols_prime)

    def test_negative_and_zero_target(self):
        assert solve_norm_equation(5, -5) == []
        with pytest.raises(ArgumentError):
            solve_norm_equation(5, 0)

    def test_empty_box_is_empty_list(self):
        assert solve_norm_equation(5, 2, SearchConfig(coeff_bound=1)) == []

    def test_limit(self):
        sols = solve_norm_equation(3, 7, SearchConfig(coeff_bound=3, limit=2))
        assert sols == solve_norm_equation(3, 7, SearchConfig(coeff_bound=3))[:2]

    def test_max_candidates_caps_work(self):
        cfg = SearchConfig(coeff_bound=2, max_candidates=10)
        assert candidate_count(5, cfg) == 10
        full = candidate_count(5, SearchConfig(coeff_bound=1, max_candidates=10**9))
        assert full == 3**4 - 1
        assert solve_norm_equation(5, 5, SearchConfig(coeff_bound=1, max_candidates=4)) == []

    def test_dedupe_one_per_orbit(self):
        raw = solve_norm_equation(5, 11, SearchConfig(coeff_bound=1))
        dd = solve_norm_equation(5, 11, SearchConfig(coeff_bound=1, dedupe=True))
        assert len(dd) < len(raw)
        assert len({orbit_key(x) for x in dd}) == len(dd)
        assert {orbit_key(x) for x in dd} == {orbit_key(x) for x in raw}

    def test_orbit_key_invariance(self):
        x = parse("1 + z + z^4", 29)
        k = orbit_key(x)
        assert orbit_key(-x) == k
        assert orbit_key(conjugate(x, 3)) == k
        assert orbit_key(x * CycInt.zeta(29, 5)) == k

    @pytest.mark.parametrize("jobs", [2, 3])
    def test_sharding_is_canonical(self, jobs):
        base = SearchConfig(coeff_bound=2, max_candidates=20000)
        seq = solve_norm_equation(7, 29, base)
        par = solve_norm_equation(7, 29, SearchConfig(coeff_bound=2, max_candidates=20000, jobs=jobs))
        assert seq == par and seq
        lim = SearchConfig(coeff_bound=2, max_candidates=20000, limit=5, jobs=jobs)
        assert solve_norm_equation(7, 29, lim) == seq[:5]

    def test_iterator_matches_list(self):
        cfg = SearchConfig(coeff_bound=2)
        assert list(iter_norm_solutions(5, 11, cfg)) == solve_norm_equation(5, 11, cfg)


class TestFindR:
    @pytest.mark.parametrize("p, q, r", [(7, 3, 2), (31, 5, 2), (13, 3, 3)])
    def test_small(self, p, q, r):
        assert find_r(p, q) == r

    def test_smallest_by_scan(self):
        for p, q in [(5801, 29), (11657, 31), (101107, 41)]:
            r = find_r(p, q)
            assert pow(r, q, p) == 1 and r % p != 1
            assert all(pow(s, q, p) != 1 for s in range(2, r))

    def test_errors(self):
        with pytest.raises(ArgumentError):
            find_r(11, 3)
        with pytest.raises(ArgumentError):
            find_r(15, 7)


class TestTwist:
    def test_identity_twist(self):
        assert find_twist(CycInt(3, (1, 3)), 2, 7) == 1

    @pytest.mark.parametrize("q, p, text", PUBLISHED_TRIPLES[:8] + PUBLISHED_TRIPLES[-2:])
    def test_published(self, q, p, text):
        x = parse(ERRATA.get((q, p), text), q)
        r = find_r(p, q)
        k = find_twist(x, r, p)
        assert 1 <= k < q
        assert eval_mod(x, pow(r, k, p), p) == 0
        assert eval_mod(conjugate(x, k), r, p) == 0

    def test_no_twist_is_internal_error(self):
        with pytest.raises(ConsistencyError):
            find_twist(CycInt(3, (1, 1)), 2, 7)


class TestWitness:
    def test_small_spec(self):
        spec = GroupSpec(7, 3, 2)
        w = find_witness(spec, SearchConfig(coeff_bound=3))
        validate_witness(w, spec)
        assert norm(w.element()) == 7

    def test_documented_witness_certifies(self):
        # (1; 1, 3) is the witness for (7, 3, 2) reached via 1 + 3z
        w = witness_from_element(CycInt(3, (1, 3)), GroupSpec(7, 3, 2))
        assert (w.a1, w.alphas) == (1, (1, 3))

    def test_sign_flip(self):
        w = witness_from_element(CycInt(3, (-1, -3)), GroupSpec(7, 3, 2))
        assert (w.a1, w.alphas) == (1, (1, 3))

    def test_rejections(self):
        spec = GroupSpec(7, 3, 2)
        assert witness_from_element(CycInt(3, (-2, 1)), spec) is None    # a1 = 0
        assert witness_from_element(CycInt(3, (1, 2)), spec) is None     # 5 not divisible by 7
        assert witness_from_element(CycInt(3, (14, 0)), spec) is None    # content 14
        with pytest.raises(ArgumentError):
            witness_from_element(CycInt(5, (1, 0, 0, 0)), spec)

    def test_family_spec(self):
        spec = GroupSpec(25, 5, 6)
        w = find_witness(spec)
        validate_witness(w, spec)
        assert norm(w.element()) == 5

    def test_inconclusive(self):
        assert find_witness(GroupSpec(7, 3, 2), SearchConfig(coeff_bound=1)) is None


class TestFamily:
    @pytest.mark.parametrize("q, alpha, k", [(q, a, k) for q in (3, 5, 7) for a in (1, 2, 4) for k in (2, 3, 4)])
    def test_members(self, q, alpha, k):
        spec, w = prime_power_family(q, alpha, k)
        assert spec.m == alpha * q**k and spec.r == alpha * q ** (k - 1) + 1
        assert pow(spec.r, q, spec.m) == 1
        assert spec.mprime == q
        assert norm(w.element()) == q
        validate_witness(w, spec)

    def test_examples(self):
        spec, _ = prime_power_family(5, 1, 2)
        assert (spec.m, spec.r, spec.mprime) == (25, 6, 5)
        spec, _ = prime_power_family(3, 2, 2)
        assert (spec.m, spec.r) == (18, 7) and 7**3 % 18 == 1

    @pytest.mark.parametrize("q, alpha, k", [(3, 3, 2), (5, 10, 2), (5, 0, 2), (5, 1, 1), (4, 1, 2)])
    def test_rejected(self, q, alpha, k):
        with pytest.raises(ArgumentError):
            prime_power_family(q, alpha, k)

    def test_search_finds_family_witness(self):
        spec, _ = prime_power_family(7, 1, 2)
        assert find_witness(spec, SearchConfig(coeff_bound=1)) is not None


class TestPublished:
    def test_table_shape(self):
        assert len(PUBLISHED_TRIPLES) == 24
        assert sum(1 for t in PUBLISHED_TRIPLES if t[0] == 29) == 8

    def test_primes_and_divisibility(self):
        import sympy
        for q, p, _ in PUBLISHED_TRIPLES:
            assert sympy.isprime(p) and (p - 1) % q == 0

    def test_misprinted_row(self):
        x = parse("1 + z + z^4", 29)
        assert norm(x) == 5801 != 18097
        fixed = parse(ERRATA[(29, 18097)], 29)
        assert norm(fixed) == 18097
        assert sympy_norm(29, fixed.coeffs) == 18097

    def test_other_rows_exact(self):
        for q, p, text in PUBLISHED_TRIPLES:
            if (q, p) not in ERRATA:
                assert sympy_norm(q, parse(text, q).coeffs) == p

    def test_reproduce_one(self):
        rec = reproduce_triple(31, 5953, parse("-1 - z + z^3", 31))
        assert rec.verdict is Verdict.RATIONAL
        assert rec.certificate.trace.final_entry == 1

    def test_literal_table_names_failing_row(self):
        with pytest.raises(ReproductionError) as ei:
            reproduce_examples(q=29)
        assert [(q, p) for q, p, _, _ in ei.value.failures] == [(29, 18097)]
        assert len(ei.value.records) == 7
        assert "18097" in str(ei.value)

    def test_selection(self):
        assert len(select_triples(31)) == 5
        assert select_triples(43) == []
        assert reproduce_examples(q=43) == []

    def test_parallel_matches_sequential(self):
        seq = reproduce_examples(q=31)
        par = reproduce_examples(q=31, jobs=2)
        assert [r.csv_row() for r in seq] == [r.csv_row() for r in par]


class TestCsv:
    def test_columns(self):
        recs = reproduce_examples(q=31)
        text = write_csv(recs)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS) == "q,p,x,r,k,verdict"
        assert len(lines) == 6
        assert lines[1].startswith("31,5953,-1 - z + z^3,")
        assert lines[1].endswith(",Rational")

    def test_to_stream(self):
        buf = io.StringIO()
        write_csv([], buf)
        assert buf.getvalue() == "q,p,x,r,k,verdict\n"
