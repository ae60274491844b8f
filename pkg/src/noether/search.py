"""Norm-equation search in Z[zeta_q] and witness assembly.

Candidates are enumerated over the box [-B, B]^(q-1) in a fixed order:
support size, then largest |coefficient|, then lexicographically by
(support, values).  A float pass on log|prod x(zeta^k)| discards almost
everything; survivors are confirmed with the exact determinant norm, so
floating point never decides a result on its own.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

from .cyclotomic import CycInt, check_conductor, conjugate, content, eval_mod, evaluate, norm, parse
from .errors import ArgumentError, ConsistencyError, ReproductionError
from .reduction import Certificate, GroupSpec, Verdict, Witness, certify, run_reduction

_LOG_TOL = 1e-7
_CHUNK = 4096  # candidate vectors per numpy batch


@dataclass(frozen=True)
class SearchConfig:
    coeff_bound: int = 2
    max_candidates: int = 10**6
    dedupe: bool = False
    limit: int | None = None   # stop after this many solutions
    jobs: int = 1

    def __post_init__(self):
        if self.coeff_bound < 1:
            raise ArgumentError(f"coeff_bound must be >= 1, got {self.coeff_bound}")
        if self.max_candidates < 0:
            raise ArgumentError(f"max_candidates must be >= 0, got {self.max_candidates}")
        if self.limit is not None and self.limit < 1:
            raise ArgumentError(f"limit must be >= 1, got {self.limit}")
        if self.jobs < 1:
            raise ArgumentError(f"jobs must be >= 1, got {self.jobs}")


# ---------------------------------------------------------------------------
# enumeration
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _value_patterns(s: int, M: int) -> np.ndarray:
    """All nonzero vectors in [-M, M]^s with max |entry| == M, lexicographic."""
    vals = [v for v in range(-M, M + 1) if v]
    rows = [t for t in itertools.product(vals, repeat=s) if max(map(abs, t)) == M]
    return np.array(rows, dtype=np.int64).reshape(len(rows), s)


def _pattern_count(s: int, M: int) -> int:
    return (2 * M) ** s - (2 * M - 2) ** s


@dataclass(frozen=True)
class _Unit:
    """Candidates of support size s, max |coeff| M, smallest support index i0."""

    s: int
    M: int
    i0: int
    take: int | None = None  # candidate budget inside this unit

    def size(self, dim: int) -> int:
        return math.comb(dim - 1 - self.i0, self.s - 1) * _pattern_count(self.s, self.M)


def _plan(dim: int, cfg: SearchConfig) -> list[_Unit]:
    """Work units in enumeration order, truncated at max_candidates."""
    units = []
    budget = cfg.max_candidates
    for s in range(1, dim + 1):
        for M in range(1, cfg.coeff_bound + 1):
            for i0 in range(dim - s + 1):
                if budget <= 0:
                    return units
                u = _Unit(s, M, i0)
                n = u.size(dim)
                if n > budget:
                    units.append(replace(u, take=budget))
                    return units
                units.append(u)
                budget -= n
    return units


def candidate_count(q: int, cfg: SearchConfig) -> int:
    """Number of box elements the search inspects (after the max_candidates cap)."""
    dim = check_conductor(q) - 1
    total = 0
    for u in _plan(dim, cfg):
        n = u.size(dim)
        total += n if u.take is None else u.take
    return total


@lru_cache(maxsize=None)
def _root_powers(q: int) -> np.ndarray:
    """zeta_q^(j k) for j = 0..q-2 (basis index) and k = 1..q-1 (embedding)."""
    j = np.arange(q - 1)[:, None]
    k = np.arange(1, q)[None, :]
    return np.exp(2j * np.pi * ((j * k) % q) / q)


def _supports(dim: int, s: int, i0: int) -> Iterator[tuple[int, ...]]:
    for rest in itertools.combinations(range(i0 + 1, dim), s - 1):
        yield (i0,) + rest


def _run_unit(q: int, target: int, prime_target: bool, u: _Unit) -> list[tuple[int, tuple[int, ...]]]:
    """Exact hits inside one unit as (position in unit, coefficient vector)."""
    dim = q - 1
    pats = _value_patterns(u.s, u.M)
    npat = len(pats)
    roots = _root_powers(q)
    log_target = math.log(target)
    limit = u.size(dim) if u.take is None else u.take
    hits = []
    sup_iter = _supports(dim, u.s, u.i0)
    per_chunk = max(1, _CHUNK // npat)
    pos = 0
    while pos < limit:
        sups = list(itertools.islice(sup_iter, per_chunk))
        if not sups:
            break
        S = np.array(sups, dtype=np.int64)                # (c, s)
        Z = roots[S]                                      # (c, s, q-1)
        vals = np.einsum("vt,ctk->cvk", pats, Z)          # (c, v, q-1)
        with np.errstate(divide="ignore"):
            logs = np.log(np.abs(vals)).sum(axis=-1)      # (c, v)
        ci, vi = np.nonzero(np.abs(logs - log_target) < _LOG_TOL)
        for c, v in zip(ci.tolist(), vi.tolist()):
            idx = pos + c * npat + v
            if idx >= limit:
                continue
            coeffs = [0] * dim
            for t, j in enumerate(sups[c]):
                coeffs[j] = int(pats[v, t])
            x = CycInt(q, tuple(coeffs))
            if prime_target and content(x) > 1:
                continue
            if norm(x) == target:
                hits.append((idx, x.coeffs))
        pos += len(sups) * npat
    hits.sort()
    return hits


def orbit_key(x: CycInt) -> tuple:
    """Canonical label of the class {+-zeta^j sigma_k(x)} (norm-preserving moves)."""
    q = x.n
    best = None
    for k in range(1, q):
        y = conjugate(x, k)
        for j in range(q):
            z = y * CycInt.zeta(q, j)
            for w in (z, -z):
                key = _order_key(w.coeffs)
                if best is None or key < best:
                    best = key
    return best


def _order_key(coeffs: Sequence[int]) -> tuple:
    support = tuple(i for i, c in enumerate(coeffs) if c)
    values = tuple(coeffs[i] for i in support)
    return (len(support), max(map(abs, values), default=0), support, values)


def iter_norm_solutions(q: int, target: int, cfg: SearchConfig | None = None) -> Iterator[CycInt]:
    """Lazily yield x with norm(x) == target in enumeration order (single process)."""
    cfg = cfg or SearchConfig()
    q, dim, prime_target = _prepare(q, target)
    if target < 0:
        return
    seen = set()
    count = 0
    for u in _plan(dim, cfg):
        for _, coeffs in _run_unit(q, target, prime_target, u):
            x = CycInt(q, coeffs)
            if cfg.dedupe:
                key = orbit_key(x)
                if key in seen:
                    continue
                seen.add(key)
            yield x
            count += 1
            if cfg.limit is not None and count >= cfg.limit:
                return


def _prepare(q: int, target: int) -> tuple[int, int, bool]:
    q = check_conductor(q)
    if target == 0:
        raise ArgumentError("target must be nonzero")
    from sympy import isprime
    return q, q - 1, target > 0 and bool(isprime(target))


def _unit_worker(args):
    return _run_unit(*args)


def solve_norm_equation(q: int, target: int, cfg: SearchConfig | None = None) -> list[CycInt]:
    """All x in the box with norm(x) == target, in enumeration order.

    Norms in Q(zeta_q) are positive, so a negative target gives []. An
    empty result only means the box holds no solution.  With ``cfg.jobs > 1``
    the work units are spread over processes; the merged output is identical.
    """
    cfg = cfg or SearchConfig()
    if cfg.jobs == 1:
        return list(iter_norm_solutions(q, target, cfg))
    q, dim, prime_target = _prepare(q, target)
    if target < 0:
        return []
    units = _plan(dim, cfg)
    out: list[CycInt] = []
    seen = set()
    with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
        # ordered map keeps the merge canonical; batches allow an early stop
        step = 4 * cfg.jobs
        for start in range(0, len(units), step):
            batch = units[start:start + step]
            args = [(q, target, prime_target, u) for u in batch]
            for hits in pool.map(_unit_worker, args):
                for _, coeffs in hits:
                    x = CycInt(q, coeffs)
                    if cfg.dedupe:
                        key = orbit_key(x)
                        if key in seen:
                            continue
                        seen.add(key)
                    out.append(x)
                    if cfg.limit is not None and len(out) >= cfg.limit:
                        return out
    return out


# ---------------------------------------------------------------------------
# r, twist, witness
# ---------------------------------------------------------------------------

def find_r(p: int, q: int) -> int:
    """Smallest r >= 2 of multiplicative order exactly q modulo the prime p."""
    from sympy import isprime, primitive_root
    q = check_conductor(q)
    if not isprime(p):
        raise ArgumentError(f"p must be prime, got {p}")
    if (p - 1) % q:
        raise ArgumentError(f"q={q} does not divide p-1={p - 1}; no non-abelian C_p x| C_q")
    h = pow(primitive_root(p), (p - 1) // q, p)
    return min(pow(h, i, p) for i in range(1, q))


def find_twist(x: CycInt, r: int, p: int) -> int:
    """Smallest k in [1, q-1] with x(r^k) = 0 mod p."""
    for k in range(1, x.n):
        if eval_mod(x, pow(r, k, p), p) == 0:
            return k
    raise ConsistencyError(f"no twist k sends {x} into the kernel of z -> {r} mod {p}")


def witness_from_element(x: CycInt, spec: GroupSpec) -> Witness | None:
    """Witness (a1; coeffs of +-x) if x(r) = a1 m' with a1 != 0, else None.

    The sign of x is flipped to make a1 positive, which keeps the norm
    because q - 1 is even.  Elements with content > 1 are rejected: dividing
    them out would change the norm.
    """
    if x.n != spec.n:
        raise ArgumentError(f"element lives in Z[zeta_{x.n}], spec has n={spec.n}")
    a1, rem = divmod(evaluate(x, spec.r), spec.mprime)
    if rem or a1 == 0 or content(x) != 1:
        return None
    if a1 < 0:
        x, a1 = -x, -a1
    return Witness(a1, x.coeffs)


def find_witness(spec: GroupSpec, cfg: SearchConfig | None = None) -> Witness | None:
    """First witness for spec found from norm-m' solutions, or None if the box is exhausted.

    Each candidate x is tried as sigma_k(x) for k = 1..n-1, which is the
    same as replacing r by r^k while keeping the spec fixed.
    """
    cfg = cfg or SearchConfig()
    for x in iter_norm_solutions(spec.n, spec.mprime, replace(cfg, limit=None)):
        for k in range(1, spec.n):
            w = witness_from_element(conjugate(x, k), spec)
            if w is not None:
                return w
    return None


def prime_power_family(q: int, alpha: int, k: int) -> tuple[GroupSpec, Witness]:
    """m = alpha q^k, r = alpha q^(k-1) + 1, so m' = q; witness from zeta - 1.

    zeta - 1 (rather than 1 - zeta) is used so that a1 = alpha q^(k-2) comes
    out positive; both have norm q.
    """
    q = check_conductor(q)
    if alpha < 1 or alpha % q == 0:
        raise ArgumentError(f"alpha must be positive and prime to q={q}, got {alpha}")
    if k < 2:
        raise ArgumentError(f"k must be >= 2, got {k}")
    spec = GroupSpec(alpha * q**k, q, alpha * q ** (k - 1) + 1)
    if spec.mprime != q:
        raise ConsistencyError(f"m' = {spec.mprime}, expected {q}")
    x = CycInt.zeta(q) - CycInt.constant(q, 1)
    w = witness_from_element(x, spec)
    if w is None:
        raise ConsistencyError(f"zeta - 1 gives no witness for {spec}")
    return spec, w


# ---------------------------------------------------------------------------
# published triples
# ---------------------------------------------------------------------------

PUBLISHED_TRIPLES: tuple[tuple[int, int, str], ...] = (
    (29, 5801, "1 + z + z^4"),
    (29, 4931, "1 - z^2 + z^5"),
    (29, 7193, "1 + z^2 + z^5"),
    (29, 9803, "-1 + z + z^4"),
    (29, 12413, "-1 + z^2 + z^5"),
    (29, 18097, "1 + z + z^4"),
    (29, 18503, "1 - z + z^5"),
    (29, 21577, "1 + z^2 + z^3"),
    (31, 5953, "-1 - z + z^3"),
    (31, 6263, "1 - z + z^3"),
    (31, 11657, "1 + z + z^4"),
    (31, 16741, "-1 - z + z^4"),
    (31, 20089, "-1 + z + z^6"),
    (37, 32783, "1 - z + z^3"),
    (37, 68821, "-1 + z^2 + z^5"),
    (37, 108929, "1 + z^2 + z^5"),
    (37, 132313, "-1 + z + z^4"),
    (37, 172717, "-1 - z + z^4"),
    (37, 262553, "1 - z^3 + z^4"),
    (41, 101107, "-1 - z + z^3"),
    (41, 337759, "1 + z + z^4"),
    (41, 340793, "-1 + z^2 + z^5"),
    (41, 348911, "1 - z^2 + z^5"),
    (41, 432059, "1 + z^2 + z^5"),
)

# The (29, 18097) row repeats the element of the (29, 5801) row, whose norm
# is 5801.  A single sign change gives an element of norm 18097.
ERRATA: dict[tuple[int, int], str] = {
    (29, 18097): "1 - z + z^4",
}


@dataclass(frozen=True)
class TripleRecord:
    q: int
    p: int
    x: CycInt
    r: int
    k: int
    verdict: Verdict
    certificate: Certificate | None = None

    def csv_row(self) -> list[str]:
        return [str(self.q), str(self.p), str(self.x), str(self.r), str(self.k), self.verdict.value]


CSV_COLUMNS = ["q", "p", "x", "r", "k", "verdict"]


def reproduce_triple(q: int, p: int, x: CycInt) -> TripleRecord:
    """find_r -> find_twist -> spec (p, q, r^k) -> witness -> reduction -> certificate."""
    nx = norm(x)
    if nx != p:
        raise ConsistencyError(f"norm({x}) = {nx}, not {p}")
    r = find_r(p, q)
    k = find_twist(x, r, p)
    spec = GroupSpec(p, q, pow(r, k, p))
    w = witness_from_element(x, spec)
    if w is None:
        raise ConsistencyError(f"{x} gives no witness for {spec}")
    cert = certify(run_reduction(spec, w), w, spec)
    return TripleRecord(q, p, x, r, k, cert.verdict, cert)


def select_triples(q: int | None = None, use_errata: bool = False) -> list[tuple[int, int, CycInt]]:
    out = []
    for tq, tp, text in PUBLISHED_TRIPLES:
        if q is not None and tq != q:
            continue
        if use_errata:
            text = ERRATA.get((tq, tp), text)
        out.append((tq, tp, parse(text, tq)))
    return out


def _reproduce_worker(args):
    q, p, x = args
    try:
        return reproduce_triple(q, p, x), None
    except (ConsistencyError, ArgumentError) as exc:
        return None, str(exc)


def reproduce_examples(
    q: int | None = None, use_errata: bool = False, jobs: int = 1,
    triples: Iterable[tuple[int, int, CycInt]] | None = None,
) -> list[TripleRecord]:
    """Certify the published triples; raise ReproductionError naming every failure.

    A triple fails when its norm is wrong, the pipeline breaks, or the
    verdict is not Rational.
    """
    todo = list(triples) if triples is not None else select_triples(q, use_errata)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_reproduce_worker, todo))
    else:
        results = [_reproduce_worker(t) for t in todo]
    records, failures = [], []
    for (tq, tp, x), (rec, err) in zip(todo, results):
        if rec is None:
            failures.append((tq, tp, str(x), err))
            continue
        records.append(rec)
        if rec.verdict is not Verdict.RATIONAL:
            failures.append((tq, tp, str(x), f"verdict {rec.verdict.value}"))
    if failures:
        raise ReproductionError(failures, records)
    return records


def write_csv(records: Iterable[TripleRecord], out=None) -> str:
    buf = io.StringIO() if out is None else out
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rec in records:
        w.writerow(rec.csv_row())
    return buf.getvalue() if out is None else ""
