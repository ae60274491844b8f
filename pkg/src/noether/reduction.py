"""Unimodular reduction of the monomial matrix of C_m x|_r C_n.

Pipeline::

    spec -> build_delta -> Delta
    witness -> derive_a_chain -> (a_1, ..., a_{n-1})
    P_0 = sl_with_first_column(a), B_1 = P_0^-1 Delta P_0
    reduce_step k = 1 .. n-4, final_step at k = n-3   -> B_{n-2}
    certify: b * m' * prod e_i^(n-1-i) == N(x), verdict
    conjugate_to_sigma(B_{n-2})                        -> Sigma

All conjugators lie in SL over Z and are produced together with their exact
integer inverses, so no rational arithmetic is ever needed.  Matrices in the
public API use 0-based indexing; the step index ``k`` of :func:`reduce_step`
is 1-based (it is the column being cleared).
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Any, Sequence

from .cyclotomic import CycInt, check_conductor, norm
from .errors import (
    ArgumentError,
    ConsistencyError,
    PreconditionError,
    ReducibilityError,
    SpecError,
    WitnessError,
)
from .linalg import IMatrix, adjugate, block_diag, det

# P_k determinants are verified exactly with Bareiss up to this size and
# through the integral inverse plus a residue check above it
_EXACT_DET_CHECK_MAX = 12
_DET_CHECK_PRIME = (1 << 61) - 1


# ---------------------------------------------------------------------------
# group spec and witness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroupSpec:
    """C_m x|_r C_n = <s1, s2 | s1^m = s2^n = 1, s2^-1 s1 s2 = s1^r>."""

    m: int
    n: int
    r: int

    def __post_init__(self):
        m, n, r = self.m, self.n, self.r
        try:
            check_conductor(n)
        except ArgumentError as exc:
            raise SpecError(str(exc)) from None
        if m < 3:
            raise SpecError(f"m must be at least 3, got {m}")
        if not 2 <= r <= m - 1:
            raise SpecError(f"r must lie in [2, m-1], got r={r} for m={m}")
        if pow(r, n, m) != 1:
            raise SpecError(f"r^n = {pow(r, n, m)} mod {m}, not 1")
        if self.delta_corner % self.mprime:
            raise SpecError(f"m' = {self.mprime} does not divide x_(n-1) = {self.delta_corner}")

    @property
    def mprime(self) -> int:
        return self.m // math.gcd(self.m, self.r - 1)

    @property
    def delta_corner(self) -> int:
        return geometric(self.r, self.n - 1)

    def to_dict(self) -> dict[str, Any]:
        return {"m": str(self.m), "n": str(self.n), "r": str(self.r), "mprime": str(self.mprime)}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> GroupSpec:
        return cls(int(d["m"]), int(d["n"]), int(d["r"]))


def geometric(r: int, j: int) -> int:
    """x_j = (r^(j+1) - 1) / (r - 1) = 1 + r + ... + r^j."""
    return (r ** (j + 1) - 1) // (r - 1)


@dataclass(frozen=True)
class Witness:
    """Integers with a1 * m' = alpha_0 + alpha_1 r + ... + alpha_{n-2} r^(n-2)."""

    a1: int
    alphas: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(int(a) for a in self.alphas))

    def element(self) -> CycInt:
        return CycInt(len(self.alphas) + 1, self.alphas)

    def to_dict(self) -> dict[str, Any]:
        return {"a1": str(self.a1), "alphas": [str(a) for a in self.alphas]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> Witness:
        return cls(int(d["a1"]), tuple(int(a) for a in d["alphas"]))


def validate_witness(witness: Witness, spec: GroupSpec) -> None:
    """Recheck the linear relation, positivity and the joint gcd."""
    if len(witness.alphas) != spec.n - 1:
        raise WitnessError(f"need {spec.n - 1} alphas for n={spec.n}, got {len(witness.alphas)}")
    if witness.a1 <= 0:
        raise WitnessError(f"a1 must be positive, got {witness.a1}")
    value = 0
    for c in reversed(witness.alphas):
        value = value * spec.r + c
    if witness.a1 * spec.mprime != value:
        raise WitnessError(
            f"a1 * m' = {witness.a1 * spec.mprime} but sum alpha_i r^i = {value}"
        )
    g = reduce(math.gcd, witness.alphas, witness.a1)
    if g != 1:
        raise WitnessError(f"gcd(a1, alphas) = {g}, must be 1")


# ---------------------------------------------------------------------------
# building blocks
# ---------------------------------------------------------------------------

def build_delta(spec: GroupSpec) -> IMatrix:
    """The (n-1) x (n-1) exponent matrix of the induced monomial action.

    First column (r, m', 0, ..., 0), ones on the subdiagonal from row 3 on,
    last column (-x_{n-1}/m', -x_{n-2}, ..., -x_1).
    """
    n, r, mp = spec.n, spec.r, spec.mprime
    N = n - 1
    corner, rem = divmod(geometric(r, n - 1), mp)
    if rem:
        raise SpecError(f"-x_(n-1)/m' is not integral for {spec}")
    rows = [[0] * N for _ in range(N)]
    rows[0][0] = r
    rows[1][0] = mp
    for i in range(2, N):
        rows[i][i - 1] = 1
    rows[0][N - 1] -= corner
    for i in range(1, N):
        rows[i][N - 1] -= geometric(r, n - 1 - i)
    return IMatrix(rows)


def derive_a_chain(witness: Witness, spec: GroupSpec) -> tuple[int, ...]:
    """(a_1, ..., a_{n-1}) with a_i = alpha_{n-2} r^(n-i-1) + ... + alpha_{i-1} for i >= 2."""
    n, r = spec.n, spec.r
    al = witness.alphas
    chain = [witness.a1]
    for i in range(2, n):
        acc = 0
        for j in range(n - 2, i - 2, -1):
            acc = acc * r + al[j]
        chain.append(acc)
    g = reduce(math.gcd, chain, 0)
    if g != 1:
        raise ConsistencyError(f"a-chain {chain} has gcd {g}; witness validation let a bad witness through")
    return tuple(chain)


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    s0, s1, t0, t1 = 1, 0, 0, 1
    x, y = a, b
    while y:
        q, rem = divmod(x, y)
        x, y = y, rem
        s0, s1 = s1, s0 - q * s1
        t0, t1 = t1, t0 - q * t1
    if x < 0:
        x, s0, t0 = -x, -s0, -t0
    return x, s0, t0


def unimodular_completion(v: Sequence[int]) -> tuple[list[list[int]], list[list[int]]]:
    """SL_k(Z) matrix with first column v, together with its inverse.

    For k >= 3 the tail (v_2, ..., v_k) is divided by its gcd g, completed
    recursively, and the head is joined with the Bezout relation
    s*v_1 + t*g = 1 acting on the first two coordinates.  Deterministic in v.
    """
    k = len(v)
    if k == 1:
        if v[0] != 1:
            raise PreconditionError(f"no 1x1 matrix in SL_1(Z) has first column {list(v)}")
        return [[1]], [[1]]
    if k == 2:
        g, s, t = xgcd(v[0], v[1])
        if g != 1:
            raise PreconditionError(f"entries of {list(v)} are not coprime")
        return [[v[0], -t], [v[1], s]], [[s, t], [-v[1], v[0]]]
    g = reduce(math.gcd, v[1:], 0)
    if g == 0:
        if abs(v[0]) != 1:
            raise PreconditionError(f"entries of {list(v)} are not coprime")
        ident = [[int(i == j) for j in range(k)] for i in range(k)]
        if v[0] == -1:
            ident[0][0] = ident[1][1] = -1
        return ident, [row[:] for row in ident]
    h, s, t = xgcd(v[0], g)
    if h != 1:
        raise PreconditionError(f"entries of {list(v)} are not coprime")
    sub, sub_inv = unimodular_completion([c // g for c in v[1:]])
    # M = (1 (+) sub) E where E acts on coordinates 0, 1 as [[v1, -t], [g, s]]
    M = [[1] + [0] * (k - 1)] + [[0] + row for row in sub]
    for row in M:
        c0, c1 = row[0], row[1]
        row[0] = v[0] * c0 + g * c1
        row[1] = -t * c0 + s * c1
    # M^-1 = E^-1 (1 (+) sub^-1), E^-1 = [[s, t], [-g, v1]]
    Mi = [[1] + [0] * (k - 1)] + [[0] + row for row in sub_inv]
    r0, r1 = Mi[0], Mi[1]
    Mi[0] = [s * a + t * b for a, b in zip(r0, r1)]
    Mi[1] = [-g * a + v[0] * b for a, b in zip(r0, r1)]
    return M, Mi


def sl_with_first_column(v: Sequence[int]) -> IMatrix:
    """A determinant-1 integer matrix whose first column is the coprime vector v."""
    if not v:
        raise PreconditionError("empty vector")
    M, _ = unimodular_completion([int(c) for c in v])
    return IMatrix(M)


def _embed(k: int, N: int, block: list[list[int]]) -> IMatrix:
    return block_diag(IMatrix.identity(k), IMatrix(block))


@dataclass(frozen=True)
class Step:
    """One conjugation B_next = P^-1 B P."""

    e: int
    P: IMatrix
    P_inv: IMatrix
    B: IMatrix


def _step(B: IMatrix, k: int) -> Step:
    N = B.nrows
    if not 1 <= k <= N - 2:
        raise ArgumentError(f"step index must lie in 1..{N - 2}, got {k}")
    active = [B[i, k - 1] for i in range(k, N)]
    e = reduce(math.gcd, active, 0)
    if e == 0:
        raise ReducibilityError(
            f"column {k} vanishes below row {k}; Delta would be reducible, so the spec is invalid"
        )
    M, Mi = unimodular_completion([c // e for c in active])
    P, Pi = _embed(k, N, M), _embed(k, N, Mi)
    return Step(e, P, Pi, Pi @ B @ P)


def reduce_step(B: IMatrix, k: int) -> tuple[int, IMatrix, IMatrix]:
    """Clear column k (1-based) below the subdiagonal.

    Returns ``(e, P, B_next)`` where e is the positive gcd of the entries of
    column k in rows k+1..N, P = I_k (+) sl_with_first_column(active / e)
    and B_next = P^-1 B P has (e, 0, ..., 0) in that position.
    """
    s = _step(B, k)
    return s.e, s.P, s.B


def final_step(B: IMatrix) -> tuple[IMatrix, IMatrix]:
    """Last conjugation, acting on the trailing 2x2 block.

    The active pair (b', b'') of column N-2 is divided by its gcd and P
    embeds [[b', alpha], [b'', beta]] with b' beta - b'' alpha = 1.
    """
    s = _step(B, B.nrows - 2)
    return s.P, s.B


# ---------------------------------------------------------------------------
# trace and certificate
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ReductionTrace:
    delta: IMatrix
    a_chain: tuple[int, ...]
    conjugators: tuple[IMatrix, ...]   # P_0 .. P_{n-3}
    intermediates: tuple[IMatrix, ...]  # B_1 .. B_{n-2}
    pivots: tuple[int, ...]             # e_1 .. e_{n-3}
    final_entry: int                    # b = B_{n-2}[n-1, n-2] (1-based)

    @property
    def final(self) -> IMatrix:
        return self.intermediates[-1]


def run_reduction(spec: GroupSpec, witness: Witness) -> ReductionTrace:
    validate_witness(witness, spec)
    delta = build_delta(spec)
    chain = derive_a_chain(witness, spec)
    M, Mi = unimodular_completion(list(chain))
    P0, P0i = IMatrix(M), IMatrix(Mi)
    B = P0i @ delta @ P0
    conj, inter, pivots = [P0], [B], []
    N = spec.n - 1
    for k in range(1, N - 1):
        s = _step(B, k)
        B = s.B
        pivots.append(s.e)
        conj.append(s.P)
        inter.append(B)
    return ReductionTrace(
        delta=delta,
        a_chain=chain,
        conjugators=tuple(conj),
        intermediates=tuple(inter),
        pivots=tuple(pivots),
        final_entry=B[N - 1, N - 2],
    )


def is_special_unimodular(P: IMatrix) -> bool:
    """det P == 1, decided exactly.

    Small matrices use Bareiss directly.  Larger ones use the integral
    adjugate: P adj(P) = det(P) I, and det(P) is recovered as the diagonal
    of that product, then cross-checked against det mod a 61-bit prime.
    """
    if P.nrows <= _EXACT_DET_CHECK_MAX:
        return det(P) == 1
    return _det_mod(P, _DET_CHECK_PRIME) == 1 and _has_integral_inverse(P)


def _det_mod(P: IMatrix, p: int) -> int:
    a = [[x % p for x in row] for row in P.rows]
    n = len(a)
    d = 1
    for k in range(n):
        piv = next((i for i in range(k, n) if a[i][k]), None)
        if piv is None:
            return 0
        if piv != k:
            a[k], a[piv] = a[piv], a[k]
            d = -d
        inv = pow(a[k][k], -1, p)
        d = d * a[k][k] % p
        for i in range(k + 1, n):
            f = a[i][k] * inv % p
            if f:
                a[i] = [(x - f * y) % p for x, y in zip(a[i], a[k])]
    return d % p


def _has_integral_inverse(P: IMatrix) -> bool:
    A = adjugate(P)
    prod = P @ A
    d = prod[0, 0]
    return d in (1, -1) and prod == IMatrix.identity(P.nrows).scale(d)


def check_trace(trace: ReductionTrace) -> None:
    """Raise ConsistencyError unless every chain invariant holds."""
    prev = trace.delta
    for k, (P, B) in enumerate(zip(trace.conjugators, trace.intermediates)):
        if P @ B != prev @ P:
            raise ConsistencyError(f"B_{k + 1} != P_{k}^-1 B_{k} P_{k}")
        if not is_special_unimodular(P):
            raise ConsistencyError(f"det P_{k} != 1")
        prev = B
    if not is_bordered_hessenberg(trace.final):
        raise ConsistencyError("final matrix is not upper Hessenberg")
    sub = tuple(trace.final[i + 1, i] for i in range(trace.final.nrows - 1))
    if sub != trace.pivots + (trace.final_entry,):
        raise ConsistencyError(f"subdiagonal {sub} does not match pivots and final entry")


def is_bordered_hessenberg(B: IMatrix) -> bool:
    N = B.nrows
    return all(B[i, j] == 0 for i in range(N) for j in range(i - 1))


class Verdict(str, enum.Enum):
    RATIONAL = "Rational"
    FORMULA_HOLDS_BUT_NOT_UNIT = "FormulaHoldsButNotUnit"
    INVALID = "Invalid"


def formula_denominator(spec: GroupSpec, pivots: Sequence[int]) -> int:
    """m' * e_{n-3}^2 * e_{n-4}^3 * ... * e_1^(n-2)."""
    n = spec.n
    out = spec.mprime
    for i, e in enumerate(pivots, start=1):
        out *= e ** (n - 1 - i)
    return out


@dataclass(frozen=True)
class Certificate:
    spec: GroupSpec
    witness: Witness
    trace: ReductionTrace
    norm_check: int
    verdict: Verdict
    sigma_conjugator: IMatrix | None = field(default=None)

    def to_dict(self) -> dict[str, Any]:
        return certificate_to_dict(self)

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), **kw)


def certify(trace: ReductionTrace, witness: Witness, spec: GroupSpec) -> Certificate:
    """Check b * m' * prod e_i^(n-1-i) == N(x) and decide the verdict.

    Rational iff every pivot and the final entry equal 1; in that case the
    final matrix is additionally conjugated to Sigma and the conjugator kept.
    """
    nx = norm(witness.element())
    lhs = trace.final_entry * formula_denominator(spec, trace.pivots)
    if lhs != nx:
        raise ConsistencyError(
            f"b * m' * prod e_i^(n-1-i) = {lhs} but N(x) = {nx} for {spec}"
        )
    if all(e == 1 for e in trace.pivots) and trace.final_entry == 1:
        P, _ = conjugate_to_sigma(trace.final)
        return Certificate(spec, witness, trace, nx, Verdict.RATIONAL, P)
    return Certificate(spec, witness, trace, nx, Verdict.FORMULA_HOLDS_BUT_NOT_UNIT)


# ---------------------------------------------------------------------------
# Gamma -> Sigma
# ---------------------------------------------------------------------------

def sigma_matrix(N: int) -> IMatrix:
    """Companion matrix of 1 + X + ... + X^N: unit subdiagonal, last column all -1."""
    return IMatrix([
        [int(j == i - 1) - int(j == N - 1) for j in range(N)] for i in range(N)
    ])


def conjugate_to_sigma(gamma: IMatrix) -> tuple[IMatrix, IMatrix]:
    """Find unimodular P with P^-1 gamma P = Sigma.

    ``gamma`` must be upper Hessenberg with ones on the subdiagonal and
    satisfy gamma^(N+1) = I.  Rows N, N-1, ..., 2 are brought to the form
    e_{t-1} - e_N in turn by conjugating with I + (row t-1 multiples), which
    only disturbs row t-1; the remaining first row is then forced to
    (0, ..., 0, -1).
    """
    N = gamma.nrows
    if not gamma.is_square or N < 2:
        raise PreconditionError(f"gamma must be square of size >= 2, got {gamma.shape}")
    if not is_bordered_hessenberg(gamma) or any(gamma[i + 1, i] != 1 for i in range(N - 1)):
        raise PreconditionError("gamma must be upper Hessenberg with unit subdiagonal")
    if gamma ** (N + 1) != IMatrix.identity(N):
        raise PreconditionError(f"gamma^{N + 1} != I")
    G = gamma.tolist()
    P = IMatrix.identity(N).tolist()
    for t in range(N - 1, 0, -1):
        u = {c: -G[t][c] for c in range(t, N)}
        u[N - 1] -= 1
        pivot = t - 1
        # G <- G (I + U): col c += u_c * col pivot; same on the accumulator
        for M in (G, P):
            for row in M:
                x = row[pivot]
                if x:
                    for c, uc in u.items():
                        row[c] += uc * x
        # G <- (I - U) G: row pivot -= sum u_c row c
        target = G[pivot]
        for c, uc in u.items():
            if uc:
                src = G[c]
                for j in range(N):
                    target[j] -= uc * src[j]
    sigma = sigma_matrix(N)
    result = IMatrix(G)
    if result != sigma:
        raise ConsistencyError(f"reduction ended at {result}, not Sigma")
    Pm = IMatrix(P)
    if gamma @ Pm != Pm @ sigma:
        raise ConsistencyError("P^-1 gamma P != Sigma")
    return Pm, sigma


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def _mat_out(M: IMatrix) -> list[list[str]]:
    return [[str(x) for x in row] for row in M.rows]


def _mat_in(rows: list[list[str]]) -> IMatrix:
    return IMatrix([[int(x) for x in row] for row in rows])


def trace_to_dict(trace: ReductionTrace) -> dict[str, Any]:
    return {
        "delta": _mat_out(trace.delta),
        "a_chain": [str(a) for a in trace.a_chain],
        "conjugators": [_mat_out(P) for P in trace.conjugators],
        "intermediates": [_mat_out(B) for B in trace.intermediates],
        "pivots": [str(e) for e in trace.pivots],
        "final_entry": str(trace.final_entry),
    }


def trace_from_dict(d: dict[str, Any]) -> ReductionTrace:
    return ReductionTrace(
        delta=_mat_in(d["delta"]),
        a_chain=tuple(int(a) for a in d["a_chain"]),
        conjugators=tuple(_mat_in(P) for P in d["conjugators"]),
        intermediates=tuple(_mat_in(B) for B in d["intermediates"]),
        pivots=tuple(int(e) for e in d["pivots"]),
        final_entry=int(d["final_entry"]),
    )


CERTIFICATE_FORMAT = "noether-certificate/1"


def certificate_to_dict(cert: Certificate) -> dict[str, Any]:
    return {
        "format": CERTIFICATE_FORMAT,
        "spec": cert.spec.to_dict(),
        "witness": cert.witness.to_dict(),
        "x": str(cert.witness.element()),
        "norm": str(cert.norm_check),
        "pivots": [str(e) for e in cert.trace.pivots],
        "b": str(cert.trace.final_entry),
        "verdict": cert.verdict.value,
        "trace": trace_to_dict(cert.trace),
        "sigma_conjugator": (
            _mat_out(cert.sigma_conjugator) if cert.sigma_conjugator is not None else None
        ),
    }


def certificate_from_dict(d: dict[str, Any]) -> Certificate:
    if d.get("format") != CERTIFICATE_FORMAT:
        raise ArgumentError(f"unknown certificate format {d.get('format')!r}")
    sc = d.get("sigma_conjugator")
    cert = Certificate(
        spec=GroupSpec.from_dict(d["spec"]),
        witness=Witness.from_dict(d["witness"]),
        trace=trace_from_dict(d["trace"]),
        norm_check=int(d["norm"]),
        verdict=Verdict(d["verdict"]),
        sigma_conjugator=_mat_in(sc) if sc is not None else None,
    )
    # the summary fields duplicate trace data for readers; they must agree
    summary = {k: d.get(k) for k in ("x", "pivots", "b")}
    expected = {k: v for k, v in certificate_to_dict(cert).items() if k in summary}
    if summary != expected:
        raise ArgumentError("certificate summary fields disagree with its trace")
    return cert


def verify_certificate(cert: Certificate) -> tuple[Verdict, list[str]]:
    """Independently re-check a (possibly deserialized) certificate.

    Nothing in the certificate is trusted: Delta, the a-chain and the norm
    are recomputed from spec and witness, every conjugation is checked by
    multiplication and determinant, and the Sigma conjugator is re-applied.
    Returns the verdict the data actually supports plus a list of problems.
    """
    problems: list[str] = []
    spec, witness, trace = cert.spec, cert.witness, cert.trace
    try:
        validate_witness(witness, spec)
    except WitnessError as exc:
        return Verdict.INVALID, [f"witness: {exc}"]
    if trace.delta != build_delta(spec):
        problems.append("delta does not match the spec")
    try:
        if trace.a_chain != derive_a_chain(witness, spec):
            problems.append("a-chain does not match the witness")
    except ConsistencyError as exc:
        problems.append(str(exc))
    if trace.conjugators and trace.conjugators[0].col(0) != trace.a_chain:
        problems.append("P_0 does not have the a-chain as first column")
    if len(trace.conjugators) != spec.n - 2 or len(trace.intermediates) != spec.n - 2:
        problems.append("chain length is not n-2")
    try:
        check_trace(trace)
    except ConsistencyError as exc:
        problems.append(str(exc))
    nx = norm(witness.element())
    if nx != cert.norm_check:
        problems.append(f"recorded norm {cert.norm_check} != recomputed {nx}")
    if trace.final_entry * formula_denominator(spec, trace.pivots) != nx:
        problems.append("entry formula violated")
    units = all(e == 1 for e in trace.pivots) and trace.final_entry == 1
    if units:
        P = cert.sigma_conjugator
        N = spec.n - 1
        if P is None:
            problems.append("missing Sigma conjugator")
        elif not is_special_unimodular(P) or trace.final @ P != P @ sigma_matrix(N):
            problems.append("Sigma conjugator does not conjugate B_(n-2) to Sigma")
    if problems:
        return Verdict.INVALID, problems
    verdict = Verdict.RATIONAL if units else Verdict.FORMULA_HOLDS_BUT_NOT_UNIT
    if verdict != cert.verdict:
        return Verdict.INVALID, [f"recorded verdict {cert.verdict.value} but data supports {verdict.value}"]
    return verdict, []
