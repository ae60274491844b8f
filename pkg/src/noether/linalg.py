"""Exact dense integer linear algebra.

Everything here works over Python ints, so no operation ever rounds. Besides
the usual kernels (determinant, adjugate, products) the module carries
executable versions of the determinant identities the reduction relies on:
Laplace expansion along an ordered row partition, Cauchy-Binet, the deleted
first row/column product, the row-operation minor identity, the compound-minor
identity, the wedge vector and the conjugation-minor identity.  Each identity
function evaluates *both* sides independently so the pair can be compared
by tests and by the ``fuzz`` CLI command.

Index convention: :class:`IMatrix` item access (``M[i, j]``), ``row``/``col``
and ``submatrix`` are 0-based like any Python container.  Functions whose
arguments are index *sets* taken from the determinant literature (``minor``,
``laplace_det``, ``compound_identity``) take 1-based indices.
"""

from __future__ import annotations

import operator
from itertools import combinations
from typing import Iterable, Sequence

from .errors import ArgumentError, ConsistencyError, DimensionError, PreconditionError

# cofactor expansion is used up to this size; Bareiss above it
_COFACTOR_DET_MAX = 4
_COFACTOR_ADJ_MAX = 8


class IMatrix:
    """Immutable dense matrix of arbitrary-precision integers.

    >>> M = IMatrix([[1, 2], [3, 4]])
    >>> M.shape, M[1, 0]
    ((2, 2), 3)
    """

    __slots__ = ("_rows", "nrows", "ncols")

    def __init__(self, rows: Iterable[Iterable[int]]):
        data = tuple(tuple(operator.index(x) for x in row) for row in rows)
        ncols = len(data[0]) if data else 0
        if any(len(row) != ncols for row in data):
            raise DimensionError("ragged rows")
        self._rows = data
        self.nrows = len(data)
        self.ncols = ncols

    @classmethod
    def _wrap(cls, rows: tuple, ncols: int | None = None) -> IMatrix:
        # trusted constructor: rows is already a tuple of int tuples
        obj = object.__new__(cls)
        obj._rows = rows
        obj.nrows = len(rows)
        obj.ncols = len(rows[0]) if rows else (ncols or 0)
        return obj

    @classmethod
    def identity(cls, n: int) -> IMatrix:
        return cls._wrap(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> IMatrix:
        return cls._wrap(tuple((0,) * ncols for _ in range(nrows)), ncols)

    @classmethod
    def from_columns(cls, cols: Sequence[Sequence[int]]) -> IMatrix:
        return cls(zip(*cols))

    @classmethod
    def from_flat(cls, nrows: int, ncols: int, entries: Sequence[int]) -> IMatrix:
        if len(entries) != nrows * ncols:
            raise DimensionError(f"{len(entries)} entries for a {nrows}x{ncols} matrix")
        return cls(entries[i * ncols:(i + 1) * ncols] for i in range(nrows))

    # -- basic protocol ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @property
    def rows(self) -> tuple[tuple[int, ...], ...]:
        return self._rows

    @property
    def entries(self) -> tuple[int, ...]:
        """Row-major flattening."""
        return tuple(x for row in self._rows for x in row)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self._rows[i][j]

    def row(self, i: int) -> tuple[int, ...]:
        return self._rows[i]

    def col(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self._rows)

    def tolist(self) -> list[list[int]]:
        return [list(row) for row in self._rows]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IMatrix):
            return NotImplemented
        return self.shape == other.shape and self._rows == other._rows

    def __hash__(self) -> int:
        return hash((self.shape, self._rows))

    def __repr__(self) -> str:
        return f"IMatrix({self.tolist()!r})"

    # -- arithmetic -------------------------------------------------------

    def __matmul__(self, other: IMatrix) -> IMatrix:
        if not isinstance(other, IMatrix):
            return NotImplemented
        if self.ncols != other.nrows:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = tuple(zip(*other._rows)) if other._rows else ()
        rows = tuple(
            tuple(sum(map(operator.mul, row, c)) for c in cols) for row in self._rows
        )
        return IMatrix._wrap(rows, other.ncols)

    def __add__(self, other: IMatrix) -> IMatrix:
        if self.shape != other.shape:
            raise DimensionError(f"cannot add {self.shape} and {other.shape}")
        return IMatrix._wrap(tuple(
            tuple(map(operator.add, r, s)) for r, s in zip(self._rows, other._rows)
        ), self.ncols)

    def __sub__(self, other: IMatrix) -> IMatrix:
        if self.shape != other.shape:
            raise DimensionError(f"cannot subtract {other.shape} from {self.shape}")
        return IMatrix._wrap(tuple(
            tuple(map(operator.sub, r, s)) for r, s in zip(self._rows, other._rows)
        ), self.ncols)

    def __neg__(self) -> IMatrix:
        return self.scale(-1)

    def scale(self, c: int) -> IMatrix:
        return IMatrix._wrap(tuple(tuple(c * x for x in row) for row in self._rows), self.ncols)

    def __pow__(self, k: int) -> IMatrix:
        if not self.is_square:
            raise DimensionError("power of a non-square matrix")
        if k < 0:
            raise ArgumentError("negative powers are not supported; use adjugate")
        result = IMatrix.identity(self.nrows)
        base = self
        while k:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    def apply(self, v: Sequence[int]) -> tuple[int, ...]:
        """Matrix-vector product ``M v``."""
        if len(v) != self.ncols:
            raise DimensionError(f"vector of length {len(v)} for {self.shape} matrix")
        return tuple(sum(map(operator.mul, row, v)) for row in self._rows)

    @property
    def T(self) -> IMatrix:
        return IMatrix._wrap(tuple(zip(*self._rows)), self.nrows)

    # -- slicing ----------------------------------------------------------

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> IMatrix:
        """Rows/cols selected by 0-based indices, in the order given."""
        return IMatrix._wrap(
            tuple(tuple(self._rows[i][j] for j in cols) for i in rows), len(cols)
        )

    def delete(self, rows: Iterable[int] = (), cols: Iterable[int] = ()) -> IMatrix:
        rs, cs = set(rows), set(cols)
        keep_r = [i for i in range(self.nrows) if i not in rs]
        keep_c = [j for j in range(self.ncols) if j not in cs]
        return self.submatrix(keep_r, keep_c)

    def hstack(self, *others: IMatrix) -> IMatrix:
        mats = (self,) + others
        if len({m.nrows for m in mats}) != 1:
            raise DimensionError("hstack needs equal row counts")
        return IMatrix._wrap(tuple(
            sum((m._rows[i] for m in mats), ()) for i in range(self.nrows)
        ), sum(m.ncols for m in mats))

    def vstack(self, *others: IMatrix) -> IMatrix:
        mats = (self,) + others
        if len({m.ncols for m in mats}) != 1:
            raise DimensionError("vstack needs equal column counts")
        return IMatrix._wrap(sum((m._rows for m in mats), ()), self.ncols)


def block_diag(*blocks: IMatrix) -> IMatrix:
    n = sum(b.nrows for b in blocks)
    m = sum(b.ncols for b in blocks)
    rows = []
    off = 0
    for b in blocks:
        for row in b.rows:
            rows.append((0,) * off + row + (0,) * (m - off - b.ncols))
        off += b.ncols
    return IMatrix._wrap(tuple(rows), m) if rows else IMatrix.zeros(0, m)


def as_matrix(M) -> IMatrix:
    return M if isinstance(M, IMatrix) else IMatrix(M)


def _require_square(M: IMatrix, what: str) -> None:
    if not M.is_square:
        raise DimensionError(f"{what} needs a square matrix, got {M.nrows}x{M.ncols}")


# ---------------------------------------------------------------------------
# determinant and adjugate
# ---------------------------------------------------------------------------

def _det_cofactor(rows: Sequence[Sequence[int]]) -> int:
    n = len(rows)
    if n == 0:
        return 1
    if n == 1:
        return rows[0][0]
    if n == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    top = rows[0]
    for j, a in enumerate(top):
        if a:
            sub = [r[:j] + r[j + 1:] for r in rows[1:]]
            total += (-a if j & 1 else a) * _det_cofactor(sub)
    return total


def _det_bareiss(rows: Sequence[Sequence[int]]) -> int:
    a = [list(r) for r in rows]
    n = len(a)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, n):
                ri[j] = (akk * ri[j] - aik * rk[j]) // prev
        prev = akk
    return sign * a[n - 1][n - 1] if n else 1


def det(M) -> int:
    """Exact determinant.

    Cofactor expansion up to 4x4, fraction-free (Bareiss) elimination above.
    """
    M = as_matrix(M)
    _require_square(M, "det")
    if M.nrows <= _COFACTOR_DET_MAX:
        return _det_cofactor(M.rows)
    return _det_bareiss(M.rows)


def _adjugate_cofactor(M: IMatrix) -> IMatrix:
    n = M.nrows
    if n == 1:
        return IMatrix._wrap(((1,),))
    rows = M.rows
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        others = rows[:i] + rows[i + 1:]
        for j in range(n):
            sub = [r[:j] + r[j + 1:] for r in others]
            c = det(IMatrix._wrap(tuple(sub), n - 1))
            adj[j][i] = -c if (i + j) & 1 else c
    return IMatrix._wrap(tuple(map(tuple, adj)), n)


def _adjugate_elimination(M: IMatrix) -> IMatrix | None:
    """det(M) * M^-1 by fraction-free Gauss elimination; None if singular."""
    n = M.nrows
    a = [list(r) + [int(i == j) for j in range(n)] for i, r in enumerate(M.rows)]
    w = 2 * n
    sign = 1
    prev = 1
    for k in range(n):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return None
        akk = a[k][k]
        rk = a[k]
        for i in range(k + 1, n):
            ri = a[i]
            aik = ri[k]
            for j in range(k + 1, w):
                ri[j] = (akk * ri[j] - aik * rk[j]) // prev
            ri[k] = 0
        prev = akk
    d = a[n - 1][n - 1]  # = sign * det(M)
    # back substitution: X = d * M^-1 is integral by Cramer's rule
    x = [[0] * n for _ in range(n)]
    for c in range(n):
        for i in range(n - 1, -1, -1):
            s = d * a[i][n + c] - sum(a[i][j] * x[j][c] for j in range(i + 1, n))
            x[i][c] = s // a[i][i]
    if sign < 0:
        x = [[-v for v in row] for row in x]
    return IMatrix._wrap(tuple(map(tuple, x)), n)


def adjugate(M) -> IMatrix:
    """Classical adjoint: ``M @ adjugate(M) == det(M) * I``."""
    M = as_matrix(M)
    _require_square(M, "adjugate")
    if M.nrows == 0:
        return M
    if M.nrows <= _COFACTOR_ADJ_MAX:
        return _adjugate_cofactor(M)
    adj = _adjugate_elimination(M)
    # singular matrices can still have a nonzero adjugate (rank n-1)
    return adj if adj is not None else _adjugate_cofactor(M)


def _index_set(S: Iterable[int], bound: int, what: str) -> list[int]:
    idx = sorted(operator.index(s) for s in S)
    if len(set(idx)) != len(idx):
        raise ArgumentError(f"{what} has repeated indices: {idx}")
    if idx and (idx[0] < 1 or idx[-1] > bound):
        raise ArgumentError(f"{what} indices must lie in 1..{bound}: {idx}")
    return idx


def minor(M, S: Iterable[int], T: Iterable[int]) -> int:
    """Determinant of the submatrix on rows ``S`` and columns ``T`` (1-based)."""
    M = as_matrix(M)
    rs = _index_set(S, M.nrows, "row set")
    cs = _index_set(T, M.ncols, "column set")
    if len(rs) != len(cs):
        raise DimensionError(f"|S| = {len(rs)} but |T| = {len(cs)}")
    return det(M.submatrix([i - 1 for i in rs], [j - 1 for j in cs]))


def perm_sign(seq: Sequence[int]) -> int:
    """Sign of the permutation written in one-line notation (any distinct keys)."""
    sign = 1
    s = list(seq)
    for i in range(len(s)):
        for j in range(i + 1, len(s)):
            if s[i] > s[j]:
                sign = -sign
    return sign


def laplace_det(M, partition: Sequence[Iterable[int]]) -> int:
    """Determinant by generalized Laplace expansion.

    ``partition`` is an ordered partition S_1, ..., S_r of the row indices
    1..n.  The sum runs over every ordered column partition T_1, ..., T_r
    with |T_j| = |S_j|, weighting the product of block minors by the sign of
    the permutation that sends the concatenated S blocks onto the
    concatenated T blocks.
    """
    M = as_matrix(M)
    _require_square(M, "laplace_det")
    n = M.nrows
    blocks = [_index_set(S, n, "partition block") for S in partition]
    flat = [i for b in blocks for i in b]
    if sorted(flat) != list(range(1, n + 1)) or any(not b for b in blocks):
        raise ArgumentError(f"not an ordered partition of 1..{n}: {blocks}")
    row_sign = perm_sign(flat)
    zero_based = [[i - 1 for i in b] for b in blocks]

    def expand(j: int, free: tuple[int, ...], cols: list[int], acc: int) -> int:
        if j == len(zero_based):
            return row_sign * perm_sign(cols) * acc
        rows = zero_based[j]
        total = 0
        for T in combinations(free, len(rows)):
            m = det(M.submatrix(rows, T))
            if m:
                rest = tuple(c for c in free if c not in T)
                total += expand(j + 1, rest, cols + list(T), acc * m)
        return total

    return expand(0, tuple(range(n)), [], 1)


def cauchy_binet(A, B) -> int:
    """sum over m-subsets S of [n] of A_{[m],S} * B_{S,[m]}; equals det(A @ B)."""
    A, B = as_matrix(A), as_matrix(B)
    m, n = A.shape
    if B.shape != (n, m):
        raise DimensionError(f"need A m x n and B n x m, got {A.shape} and {B.shape}")
    if m > n:
        raise DimensionError(f"Cauchy-Binet needs m <= n, got m={m}, n={n}")
    rows = list(range(m))
    return sum(
        det(A.submatrix(rows, S)) * det(B.submatrix(S, rows))
        for S in combinations(range(n), m)
    )


def deleted_block_product(P) -> IMatrix:
    """``P`` without its first column times ``adj(P)`` without its first row.

    The result is checked against ``det(P) * I - p1 q1`` (first column of P
    times first row of the adjugate) and returned; a mismatch raises.
    """
    lhs, rhs = deleted_block_sides(P)
    if lhs != rhs:
        raise ConsistencyError("deleted-block identity violated")
    return lhs


def deleted_block_sides(P) -> tuple[IMatrix, IMatrix]:
    P = as_matrix(P)
    _require_square(P, "deleted_block_product")
    n = P.nrows
    Q = adjugate(P)
    lhs = P.delete(cols=[0]) @ Q.delete(rows=[0])
    d = det(P)
    p1, q1 = P.col(0), Q.row(0)
    rhs = IMatrix._wrap(tuple(
        tuple(d * (i == j) - p1[i] * q1[j] for j in range(n)) for i in range(n)
    ), n)
    return lhs, rhs


def row_op_matrix(a: Sequence[int]) -> IMatrix:
    """The (n-1) x n matrix with -a_n on the diagonal and a_1..a_{n-1} last."""
    n = len(a)
    an = a[-1]
    return IMatrix._wrap(tuple(
        tuple(-an if j == i else 0 for j in range(n - 1)) + (a[i],) for i in range(n - 1)
    ), n)


def row_op_minor_identity(a: Sequence[int], B) -> tuple[int, int]:
    """Return ``(det(A B), a_n^(n-2) det([a | B]))`` where A = row_op_matrix(a)."""
    B = as_matrix(B)
    a = tuple(operator.index(x) for x in a)
    n = len(a)
    if n < 2:
        raise DimensionError("row_op_minor_identity needs n >= 2")
    if B.shape != (n, n - 1):
        raise DimensionError(f"B must be {n}x{n - 1}, got {B.shape}")
    lhs = det(row_op_matrix(a) @ B)
    C = IMatrix._wrap(tuple((x,) + row for x, row in zip(a, B.rows)), n)
    return lhs, a[-1] ** (n - 2) * det(C)


def wedge(Omega) -> tuple[int, ...]:
    """Signed maximal minors of an n x (n-1) matrix.

    Component i (1-based) is ``(-1)^(n-i)`` times the minor obtained by
    deleting row i, so that ``wedge(Omega) . v == det([Omega | v])``.
    """
    Omega = as_matrix(Omega)
    n, k = Omega.shape
    if n < 2 or k != n - 1:
        raise DimensionError(f"wedge needs an n x (n-1) matrix with n >= 2, got {Omega.shape}")
    out = []
    for i in range(n):
        w = det(Omega.delete(rows=[i]))
        out.append(-w if (n - 1 - i) & 1 else w)
    return tuple(out)


def compound_identity(A, I: Iterable[int], J: Iterable[int]) -> tuple[int, int]:
    """Both sides of the compound-minor identity.

    With I, J (1-based) each omitting two indices {k1, k2}, {l1, l2}, returns
    ``(det[A_{i_a j_b}], det(A)^(n-3) * det(A[{k1,k2},{l1,l2}]))`` where
    ``A_{ij}`` is the first minor deleting row i and column j.
    """
    A = as_matrix(A)
    _require_square(A, "compound_identity")
    n = A.nrows
    if n < 3:
        raise DimensionError("compound_identity needs n >= 3")
    rs = _index_set(I, n, "I")
    cs = _index_set(J, n, "J")
    if len(rs) != n - 2 or len(cs) != n - 2:
        raise ArgumentError(f"I and J must have exactly n-2 = {n - 2} elements")
    K = [k for k in range(1, n + 1) if k not in rs]
    L = [l for l in range(1, n + 1) if l not in cs]
    firsts = IMatrix._wrap(tuple(
        tuple(det(A.delete(rows=[i - 1], cols=[j - 1])) for j in cs) for i in rs
    ), n - 2)
    lhs = det(firsts)
    (k1, k2), (l1, l2) = [k - 1 for k in K], [l - 1 for l in L]
    comp = A[k1, l1] * A[k2, l2] - A[k1, l2] * A[k2, l1]
    return lhs, det(A) ** (n - 3) * comp


def krylov(A: IMatrix, v: Sequence[int], count: int) -> IMatrix:
    """Columns v, Av, ..., A^(count-1) v."""
    cols = []
    cur = tuple(v)
    for _ in range(count):
        cols.append(cur)
        cur = A.apply(cur)
    return IMatrix.from_columns(cols) if cols else IMatrix.zeros(len(v), 0)


def conjugation_minor_identity(A, P) -> tuple[int, int]:
    """Both bordered determinants from the conjugation-minor identity.

    With B~ = P^-1 A P, p the first column of P, q = B~[2:, 1] and
    B = B~[2:, 2:], let u = wedge[p, Ap, ..., A^(n-2) p] and
    w = wedge[q, Bq, ..., B^(n-3) q].  Returns ``(lhs, rhs)`` with
    lhs = det [[0, u], [p, A]] and rhs = det [[0, w], [q, B]]; the identity
    asserts ``lhs == -rhs``.
    """
    A, P = as_matrix(A), as_matrix(P)
    _require_square(A, "conjugation_minor_identity")
    n = A.nrows
    if P.shape != A.shape:
        raise DimensionError(f"P must be {n}x{n}")
    if n < 3:
        raise DimensionError("conjugation_minor_identity needs n >= 3")
    if det(P) != 1:
        raise PreconditionError("P must have determinant exactly 1")
    Bt = adjugate(P) @ A @ P
    p = P.col(0)
    q = Bt.col(0)[1:]
    B = Bt.delete(rows=[0], cols=[0])
    u = wedge(krylov(A, p, n - 1))
    w = wedge(krylov(B, q, n - 2))
    big = IMatrix._wrap(((0,) + u,) + tuple((p[i],) + A.row(i) for i in range(n)), n + 1)
    small = IMatrix._wrap(((0,) + w,) + tuple((q[i],) + B.row(i) for i in range(n - 1)), n)
    return det(big), det(small)
