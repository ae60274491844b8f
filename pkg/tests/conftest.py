import sympy
from hypothesis import strategies as st

from noether.linalg import IMatrix

# PASS/FAIL lines from the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def int_matrices(nrows, ncols=None, bound=6):
    ncols = nrows if ncols is None else ncols
    return st.lists(
        st.lists(st.integers(-bound, bound), min_size=ncols, max_size=ncols),
        min_size=nrows, max_size=nrows,
    ).map(IMatrix)


def square_matrices(lo=1, hi=6, bound=6):
    return st.integers(lo, hi).flatmap(lambda n: int_matrices(n, n, bound))


def sympy_det(M):
    return int(sympy.Matrix(M.tolist()).det())


def sympy_norm(q, coeffs):
    """Resultant of Phi_q and x(X): an oracle independent of our determinant."""
    X = sympy.Symbol("X")
    phi = sympy.cyclotomic_poly(q, X)
    poly = sum(c * X**i for i, c in enumerate(coeffs))
    return int(sympy.resultant(phi, poly, X))


def valid_specs(ns=(3, 5, 7), m_max=200):
    """Every (m, n, r) with r of order exactly n mod m, small m first."""
    from noether.reduction import GroupSpec
    out = []
    for n in ns:
        for m in range(3, m_max + 1):
            for r in range(2, m):
                if pow(r, n, m) == 1:
                    out.append(GroupSpec(m, n, r))
    return out


def random_gamma(rng, N):
    """U^-1 Sigma U for random upper unitriangular U; keeps the unit subdiagonal."""
    from noether.reduction import sigma_matrix
    U = [[int(i == j) for j in range(N)] for i in range(N)]
    for i in range(N):
        for j in range(i + 1, N):
            U[i][j] = rng.randint(-3, 3)
    # inverse of a unitriangular matrix by back substitution
    inv = [[int(i == j) for j in range(N)] for i in range(N)]
    for i in range(N - 1, -1, -1):
        for j in range(i + 1, N):
            s = sum(U[i][k] * inv[k][j] for k in range(i + 1, j + 1))
            inv[i][j] = -s
    U, Ui = IMatrix(U), IMatrix(inv)
    assert U @ Ui == IMatrix.identity(N)
    return Ui @ sigma_matrix(N) @ U


def adversarial_witnesses(spec, bound=2, limit=None):
    """Witnesses whose element has norm t * m' with t > 1.

    Built as x0 * y with x0 a norm-m' solution for spec and y a small
    non-unit, so x0(r) = 0 mod m' carries over to the product.
    """
    import itertools
    from noether.cyclotomic import CycInt, conjugate, norm
    from noether.search import SearchConfig, find_witness, witness_from_element
    base = find_witness(spec, SearchConfig(coeff_bound=3))
    assert base is not None, spec
    x0 = base.element()
    out = []
    for coeffs in itertools.product(range(-bound, bound + 1), repeat=spec.n - 1):
        y = CycInt(spec.n, coeffs)
        if norm(y) <= 1:
            continue
        w = witness_from_element(x0 * y, spec)
        if w is None:
            continue
        out.append(w)
        if limit and len(out) >= limit:
            break
    return out
