"""Randomized exact checks of the determinant identities in ``linalg``.

Every trial draws its own RNG from (seed, identity, trial index), so a run
is reproducible trial by trial and can be split across processes without
changing any outcome.
"""

from __future__ import annotations

import os
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable

from .errors import ArgumentError
from .linalg import (
    IMatrix,
    cauchy_binet,
    compound_identity,
    conjugation_minor_identity,
    deleted_block_sides,
    det,
    laplace_det,
    row_op_minor_identity,
    wedge,
)

DEFAULT_SEED = 20240229
ENTRY_RANGE = 5


def default_seed() -> int:
    env = os.environ.get("NOETHER_SEED")
    return int(env) if env else DEFAULT_SEED


def random_matrix(rng: random.Random, nrows: int, ncols: int, bound: int = ENTRY_RANGE) -> IMatrix:
    return IMatrix([[rng.randint(-bound, bound) for _ in range(ncols)] for _ in range(nrows)])


def random_sl(rng: random.Random, n: int, ops: int = 20, bound: int = 3) -> IMatrix:
    """Product of random elementary transvections, so det is exactly 1."""
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    if n < 2:
        return IMatrix(rows)
    for _ in range(rng.randint(1, ops)):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([c for c in range(-bound, bound + 1) if c])
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[j])]
    return IMatrix(rows)


def random_partition(rng: random.Random, n: int) -> list[list[int]]:
    """Random ordered partition of 1..n into nonempty blocks."""
    idx = list(range(1, n + 1))
    rng.shuffle(idx)
    cuts = sorted(rng.sample(range(1, n), rng.randint(0, n - 1)))
    bounds = [0] + cuts + [n]
    return [idx[a:b] for a, b in zip(bounds, bounds[1:])]


# each trial returns (lhs, rhs, inputs); inputs are only kept on failure

def _laplace(rng, n):
    M = random_matrix(rng, n, n)
    part = random_partition(rng, n)
    return laplace_det(M, part), det(M), {"M": M, "partition": part}


def _cauchy_binet(rng, n):
    m = rng.randint(1, n)
    A, B = random_matrix(rng, m, n), random_matrix(rng, n, m)
    return cauchy_binet(A, B), det(A @ B), {"A": A, "B": B}


def _deleted_block(rng, n):
    P = random_matrix(rng, n, n)
    lhs, rhs = deleted_block_sides(P)
    return lhs, rhs, {"P": P}


def _row_op_minor(rng, n):
    a = [rng.randint(-ENTRY_RANGE, ENTRY_RANGE) for _ in range(n)]
    B = random_matrix(rng, n, n - 1)
    lhs, rhs = row_op_minor_identity(a, B)
    return lhs, rhs, {"a": a, "B": B}


def _compound(rng, n):
    A = random_matrix(rng, n, n)
    I = sorted(rng.sample(range(1, n + 1), n - 2))
    J = sorted(rng.sample(range(1, n + 1), n - 2))
    lhs, rhs = compound_identity(A, I, J)
    return lhs, rhs, {"A": A, "I": I, "J": J}


def _conjugation_minor(rng, n):
    A = random_matrix(rng, n, n)
    P = random_sl(rng, n)
    lhs, rhs = conjugation_minor_identity(A, P)
    return lhs, -rhs, {"A": A, "P": P}


def _wedge_contract(rng, n):
    Om = random_matrix(rng, n, n - 1)
    v = [rng.randint(-ENTRY_RANGE, ENTRY_RANGE) for _ in range(n)]
    lhs = sum(w * x for w, x in zip(wedge(Om), v))
    full = IMatrix([row + (x,) for row, x in zip(Om.rows, v)])
    return lhs, det(full), {"Omega": Om, "v": v}


@dataclass(frozen=True)
class Identity:
    name: str
    check: Callable[[random.Random, int], tuple[Any, Any, dict]]
    dims: tuple[int, int]
    trials: int  # size used by the standard suite


IDENTITIES: dict[str, Identity] = {i.name: i for i in (
    Identity("laplace", _laplace, (3, 6), 200),
    Identity("cauchy-binet", _cauchy_binet, (2, 6), 200),
    Identity("deleted-block", _deleted_block, (2, 6), 200),
    Identity("row-op-minor", _row_op_minor, (2, 6), 200),
    Identity("compound", _compound, (3, 6), 200),
    Identity("conjugation-minor", _conjugation_minor, (3, 5), 100),
    Identity("wedge-contract", _wedge_contract, (2, 6), 500),
)}


def _jsonable(v):
    if isinstance(v, IMatrix):
        return [[str(x) for x in row] for row in v.rows]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, int):
        return str(v)
    return v


@dataclass
class FuzzReport:
    identity: str
    seed: int
    trials: int
    dims: tuple[int, int]
    passed: int = 0
    failures: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict[str, Any]:
        return {
            "identity": self.identity,
            "seed": self.seed,
            "trials": self.trials,
            "dims": list(self.dims),
            "passed": self.passed,
            "failures": self.failures,
        }


def run_trial(name: str, seed: int, trial: int, dims: tuple[int, int]) -> dict | None:
    """Run one trial; None on success, a serialized counterexample otherwise."""
    ident = IDENTITIES[name]
    rng = random.Random(f"{seed}:{name}:{trial}")
    n = rng.randint(*dims)
    lhs, rhs, inputs = ident.check(rng, n)
    if lhs == rhs:
        return None
    return {
        "trial": trial,
        "dim": n,
        "inputs": {k: _jsonable(v) for k, v in inputs.items()},
        "lhs": _jsonable(lhs),
        "rhs": _jsonable(rhs),
    }


def _trial_block(args):
    name, seed, lo, hi, dims = args
    return [(t, run_trial(name, seed, t, dims)) for t in range(lo, hi)]


def run_identity(
    name: str, trials: int | None = None, seed: int | None = None,
    dims: tuple[int, int] | None = None, jobs: int = 1,
) -> FuzzReport:
    if name not in IDENTITIES:
        raise ArgumentError(f"unknown identity {name!r}; choose from {', '.join(IDENTITIES)}")
    ident = IDENTITIES[name]
    trials = ident.trials if trials is None else trials
    seed = default_seed() if seed is None else seed
    dims = ident.dims if dims is None else tuple(dims)
    if trials < 0:
        raise ArgumentError(f"trials must be >= 0, got {trials}")
    lo_dim = ident.dims[0]
    if dims[0] > dims[1] or dims[0] < lo_dim:
        raise ArgumentError(f"{name} needs dims within {lo_dim}.., got {dims[0]}..{dims[1]}")
    report = FuzzReport(name, seed, trials, dims)
    if jobs > 1 and trials > 1:
        size = -(-trials // jobs)
        blocks = [(name, seed, a, min(a + size, trials), dims) for a in range(0, trials, size)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = [r for block in pool.map(_trial_block, blocks) for r in block]
    else:
        results = _trial_block((name, seed, 0, trials, dims))
    for _, fail in results:
        if fail is None:
            report.passed += 1
        else:
            report.failures.append(fail)
    return report


def run_suite(seed: int | None = None, jobs: int = 1) -> list[FuzzReport]:
    """Every identity at its standard trial count and dimension range."""
    return [run_identity(name, seed=seed, jobs=jobs) for name in IDENTITIES]
