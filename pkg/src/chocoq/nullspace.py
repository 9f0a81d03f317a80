"""Null-space bases of ``C u = 0`` with entries restricted to {-1, 0, 1}.

Each basis vector ``u`` defines one driver term of the mixer, so the basis is kept
small (exactly ``n - rank(C)`` vectors) and prefers sparse vectors.  Two routes:

* :func:`solve_general` works on any integer matrix via exact rational RREF.
* :func:`solve_onehot_pattern` recognises one-hot rows (unit-coefficient subset sums)
  chained through equality rows ``x_a - x_b = 0`` and writes the basis down directly
  in linear time.  It returns ``None`` when the rows do not fit that pattern.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Sequence

from .problem import ConstraintSystem

DEFAULT_BASIS_BUDGET = 10**6


class BasisNotFound(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstraintBasis:
    vectors: tuple[tuple[int, ...], ...]
    num_vars: int

    @property
    def rank(self) -> int:
        return len(self.vectors)

    def nonzeros(self) -> int:
        return sum(1 for u in self.vectors for e in u if e)

    def column_counts(self) -> list[int]:
        return [sum(1 for u in self.vectors if u[i]) for i in range(self.num_vars)]


def rref(matrix: Sequence[Sequence[int]], n: int) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form over the rationals; returns (rows, pivot columns)."""
    rows = [[Fraction(v) for v in r] for r in matrix]
    pivots: list[int] = []
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        lead = rows[r][col]
        rows[r] = [v / lead for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def matrix_rank(matrix: Sequence[Sequence[int]], n: int) -> int:
    return len(rref(matrix, n)[1]) if matrix else 0


def canonical_sign(u: Sequence[int]) -> tuple[int, ...]:
    """Flip ``u`` so that its first nonzero entry is +1 (``u`` and ``-u`` give the same term)."""
    for e in u:
        if e:
            return tuple(u) if e > 0 else tuple(-v for v in u)
    return tuple(u)


class _Span:
    """Incremental rational row-reduction used for independence tests."""

    def __init__(self, n: int):
        self.n = n
        self.rows: list[tuple[int, list[Fraction]]] = []  # (pivot col, row)

    def reduce(self, v: Sequence) -> list[Fraction]:
        w = [Fraction(e) for e in v]
        for col, row in self.rows:
            if w[col] != 0:
                f = w[col]
                w = [a - f * b for a, b in zip(w, row)]
        return w

    def add(self, v: Sequence) -> bool:
        w = self.reduce(v)
        col = next((i for i, e in enumerate(w) if e != 0), None)
        if col is None:
            return False
        lead = w[col]
        w = [e / lead for e in w]
        # keep existing rows reduced against the new pivot
        self.rows = [
            (c, [a - r[col] * b for a, b in zip(r, w)] if r[col] != 0 else r) for c, r in self.rows
        ]
        self.rows.append((col, w))
        return True

    def contains(self, v: Sequence) -> bool:
        return not any(self.reduce(v))


def validate_basis(cs: ConstraintSystem, n: int, vectors: Sequence[Sequence[int]]) -> None:
    """Raise ``ValueError`` unless ``vectors`` is a {-1,0,1} basis of the null space."""
    for u in vectors:
        if len(u) != n or any(e not in (-1, 0, 1) for e in u):
            raise ValueError(f"bad basis vector {u}")
        for coeffs, _ in cs.rows:
            if sum(c * e for c, e in zip(coeffs, u)) != 0:
                raise ValueError(f"{u} is not in the null space")
    span = _Span(n)
    if not all(span.add(u) for u in vectors):
        raise ValueError("basis vectors are linearly dependent")
    expected = n - matrix_rank(cs.matrix, n)
    if len(vectors) != expected:
        raise ValueError(f"basis has {len(vectors)} vectors, null space has dimension {expected}")


def _free_basis(rows: list[list[Fraction]], pivots: list[int], n: int) -> list[list[Fraction]]:
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        u = [Fraction(0)] * n
        u[f] = Fraction(1)
        for row, p in zip(rows, pivots):
            u[p] = -row[f]
        basis.append(u)
    return basis


def solve_general(
    cs: ConstraintSystem, n: int, budget: int = DEFAULT_BASIS_BUDGET
) -> ConstraintBasis:
    """Basis of ``{u : C u = 0}`` with entries in {-1, 0, 1}.

    The standard free-variable basis of the RREF is returned when it is already
    ternary.  Otherwise candidates are enumerated by how many free variables they
    touch (fewest first), with signs chosen by DFS and pivot entries forced by the
    RREF; a branch dies once a forced entry can no longer land in [-1, 1].
    """
    for coeffs, _ in cs.rows:
        if len(coeffs) != n:
            raise ValueError("constraint row length does not match n")
    rows, pivots = rref(cs.matrix, n) if cs.rows else ([], [])
    free = [j for j in range(n) if j not in pivots]
    if not free:
        return ConstraintBasis((), n)

    std = _free_basis(rows, pivots, n)
    if all(e in (-1, 0, 1) for u in std for e in u):
        vectors = tuple(sorted((canonical_sign([int(e) for e in u]) for u in std), reverse=True))
        return _checked(cs, n, vectors)

    # coefficient of free var f in pivot row p: u[p] = -sum_f R[p][f] * u[f]
    coef = [[-row[f] for f in free] for row in rows]
    span = _Span(n)
    chosen: list[tuple[int, ...]] = []
    nodes = 0

    def candidates(subset: tuple[int, ...]):
        """All ternary vectors whose free support is exactly ``subset``."""
        nonlocal nodes
        m = len(subset)
        # bound on what the not-yet-signed free vars can still add to each pivot row
        tail = [[sum(abs(coef[p][subset[t]]) for t in range(k, m)) for k in range(m + 1)] for p in range(len(rows))]
        signs = [0] * m
        partial = [Fraction(0)] * len(rows)

        def dfs(k: int):
            nonlocal nodes
            nodes += 1
            if nodes > budget:
                raise BasisNotFound(
                    f"budget of {budget} nodes exhausted with {len(chosen)} of {len(free)} vectors"
                )
            for p in range(len(rows)):
                if abs(partial[p]) - tail[p][k] > 1:
                    return
            if k == m:
                if all(v.denominator == 1 and abs(v) <= 1 for v in partial):
                    u = [0] * n
                    for t, f_idx in enumerate(subset):
                        u[free[f_idx]] = signs[t]
                    for p, piv in enumerate(pivots):
                        u[piv] = int(partial[p])
                    yield tuple(u)
                return
            # the first sign is fixed to +1: u and -u give the same driver term
            for s in ((1,) if k == 0 else (1, -1)):
                signs[k] = s
                for p in range(len(rows)):
                    partial[p] += s * coef[p][subset[k]]
                yield from dfs(k + 1)
                for p in range(len(rows)):
                    partial[p] -= s * coef[p][subset[k]]

        yield from dfs(0)

    for size in range(1, len(free) + 1):
        level = []
        for subset in combinations(range(len(free)), size):
            level.extend(candidates(subset))
        level.sort(key=lambda u: (sum(1 for e in u if e), [-e for e in u]))
        for u in level:
            if span.add(u):
                chosen.append(canonical_sign(u))
                if len(chosen) == len(free):
                    return _checked(cs, n, tuple(chosen))
    raise BasisNotFound(
        f"null space has dimension {len(free)} but only {len(chosen)} independent "
        "{-1,0,1} vectors exist"
    )


def _checked(cs: ConstraintSystem, n: int, vectors: tuple[tuple[int, ...], ...]) -> ConstraintBasis:
    validate_basis(cs, n, vectors)
    return ConstraintBasis(vectors, n)


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


def solve_onehot_pattern(cs: ConstraintSystem, n: int) -> ConstraintBasis | None:
    """Closed-form basis for one-hot rows linked by equality rows, else ``None``.

    Equality rows ``x_a - x_b = 0`` merge variables into classes that must move
    together.  Every other row must then hit a set of distinct classes with
    coefficient +1 (or all -1), and any two such class sets must be equal or disjoint.
    For a group of classes ``C_1..C_m`` the basis holds ``e(C_t) - e(C_t+1)``; classes
    outside every group are unconstrained and contribute ``e(C)``.
    """
    ds = _DisjointSet(n)
    sums = []
    for coeffs, _ in cs.rows:
        if len(coeffs) != n:
            raise ValueError("constraint row length does not match n")
        nz = [(i, c) for i, c in enumerate(coeffs) if c]
        vals = sorted(c for _, c in nz)
        if len(nz) == 2 and vals == [-1, 1]:
            ds.union(nz[0][0], nz[1][0])
        elif all(c == 1 for _, c in nz) or all(c == -1 for _, c in nz):
            sums.append([i for i, _ in nz])
        else:
            return None

    classes: dict[int, list[int]] = {}
    for i in range(n):
        classes.setdefault(ds.find(i), []).append(i)

    groups: list[tuple[int, ...]] = []
    owner: dict[int, int] = {}
    for support in sums:
        roots = [ds.find(i) for i in support]
        if len(set(roots)) != len(roots):
            return None  # a class would carry coefficient 2
        key = tuple(sorted(roots))
        if key in groups:
            continue
        if any(r in owner for r in key):
            return None  # partial overlap between one-hot groups
        for r in key:
            owner[r] = len(groups)
        groups.append(key)

    def indicator(root: int) -> list[int]:
        u = [0] * n
        for i in classes[root]:
            u[i] = 1
        return u

    vectors = []
    for key in groups:
        for a, b in zip(key, key[1:]):
            vectors.append(tuple(x - y for x, y in zip(indicator(a), indicator(b))))
    for root in sorted(classes):
        if root not in owner:
            vectors.append(tuple(indicator(root)))
    vectors = [canonical_sign(u) for u in vectors]
    try:
        validate_basis(cs, n, vectors)
    except ValueError:
        return None
    return ConstraintBasis(tuple(vectors), n)


def solve_basis(cs: ConstraintSystem, n: int, budget: int = DEFAULT_BASIS_BUDGET) -> ConstraintBasis:
    """Pattern solver when it applies, general solver otherwise."""
    basis = solve_onehot_pattern(cs, n)
    return basis if basis is not None else solve_general(cs, n, budget)


def same_span(a: ConstraintBasis, b: ConstraintBasis) -> bool:
    if a.num_vars != b.num_vars or a.rank != b.rank:
        return False
    span = _Span(a.num_vars)
    for u in a.vectors:
        span.add(u)
    return all(span.contains(u) for u in b.vectors)


def pairwise_extension(basis: ConstraintBasis) -> tuple[tuple[int, ...], ...]:
    """The basis followed by every ternary ``u_a + u_b`` and ``u_a - u_b``.

    The result is over-complete, so it is returned as plain vectors rather than a
    :class:`ConstraintBasis`.  More driver terms mean more mixing per layer at the
    price of a deeper circuit.
    """
    seen = {canonical_sign(u) for u in basis.vectors}
    out = list(basis.vectors)
    for a, b in combinations(basis.vectors, 2):
        for s in (1, -1):
            w = tuple(x + s * y for x, y in zip(a, b))
            if any(w) and all(e in (-1, 0, 1) for e in w):
                c = canonical_sign(w)
                if c not in seen:
                    seen.add(c)
                    out.append(c)
    return tuple(out)
