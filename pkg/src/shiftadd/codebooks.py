"""Codebook matrices: binary mailman, two-sparse, self-designing, Gaussian.

A codebook is the cheap left factor of the decomposition: its columns are
the building vectors that wiring stages select and scale.  All kinds except
the Gaussian one (which exists for analysis only) can be applied with
additions and bit shifts alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DimensionError
from .pot import Dyadic, SignedPow2
from .pow2matrix import Column, Pow2Matrix, advance_effective

KINDS = ("mailman", "two-sparse", "self-designing", "gaussian")

MAILMAN_MAX_ROWS = 24


# ---------------------------------------------------------------------------
# binary mailman
# ---------------------------------------------------------------------------

def mailman_build(n_rows: int) -> Pow2Matrix:
    """The ``N x 2**N`` binary matrix whose column ``k`` spells ``k - 1``.

    Row ``n`` holds the n-th least significant bit, the digit order implied
    by the halving recursion that makes the fast multiply work.
    """
    _check_mailman_rows(n_rows)
    k_count = 1 << n_rows
    cols = []
    for k in range(k_count):
        cols.append(tuple((n, SignedPow2(1, 0))
                          for n in range(n_rows) if k >> n & 1))
    return Pow2Matrix(n_rows, k_count, tuple(cols))


def mailman_dense(n_rows: int) -> np.ndarray:
    _check_mailman_rows(n_rows)
    k = np.arange(1 << n_rows)
    n = np.arange(n_rows)
    return ((k[None, :] >> n[:, None]) & 1).astype(np.float64)


def mailman_additions(n_rows: int) -> int:
    """Addition count of the fast multiply: c(1) = 0, c(N) = c(N-1) + 2**N - 1."""
    _check_mailman_rows(n_rows)
    c = 0
    for n in range(2, n_rows + 1):
        c += (1 << n) - 1
    return c


def mailman_apply(n_rows: int, h) -> tuple[list[Dyadic], int]:
    """Multiply the mailman matrix by ``h`` exactly, returning the result
    and the number of additions performed.

    Splits ``h`` into halves, recurses on their sum, and finishes the last
    output component by summing the second half; the count telescopes to
    ``mailman_additions(n_rows)`` and stays below ``2 * 2**n_rows``.
    """
    _check_mailman_rows(n_rows)
    h = list(h)
    if len(h) != 1 << n_rows:
        raise DimensionError(
            f"mailman with {n_rows} rows needs a vector of length "
            f"{1 << n_rows}, got {len(h)}")

    def rec(n: int, vec: list[Dyadic]) -> tuple[list[Dyadic], int]:
        if n == 1:
            return [vec[1]], 0
        half = len(vec) // 2
        h2 = vec[half:]
        summed = [a + b for a, b in zip(vec[:half], h2)]
        out, adds = rec(n - 1, summed)
        tail = h2[0]
        for v in h2[1:]:
            tail = tail + v
        out.append(tail)
        return out, adds + 2 * half - 1

    return rec(n_rows, h)


def _check_mailman_rows(n_rows: int) -> None:
    if not 1 <= n_rows <= MAILMAN_MAX_ROWS:
        raise ValueError(
            f"mailman rows must be in [1, {MAILMAN_MAX_ROWS}], got {n_rows}")


# ---------------------------------------------------------------------------
# two-sparse
# ---------------------------------------------------------------------------

def two_sparse_build(n_rows: int, n_cols: int, max_level: int = 64) -> Pow2Matrix:
    """Columns with one or two power-of-two nonzeros, no two collinear.

    Enumeration order: the unit columns first, then two-sparse patterns by
    increasing magnitude level ``m`` (the largest exponent used), row pair,
    and sign pattern.  Level ``m`` contributes the ratios ``+-2**m`` and
    ``+-2**-m`` realized with non-negative exponents only, so magnitudes
    grow only as far as ``n_cols`` demands.
    """
    if n_rows < 1:
        raise DimensionError("two-sparse codebook needs at least one row")
    one = SignedPow2(1, 0)
    cols: list[Column] = [((i, one),) for i in range(n_rows)]
    if len(cols) >= n_cols:
        return Pow2Matrix(n_rows, n_cols, tuple(cols[:n_cols]))
    pairs = [(i, j) for i in range(n_rows) for j in range(i + 1, n_rows)]
    for level in range(max_level + 1):
        if level == 0:
            patterns = [((1, 0), (1, 0)), ((1, 0), (-1, 0))]
        else:
            patterns = [((1, 0), (1, level)), ((1, 0), (-1, level)),
                        ((1, level), (1, 0)), ((1, level), (-1, 0))]
        for i, j in pairs:
            for (si, ei), (sj, ej) in patterns:
                cols.append(((i, SignedPow2(si, ei)), (j, SignedPow2(sj, ej))))
                if len(cols) == n_cols:
                    return Pow2Matrix(n_rows, n_cols, tuple(cols))
    raise ValueError(
        f"cannot enumerate {n_cols} non-collinear columns over {n_rows} rows "
        f"within magnitude level {max_level}")


def _column_fractions(col: Column) -> dict[int, Fraction]:
    out = {}
    for i, c in col:
        out[i] = Fraction(c.sign) * (Fraction(2) ** c.exponent)
    return out


def columns_collinear(col_a: Column, col_b: Column) -> bool:
    """Exact collinearity test: ``a * <b, b> == b * <a, b>`` componentwise."""
    a = _column_fractions(col_a)
    b = _column_fractions(col_b)
    if not a or not b:
        return not a and not b
    bb = sum(v * v for v in b.values())
    ab = sum(a[i] * b[i] for i in a.keys() & b.keys())
    for i in a.keys() | b.keys():
        if a.get(i, 0) * bb != b.get(i, 0) * ab:
            return False
    return True


def has_collinear_pair(mat: Pow2Matrix) -> bool:
    for j in range(mat.cols):
        for k in range(j + 1, mat.cols):
            if columns_collinear(mat.columns[j], mat.columns[k]):
                return True
    return False


# ---------------------------------------------------------------------------
# gaussian (analysis only)
# ---------------------------------------------------------------------------

def gaussian_build(n_rows: int, n_cols: int, seed: int) -> np.ndarray:
    """IID standard-normal matrix from a seeded PCG64 generator."""
    rng = np.random.default_rng(seed)
    return rng.standard_normal((n_rows, n_cols))


# ---------------------------------------------------------------------------
# descriptor
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CodebookDescriptor:
    """Everything needed to rebuild a codebook's effective matrix.

    ``factors`` holds the stored power-of-two factors: the enumerated matrix
    for two-sparse, the pair ``(B1, B2)`` for self-designing (the leading
    ``[I 0]`` selector is implicit), nothing for mailman and gaussian.
    """

    kind: str
    n_rows: int
    n_cols: int
    seed: int | None = None
    stage_sparsity: int = 1
    factors: tuple[Pow2Matrix, ...] = field(default=())

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown codebook kind {self.kind!r}")
        if self.kind == "mailman":
            if self.n_cols != 1 << self.n_rows:
                raise DimensionError(
                    f"mailman codebook needs K = 2**N, got {self.n_rows}x"
                    f"{self.n_cols}")
        elif self.kind == "two-sparse":
            if len(self.factors) != 1:
                raise ValueError("two-sparse descriptor stores one factor")
        elif self.kind == "self-designing":
            if len(self.factors) != 2:
                raise ValueError("self-designing descriptor stores B1 and B2")
            for f in self.factors:
                if f.rows != self.n_cols or f.cols != self.n_cols:
                    raise DimensionError("self-designing factors must be KxK")
        elif self.kind == "gaussian":
            if self.seed is None:
                raise ValueError("gaussian descriptor needs a seed")

    @property
    def is_shift_add(self) -> bool:
        return self.kind != "gaussian"

    def selector_dense(self) -> np.ndarray:
        b0 = np.zeros((self.n_rows, self.n_cols))
        b0[:, :self.n_rows] = np.eye(self.n_rows)
        return b0

    def dense(self) -> np.ndarray:
        """Effective real matrix of the codebook."""
        if self.kind == "mailman":
            return mailman_dense(self.n_rows)
        if self.kind == "two-sparse":
            return self.factors[0].dense()
        if self.kind == "self-designing":
            eff = self.selector_dense()
            b1, b2 = self.factors
            return advance_effective(advance_effective(eff, b1), b2)
        return gaussian_build(self.n_rows, self.n_cols, self.seed)

    def application_cost(self) -> tuple[int, int, int, bool]:
        """(additions, shifts, sign_changes, analytic_only) of one multiply.

        Additions follow the per-column accounting used throughout the cost
        model: combining ``m`` selected terms costs ``m - 1`` additions.  The
        Gaussian codebook is not shift-add implementable; it reports the
        nominal ``2K`` additions of the cost model and is flagged.
        """
        if self.kind == "mailman":
            return mailman_additions(self.n_rows), 0, 0, False
        if self.kind == "gaussian":
            return 2 * self.n_cols, 0, 0, True
        adds = shifts = signs = 0
        for f in self.factors:
            for col in f.columns:
                adds += max(0, len(col) - 1)
                shifts += len(col)
                signs += sum(1 for _, c in col if c.sign < 0)
        return adds, shifts, signs, False

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "rows": self.n_rows, "cols": self.n_cols}
        if self.kind == "gaussian":
            d["seed"] = self.seed
        elif self.kind == "self-designing":
            d["stage_sparsity"] = self.stage_sparsity
            d["factors"] = [f.to_records() for f in self.factors]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CodebookDescriptor":
        kind = d["kind"]
        n, k = int(d["rows"]), int(d["cols"])
        if kind == "two-sparse":
            return cls(kind, n, k, factors=(two_sparse_build(n, k),))
        if kind == "self-designing":
            factors = tuple(Pow2Matrix.from_records(k, rec)
                            for rec in d["factors"])
            return cls(kind, n, k, stage_sparsity=int(d.get("stage_sparsity", 1)),
                       factors=factors)
        if kind == "gaussian":
            return cls(kind, n, k, seed=int(d["seed"]))
        return cls(kind, n, k)


def self_design_build(aux_target: np.ndarray,
                      stage_sparsity: int = 1) -> CodebookDescriptor:
    """Let the codebook design itself against an auxiliary target.

    ``B = B0 B1 B2`` where ``B0 = [I 0]`` and each of ``B1, B2`` is fit as a
    wiring stage for the auxiliary target with ``1 + stage_sparsity``
    nonzeros per column.
    """
    from .wiring import fit_stage  # deferred: wiring sits above this module

    aux = np.asarray(aux_target, dtype=np.float64)
    if aux.ndim != 2:
        raise DimensionError("auxiliary target must be a matrix")
    n, k = aux.shape
    if k < n:
        raise DimensionError(
            f"self-designing codebook needs K >= N, got {n}x{k}")
    b0 = np.zeros((n, k))
    b0[:, :n] = np.eye(n)
    b1 = fit_stage(aux, b0, stage_sparsity)
    b2 = fit_stage(aux, advance_effective(b0, b1), stage_sparsity)
    return CodebookDescriptor("self-designing", n, k,
                              stage_sparsity=stage_sparsity, factors=(b1, b2))


def make_codebook(kind: str, n_rows: int, n_cols: int, *, seed: int = 0,
                  target: np.ndarray | None = None,
                  aux: str = "auto",
                  stage_sparsity: int = 1) -> CodebookDescriptor:
    """Build a codebook descriptor of the requested kind.

    For the self-designing kind, ``aux`` picks the auxiliary target:
    ``"target"`` uses ``target`` itself, ``"gaussian"`` a seeded Gaussian
    matrix, and ``"auto"`` prefers ``target`` when given.
    """
    if kind == "mailman":
        return CodebookDescriptor("mailman", n_rows, n_cols)
    if kind == "two-sparse":
        return CodebookDescriptor("two-sparse", n_rows, n_cols,
                                  factors=(two_sparse_build(n_rows, n_cols),))
    if kind == "gaussian":
        return CodebookDescriptor("gaussian", n_rows, n_cols, seed=seed)
    if kind == "self-designing":
        if aux == "target" or (aux == "auto" and target is not None):
            if target is None:
                raise ValueError("aux='target' requires a target matrix")
            aux_mat = np.asarray(target, dtype=np.float64)
        elif aux in ("gaussian", "auto"):
            aux_mat = gaussian_build(n_rows, n_cols, seed)
        else:
            raise ValueError(f"unknown aux choice {aux!r}")
        return self_design_build(aux_mat, stage_sparsity)
    raise ValueError(f"unknown codebook kind {kind!r}")
