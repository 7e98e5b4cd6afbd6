"""Shift-add execution of plans on exact dyadic vectors.

Every scalar operation is an exponent shift, a sign flip, or an addition of
dyadics, so the output equals the exact reconstruction applied to the input
bit for bit.  Operation counters are structural: they follow the plan's
sparsity pattern (one shift per stored nonzero, ``m - 1`` additions to
combine a column's ``m`` terms) and do not depend on the data, matching
what ``plan.cost_of`` reports without running anything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codebooks import mailman_apply
from .errors import DimensionError, EngineError
from .plan import CostReport, DecompositionPlan
from .pot import DYADIC_ZERO, Dyadic, pow2_round_array
from .pow2matrix import Pow2Matrix


@dataclass
class _Counters:
    additions: int = 0
    shifts: int = 0
    sign_changes: int = 0


def _apply_pow2(mat: Pow2Matrix, vec: list[Dyadic],
                ops: _Counters) -> list[Dyadic]:
    if len(vec) != mat.cols:
        raise DimensionError(
            f"vector of length {len(vec)} against {mat.rows}x{mat.cols}")
    out = [DYADIC_ZERO] * mat.rows
    for k, col in enumerate(mat.columns):
        xk = vec[k]
        for i, c in col:
            out[i] = out[i] + xk.times_pow2(c.sign, c.exponent)
        ops.shifts += len(col)
        ops.sign_changes += sum(1 for _, c in col if c.sign < 0)
        ops.additions += max(0, len(col) - 1)
    return out


def apply(plan: DecompositionPlan, x) -> tuple[list[Dyadic], CostReport]:
    """Evaluate ``reconstruct(plan) @ x`` exactly by shifts and additions.

    Stages are applied in decreasing design order, then the codebook.
    Plans over the Gaussian analysis codebook cannot be executed this way
    and raise ``EngineError``.
    """
    x = list(x)
    if len(x) != plan.n_cols:
        raise DimensionError(
            f"input length {len(x)} does not match plan width {plan.n_cols}")
    for v in x:
        if not isinstance(v, Dyadic):
            raise TypeError(f"engine inputs must be Dyadic, got {type(v)!r}")
    if not plan.codebook.is_shift_add:
        raise EngineError(
            "gaussian codebooks are analysis-only and cannot be applied by "
            "shifts and additions")

    ops = _Counters()
    per_stage = []
    h = x
    for stage in reversed(plan.stages):
        before = ops.additions
        h = _apply_pow2(stage, h, ops)
        per_stage.append(ops.additions - before)
    per_stage.reverse()

    cb = plan.codebook
    if cb.kind == "mailman":
        y, adds = mailman_apply(cb.n_rows, h)
        ops.additions += adds
    else:
        for factor in reversed(cb.factors):
            h = _apply_pow2(factor, h, ops)
        y = h[:cb.n_rows]  # implicit [I 0] selector, free

    entries = plan.n_rows * plan.n_cols
    report = CostReport(ops.additions, ops.shifts, ops.sign_changes,
                        ops.additions / entries if entries else 0.0,
                        tuple(per_stage))
    return y, report


# ---------------------------------------------------------------------------
# fixed-point baselines
# ---------------------------------------------------------------------------

def _check_baseline_args(target, x) -> tuple[np.ndarray, list[Dyadic]]:
    tgt = np.asarray(target, dtype=np.float64)
    if tgt.ndim != 2:
        raise DimensionError("baseline target must be a matrix")
    if np.max(np.abs(tgt), initial=0.0) > 1.0:
        raise ValueError("baseline entries must lie in [-1, 1]")
    x = list(x)
    if len(x) != tgt.shape[1]:
        raise DimensionError(
            f"input length {len(x)} does not match target width "
            f"{tgt.shape[1]}")
    return tgt, x


def _accumulation_counts(term_counts: np.ndarray) -> tuple[int, int]:
    """(entry-internal additions, row accumulation additions).

    An entry contributing ``m >= 1`` terms costs ``m - 1`` internal
    additions; combining the nonzero entries of a row costs one addition
    per entry beyond the first.  Zero terms cost nothing.
    """
    internal = int(np.sum(np.maximum(term_counts - 1, 0)))
    row_nnz = np.sum(term_counts > 0, axis=1)
    across = int(np.sum(np.maximum(row_nnz - 1, 0)))
    return internal, across


def _int_matvec(m_int: np.ndarray, x: list[Dyadic],
                scale_exp: int) -> list[Dyadic]:
    """Exact ``(m_int @ x) * 2**scale_exp`` for an integer matrix."""
    if x:
        e_base = min(v.exponent for v in x if not v.is_zero()) \
            if any(x) else 0
        aligned = [v.mantissa << (v.exponent - e_base) if not v.is_zero()
                   else 0 for v in x]
    else:
        e_base, aligned = 0, []

    max_m = int(np.max(np.abs(m_int), initial=0))
    max_a = max((abs(a) for a in aligned), default=0)
    width = max_m.bit_length() + max_a.bit_length() + \
        max(len(x), 1).bit_length()
    if width < 62 and all(abs(a) < 2 ** 53 for a in aligned):
        acc = m_int.astype(np.int64) @ np.array(aligned, dtype=np.int64)
        sums = [int(v) for v in acc]
    else:
        rows = m_int.tolist()
        sums = [sum(int(c) * a for c, a in zip(row, aligned) if c)
                for row in rows]
    return [Dyadic(s, e_base + scale_exp) for s in sums]


def baseline_apply(target, q: int, x) -> tuple[list[Dyadic], CostReport]:
    """Sign-magnitude fixed-point reference: quantize every entry to ``q``
    bits (sign plus ``q - 1`` fractional) and evaluate by shift-add.

    Uniform entries at ``q = 16`` need about 7.5 additions per entry: one
    per set magnitude bit, with the per-entry and across-row accumulation
    bookkeeping cancelling to ``sum(bits) - rows``.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    if q > 62:
        raise ValueError("baseline supports q up to 62 bits")
    tgt, x = _check_baseline_args(target, x)
    scale = q - 1
    m_int = np.floor(np.abs(tgt) * math.ldexp(1.0, scale) + 0.5)
    m_int = (np.sign(tgt) * m_int).astype(np.int64)
    bits = np.bitwise_count(np.abs(m_int).astype(np.uint64)).astype(np.int64)

    internal, across = _accumulation_counts(bits)
    additions = internal + across
    shifts = int(np.sum(bits))
    sign_changes = int(np.sum(bits[m_int < 0]))

    y = _int_matvec(m_int, x, -scale)
    entries = tgt.size
    report = CostReport(additions, shifts, sign_changes,
                        additions / entries if entries else 0.0, ())
    return y, report


def csd_baseline_apply(target, c_per_entry: int, x,
                       target_mse: float | None = None,
                       max_terms: int = 64) -> tuple[list[Dyadic], CostReport]:
    """Signed-digit reference: encode every entry greedily with at most
    ``c_per_entry`` power-of-two terms and evaluate exactly.

    With ``target_mse`` set, each entry instead keeps adding terms until its
    squared error is at most that value (or ``max_terms`` is hit), the
    adaptive analogue of a fixed bit width.
    """
    if c_per_entry < 0:
        raise ValueError("c_per_entry must be >= 0")
    tgt, x = _check_baseline_args(target, x)
    r = tgt.copy()
    terms = np.zeros(tgt.shape, dtype=np.int64)
    negative = np.zeros(tgt.shape, dtype=np.int64)
    if target_mse is None:
        rounds = c_per_entry
        for _ in range(rounds):
            v = pow2_round_array(r, e_min=None, e_max=None)
            terms += v != 0.0
            negative += v < 0.0
            r -= v
    else:
        for _ in range(max_terms):
            live = r * r > target_mse
            if not live.any():
                break
            v = np.where(live, pow2_round_array(r, e_min=None, e_max=None),
                         0.0)
            terms += v != 0.0
            negative += v < 0.0
            r -= v
    approx = tgt - r  # both residual chain and difference are exact

    internal, across = _accumulation_counts(terms)
    additions = internal + across
    shifts = int(np.sum(terms))
    sign_changes = int(np.sum(negative))

    n_rows, n_cols = tgt.shape
    y = []
    for n in range(n_rows):
        acc = DYADIC_ZERO
        for k in range(n_cols):
            a = approx[n, k]
            if a == 0.0 or x[k].is_zero():
                continue
            m, e = math.frexp(a)
            am, ae = int(math.ldexp(m, 53)), e - 53
            acc = acc + Dyadic(am * x[k].mantissa, ae + x[k].exponent)
        y.append(acc)

    entries = tgt.size
    report = CostReport(additions, shifts, sign_changes,
                        additions / entries if entries else 0.0, ())
    return y, report
