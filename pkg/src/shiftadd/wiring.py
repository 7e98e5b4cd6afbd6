"""Greedy wiring-matrix fitting and the multi-stage decomposition driver.

Each wiring column approximates one target column as a sparse signed
power-of-two combination of codebook columns.  A greedy step replaces at
most a single component: for every candidate column the exact least-squares
coefficient against the component-removed residual is rounded to the
nearest signed power of two, the squared residual of every such change is
scored, and the single best strictly improving change is applied.  Ties
break toward the smallest column index, so fits are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AccuracyUnreachableError, DimensionError
from .pot import EXP_MAX, EXP_MIN, SignedPow2
from .pow2matrix import Column, Pow2Matrix, advance_effective
from .plan import (ADAPTIVE_SINGLE_STAGE, DecompositionPlan, StageSchedule,
                   distortion_of_matrix, target_digest, threshold)


@dataclass(frozen=True)
class FitResult:
    """Outcome of fitting one column: the sparse coefficients, the final
    squared residual, and the squared residual after each applied step."""

    entries: Column
    residual_sq: float
    trace: tuple[float, ...]

    @property
    def steps(self) -> int:
        return len(self.trace)


def _greedy_fit(t: np.ndarray, cb_t: np.ndarray, norms: np.ndarray,
                max_steps: int, stop_sq: float | None) -> FitResult:
    """Greedy loop shared by budgeted and accuracy-driven fits.

    ``cb_t`` is the transposed codebook, ``norms`` its squared column
    norms (zero columns are skipped).  Stops after ``max_steps`` changes,
    when no change strictly reduces the residual, or once the squared
    residual is at most ``stop_sq``.
    """
    k_count = cb_t.shape[0]
    w = np.zeros(k_count)
    r = t.astype(np.float64, copy=True)
    r_sq = float(r @ r)
    usable = norms > 0.0
    safe_norms = np.where(usable, norms, 1.0)
    trace = []
    for _ in range(max_steps):
        if stop_sq is not None and r_sq <= stop_sq:
            break
        if r_sq == 0.0:
            break
        u = cb_t @ r
        coeff = (u + w * norms) / safe_norms
        m, e = np.frexp(np.abs(coeff))
        exp = np.clip(np.where(m >= 0.75, e, e - 1), EXP_MIN, EXP_MAX)
        v = np.where(coeff == 0.0, 0.0,
                     np.copysign(np.ldexp(np.ones(k_count), exp), coeff))
        delta = w - v
        score = r_sq + delta * (2.0 * u + delta * norms)
        score = np.where(usable, score, np.inf)
        j = int(np.argmin(score))
        if not score[j] < r_sq:
            break
        w[j] = v[j]
        r += delta[j] * cb_t[j]
        r_sq = float(r @ r)
        trace.append(r_sq)
    return FitResult(_column_from_weights(w), r_sq, tuple(trace))


def _column_from_weights(w: np.ndarray) -> Column:
    entries = []
    for j in np.flatnonzero(w):
        m, e = np.frexp(abs(w[j]))
        # every stored weight is an exact power of two: m == 0.5
        entries.append((int(j), SignedPow2(1 if w[j] > 0 else -1,
                                           int(e) - 1)))
    return tuple(entries)


def fit_column(target_col: np.ndarray, codebook_cols: np.ndarray,
               s: int) -> FitResult:
    """Fit one target column with at most ``1 + s`` nonzero coefficients."""
    if s < 0:
        raise ValueError("s must be >= 0")
    t = np.asarray(target_col, dtype=np.float64)
    cb = np.asarray(codebook_cols, dtype=np.float64)
    if cb.ndim != 2 or t.shape != (cb.shape[0],):
        raise DimensionError(
            f"target column of length {t.shape} does not match codebook "
            f"{cb.shape}")
    cb_t = np.ascontiguousarray(cb.T)
    norms = np.einsum("kn,kn->k", cb_t, cb_t)
    return _greedy_fit(t, cb_t, norms, 1 + s, None)


def fit_stage(target: np.ndarray, codebook_cols: np.ndarray,
              s: int) -> Pow2Matrix:
    """Fit every target column independently with per-column budget ``s``."""
    if s < 0:
        raise ValueError("s must be >= 0")
    tgt = np.asarray(target, dtype=np.float64)
    cb = np.asarray(codebook_cols, dtype=np.float64)
    if tgt.ndim != 2 or cb.ndim != 2 or tgt.shape[0] != cb.shape[0]:
        raise DimensionError(
            f"target {tgt.shape} and codebook {cb.shape} row counts differ")
    cb_t = np.ascontiguousarray(cb.T)
    norms = np.einsum("kn,kn->k", cb_t, cb_t)
    cols = tuple(_greedy_fit(tgt[:, k], cb_t, norms, 1 + s, None).entries
                 for k in range(tgt.shape[1]))
    return Pow2Matrix(cb.shape[1], tgt.shape[1], cols)


def decompose(target: np.ndarray, codebook, schedule: StageSchedule,
              metadata: dict | None = None) -> DecompositionPlan:
    """Decompose ``target`` over ``codebook`` according to ``schedule``.

    Fixed-stages mode fits ``W_l`` against the rolling effective codebook
    ``B W_1 ... W_{l-1}``; with ``target_bits`` set, stages repeat (reusing
    the last listed sparsity) until the relative error meets the bit-width
    threshold.  Adaptive mode fits a single wiring matrix, growing each
    column until it meets the threshold on its own.
    """
    tgt = np.asarray(target, dtype=np.float64)
    if tgt.ndim != 2:
        raise DimensionError("target must be a matrix")
    if tgt.shape != (codebook.n_rows, codebook.n_cols):
        raise DimensionError(
            f"target {tgt.shape} does not match codebook "
            f"{(codebook.n_rows, codebook.n_cols)}")
    n, k = tgt.shape

    meta = dict(metadata or {})
    meta.setdefault("target_sha256", target_digest(tgt))
    meta["schedule"] = schedule.to_dict()
    meta["stage_order"] = "design; apply in reverse"

    if schedule.mode == ADAPTIVE_SINGLE_STAGE:
        stages, eff = _decompose_adaptive(tgt, codebook, schedule)
        nnz = stages[0].column_nnz()
        meta["mean_column_sparsity"] = \
            float(np.mean([max(m - 1, 0) for m in nnz]))
    else:
        stages, eff = _decompose_fixed(tgt, codebook, schedule)

    report = distortion_of_matrix(eff, tgt)
    meta["fit_rel_error"] = report.rel_error
    meta["fit_achieved_bits"] = report.achieved_bits
    return DecompositionPlan(n, k, codebook, tuple(stages), meta)


def _decompose_fixed(tgt: np.ndarray, codebook,
                     schedule: StageSchedule):
    eff = codebook.dense()
    stages = []
    stop = None if schedule.target_bits is None else \
        threshold(schedule.target_bits)
    tgt_norm = float(np.sum(tgt * tgt))
    idx = 0
    while True:
        if stop is None:
            if idx >= len(schedule.sparsity):
                break
        else:
            diff = tgt - eff
            if float(np.sum(diff * diff)) <= stop * tgt_norm:
                break
            if idx >= schedule.max_stages:
                raise AccuracyUnreachableError(
                    f"accuracy unreachable: {schedule.target_bits}-bit "
                    f"target not met within {schedule.max_stages} stages")
        s = schedule.sparsity[min(idx, len(schedule.sparsity) - 1)]
        stage = fit_stage(tgt, eff, s)
        eff = advance_effective(eff, stage)
        stages.append(stage)
        idx += 1
    return stages, eff


def _decompose_adaptive(tgt: np.ndarray, codebook,
                        schedule: StageSchedule):
    cb = codebook.dense()
    cb_t = np.ascontiguousarray(cb.T)
    norms = np.einsum("kn,kn->k", cb_t, cb_t)
    rel = threshold(schedule.target_bits)
    cols = []
    for k in range(tgt.shape[1]):
        t = tgt[:, k]
        stop_sq = rel * float(t @ t)
        fit = _greedy_fit(t, cb_t, norms, schedule.max_stages, stop_sq)
        if fit.residual_sq > stop_sq:
            raise AccuracyUnreachableError(
                f"accuracy unreachable: column {k} stuck at relative error "
                f"{fit.residual_sq / max(float(t @ t), 1e-300):.3e} after "
                f"{fit.steps} steps (budget {schedule.max_stages})")
        cols.append(fit.entries)
    stage = Pow2Matrix(cb.shape[1], tgt.shape[1], tuple(cols))
    eff = advance_effective(cb, stage)
    return [stage], eff
