"""Decomposition plans: data model, reconstruction, cost and distortion.

A plan records a codebook descriptor and the wiring stages in design order
``W_1 ... W_L``; evaluation applies them in reverse, so the reconstructed
matrix is ``B @ W_1 @ ... @ W_L``.

Cost accounting follows one convention everywhere: combining the ``m``
terms a column selects costs ``m - 1`` additions, one shift per nonzero.
For a wiring stage with ``1 + s`` nonzeros per column that is ``s * K``
additions, and every supported codebook costs at most ``2K``.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .codebooks import CodebookDescriptor, mailman_dense
from .errors import DimensionError, PlanFormatError, PlanVersionError
from .pow2matrix import Pow2Matrix

PLAN_FORMAT = "shiftadd-plan"
PLAN_VERSION = 1

FIXED_STAGES = "fixed-stages"
ADAPTIVE_SINGLE_STAGE = "adaptive-single-stage"


# ---------------------------------------------------------------------------
# schedules and reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class StageSchedule:
    """How many wiring stages to fit and how sparse each one is.

    ``fixed-stages`` runs the listed per-stage sparsities; when
    ``target_bits`` is also set the list is extended by repeating its last
    entry until the accuracy of that bit width is reached.
    ``adaptive-single-stage`` fits one wiring matrix whose per-column term
    count grows until each column meets the bit-width threshold.
    """

    mode: str = FIXED_STAGES
    sparsity: tuple[int, ...] = (1,)
    target_bits: int | None = None
    max_stages: int = 64

    def __post_init__(self):
        if self.mode not in (FIXED_STAGES, ADAPTIVE_SINGLE_STAGE):
            raise ValueError(f"unknown schedule mode {self.mode!r}")
        if self.mode == FIXED_STAGES and not self.sparsity:
            raise ValueError("fixed-stages schedule needs a sparsity list")
        if self.mode == ADAPTIVE_SINGLE_STAGE and self.target_bits is None:
            raise ValueError("adaptive schedule needs target_bits")
        if any(s < 0 for s in self.sparsity):
            raise ValueError("per-stage sparsity must be >= 0")
        if self.target_bits is not None and self.target_bits < 1:
            raise ValueError("target_bits must be >= 1")

    @classmethod
    def fixed(cls, sparsity, target_bits=None, max_stages=64):
        return cls(FIXED_STAGES, tuple(sparsity), target_bits, max_stages)

    @classmethod
    def adaptive(cls, target_bits, max_stages=64):
        return cls(ADAPTIVE_SINGLE_STAGE, (), target_bits, max_stages)

    def to_dict(self) -> dict:
        return {"mode": self.mode, "sparsity": list(self.sparsity),
                "target_bits": self.target_bits,
                "max_stages": self.max_stages}

    @classmethod
    def from_dict(cls, d: dict) -> "StageSchedule":
        return cls(d["mode"], tuple(d.get("sparsity", ())),
                   d.get("target_bits"), int(d.get("max_stages", 64)))


@dataclass(frozen=True)
class CostReport:
    """Operation counts of one plan application."""

    additions: int
    shifts: int
    sign_changes: int
    adds_per_entry: float
    per_stage: tuple[int, ...]
    analytic_only: bool = False

    def stage_sparsities(self, n_cols: int) -> list[float]:
        return [adds / n_cols for adds in self.per_stage]


@dataclass(frozen=True)
class DistortionReport:
    """Relative squared error of a reconstruction against its target."""

    rel_error: float
    per_column: tuple[float, ...]
    db: float
    achieved_bits: float


def threshold(q: int) -> float:
    """Relative squared error of q-bit signed fixed point: ``4**-(q-1) / 3``.

    One bit is the sign, the remaining ``q - 1`` carry magnitude;
    ``q = 16`` gives roughly -95 dB.
    """
    if q < 1:
        raise ValueError("q must be >= 1")
    return 4.0 ** (-(q - 1)) / 3.0


def achieved_bits(rel_error: float) -> float:
    """Largest bit width whose threshold the error meets (0 if none)."""
    if rel_error < 0:
        raise ValueError("relative error must be >= 0")
    if rel_error == 0.0:
        return math.inf
    if rel_error > threshold(1):
        return 0.0
    q = max(1, math.floor(1.0 - math.log(3.0 * rel_error) / math.log(4.0)))
    while threshold(q) < rel_error:
        q -= 1
    while threshold(q + 1) >= rel_error:
        q += 1
    return float(q)


# ---------------------------------------------------------------------------
# plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionPlan:
    n_rows: int
    n_cols: int
    codebook: CodebookDescriptor
    stages: tuple[Pow2Matrix, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.codebook.n_rows != self.n_rows or \
                self.codebook.n_cols != self.n_cols:
            raise DimensionError("codebook shape does not match the plan")
        for idx, stage in enumerate(self.stages):
            if stage.rows != self.n_cols or stage.cols != self.n_cols:
                raise DimensionError(
                    f"stage {idx} must be {self.n_cols}x{self.n_cols}, got "
                    f"{stage.rows}x{stage.cols}")

    @property
    def n_stages(self) -> int:
        return len(self.stages)


def target_digest(target: np.ndarray) -> str:
    a = np.ascontiguousarray(target, dtype=np.float64)
    h = hashlib.sha256()
    h.update(str(a.shape).encode())
    h.update(a.tobytes())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# reconstruction
# ---------------------------------------------------------------------------

def _dyadic_add(a: tuple[int, int], b: tuple[int, int]) -> tuple[int, int]:
    ma, ea = a
    mb, eb = b
    if ma == 0:
        return b
    if mb == 0:
        return a
    if ea <= eb:
        return ma + (mb << (eb - ea)), ea
    return (ma << (ea - eb)) + mb, eb


def _float_to_dyadic(x: float) -> tuple[int, int]:
    m, e = math.frexp(x)
    return int(math.ldexp(m, 53)), e - 53


def _dyadic_to_float(d: tuple[int, int]) -> float:
    return math.ldexp(float(d[0]), d[1])


def reconstruct_exact(plan: DecompositionPlan) -> list[list[tuple[int, int]]]:
    """Exact dyadic reconstruction, one ``(mantissa, exponent)`` per entry.

    Propagates unit columns through the stage chain right-to-left, then
    through the codebook factors, using integer arithmetic only.  Returned
    as a list of ``n_cols`` columns of length ``n_rows``.
    """
    k_count = plan.n_cols

    stage_cols = []
    for stage in plan.stages:
        stage_cols.append([tuple((i, c.sign, c.exponent) for i, c in col)
                           for col in stage.columns])

    cb = plan.codebook
    if cb.kind == "mailman":
        dense_cb = mailman_dense(plan.n_rows)
        cb_cols = None
    elif cb.kind == "gaussian":
        dense_cb = cb.dense()
        cb_cols = None
    else:
        dense_cb = None
        cb_cols = [[tuple((i, c.sign, c.exponent) for i, c in col)
                    for col in f.columns] for f in cb.factors]

    out_columns = []
    for k in range(k_count):
        vec: dict[int, tuple[int, int]] = {k: (1, 0)}
        for cols in reversed(stage_cols):
            vec = _propagate(vec, cols)
        if cb_cols is not None:
            for cols in reversed(cb_cols):
                vec = _propagate(vec, cols)
            column = [vec.get(i, (0, 0)) for i in range(plan.n_rows)]
        else:
            column = []
            for n in range(plan.n_rows):
                acc = (0, 0)
                for j, v in vec.items():
                    b = dense_cb[n, j]
                    if b == 0.0:
                        continue
                    mb, eb = _float_to_dyadic(b)
                    acc = _dyadic_add(acc, (v[0] * mb, v[1] + eb))
                column.append(acc)
        out_columns.append(column)
    return out_columns


def _propagate(vec: dict[int, tuple[int, int]],
               stage_cols) -> dict[int, tuple[int, int]]:
    out: dict[int, tuple[int, int]] = {}
    for j, (m, e) in vec.items():
        if m == 0:
            continue
        for i, sign, exp in stage_cols[j]:
            term = (m if sign > 0 else -m, e + exp)
            prev = out.get(i)
            out[i] = term if prev is None else _dyadic_add(prev, term)
    return out


def reconstruct(plan: DecompositionPlan) -> np.ndarray:
    """``B @ W_1 @ ... @ W_L`` evaluated exactly, then rounded to float64."""
    cols = reconstruct_exact(plan)
    out = np.zeros((plan.n_rows, plan.n_cols))
    for k, col in enumerate(cols):
        for n, d in enumerate(col):
            out[n, k] = _dyadic_to_float(d)
    return out


# ---------------------------------------------------------------------------
# accounting
# ---------------------------------------------------------------------------

def cost_of(plan: DecompositionPlan) -> CostReport:
    """Structural operation counts of applying the plan to one vector."""
    cb_adds, cb_shifts, cb_signs, analytic = plan.codebook.application_cost()
    additions = cb_adds
    shifts = cb_shifts
    signs = cb_signs
    per_stage = []
    for stage in plan.stages:
        stage_adds = sum(max(0, len(col) - 1) for col in stage.columns)
        additions += stage_adds
        shifts += stage.nnz
        signs += sum(1 for col in stage.columns
                     for _, c in col if c.sign < 0)
        per_stage.append(stage_adds)
    entries = plan.n_rows * plan.n_cols
    return CostReport(additions, shifts, signs,
                      additions / entries if entries else 0.0,
                      tuple(per_stage), analytic)


def distortion(plan: DecompositionPlan, target: np.ndarray,
               reconstruction: np.ndarray | None = None) -> DistortionReport:
    """Relative Frobenius error of the plan against ``target``.

    ``reconstruction`` may supply a precomputed matrix (e.g. the effective
    matrix tracked during fitting, identical to the exact one up to float
    rounding); by default the exact reconstruction is used.
    """
    target = np.asarray(target, dtype=np.float64)
    if target.shape != (plan.n_rows, plan.n_cols):
        raise DimensionError(
            f"target shape {target.shape} does not match plan "
            f"{(plan.n_rows, plan.n_cols)}")
    if reconstruction is None:
        reconstruction = reconstruct(plan)
    elif reconstruction.shape != target.shape:
        raise DimensionError("reconstruction shape does not match target")
    return distortion_of_matrix(reconstruction, target)


def distortion_of_matrix(approx: np.ndarray,
                         target: np.ndarray) -> DistortionReport:
    diff = target - approx
    err_cols = np.sum(diff * diff, axis=0)
    norm_cols = np.sum(target * target, axis=0)
    total_err = float(np.sum(err_cols))
    total_norm = float(np.sum(norm_cols))
    rel = total_err / total_norm if total_norm > 0 else \
        (0.0 if total_err == 0.0 else math.inf)
    per_col = tuple(
        (e / n) if n > 0 else (0.0 if e == 0.0 else math.inf)
        for e, n in zip(err_cols, norm_cols))
    db = 10.0 * math.log10(rel) if rel > 0 else -math.inf
    return DistortionReport(rel, per_col, db, achieved_bits(rel))


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def plan_to_dict(plan: DecompositionPlan) -> dict:
    return {
        "format": PLAN_FORMAT,
        "version": PLAN_VERSION,
        "rows": plan.n_rows,
        "cols": plan.n_cols,
        "codebook": plan.codebook.to_dict(),
        "stages": [s.to_records() for s in plan.stages],
        "metadata": plan.metadata,
    }


def plan_from_dict(d: dict) -> DecompositionPlan:
    try:
        fmt = d["format"]
        version = d["version"]
    except (KeyError, TypeError) as exc:
        raise PlanFormatError(f"missing plan header field: {exc}") from exc
    if fmt != PLAN_FORMAT:
        raise PlanFormatError(f"not a plan document (format {fmt!r})")
    if version != PLAN_VERSION:
        raise PlanVersionError(
            f"unsupported plan version {version!r}, expected {PLAN_VERSION}")
    try:
        rows, cols = int(d["rows"]), int(d["cols"])
        codebook = CodebookDescriptor.from_dict(d["codebook"])
        stages = tuple(Pow2Matrix.from_records(cols, rec)
                       for rec in d["stages"])
        metadata = d.get("metadata", {})
    except PlanFormatError:
        raise
    except Exception as exc:
        raise PlanFormatError(f"malformed plan document: {exc}") from exc
    return DecompositionPlan(rows, cols, codebook, stages, metadata)


def serialize(plan: DecompositionPlan) -> bytes:
    return json.dumps(plan_to_dict(plan), separators=(",", ":"),
                      sort_keys=True).encode()


def deserialize(data: bytes) -> DecompositionPlan:
    try:
        d = json.loads(data.decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise PlanFormatError(f"malformed plan document: {exc}") from exc
    if not isinstance(d, dict):
        raise PlanFormatError("plan document must be a JSON object")
    return plan_from_dict(d)
