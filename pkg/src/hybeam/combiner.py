"""Hybrid combiner solvers.

magiq_combiner quantizes the unconstrained ratio-trace maximizer with a
unitary right factor kept in the loop.  grtm grows the analog combiner one
column at a time, scoring dictionary atoms with the exact appended
trace objective through a rank-one Gram update; the scalar-ratio form of the
same score (built from the C/D matrices below) is computed alongside as a
cross-check.  somp_weighted_combiner is the weighted-Frobenius pursuit
baseline, and kronecker_combiner reuses grtm for uplink channel-estimation
combining where only the receive correlation matters.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .beamform import (
    HybridCombiner,
    mmse_digital_combiner,
    optimal_digital_combiner,
    trace_objective,
)
from .errors import (
    DictionaryExhausted,
    EmptyDictionary,
    InRangeSpace,
    RankDeficientAnalog,
    RankTooLow,
    SingularB,
    SingularForInverse,
)
from .hardware import Dictionary, HardwareScheme, unit_phase
from .linalg import as_complex, check_hermitian, hermitian_part, hermitian_sqrt, orth_projector
from .precoder import SolverControls, _phase_perturbed, minimal_gap_quantize

RANGE_EXCLUSION_RTOL = 1e-10


@dataclass(frozen=True)
class GrtmState:
    """Greedy-round snapshot: selected columns and the ratio-score matrices."""

    w_partial: np.ndarray
    c: np.ndarray
    d: np.ndarray
    gamma: float
    g: np.ndarray
    objective: float


@dataclass(frozen=True)
class GrtmSelection:
    """Output of the greedy column search.

    score_agreement records, per round, whether the scalar-ratio scoring
    picked the same atom as the exact appended objective.
    """

    w_rf: np.ndarray
    objective: float
    trace: tuple[GrtmState, ...]
    score_agreement: tuple[bool, ...]


def magiq_combiner(
    h_bar,
    r_z,
    scheme: HardwareScheme,
    n_rf_r: int,
    controls: SolverControls | None = None,
) -> HybridCombiner:
    """Minimal-gap quantization of the unconstrained combiner.

    The loop target is B^-1/2 U (the unconstrained ratio-trace maximizer
    with identity right factor); the right factor stays unitary during the
    alternation.  The digital stage is the exact MMSE estimator behind the
    converged analog combiner.
    """
    controls = controls or SolverControls()
    h_bar = as_complex(h_bar)
    x = optimal_digital_combiner(h_bar, r_z, n_rf_r)
    try:
        w_rf, _, _ = minimal_gap_quantize(x, scheme, controls)
        w_bb = mmse_digital_combiner(h_bar, r_z, w_rf)
    except RankDeficientAnalog:
        w_rf, _, _ = minimal_gap_quantize(_phase_perturbed(x), scheme, controls)
        w_bb = mmse_digital_combiner(h_bar, r_z, w_rf)
    return HybridCombiner(w_rf=w_rf, w_bb=w_bb, scheme=scheme)


def append_ratio_matrices(w_partial, a, b):
    """Matrices (C, D, gamma, G) of the scalar-ratio column score.

    With P the projector onto range(B^1/2 W):

        D = B^1/2 (I - P) B^1/2
        gamma = tr(P B^-1/2 A^1/2 B^-1/2)
        G = B^1/2 P B^-1/2 A^1/2 - A^1/2
        C = gamma D + G G*

    For an empty W this reduces to C = A, D = B.  A candidate column w
    scores w*Cw / w*Dw; w lies in range(W) exactly when w*Dw = 0.
    """
    a = check_hermitian(a)
    b = check_hermitian(b)
    n = b.shape[0]
    try:
        bfac = hermitian_sqrt(b, need_inverse=True)
    except SingularForInverse as exc:
        raise SingularB("B must be positive definite") from exc
    afac = hermitian_sqrt(a)
    w_partial = as_complex(w_partial)
    if w_partial.ndim == 1:
        w_partial = w_partial[:, None]
    if w_partial.shape[1] == 0:
        p = np.zeros((n, n), dtype=complex)
    else:
        p = orth_projector(bfac.sqrt @ w_partial)
    eye = np.eye(n, dtype=complex)
    d = hermitian_part(bfac.sqrt @ (eye - p) @ bfac.sqrt)
    gamma = float(np.trace(p @ bfac.inv_sqrt @ afac.sqrt @ bfac.inv_sqrt).real)
    g = bfac.sqrt @ p @ bfac.inv_sqrt @ afac.sqrt - afac.sqrt
    c = hermitian_part(gamma * d + g @ g.conj().T)
    return c, d, gamma, g


def _append_scores(w_partial, cand, a, b):
    """Exact appended trace objectives for every candidate column, vectorized.

    Uses the block-inverse update of the Gram matrix: appending w adds
    (Wq - w)* A (Wq - w) / (w*Bw - w*BW q) with q = (W*BW)^-1 W*Bw.  The
    denominator equals w*Dw, which also drives the range-exclusion guard.

    Returns (increments, denominators, tr_d).
    """
    n = b.shape[0]
    k = w_partial.shape[1]
    if k:
        bw = b @ w_partial
        gram = hermitian_part(w_partial.conj().T @ bw)
        u_all = bw.conj().T @ cand
        qv = np.linalg.solve(gram, u_all)
        wq = w_partial @ qv
        tr_d = float(np.trace(b).real) - float(
            np.trace(np.linalg.solve(gram, bw.conj().T @ bw)).real
        )
        denom = (
            np.sum(cand.conj() * (b @ cand), axis=0).real
            - np.sum(u_all.conj() * qv, axis=0).real
        )
    else:
        wq = np.zeros_like(cand)
        tr_d = float(np.trace(b).real)
        denom = np.sum(cand.conj() * (b @ cand), axis=0).real
    diff = wq - cand
    num = np.sum(diff.conj() * (a @ diff), axis=0).real
    return num, denom, tr_d


def trace_objective_append(w_partial, w, a, b) -> float:
    """Trace objective of [W w] via the rank-one Gram update.

    Raises InRangeSpace when w adds no information, i.e. its D-energy falls
    below the relative range-exclusion guard.
    """
    a = check_hermitian(a)
    b = check_hermitian(b)
    w_partial = as_complex(w_partial)
    if w_partial.ndim == 1:
        w_partial = w_partial[:, None]
    w = as_complex(w).reshape(-1, 1)
    num, denom, tr_d = _append_scores(w_partial, w, a, b)
    tol = RANGE_EXCLUSION_RTOL * tr_d / b.shape[0]
    if denom[0] <= tol:
        raise InRangeSpace("candidate column lies in the span of the selected ones")
    base = trace_objective(w_partial, a, b) if w_partial.shape[1] else 0.0
    return float(base + num[0] / denom[0])


def grtm_select(
    a,
    b,
    scheme: HardwareScheme,
    dictionary: Dictionary,
    n_rf: int,
) -> GrtmSelection:
    """Greedy ratio-trace maximization over a dictionary.

    One column is appended per round: every remaining atom is scored with
    the exact appended objective, candidates failing the range-exclusion
    guard are skipped, ties resolve to the lowest index, and the selected
    atom is removed from the pool.  The scalar C/D ratio is evaluated
    alongside and its argmax recorded against the primary choice.  For
    fixed sub-array hardware the round-k candidates are re-supported on
    sub-array k before scoring.
    """
    a = check_hermitian(a)
    b = check_hermitian(b)
    atoms = dictionary.columns
    if atoms.shape[1] == 0:
        raise EmptyDictionary("dictionary has no columns")
    n = b.shape[0]
    # the scalar-ratio cross-check needs matrix square roots; skip it when
    # B is PSD-singular (the exact scorer needs no roots)
    try:
        hermitian_sqrt(b, need_inverse=True)
        secondary = True
    except SingularForInverse:
        secondary = False
    available = np.ones(atoms.shape[1], dtype=bool)
    w = np.zeros((n, 0), dtype=complex)
    objective = 0.0
    trace: list[GrtmState] = []
    agreement: list[bool] = []
    for k in range(n_rf):
        cand_idx = np.flatnonzero(available)
        if cand_idx.size == 0:
            raise DictionaryExhausted("no admissible dictionary columns left")
        cand = atoms[:, cand_idx]
        if scheme.kind == "S4":
            sub = scheme.subarrays[k % len(scheme.subarrays)]
            masked = np.zeros_like(cand)
            rows = list(sub)
            masked[rows, :] = unit_phase(cand[rows, :])
            cand = masked
        num, denom, tr_d = _append_scores(w, cand, a, b)
        tol = RANGE_EXCLUSION_RTOL * tr_d / n
        admissible = denom > tol
        if not np.any(admissible):
            raise DictionaryExhausted(
                f"round {k}: every remaining column fails the range-exclusion guard"
            )
        scores = np.where(admissible, objective + num / np.where(admissible, denom, 1.0), -np.inf)
        pick = int(np.argmax(scores))
        if secondary:
            c_mat, d_mat, gamma, g_mat = append_ratio_matrices(w, a, b)
            trace.append(
                GrtmState(
                    w_partial=w, c=c_mat, d=d_mat, gamma=gamma, g=g_mat, objective=objective
                )
            )
            ratio_num = np.sum(cand.conj() * (c_mat @ cand), axis=0).real
            ratio = np.where(admissible, ratio_num / np.where(admissible, denom, 1.0), -np.inf)
            agreement.append(int(np.argmax(ratio)) == pick)
        w = np.concatenate([w, cand[:, pick : pick + 1]], axis=1)
        available[cand_idx[pick]] = False
        objective = trace_objective(w, a, b)
    return GrtmSelection(
        w_rf=w,
        objective=objective,
        trace=tuple(trace),
        score_agreement=tuple(agreement),
    )


def grtm(
    h_bar,
    r_z,
    scheme: HardwareScheme,
    dictionary: Dictionary,
    n_rf_r: int,
) -> HybridCombiner:
    """Greedy ratio-trace combiner with the exact MMSE digital stage."""
    h_bar = as_complex(h_bar)
    r_z = check_hermitian(r_z)
    a = hermitian_part(h_bar @ h_bar.conj().T)
    b = hermitian_part(a + r_z)
    sel = grtm_select(a, b, scheme, dictionary, n_rf_r)
    w_bb = mmse_digital_combiner(h_bar, r_z, sel.w_rf)
    return HybridCombiner(w_rf=sel.w_rf, w_bb=w_bb, scheme=scheme)


def somp_weighted_combiner(
    w_mmse,
    b,
    scheme: HardwareScheme,
    dictionary: Dictionary,
    n_rf_r: int,
) -> HybridCombiner:
    """Matching pursuit on the B^1/2-weighted combiner approximation.

    Selects atoms against the weighted target B^1/2 W_mmse using weighted
    atoms B^1/2 d; the returned digital stage is the exact MMSE estimator
    behind the selected analog columns (recovered through h_bar = B W_mmse),
    not the weighted least-squares coefficients used during selection.
    """
    w_mmse = as_complex(w_mmse)
    b = check_hermitian(b)
    atoms = dictionary.columns
    if atoms.shape[1] == 0:
        raise EmptyDictionary("dictionary has no columns")
    bfac = hermitian_sqrt(b, need_inverse=False)
    target = bfac.sqrt @ w_mmse
    chosen_idx: list[int] = []
    chosen_cols: list[np.ndarray] = []
    chosen_weighted: list[np.ndarray] = []
    residual = target.copy()
    for k in range(n_rf_r):
        remaining = [i for i in range(atoms.shape[1]) if i not in chosen_idx]
        if not remaining:
            raise DictionaryExhausted("ran out of dictionary atoms")
        cand = atoms[:, remaining]
        if scheme.kind == "S4":
            sub = scheme.subarrays[k % len(scheme.subarrays)]
            masked = np.zeros_like(cand)
            rows = list(sub)
            masked[rows, :] = unit_phase(cand[rows, :])
            cand = masked
        wcand = bfac.sqrt @ cand
        energy = np.sum(np.abs(wcand.conj().T @ residual) ** 2, axis=1)
        pick = int(np.argmax(energy))
        chosen_idx.append(remaining[pick])
        chosen_cols.append(cand[:, pick])
        chosen_weighted.append(wcand[:, pick])
        a_sel = np.stack(chosen_weighted, axis=1)
        coef, *_ = np.linalg.lstsq(a_sel, target, rcond=None)
        residual = target - a_sel @ coef
    w_rf = np.stack(chosen_cols, axis=1)
    # exact digital stage: h_bar = B w_mmse, so w_bb = [W*BW]^-1 W* B w_mmse
    gram = hermitian_part(w_rf.conj().T @ b @ w_rf)
    vals = np.linalg.eigvalsh(gram)
    if vals[-1] <= 0.0 or vals[0] <= 1e-12 * vals[-1]:
        raise RankDeficientAnalog("selected atoms are linearly dependent")
    w_bb = np.linalg.solve(gram, w_rf.conj().T @ (b @ w_mmse))
    return HybridCombiner(w_rf=w_rf, w_bb=w_bb, scheme=scheme)


def kronecker_combiner(
    r_r,
    scheme: HardwareScheme,
    dictionary: Dictionary,
    n_rf: int,
) -> tuple[np.ndarray, float]:
    """Analog combiner for uplink training under receive-side correlation.

    The channel-estimation error is inversely proportional to the
    ratio-trace objective with A = R_r^2 and B = R_r, so the greedy search
    applies unchanged.  Returns (w_rf, mu).
    """
    r = check_hermitian(r_r)
    w = np.linalg.eigvalsh(r)
    lam_max = max(float(w[-1]), 0.0)
    if int(np.count_nonzero(w > 1e-12 * lam_max)) < n_rf:
        raise RankTooLow(f"receive correlation has rank below n_rf={n_rf}")
    sel = grtm_select(hermitian_part(r @ r), r, scheme, dictionary, n_rf)
    return sel.w_rf, sel.objective
