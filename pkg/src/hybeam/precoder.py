"""Hybrid precoder solvers.

The alternating gap-minimization framework (alt_mag), its closed-form
projection instance (magiq_precoder), the scaled-unitary baseline
(pe_altmin_precoder), the simultaneous matching pursuit baseline
(somp_precoder), and the least-squares digital stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .beamform import DigitalPrecoderOpt, HybridPrecoder
from .errors import (
    BeamformError,
    EmptyDictionary,
    InnerSolverFailure,
    RankDeficientAnalog,
    RepeatSelectionExhausted,
)
from .hardware import Dictionary, HardwareScheme, feasible, project, unit_phase
from .linalg import as_complex, procrustes_unitary

# Fixed stream for the single rank-deficiency retry so solver output stays
# deterministic for a given input.
_RETRY_SEED = 0x5EED


@dataclass(frozen=True)
class SolverControls:
    """Stopping rules for the alternating solvers.

    threshold is the gap target; stall_tol stops the loop once the gap
    decrease falls below it (fixed point with gap above threshold).
    """

    threshold: float = 1e-6
    max_iters: int = 500
    stall_tol: float = 1e-10

    def __post_init__(self):
        if self.threshold < 0 or self.max_iters < 1:
            raise ValueError("need threshold >= 0 and max_iters >= 1")


@dataclass(frozen=True)
class AltMagState:
    """One iteration snapshot: unitary alignment, factors, squared gap."""

    t: np.ndarray
    f_rf: np.ndarray
    f_bb: np.ndarray
    gap: float
    iteration: int


def _gap(x: np.ndarray, t: np.ndarray, hybrid: np.ndarray) -> float:
    return float(np.linalg.norm(x @ t - hybrid) ** 2)


def minimal_gap_quantize(
    target,
    scheme: HardwareScheme,
    controls: SolverControls | None = None,
) -> tuple[np.ndarray, np.ndarray, list[AltMagState]]:
    """Alternate feasible-set projection with the optimal unitary alignment.

    target is the tall fully-digital factor (orthonormal columns times the
    power weights).  Iterates w = P(target @ t) and t from the singular
    factors of w* @ target until the squared gap drops below the threshold,
    stalls, or hits max_iters.  The gap never increases: each half-step
    minimizes its own subproblem.

    Returns (w, t, trace).
    """
    controls = controls or SolverControls()
    x = as_complex(target)
    n_rf = x.shape[1]
    t = np.eye(n_rf, dtype=complex)
    w = np.zeros_like(x)
    eye = np.eye(n_rf, dtype=complex)
    trace: list[AltMagState] = []
    # the zero initializer is not feasible, so monotonicity and stall
    # detection only apply from the first projected iterate onward
    current = _gap(x, t, w)
    prev_gap = None
    it = 0
    while current >= controls.threshold and it < controls.max_iters:
        it += 1
        w = project(scheme, x @ t)
        t_old = t
        t = procrustes_unitary(w.conj().T @ x)
        gap = _gap(x, t, w)
        if prev_gap is not None:
            assert gap <= prev_gap + 1e-12, "gap increased; alternating step broken"
        decrease = np.inf if prev_gap is None else prev_gap - gap
        trace.append(AltMagState(t=t, f_rf=w, f_bb=eye, gap=gap, iteration=it))
        prev_gap = gap
        current = gap
        if np.linalg.norm(t - t_old) <= 1e-12 * np.sqrt(n_rf):
            break  # alignment is a fixed point; further iterations repeat
        if decrease < controls.stall_tol:
            break
    return w, t, trace


def ls_digital_precoder(f_rf, target) -> np.ndarray:
    """Least-squares digital factor [F*F]^-1 F* target.

    The resulting hybrid matrix is the range projection of the target, so
    its power never exceeds the target's.
    """
    f_rf = as_complex(f_rf)
    target = as_complex(target)
    s = np.linalg.svd(f_rf, compute_uv=False)
    if s.size == 0 or s[-1] <= 1e-10 * s[0]:
        raise RankDeficientAnalog("analog precoder lost column rank after projection")
    gram = f_rf.conj().T @ f_rf
    return np.linalg.solve(gram, f_rf.conj().T @ target)


def _phase_perturbed(x: np.ndarray) -> np.ndarray:
    rng = np.random.default_rng(_RETRY_SEED)
    return x * np.exp(1j * 1e-8 * rng.standard_normal(x.shape))


def magiq_precoder(
    vphi: DigitalPrecoderOpt,
    scheme: HardwareScheme,
    controls: SolverControls | None = None,
) -> tuple[HybridPrecoder, list[AltMagState]]:
    """Minimal-gap iterative quantization.

    Approximates the fully-digital precoder with the analog factor alone
    inside the loop (digital factor pinned to the identity), then solves the
    digital factor in closed form once the alignment converges.  A rank
    deficient analog factor triggers one retry on a 1e-8 phase-perturbed
    target before the error propagates.
    """
    controls = controls or SolverControls()
    x = vphi.target()
    try:
        f_rf, t, trace = minimal_gap_quantize(x, scheme, controls)
        f_bb = ls_digital_precoder(f_rf, x @ t)
    except RankDeficientAnalog:
        x2 = _phase_perturbed(x)
        f_rf, t, trace = minimal_gap_quantize(x2, scheme, controls)
        f_bb = ls_digital_precoder(f_rf, x @ t)
    return HybridPrecoder(f_rf=f_rf, f_bb=f_bb, scheme=scheme), trace


def pe_altmin_precoder(
    vphi: DigitalPrecoderOpt,
    scheme: HardwareScheme,
    controls: SolverControls | None = None,
    n_s: int | None = None,
) -> HybridPrecoder:
    """Scaled-unitary digital baseline.

    Runs the same alternating loop as magiq_precoder but restricts the final
    digital factor to sqrt(n_s) / ||F_RF T||_F times the unitary alignment,
    which meets the power budget with equality.
    """
    controls = controls or SolverControls()
    x = vphi.target()
    if n_s is None:
        # uniform weights make ||target||_F^2 equal the stream count exactly
        n_s = int(round(float(np.linalg.norm(x) ** 2)))
    f_rf, t, _ = minimal_gap_quantize(x, scheme, controls)
    denom = float(np.linalg.norm(f_rf @ t))
    if denom <= 0.0:
        f_rf, t, _ = minimal_gap_quantize(_phase_perturbed(x), scheme, controls)
        denom = float(np.linalg.norm(f_rf @ t))
        if denom <= 0.0:
            raise RankDeficientAnalog("analog precoder collapsed to zero")
    f_bb = (np.sqrt(n_s) / denom) * t
    return HybridPrecoder(f_rf=f_rf, f_bb=f_bb, scheme=scheme)


def somp_precoder(
    f_target,
    dictionary: Dictionary,
    n_rf: int,
    n_s: int,
    scheme: HardwareScheme | None = None,
) -> HybridPrecoder:
    """Simultaneous matching pursuit over a feasible dictionary.

    Each round picks the unselected atom with the largest total correlation
    energy against the residual (summed over target columns), refits the
    least-squares coefficients over the selected atoms, and updates the
    residual.  The digital factor is rescaled at the end so the hybrid
    power equals n_s.  For fixed sub-array hardware the round-k candidates
    are re-supported on sub-array k.
    """
    f_target = as_complex(f_target)
    atoms = dictionary.columns
    m = atoms.shape[1]
    if m == 0:
        raise EmptyDictionary("dictionary has no columns")
    if n_rf > m:
        raise RepeatSelectionExhausted(
            f"need {n_rf} distinct atoms but the dictionary has {m}"
        )
    chosen_cols: list[np.ndarray] = []
    chosen_idx: list[int] = []
    residual = f_target.copy()
    coef = np.zeros((0, f_target.shape[1]), dtype=complex)
    for k in range(n_rf):
        remaining = [i for i in range(m) if i not in chosen_idx]
        if not remaining:
            raise RepeatSelectionExhausted("ran out of dictionary atoms")
        cand = atoms[:, remaining]
        if scheme is not None and scheme.kind == "S4":
            sub = scheme.subarrays[k % len(scheme.subarrays)]
            masked = np.zeros_like(cand)
            idx = list(sub)
            masked[idx, :] = unit_phase(cand[idx, :])
            cand = masked
        energy = np.sum(np.abs(cand.conj().T @ residual) ** 2, axis=1)
        pick = int(np.argmax(energy))
        chosen_idx.append(remaining[pick])
        chosen_cols.append(cand[:, pick])
        a_sel = np.stack(chosen_cols, axis=1)
        coef, *_ = np.linalg.lstsq(a_sel, f_target, rcond=None)
        residual = f_target - a_sel @ coef
    f_rf = np.stack(chosen_cols, axis=1)
    power = float(np.linalg.norm(f_rf @ coef))
    if power > 0.0:
        coef = coef * (np.sqrt(n_s) / power)
    return HybridPrecoder(f_rf=f_rf, f_bb=coef, scheme=scheme)


InnerSolver = Callable[[np.ndarray, HardwareScheme], tuple[np.ndarray, np.ndarray]]


def quantization_inner(target, scheme: HardwareScheme):
    """Analog-only inner step: project the rotated target, digital factor = I."""
    f_rf = project(scheme, target)
    return f_rf, np.eye(np.asarray(target).shape[1], dtype=complex)


def somp_inner(dictionary: Dictionary, n_s: int) -> InnerSolver:
    """Inner solver running matching pursuit against a fixed dictionary."""

    def solve(target, scheme):
        hp = somp_precoder(target, dictionary, np.asarray(target).shape[1], n_s, scheme)
        return hp.f_rf, hp.f_bb

    return solve


def alt_mag(
    vphi: DigitalPrecoderOpt,
    scheme: HardwareScheme,
    inner_solver: InnerSolver,
    controls: SolverControls | None = None,
) -> tuple[HybridPrecoder, list[AltMagState]]:
    """Alternating gap minimization with a pluggable hybrid factorization step.

    Alternates the inner solver on the rotated target with the optimal
    unitary alignment computed from the singular factors of
    f_bb* f_rf* target.  An inner iterate that would increase the gap is
    rejected in favor of the previous one (which also stops the loop), so
    the accepted gap sequence never increases.  The returned digital factor
    is the closed-form least-squares stage against the final rotated
    target, which also enforces the power budget.
    """
    controls = controls or SolverControls()
    x = vphi.target()
    n_rf = x.shape[1]
    t = np.eye(n_rf, dtype=complex)
    f_rf = np.zeros_like(x)
    f_bb = np.zeros((n_rf, n_rf), dtype=complex)
    trace: list[AltMagState] = []
    # monotonicity is enforced between feasible iterates; the zero
    # initializer is outside the feasible set, so the first inner result is
    # always accepted
    current = _gap(x, t, f_rf @ f_bb)
    prev_gap = None
    it = 0
    while current >= controls.threshold and it < controls.max_iters:
        it += 1
        try:
            cand_rf, cand_bb = inner_solver(x @ t, scheme)
        except BeamformError as exc:
            raise InnerSolverFailure(f"inner solver failed: {exc}") from exc
        cand_rf = as_complex(cand_rf)
        cand_bb = as_complex(cand_bb)
        if cand_rf.shape[0] != x.shape[0] or cand_rf.shape[1] != cand_bb.shape[0]:
            raise InnerSolverFailure("inner solver returned mismatched factors")
        if not feasible(scheme, cand_rf):
            raise InnerSolverFailure("inner solver returned an infeasible analog factor")
        inner_gap = _gap(x, t, cand_rf @ cand_bb)
        if prev_gap is not None and inner_gap > prev_gap + 1e-12:
            break  # keep the previous iterate; accepting would raise the gap
        f_rf, f_bb = cand_rf, cand_bb
        t_old = t
        t = procrustes_unitary(f_bb.conj().T @ f_rf.conj().T @ x)
        gap = _gap(x, t, f_rf @ f_bb)
        assert gap <= inner_gap + 1e-12
        trace.append(AltMagState(t=t, f_rf=f_rf, f_bb=f_bb, gap=gap, iteration=it))
        decrease = np.inf if prev_gap is None else prev_gap - gap
        prev_gap = gap
        current = gap
        if np.linalg.norm(t - t_old) <= 1e-12 * np.sqrt(n_rf):
            break
        if decrease < controls.stall_tol:
            break
    try:
        f_bb = ls_digital_precoder(f_rf, x @ t)
    except RankDeficientAnalog:
        x2 = _phase_perturbed(x)
        try:
            cand_rf, _ = inner_solver(x2 @ t, scheme)
            f_bb = ls_digital_precoder(cand_rf, x @ t)
            f_rf = cand_rf
        except BeamformError as exc:
            raise RankDeficientAnalog(str(exc)) from exc
    return HybridPrecoder(f_rf=f_rf, f_bb=f_bb, scheme=scheme), trace
