"""Fully-digital optima, MMSE digital stages, and MSE evaluation.

These are the baselines and objective functions all hybrid designs are
measured against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, complex_normal
from .errors import (
    DimensionMismatch,
    RankDeficientAnalog,
    SingularB,
    SingularForInverse,
    SingularGram,
    SingularInner,
    SingularInterference,
)
from .hardware import HardwareScheme
from .linalg import as_complex, check_hermitian, hermitian_part, hermitian_sqrt, top_eigvecs


@dataclass(frozen=True)
class SystemDims:
    """Antenna, stream, and RF-chain counts.

    Defaults follow the minimal-chain worst case n_rf_t = n_rf_r = n_s.
    """

    n_t: int
    n_r: int
    n_s: int
    n_rf_t: int | None = None
    n_rf_r: int | None = None

    def __post_init__(self):
        if self.n_rf_t is None:
            object.__setattr__(self, "n_rf_t", self.n_s)
        if self.n_rf_r is None:
            object.__setattr__(self, "n_rf_r", self.n_s)
        if not (self.n_s <= self.n_rf_t <= self.n_t):
            raise ValueError(f"need n_s <= n_rf_t <= n_t, got {self}")
        if not (self.n_s <= self.n_rf_r <= self.n_r):
            raise ValueError(f"need n_s <= n_rf_r <= n_r, got {self}")


@dataclass(frozen=True)
class HybridPrecoder:
    """Analog factor (feasible for its scheme) and digital factor."""

    f_rf: np.ndarray
    f_bb: np.ndarray
    scheme: HardwareScheme | None = None

    @property
    def matrix(self) -> np.ndarray:
        return self.f_rf @ self.f_bb

    @property
    def power(self) -> float:
        return float(np.linalg.norm(self.matrix) ** 2)


@dataclass(frozen=True)
class HybridCombiner:
    """Analog combining factor and digital (baseband) estimator stage."""

    w_rf: np.ndarray
    w_bb: np.ndarray
    scheme: HardwareScheme | None = None

    @property
    def matrix(self) -> np.ndarray:
        return self.w_rf @ self.w_bb


@dataclass(frozen=True)
class DigitalPrecoderOpt:
    """Unconstrained optimal precoder factors: orthonormal V and diagonal weights."""

    v: np.ndarray
    phi: np.ndarray
    allocation: str = "uniform"

    def target(self) -> np.ndarray:
        """The fully-digital matrix V diag(phi) before any unitary rotation."""
        return self.v * self.phi


def _min_max_eig(m: np.ndarray) -> tuple[float, float]:
    w = np.linalg.eigvalsh(m)
    return float(w[0]), float(w[-1])


def optimal_digital_precoder(
    h_tilde,
    r_tilde,
    dims: SystemDims,
    allocation="uniform",
) -> DigitalPrecoderOpt:
    """Unconstrained MSE-optimal precoder factors for an effective channel.

    h_tilde is the effective channel seen through the (fixed) receive
    chain, r_tilde the effective interference covariance.  V holds the
    n_rf_t leading eigenvectors of h_tilde* r_tilde^-1 h_tilde; the default
    uniform weights give ||V diag(phi)||_F^2 exactly n_s.
    """
    h_tilde = as_complex(h_tilde)
    r_tilde = check_hermitian(r_tilde)
    if h_tilde.ndim != 2 or h_tilde.shape[0] != r_tilde.shape[0]:
        raise DimensionMismatch("h_tilde rows must match r_tilde size")
    if h_tilde.shape[1] != dims.n_t:
        raise DimensionMismatch("h_tilde columns must match dims.n_t")
    lo, hi = _min_max_eig(r_tilde)
    if lo <= 1e-12 * max(hi, 0.0) or hi <= 0.0:
        raise SingularInterference("effective interference covariance is singular")
    core = hermitian_part(h_tilde.conj().T @ np.linalg.solve(r_tilde, h_tilde))
    v, _ = top_eigvecs(core, dims.n_rf_t)
    if isinstance(allocation, str):
        if allocation != "uniform":
            raise ValueError(f"unknown allocation {allocation!r}")
        phi = np.full(dims.n_rf_t, np.sqrt(dims.n_s / dims.n_rf_t))
        return DigitalPrecoderOpt(v=v, phi=phi, allocation="uniform")
    phi = np.asarray(allocation, dtype=float)
    if phi.shape != (dims.n_rf_t,) or np.any(phi < 0):
        raise ValueError("custom allocation must be n_rf_t nonnegative weights")
    if float(np.sum(phi**2)) > dims.n_s + 1e-9:
        raise ValueError("custom allocation exceeds the transmit power budget")
    return DigitalPrecoderOpt(v=v, phi=phi, allocation="custom")


def _check_analog_rank(w_rf: np.ndarray) -> None:
    s = np.linalg.svd(w_rf, compute_uv=False)
    if s.size == 0 or s[-1] <= 1e-10 * s[0]:
        raise RankDeficientAnalog("analog matrix is (numerically) rank deficient")


def mmse_digital_combiner(h_bar, r_z, w_rf) -> np.ndarray:
    """Linear MMSE digital stage behind a fixed analog combiner.

    Returns w_bb such that w_bb* = h_bar* w_rf [w_rf* (h_bar h_bar* + r_z) w_rf]^-1.
    """
    h_bar = as_complex(h_bar)
    r_z = check_hermitian(r_z)
    w_rf = as_complex(w_rf)
    if w_rf.ndim == 1:
        w_rf = w_rf[:, None]
    if h_bar.shape[0] != r_z.shape[0] or w_rf.shape[0] != r_z.shape[0]:
        raise DimensionMismatch("h_bar, r_z, w_rf row counts disagree")
    _check_analog_rank(w_rf)
    b = hermitian_part(h_bar @ h_bar.conj().T + r_z)
    inner = hermitian_part(w_rf.conj().T @ b @ w_rf)
    lo, hi = _min_max_eig(inner)
    if hi <= 0.0 or lo <= 1e-12 * hi:
        raise SingularInner("reduced covariance w_rf* B w_rf is singular")
    return np.linalg.solve(inner, w_rf.conj().T @ h_bar)


def analytic_mse(h_bar, r_z, w_rf, n_s: int) -> float:
    """Estimation MSE with the optimal digital stage behind w_rf.

    n_s - tr( h_bar* w_rf [w_rf* (h_bar h_bar* + r_z) w_rf]^-1 w_rf* h_bar ),
    clipped to [0, n_s] against roundoff.
    """
    h_bar = as_complex(h_bar)
    r_z = check_hermitian(r_z)
    w_rf = as_complex(w_rf)
    if w_rf.ndim == 1:
        w_rf = w_rf[:, None]
    if h_bar.shape[0] != r_z.shape[0] or w_rf.shape[0] != r_z.shape[0]:
        raise DimensionMismatch("h_bar, r_z, w_rf row counts disagree")
    _check_analog_rank(w_rf)
    b = hermitian_part(h_bar @ h_bar.conj().T + r_z)
    inner = hermitian_part(w_rf.conj().T @ b @ w_rf)
    lo, hi = _min_max_eig(inner)
    if hi <= 0.0 or lo <= 1e-12 * hi:
        raise SingularInner("reduced covariance w_rf* B w_rf is singular")
    x = w_rf.conj().T @ h_bar
    captured = float(np.trace(x.conj().T @ np.linalg.solve(inner, x)).real)
    return float(min(max(n_s - captured, 0.0), float(n_s)))


def mmse_full_combiner(h_bar, r_z) -> np.ndarray:
    """Unconstrained MMSE combiner W = B^-1 h_bar with B = h_bar h_bar* + r_z."""
    h_bar = as_complex(h_bar)
    r_z = check_hermitian(r_z)
    b = hermitian_part(h_bar @ h_bar.conj().T + r_z)
    lo, hi = _min_max_eig(b)
    if hi <= 0.0 or lo <= 1e-12 * hi:
        raise SingularB("B = h_bar h_bar* + r_z is singular")
    return np.linalg.solve(b, h_bar)


def optimal_digital_combiner(h_bar, r_z, n_rf_r: int) -> np.ndarray:
    """Unconstrained maximizer of the combiner trace objective.

    W = B^-1/2 U with U the n_rf_r leading eigenvectors of B^-1/2 A B^-1/2,
    A = h_bar h_bar*.  The free invertible right factor is fixed to the
    identity for determinism.
    """
    h_bar = as_complex(h_bar)
    r_z = check_hermitian(r_z)
    a = hermitian_part(h_bar @ h_bar.conj().T)
    b = hermitian_part(a + r_z)
    try:
        fac = hermitian_sqrt(b, need_inverse=True)
    except SingularForInverse as exc:
        raise SingularB("B = h_bar h_bar* + r_z is singular") from exc
    core = hermitian_part(fac.inv_sqrt @ a @ fac.inv_sqrt)
    u, _ = top_eigvecs(core, n_rf_r)
    return fac.inv_sqrt @ u


def trace_objective(w_rf, a, b) -> float:
    """Ratio-trace value tr( W*AW [W*BW]^-1 ).

    Invariant under right-multiplication of W by any invertible matrix.
    """
    w_rf = as_complex(w_rf)
    if w_rf.ndim == 1:
        w_rf = w_rf[:, None]
    a = check_hermitian(a)
    b = check_hermitian(b)
    gram = hermitian_part(w_rf.conj().T @ b @ w_rf)
    lo, hi = _min_max_eig(gram)
    if hi <= 0.0 or lo <= 1e-12 * hi:
        raise SingularGram("W* B W is singular")
    num = hermitian_part(w_rf.conj().T @ a @ w_rf)
    return float(np.trace(np.linalg.solve(gram, num)).real)


def monte_carlo_mse(
    precoder: HybridPrecoder,
    combiner: HybridCombiner,
    channel: ChannelRealization,
    q: int,
    seed: int,
) -> float:
    """Per-stream empirical MSE over q trials.

    Per trial: draw the symbol vector, then the interference; trial i uses
    column i of a layout drawn once from the seed, so results do not depend
    on execution order or worker count.
    """
    f = precoder.matrix
    w = combiner.matrix
    h = as_complex(channel.h)
    n_r, n_t = h.shape
    if f.shape[0] != n_t or w.shape[0] != n_r:
        raise DimensionMismatch("precoder/combiner shapes do not match the channel")
    n_s = f.shape[1]
    if w.shape[1] != n_s:
        raise DimensionMismatch("combiner output dimension must equal the stream count")
    eff = np.sqrt(channel.p_r) * (w.conj().T @ h @ f)
    noise_mix = w.conj().T @ np.linalg.cholesky(channel.r_z)
    rng = np.random.default_rng(seed)
    s = complex_normal(rng, (n_s, q))
    g = complex_normal(rng, (n_r, q))
    s_hat = eff @ s + noise_mix @ g
    return float(np.sum(np.abs(s_hat - s) ** 2) / (n_s * q))
