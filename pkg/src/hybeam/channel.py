"""Channel and interference generators.

Uniform-linear-array steering vectors, the clustered narrowband mmWave
channel, circulant (DFT-structured) channels, i.i.d. Gaussian channels, and
white/colored interference covariances.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidSigma, TooManyGains
from .linalg import hermitian_part


def complex_normal(rng: np.random.Generator, shape=()) -> np.ndarray:
    """Standard circular complex Gaussian draws, unit variance per entry."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


@dataclass(frozen=True)
class MmWaveParams:
    """Clustered-channel parameters: array sizes, cluster/ray counts, spacing."""

    n_t: int
    n_r: int
    n_cl: int = 6
    n_ray: int = 1
    d_over_lambda: float = 0.5

    def __post_init__(self):
        if self.n_cl < 1 or self.n_ray < 1:
            raise ValueError("n_cl and n_ray must be at least 1")
        if self.d_over_lambda <= 0:
            raise ValueError("d_over_lambda must be positive")


@dataclass(frozen=True)
class ChannelRealization:
    """One channel draw: matrix H, interference covariance R_z, received power p_r."""

    h: np.ndarray
    r_z: np.ndarray
    p_r: float


@dataclass(frozen=True)
class KroneckerParams:
    """Receive-side correlation plus user/pilot bookkeeping for uplink training.

    Only r_r drives the combiner design objective; k and tau are carried as
    scenario metadata.
    """

    r_r: np.ndarray
    k: int
    tau: int


def steering_vector(n: int, phi: float, d_over_lambda: float = 0.5) -> np.ndarray:
    """ULA response at azimuth phi: entry m is exp(j 2 pi (d/lambda) m sin phi) / sqrt(n)."""
    m = np.arange(n)
    return np.exp(2j * np.pi * d_over_lambda * m * np.sin(phi)) / np.sqrt(n)


def mmwave_channel(params: MmWaveParams, rng: np.random.Generator):
    """Draw a clustered mmWave channel.

    H = sqrt(n_t n_r / (n_cl n_ray)) * sum_il gain_il a_r(phi_r) a_t(phi_t)*
    with unit-variance complex Gaussian gains and azimuths uniform on
    [0, 2pi).  Draw order is fixed per (cluster, ray): gain, departure
    angle, arrival angle, so realizations are reproducible from the seed.

    Returns (h, gains, (phi_t, phi_r)) with gains/angles shaped
    (n_cl, n_ray).
    """
    nc, nr_ = params.n_cl, params.n_ray
    gains = np.zeros((nc, nr_), dtype=complex)
    phi_t = np.zeros((nc, nr_))
    phi_r = np.zeros((nc, nr_))
    h = np.zeros((params.n_r, params.n_t), dtype=complex)
    for i in range(nc):
        for l in range(nr_):
            gains[i, l] = complex_normal(rng)
            phi_t[i, l] = rng.uniform(0.0, 2 * np.pi)
            phi_r[i, l] = rng.uniform(0.0, 2 * np.pi)
            a_r = steering_vector(params.n_r, phi_r[i, l], params.d_over_lambda)
            a_t = steering_vector(params.n_t, phi_t[i, l], params.d_over_lambda)
            h += gains[i, l] * np.outer(a_r, a_t.conj())
    h *= np.sqrt(params.n_t * params.n_r / (nc * nr_))
    return h, gains, (phi_t, phi_r)


def dft_columns(n: int, l: int) -> np.ndarray:
    """First l columns of the unitary DFT matrix, entries exp(-2j pi k m / n) / sqrt(n)."""
    k = np.arange(n)[:, None]
    m = np.arange(l)[None, :]
    return np.exp(-2j * np.pi * k * m / n) / np.sqrt(n)


def circulant_channel(gains, n_t: int, n_r: int) -> np.ndarray:
    """Channel with DFT singular vectors: H = A_r diag(gains) A_t*.

    A_r and A_t hold the first len(gains) columns of the unitary DFT
    matrices of sizes n_r and n_t.
    """
    gains = np.asarray(gains, dtype=complex).ravel()
    l = gains.size
    if l > min(n_t, n_r):
        raise TooManyGains(f"{l} gains exceed min(n_t, n_r) = {min(n_t, n_r)}")
    a_r = dft_columns(n_r, l)
    a_t = dft_columns(n_t, l)
    return (a_r * gains) @ a_t.conj().T


def gaussian_channel(n_t: int, n_r: int, rng: np.random.Generator) -> np.ndarray:
    """n_r x n_t channel with i.i.d. unit-variance complex Gaussian entries."""
    return complex_normal(rng, (n_r, n_t))


def interference_cov(
    kind: str,
    n_r: int,
    sigma2: float = 1.0,
    rng: np.random.Generator | None = None,
    condition_target: float = 10.0,
) -> np.ndarray:
    """Interference covariance.

    "white" gives sigma2 * I.  "colored" draws L with i.i.d. complex
    Gaussian entries and returns L L* + eps I, with eps chosen so the
    condition number is close to condition_target; the result is always
    Hermitian positive definite.
    """
    if kind == "white":
        if sigma2 <= 0:
            raise InvalidSigma(f"sigma2 must be positive, got {sigma2}")
        return sigma2 * np.eye(n_r, dtype=complex)
    if kind == "colored":
        if rng is None:
            raise ValueError("colored interference needs an rng")
        if condition_target < 1:
            raise ValueError("condition_target must be >= 1")
        l = complex_normal(rng, (n_r, n_r))
        r = hermitian_part(l @ l.conj().T)
        w = np.linalg.eigvalsh(r)
        eps = max(w[-1] / condition_target - w[0], 0.0)
        return hermitian_part(r + eps * np.eye(n_r))
    raise ValueError(f"unknown interference kind {kind!r}")


def exp_corr_matrix(n: int, rho: float) -> np.ndarray:
    """Exponential receive-correlation model: R[i, j] = rho ** |i - j|."""
    idx = np.arange(n)
    return (rho ** np.abs(idx[:, None] - idx[None, :])).astype(complex)
