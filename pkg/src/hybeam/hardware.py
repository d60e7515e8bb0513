"""Analog hardware schemes: feasible sets, projections, dictionaries, part counts.

Five network types:

  S1  fully connected phase shifters + on/off switches: entries zero or unit modulus
  S2  fully connected phase shifters: unimodular entries
  S3  switching network: each column is a standard basis vector (antenna selection)
  S4  fixed sub-arrays: column j unit modulus on its index set S_j, zero elsewhere
  S5  flexible sub-arrays: exactly G unit-modulus entries per column
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import complex_normal, steering_vector
from .errors import DimensionMismatch, InvalidSize

KINDS = ("S1", "S2", "S3", "S4", "S5")

# Entries already unit-modulus within this margin pass through projections
# unchanged, so repeated projection is a bitwise fixed point.
_UNIT_SNAP = 8 * np.finfo(float).eps


@dataclass(frozen=True)
class HardwareScheme:
    """Tagged description of one analog network.

    g is the connectivity factor (S4/S5 only); subarrays holds one index set
    per output column (S4 only), each of size g.  Overlapping sub-arrays are
    allowed.
    """

    kind: str
    g: int | None = None
    subarrays: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown scheme kind {self.kind!r}")
        if self.kind == "S4":
            if not self.subarrays:
                raise ValueError("S4 needs one sub-array index set per column")
            sizes = {len(s) for s in self.subarrays}
            if len(sizes) != 1:
                raise ValueError("S4 sub-arrays must all have the same size")
            if self.g is not None and self.g != sizes.pop():
                raise ValueError("S4 connectivity g must match the sub-array size")
        if self.kind == "S5" and (self.g is None or self.g < 1):
            raise ValueError("S5 needs connectivity g >= 1")

    @property
    def label(self) -> str:
        if self.kind in ("S4", "S5"):
            return f"{self.kind}-G{self.g}"
        return self.kind


def s1() -> HardwareScheme:
    return HardwareScheme("S1")


def s2() -> HardwareScheme:
    return HardwareScheme("S2")


def s3() -> HardwareScheme:
    return HardwareScheme("S3")


def s4(subarrays) -> HardwareScheme:
    subs = tuple(tuple(int(i) for i in s) for s in subarrays)
    g = len(subs[0]) if subs else 0
    return HardwareScheme("S4", g=g, subarrays=subs)


def s5(g: int) -> HardwareScheme:
    return HardwareScheme("S5", g=int(g))


def block_subarrays(g: int, n_rf: int, start: int = 0) -> tuple[tuple[int, ...], ...]:
    """Disjoint consecutive index blocks of size g, one per RF chain."""
    return tuple(tuple(range(start + j * g, start + (j + 1) * g)) for j in range(n_rf))


@dataclass(frozen=True)
class Dictionary:
    """Candidate analog columns, each feasible as a single column of its scheme.

    has_duplicates flags exact duplicate columns that survived redraws.
    """

    columns: np.ndarray
    has_duplicates: bool = False

    @property
    def size(self) -> int:
        return self.columns.shape[1]


def _as_matrix(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.complex128)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DimensionMismatch(f"expected a matrix, got ndim={m.ndim}")
    return m


def _check_dims(scheme: HardwareScheme, m: np.ndarray) -> None:
    n, ncols = m.shape
    if scheme.kind == "S4":
        if ncols != len(scheme.subarrays):
            raise DimensionMismatch(
                f"S4 expects {len(scheme.subarrays)} columns, got {ncols}"
            )
        flat = [i for s in scheme.subarrays for i in s]
        if flat and (min(flat) < 0 or max(flat) >= n):
            raise DimensionMismatch("S4 sub-array index out of range")
    if scheme.kind == "S5" and scheme.g > n:
        raise DimensionMismatch(f"S5 connectivity g={scheme.g} exceeds {n} rows")


def feasible(scheme: HardwareScheme, m, tol: float = 1e-9) -> bool:
    """True iff every entry of m satisfies the scheme's modulus/support pattern."""
    m = _as_matrix(m)
    _check_dims(scheme, m)
    mag = np.abs(m)
    if scheme.kind == "S1":
        return bool(np.all((mag <= tol) | (np.abs(mag - 1.0) <= tol)))
    if scheme.kind == "S2":
        return bool(np.all(np.abs(mag - 1.0) <= tol))
    if scheme.kind == "S3":
        ones = np.abs(m - 1.0) <= tol
        zeros = mag <= tol
        return bool(np.all(ones | zeros) and np.all(ones.sum(axis=0) == 1))
    if scheme.kind == "S4":
        for j, sub in enumerate(scheme.subarrays):
            on = np.zeros(m.shape[0], dtype=bool)
            on[list(sub)] = True
            if not np.all(np.abs(mag[on, j] - 1.0) <= tol):
                return False
            if not np.all(mag[~on, j] <= tol):
                return False
        return True
    # S5
    unit = np.abs(mag - 1.0) <= tol
    zero = mag <= tol
    return bool(np.all(unit | zero) and np.all(unit.sum(axis=0) == scheme.g))


def column_feasible(scheme: HardwareScheme, w, tol: float = 1e-9) -> bool:
    """Membership of a single column in the scheme's per-column feasible set.

    For S4 the column may sit on any one of the scheme's sub-arrays, since a
    dictionary atom is not yet committed to an output position.
    """
    w = _as_matrix(w)
    if w.shape[1] != 1:
        raise DimensionMismatch("column_feasible expects a single column")
    if scheme.kind != "S4":
        return feasible(scheme, w, tol)
    mag = np.abs(w[:, 0])
    for sub in scheme.subarrays:
        on = np.zeros(w.shape[0], dtype=bool)
        on[list(sub)] = True
        if np.all(np.abs(mag[on] - 1.0) <= tol) and np.all(mag[~on] <= tol):
            return True
    return False


def unit_phase(a: np.ndarray) -> np.ndarray:
    """Project entries onto the unit circle, a/|a|, mapping zeros to 1.

    Entries whose magnitude is already within a few ulp of 1 are returned
    unchanged (bitwise idempotence of the projections built on this).
    """
    a = np.asarray(a, dtype=np.complex128)
    r = np.abs(a)
    safe = np.where(r == 0.0, 1.0, r)
    out = np.where(np.abs(r - 1.0) <= _UNIT_SNAP, a, a / safe)
    return np.where(r == 0.0, np.complex128(1.0), out)


def project(scheme: HardwareScheme, a) -> np.ndarray:
    """Closest feasible matrix under the scheme's projection rule.

    S1 keeps entries with |a| >= 1/2 (phase preserved), zeroing the rest;
    S2 maps every entry to the unit circle; S3 puts a 1 at each column's
    largest-magnitude entry; S4 applies the S2 rule on each column's
    sub-array; S5 keeps the G largest-magnitude entries per column.
    Magnitude ties resolve to the lowest row index.
    """
    a = _as_matrix(a)
    _check_dims(scheme, a)
    n, ncols = a.shape
    if scheme.kind == "S1":
        keep = np.abs(a) >= 0.5
        return np.where(keep, unit_phase(a), np.complex128(0.0))
    if scheme.kind == "S2":
        return unit_phase(a)
    if scheme.kind == "S3":
        out = np.zeros_like(a)
        rows = np.argmax(np.abs(a), axis=0)
        out[rows, np.arange(ncols)] = 1.0
        return out
    if scheme.kind == "S4":
        out = np.zeros_like(a)
        for j, sub in enumerate(scheme.subarrays):
            idx = list(sub)
            out[idx, j] = unit_phase(a[idx, j])
        return out
    # S5
    out = np.zeros_like(a)
    for j in range(ncols):
        col = a[:, j]
        top = np.argsort(-np.abs(col), kind="stable")[: scheme.g]
        out[top, j] = unit_phase(col[top])
    return out


def _project_column(scheme: HardwareScheme, x: np.ndarray, position: int) -> np.ndarray:
    """Project one drawn column; S4 columns are assigned a sub-array by position."""
    if scheme.kind == "S4":
        sub = scheme.subarrays[position % len(scheme.subarrays)]
        out = np.zeros_like(x)
        idx = list(sub)
        out[idx] = unit_phase(x[idx])
        return out
    return project(scheme, x[:, None])[:, 0]


def gaussian_dictionary(
    scheme: HardwareScheme,
    w_opt,
    size: int,
    rng: np.random.Generator,
) -> Dictionary:
    """Feasible dictionary by Gaussian randomization.

    Columns are drawn from the zero-mean complex Gaussian with covariance
    w_opt @ w_opt*, then projected onto the scheme's feasible set.  Exact
    duplicate columns are redrawn up to 100 times each and then kept with
    the has_duplicates flag set.
    """
    if size < 1:
        raise InvalidSize(f"dictionary size must be >= 1, got {size}")
    w_opt = _as_matrix(w_opt)
    n, m = w_opt.shape
    cols = np.empty((n, size), dtype=complex)
    seen: set[bytes] = set()
    has_dup = False
    for i in range(size):
        col = None
        for _ in range(100):
            draw = w_opt @ complex_normal(rng, m)
            col = _project_column(scheme, draw, i)
            if col.tobytes() not in seen:
                break
        else:
            has_dup = True
        seen.add(col.tobytes())
        cols[:, i] = col
    return Dictionary(columns=cols, has_duplicates=has_dup)


def steering_dictionary(n: int, size: int, d_over_lambda: float = 0.5) -> Dictionary:
    """Dictionary of array responses on a uniform azimuth grid.

    Column q (1-based) is the steering vector at 2 pi q / size, scaled by
    sqrt(n) so entries are unit modulus (feasible for the fully connected
    phase-shifter scheme).
    """
    if size < 1:
        raise InvalidSize(f"dictionary size must be >= 1, got {size}")
    cols = np.empty((n, size), dtype=complex)
    for q in range(1, size + 1):
        cols[:, q - 1] = np.sqrt(n) * steering_vector(n, 2 * np.pi * q / size, d_over_lambda)
    seen = {cols[:, 0].tobytes()}
    has_dup = False
    for q in range(1, size):
        key = cols[:, q].tobytes()
        if key in seen:
            has_dup = True
        seen.add(key)
    return Dictionary(columns=cols, has_duplicates=has_dup)


def component_counts(scheme: HardwareScheme, n: int, n_rf: int) -> tuple[int, int]:
    """(phase shifter count, switch count) for one analog network."""
    if scheme.kind == "S1":
        return n * n_rf, n * n_rf
    if scheme.kind == "S2":
        return n * n_rf, 0
    if scheme.kind == "S3":
        return 0, n_rf
    if scheme.kind == "S4":
        return scheme.g * n_rf, 0
    return scheme.g * n_rf, scheme.g * n_rf
