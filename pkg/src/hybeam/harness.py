"""Experiment engine: declarative scenarios, seeded sweeps, CSV output.

A scenario is a sweep over one axis (RF-chain count or SNR) crossed with a
list of algorithms and hardware schemes.  Every trial draws its channel from
a substream derived from (master seed, trial index), so results are
byte-identical for any worker count.  Wall times are recorded as zero unless
timing is requested, keeping the CSV reproducible.
"""

from __future__ import annotations

import json
import logging
import multiprocessing
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .beamform import (
    SystemDims,
    analytic_mse,
    mmse_full_combiner,
    optimal_digital_combiner,
    optimal_digital_precoder,
)
from .channel import (
    MmWaveParams,
    circulant_channel,
    exp_corr_matrix,
    gaussian_channel,
    interference_cov,
    mmwave_channel,
)
from .combiner import grtm, kronecker_combiner, magiq_combiner, somp_weighted_combiner
from .errors import BeamformError, ConfigError, IoError
from .hardware import (
    Dictionary,
    HardwareScheme,
    feasible,
    gaussian_dictionary,
    steering_dictionary,
)
from .linalg import hermitian_part, hermitian_sqrt, top_eigvecs
from .precoder import (
    SolverControls,
    alt_mag,
    magiq_precoder,
    pe_altmin_precoder,
    somp_inner,
    somp_precoder,
)

logger = logging.getLogger("hybeam")

PRECODER_ALGOS = ("magiq", "pe_altmin", "somp", "altmag_somp")
COMBINER_ALGOS = ("magiq", "grtm", "somp")
KRON_ALGOS = ("grtm",)

CSV_HEADER = (
    "scenario,algorithm,scheme,n_rf,snr_db,trials,mse,mse_opt,mse_gap,"
    "stderr,failures,wall_ms,seed"
)


@dataclass(frozen=True)
class ChannelSpec:
    kind: str = "mmwave"  # mmwave | gaussian | circulant | exp_corr
    n_cl: int = 6
    n_ray: int = 1
    d_over_lambda: float = 0.5
    gains: tuple = ()     # circulant only, (re, im) pairs resolved to complex
    rho: float = 0.9      # exp_corr only


@dataclass(frozen=True)
class InterferenceSpec:
    kind: str = "white"   # white | colored
    sigma2: float = 1.0
    condition_target: float = 10.0


@dataclass(frozen=True)
class AlgorithmSpec:
    name: str
    threshold: float = 1e-6
    max_iters: int = 500
    stall_tol: float = 1e-10

    def controls(self) -> SolverControls:
        return SolverControls(
            threshold=self.threshold, max_iters=self.max_iters, stall_tol=self.stall_tol
        )


@dataclass(frozen=True)
class DictionarySpec:
    kind: str = "auto"    # auto | steering | gaussian
    size: int = 0         # 0 uses the per-kind default (1000 steering, 10 * n gaussian)


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: str
    side: str             # precoder | combiner | kron
    n_t: int
    n_r: int
    channel: ChannelSpec
    interference: InterferenceSpec
    schemes: tuple[HardwareScheme, ...]
    algorithms: tuple[AlgorithmSpec, ...]
    sweep_axis: str       # n_rf | snr_db
    sweep_values: tuple
    n_rf: int = 0         # fixed value when sweeping snr_db
    snr_db: float = 0.0   # fixed value when sweeping n_rf
    trials: int = 100
    seed: int = 0
    out_path: str = "results.csv"
    dictionary: DictionarySpec = field(default_factory=DictionarySpec)
    notes: str = ""


@dataclass(frozen=True)
class ResultRecord:
    scenario: str
    algorithm: str
    scheme: str
    n_rf: int
    snr_db: float
    trials: int
    mse: float
    mse_opt: float
    mse_gap: float
    stderr: float
    failures: int
    wall_ms: float
    seed: int


def validate_config(config: ExperimentConfig) -> None:
    if config.side not in ("precoder", "combiner", "kron"):
        raise ConfigError(f"unknown side {config.side!r}")
    known = {"precoder": PRECODER_ALGOS, "combiner": COMBINER_ALGOS, "kron": KRON_ALGOS}[
        config.side
    ]
    for algo in config.algorithms:
        if algo.name not in known:
            raise ConfigError(f"unknown {config.side} algorithm {algo.name!r}; known: {known}")
    if not config.algorithms:
        raise ConfigError("at least one algorithm is required")
    if config.sweep_axis not in ("n_rf", "snr_db"):
        raise ConfigError(f"unknown sweep axis {config.sweep_axis!r}")
    if not config.sweep_values:
        raise ConfigError("sweep values must be nonempty")
    if config.trials < 1:
        raise ConfigError("trials must be >= 1")
    if config.seed < 0:
        raise ConfigError("seed must be nonnegative")
    if not config.schemes:
        raise ConfigError("at least one hardware scheme is required")
    if config.channel.kind not in ("mmwave", "gaussian", "circulant", "exp_corr"):
        raise ConfigError(f"unknown channel kind {config.channel.kind!r}")
    if config.interference.kind not in ("white", "colored"):
        raise ConfigError(f"unknown interference kind {config.interference.kind!r}")


# -- per-trial machinery -------------------------------------------------------


def _draw_channel(config: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    spec = config.channel
    if spec.kind == "mmwave":
        params = MmWaveParams(
            n_t=config.n_t,
            n_r=config.n_r,
            n_cl=spec.n_cl,
            n_ray=spec.n_ray,
            d_over_lambda=spec.d_over_lambda,
        )
        h, _, _ = mmwave_channel(params, rng)
        return h
    if spec.kind == "gaussian":
        return gaussian_channel(config.n_t, config.n_r, rng)
    if spec.kind == "circulant":
        gains = np.asarray([complex(re, im) for re, im in spec.gains])
        return circulant_channel(gains, config.n_t, config.n_r)
    raise ConfigError(f"channel kind {spec.kind!r} not drawable here")


def _draw_interference(config: ExperimentConfig, rng: np.random.Generator) -> np.ndarray:
    spec = config.interference
    if spec.kind == "white":
        return interference_cov("white", config.n_r, sigma2=spec.sigma2)
    r = interference_cov(
        "colored", config.n_r, rng=rng, condition_target=spec.condition_target
    )
    # normalize the average diagonal to sigma2 so the SNR axis keeps meaning
    return r * (spec.sigma2 * config.n_r / float(np.trace(r).real))


def _resolve_dictionary(
    config: ExperimentConfig,
    scheme: HardwareScheme,
    n: int,
    rng: np.random.Generator,
    w_opt: np.ndarray,
) -> Dictionary:
    spec = config.dictionary
    kind = spec.kind
    if kind == "auto":
        sparse = config.channel.kind in ("mmwave", "circulant")
        kind = "steering" if sparse and scheme.kind in ("S1", "S2") else "gaussian"
    if kind == "steering":
        size = spec.size or 1000
        return steering_dictionary(n, size, config.channel.d_over_lambda)
    size = spec.size or 10 * n
    return gaussian_dictionary(scheme, w_opt, size, rng)


def _log_feasibility(scheme: HardwareScheme, analog: np.ndarray, tag: str) -> None:
    if logger.isEnabledFor(logging.DEBUG):
        ok = feasible(scheme, analog)
        logger.debug("%s analog matrix for %s feasible=%s", tag, scheme.label, ok)
        if not ok:
            raise AssertionError(f"{tag}: infeasible analog matrix for {scheme.label}")


def _precoder_trial(config, algo, scheme, n_rf, p_r, rng_ch, rng_aux):
    h = _draw_channel(config, rng_ch)
    r_z = _draw_interference(config, rng_ch)
    n_s = n_rf
    ht = np.sqrt(p_r) * h
    dims = SystemDims(n_t=config.n_t, n_r=config.n_r, n_s=n_s, n_rf_t=n_rf, n_rf_r=config.n_r)
    dp = optimal_digital_precoder(ht, r_z, dims)
    eye_r = np.eye(config.n_r, dtype=complex)
    e_opt = analytic_mse(ht @ dp.target(), r_z, eye_r, n_s) / n_s
    controls = algo.controls()
    if algo.name == "magiq":
        hp, _ = magiq_precoder(dp, scheme, controls)
    elif algo.name == "pe_altmin":
        hp = pe_altmin_precoder(dp, scheme, controls, n_s=n_s)
    elif algo.name == "somp":
        dictionary = _resolve_dictionary(config, scheme, config.n_t, rng_aux, dp.target())
        hp = somp_precoder(dp.target(), dictionary, n_rf, n_s, scheme)
    else:  # altmag_somp
        dictionary = _resolve_dictionary(config, scheme, config.n_t, rng_aux, dp.target())
        hp, _ = alt_mag(dp, scheme, somp_inner(dictionary, n_s), controls)
    _log_feasibility(scheme, hp.f_rf, algo.name)
    e = analytic_mse(ht @ hp.matrix, r_z, eye_r, n_s) / n_s
    return e, e_opt


def _combiner_trial(config, algo, scheme, n_rf, p_r, rng_ch, rng_aux):
    h = _draw_channel(config, rng_ch)
    r_z = _draw_interference(config, rng_ch)
    n_s = n_rf
    ht = np.sqrt(p_r) * h
    dims = SystemDims(n_t=config.n_t, n_r=config.n_r, n_s=n_s)
    dp = optimal_digital_precoder(ht, r_z, dims)
    h_bar = ht @ dp.target()
    eye_r = np.eye(config.n_r, dtype=complex)
    e_opt = analytic_mse(h_bar, r_z, eye_r, n_s) / n_s
    controls = algo.controls()
    if algo.name == "magiq":
        comb = magiq_combiner(h_bar, r_z, scheme, n_rf, controls)
    elif algo.name == "grtm":
        w_opt = optimal_digital_combiner(h_bar, r_z, n_rf)
        dictionary = _resolve_dictionary(config, scheme, config.n_r, rng_aux, w_opt)
        comb = grtm(h_bar, r_z, scheme, dictionary, n_rf)
    else:  # somp
        w_opt = optimal_digital_combiner(h_bar, r_z, n_rf)
        dictionary = _resolve_dictionary(config, scheme, config.n_r, rng_aux, w_opt)
        b = hermitian_part(h_bar @ h_bar.conj().T + r_z)
        w_mmse = mmse_full_combiner(h_bar, r_z)
        comb = somp_weighted_combiner(w_mmse, b, scheme, dictionary, n_rf)
    _log_feasibility(scheme, comb.w_rf, algo.name)
    e = analytic_mse(h_bar, r_z, comb.w_rf, n_s) / n_s
    return e, e_opt


def _kron_trial(config, algo, scheme, n_rf, rng_aux):
    r = exp_corr_matrix(config.n_r, config.channel.rho)
    vals = np.linalg.eigvalsh(r)
    bound = float(np.sum(vals[-n_rf:]))
    fac = hermitian_sqrt(r, need_inverse=True)
    u, _ = top_eigvecs(r, n_rf)
    w_opt = fac.inv_sqrt @ u
    dictionary = _resolve_dictionary(config, scheme, config.n_r, rng_aux, w_opt)
    w_rf, mu = kronecker_combiner(r, scheme, dictionary, n_rf)
    _log_feasibility(scheme, w_rf, algo.name)
    # estimation error scales with 1/mu; report it that way so lower is better
    return 1.0 / mu, 1.0 / bound


def _run_record(
    config: ExperimentConfig,
    point,
    algo: AlgorithmSpec,
    scheme: HardwareScheme,
    timing: bool,
) -> ResultRecord:
    n_rf = int(point) if config.sweep_axis == "n_rf" else int(config.n_rf)
    snr_db = float(config.snr_db) if config.sweep_axis == "n_rf" else float(point)
    p_r = config.interference.sigma2 * 10.0 ** (snr_db / 10.0)
    eps = []
    eps_opt = []
    failures = 0
    t0 = time.perf_counter()
    for trial in range(config.trials):
        ch_seq, aux_seq = np.random.SeedSequence((config.seed, trial)).spawn(2)
        rng_ch = np.random.default_rng(ch_seq)
        rng_aux = np.random.default_rng(aux_seq)
        try:
            if config.side == "precoder":
                e, e_opt = _precoder_trial(config, algo, scheme, n_rf, p_r, rng_ch, rng_aux)
            elif config.side == "combiner":
                e, e_opt = _combiner_trial(config, algo, scheme, n_rf, p_r, rng_ch, rng_aux)
            else:
                e, e_opt = _kron_trial(config, algo, scheme, n_rf, rng_aux)
        except BeamformError as exc:
            failures += 1
            logger.debug("trial %d failed: %s: %s", trial, type(exc).__name__, exc)
            continue
        eps.append(e)
        eps_opt.append(e_opt)
    wall_ms = (time.perf_counter() - t0) * 1e3 if timing else 0.0
    n_ok = len(eps)
    if n_ok:
        mse = float(np.mean(eps))
        mse_opt = float(np.mean(eps_opt))
        stderr = float(np.std(eps, ddof=1) / np.sqrt(n_ok)) if n_ok > 1 else 0.0
    else:
        mse = mse_opt = stderr = float("nan")
    return ResultRecord(
        scenario=config.scenario,
        algorithm=algo.name,
        scheme=scheme.label,
        n_rf=n_rf,
        snr_db=snr_db,
        trials=config.trials,
        mse=mse,
        mse_opt=mse_opt,
        mse_gap=mse - mse_opt,
        stderr=stderr,
        failures=failures,
        wall_ms=wall_ms,
        seed=config.seed,
    )


def _record_worker(args):
    return _run_record(*args)


def run_scenario(
    config: ExperimentConfig,
    workers: int = 1,
    timing: bool = False,
) -> list[ResultRecord]:
    """Run every (sweep point, algorithm, scheme) cell of a scenario.

    Failing trials are counted and excluded from the averages.  Output is
    deterministic for a fixed (config, seed) regardless of worker count.
    """
    validate_config(config)
    tasks = [
        (config, point, algo, scheme, timing)
        for point in config.sweep_values
        for algo in config.algorithms
        for scheme in config.schemes
    ]
    if workers > 1:
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            records = list(pool.map(_record_worker, tasks))
    else:
        records = [_run_record(*task) for task in tasks]
    records.sort(key=lambda r: (r.scenario, r.algorithm, r.scheme, r.n_rf, r.snr_db))
    return records


# -- CSV ------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def write_csv(records, path) -> None:
    """Write records under the fixed header, floats at 10 significant digits."""
    lines = [CSV_HEADER]
    for r in sorted(records, key=lambda r: (r.scenario, r.algorithm, r.scheme, r.n_rf, r.snr_db)):
        lines.append(
            ",".join(
                [
                    r.scenario,
                    r.algorithm,
                    r.scheme,
                    str(r.n_rf),
                    _fmt(r.snr_db),
                    str(r.trials),
                    _fmt(r.mse),
                    _fmt(r.mse_opt),
                    _fmt(r.mse_gap),
                    _fmt(r.stderr),
                    str(r.failures),
                    _fmt(r.wall_ms),
                    str(r.seed),
                ]
            )
        )
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def read_csv(path) -> list[ResultRecord]:
    """Parse a file written by write_csv back into records."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln]
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    if not lines or lines[0] != CSV_HEADER:
        raise IoError(f"{path} does not carry the expected header")
    out = []
    for ln in lines[1:]:
        f = ln.split(",")
        out.append(
            ResultRecord(
                scenario=f[0],
                algorithm=f[1],
                scheme=f[2],
                n_rf=int(f[3]),
                snr_db=float(f[4]),
                trials=int(f[5]),
                mse=float(f[6]),
                mse_opt=float(f[7]),
                mse_gap=float(f[8]),
                stderr=float(f[9]),
                failures=int(f[10]),
                wall_ms=float(f[11]),
                seed=int(f[12]),
            )
        )
    return out


# -- config file format -----------------------------------------------------------


def _scheme_from_dict(d: dict) -> HardwareScheme:
    kind = d.get("kind")
    if kind == "S4":
        subs = tuple(tuple(int(i) for i in s) for s in d.get("subarrays", ()))
        if not subs:
            raise ConfigError("S4 scheme needs 'subarrays'")
        return HardwareScheme("S4", g=len(subs[0]), subarrays=subs)
    if kind == "S5":
        if "g" not in d:
            raise ConfigError("S5 scheme needs 'g'")
        return HardwareScheme("S5", g=int(d["g"]))
    if kind in ("S1", "S2", "S3"):
        return HardwareScheme(kind)
    raise ConfigError(f"unknown scheme kind {kind!r}")


def _scheme_to_dict(s: HardwareScheme) -> dict:
    d = {"kind": s.kind}
    if s.kind == "S4":
        d["subarrays"] = [list(sub) for sub in s.subarrays]
    if s.kind == "S5":
        d["g"] = s.g
    return d


def config_from_dict(d: dict) -> ExperimentConfig:
    try:
        sweep = d["sweep"]
        config = ExperimentConfig(
            scenario=d["scenario"],
            side=d["side"],
            n_t=int(d["n_t"]),
            n_r=int(d["n_r"]),
            channel=ChannelSpec(**d.get("channel", {})),
            interference=InterferenceSpec(**d.get("interference", {})),
            schemes=tuple(_scheme_from_dict(s) for s in d["schemes"]),
            algorithms=tuple(AlgorithmSpec(**a) for a in d["algorithms"]),
            sweep_axis=sweep["axis"],
            sweep_values=tuple(sweep["values"]),
            n_rf=int(d.get("n_rf", 0)),
            snr_db=float(d.get("snr_db", 0.0)),
            trials=int(d.get("trials", 100)),
            seed=int(d.get("seed", 0)),
            out_path=d.get("out", "results.csv"),
            dictionary=DictionarySpec(**d.get("dictionary", {})),
            notes=d.get("notes", ""),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}") from exc
    validate_config(config)
    return config


def config_to_dict(config: ExperimentConfig) -> dict:
    d = asdict(config)
    d["schemes"] = [_scheme_to_dict(s) for s in config.schemes]
    d["sweep"] = {"axis": config.sweep_axis, "values": list(config.sweep_values)}
    d["out"] = d.pop("out_path")
    del d["sweep_axis"], d["sweep_values"]
    d["channel"]["gains"] = [list(p) for p in config.channel.gains]
    return d


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc
    return config_from_dict(raw)


def override(config: ExperimentConfig, **kw) -> ExperimentConfig:
    """Functional update for CLI overrides such as seed/trials/output path."""
    return replace(config, **kw)
