"""Built-in experiment scenarios.

The default system is a 10-antenna transmitter and a 15-antenna receiver
over the clustered mmWave channel (6 clusters, 1 ray) with unit-variance
white interference; chain counts track the stream count.  SNR is received
power over average noise power, in dB.
"""

from __future__ import annotations

from .errors import UnknownPreset
from .hardware import block_subarrays, s1, s2, s3, s4, s5
from .harness import (
    AlgorithmSpec,
    ChannelSpec,
    DictionarySpec,
    ExperimentConfig,
    InterferenceSpec,
)

_SNR_GRID = (-10.0, -5.0, 0.0, 5.0, 10.0)
_NRF_GRID = (1, 2, 3, 4, 5, 6)


def _algos(*names, **kw) -> tuple[AlgorithmSpec, ...]:
    return tuple(AlgorithmSpec(name=n, **kw) for n in names)


def _base(scenario: str, side: str, **kw) -> ExperimentConfig:
    defaults = dict(
        scenario=scenario,
        side=side,
        n_t=10,
        n_r=15,
        channel=ChannelSpec(kind="mmwave", n_cl=6, n_ray=1),
        interference=InterferenceSpec(kind="white", sigma2=1.0),
        schemes=(s2(),),
        sweep_axis="n_rf",
        sweep_values=_NRF_GRID,
        n_rf=0,
        snr_db=0.0,
        trials=200,
        seed=0,
        dictionary=DictionarySpec(),
    )
    defaults.update(kw)
    return ExperimentConfig(**defaults)


def _fig2() -> ExperimentConfig:
    """Precoder gap vs chain count: closed-form quantization against the
    scaled-unitary digital baseline, fully connected phase shifters."""
    return _base("fig2", "precoder", algorithms=_algos("magiq", "pe_altmin"))


def _fig3() -> ExperimentConfig:
    """Precoder gap vs chain count for the quantization, pursuit, and
    alternating-pursuit designs.

    The hardware here is the phase-shifter network S2; the variant with
    per-antenna switches (S1) is reachable by editing the scheme list, since
    the source material labels this comparison inconsistently (S1 caption,
    phase-shifter discussion).
    """
    return _base(
        "fig3",
        "precoder",
        algorithms=_algos("magiq", "somp", "altmag_somp"),
        notes="S2 hardware; S1 variant available by swapping the scheme list",
    )


def _fig4() -> ExperimentConfig:
    """Combiner gap vs chain count: quantization vs the greedy designs."""
    return _base("fig4", "combiner", algorithms=_algos("magiq", "grtm", "somp"))


def _fig5() -> ExperimentConfig:
    """Large-array near-optimality: 150 receive antennas, 4 clusters, 4 chains.

    With many antennas and few clusters the unconstrained combiner has
    unimodular structure and the quantized combiner tracks the fully-digital
    error curve.
    """
    return _base(
        "fig5",
        "combiner",
        n_r=150,
        channel=ChannelSpec(kind="mmwave", n_cl=4, n_ray=1),
        algorithms=_algos("magiq", "grtm", "somp"),
        sweep_axis="snr_db",
        sweep_values=_SNR_GRID,
        n_rf=4,
        trials=100,
    )


def _fig6() -> ExperimentConfig:
    """Partially connected networks, fixed vs flexible sub-arrays (G = 5)."""
    return _base(
        "fig6",
        "combiner",
        schemes=(s4(block_subarrays(5, 3)), s5(5)),
        algorithms=_algos("magiq", "grtm", "somp"),
        sweep_axis="snr_db",
        sweep_values=_SNR_GRID,
        n_rf=3,
    )


def _fig7() -> ExperimentConfig:
    """General model: i.i.d. Gaussian channel, colored full-rank interference,
    phase shifters with switches, Gaussian-randomized dictionaries."""
    return _base(
        "fig7",
        "combiner",
        channel=ChannelSpec(kind="gaussian"),
        interference=InterferenceSpec(kind="colored", sigma2=1.0, condition_target=10.0),
        schemes=(s1(),),
        algorithms=_algos("magiq", "grtm", "somp"),
        sweep_axis="snr_db",
        sweep_values=_SNR_GRID,
        n_rf=3,
        dictionary=DictionarySpec(kind="gaussian"),
    )


def _fig8() -> ExperimentConfig:
    """Quantized combiner across all five hardware schemes at G = 3."""
    return _base(
        "fig8",
        "combiner",
        schemes=(s1(), s2(), s3(), s4(block_subarrays(3, 3)), s5(3)),
        algorithms=_algos("magiq"),
        sweep_axis="snr_db",
        sweep_values=_SNR_GRID,
        n_rf=3,
    )


def _kron() -> ExperimentConfig:
    """Uplink-training combiner design under exponential receive correlation.

    Reported mse columns hold the reciprocal of the ratio-trace objective
    (the estimation error is inversely proportional to it); mse_opt holds
    the reciprocal of the unconstrained eigenvalue-sum bound.
    """
    return _base(
        "kron",
        "kron",
        n_t=1,
        n_r=32,
        channel=ChannelSpec(kind="exp_corr", rho=0.9),
        algorithms=_algos("grtm"),
        sweep_axis="n_rf",
        sweep_values=(2, 4, 8),
        trials=50,
        dictionary=DictionarySpec(kind="gaussian"),
    )


_PRESETS = {
    "fig2": _fig2,
    "fig3": _fig3,
    "fig4": _fig4,
    "fig5": _fig5,
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
    "kron": _kron,
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str) -> ExperimentConfig:
    """Return the named built-in scenario configuration."""
    try:
        builder = _PRESETS[name]
    except KeyError:
        raise UnknownPreset(f"unknown preset {name!r}; known: {PRESET_NAMES}") from None
    return builder()


def preset_summaries() -> list[tuple[str, str]]:
    """(name, first docstring line) for every preset."""
    out = []
    for name, builder in _PRESETS.items():
        doc = (builder.__doc__ or "").strip().splitlines()
        out.append((name, doc[0] if doc else ""))
    return out
