"""Human-readable key-value config covering everything inference needs:
presentation timing, pixel encoding, per-layer neuron constants, the
filter bank, and the inhibition weight.

Values are stored in SI units with shortest round-trip float formatting,
so serialize/parse returns bit-identical numbers.  The same text block is
embedded in checkpoints, keeping a trained network self-contained.
"""
from __future__ import annotations

import configparser
import io

import numpy as np

from .filters import N_FILTERS, FilterBank
from .network import EncodingParams, NetworkConfig
from .neurons import LifParams


class ConfigFormatError(ValueError):
    """Config text is missing sections/keys or holds malformed values."""


_LIF_SECTIONS = ("lif.input", "lif.hidden", "lif.output")


def config_to_text(cfg: NetworkConfig, filters: FilterBank) -> str:
    """Canonical INI rendering; deterministic for bit-exact round-trips."""
    out = io.StringIO()
    out.write("[simulation]\n")
    out.write(f"t_s = {float(cfg.t)!r}\n")
    out.write(f"dt_s = {float(cfg.dt)!r}\n")
    out.write(f"desired_rate_hz = {float(cfg.desired_rate)!r}\n")
    out.write(f"inhibition_weight_a = {float(cfg.inhibition_weight)!r}\n")
    out.write("\n[encoding]\n")
    out.write(f"i0_a = {float(cfg.encoding.i_0)!r}\n")
    out.write(f"ip_a = {float(cfg.encoding.i_p)!r}\n")
    for name, lif in zip(_LIF_SECTIONS, (cfg.input_lif, cfg.hidden_lif, cfg.output_lif)):
        out.write(f"\n[{name}]\n")
        out.write(f"capacitance_f = {float(lif.capacitance)!r}\n")
        out.write(f"leak_conductance_s = {float(lif.leak_conductance)!r}\n")
        out.write(f"rest_v = {float(lif.rest_potential)!r}\n")
        out.write(f"threshold_v = {float(lif.threshold)!r}\n")
        out.write(f"refractory_s = {float(lif.refractory)!r}\n")
    out.write("\n[filters]\n")
    for f in range(N_FILTERS):
        row = " ".join(repr(float(v)) for v in filters.kernels[f].ravel())
        out.write(f"kernel_{f} = {row}\n")
    for f in range(N_FILTERS):
        out.write(f"gain_a_{f} = {float(filters.gains[f])!r}\n")
    return out.getvalue()


def _get(section, key: str) -> str:
    if key not in section:
        raise ConfigFormatError(f"missing key {key!r} in section [{section.name}]")
    return section[key]


def _get_float(section, key: str) -> float:
    raw = _get(section, key)
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigFormatError(f"bad float for {key!r}: {raw!r}") from exc


def config_from_text(text: str) -> tuple[NetworkConfig, FilterBank]:
    """Parse config text back into (NetworkConfig, FilterBank)."""
    parser = configparser.ConfigParser()
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigFormatError(f"malformed config: {exc}") from exc
    for name in ("simulation", "encoding", *_LIF_SECTIONS, "filters"):
        if name not in parser:
            raise ConfigFormatError(f"missing section [{name}]")

    lifs = []
    for name in _LIF_SECTIONS:
        sec = parser[name]
        lifs.append(
            LifParams(
                capacitance=_get_float(sec, "capacitance_f"),
                leak_conductance=_get_float(sec, "leak_conductance_s"),
                rest_potential=_get_float(sec, "rest_v"),
                threshold=_get_float(sec, "threshold_v"),
                refractory=_get_float(sec, "refractory_s"),
            )
        )

    fsec = parser["filters"]
    kernels = np.zeros((N_FILTERS, 3, 3))
    gains = np.zeros(N_FILTERS)
    for f in range(N_FILTERS):
        values = _get(fsec, f"kernel_{f}").split()
        if len(values) != 9:
            raise ConfigFormatError(f"kernel_{f} must hold 9 values, got {len(values)}")
        try:
            kernels[f] = np.array([float(v) for v in values]).reshape(3, 3)
        except ValueError as exc:
            raise ConfigFormatError(f"bad kernel_{f} value") from exc
        gains[f] = _get_float(fsec, f"gain_a_{f}")

    sim = parser["simulation"]
    enc = parser["encoding"]
    try:
        cfg = NetworkConfig(
            t=_get_float(sim, "t_s"),
            dt=_get_float(sim, "dt_s"),
            desired_rate=_get_float(sim, "desired_rate_hz"),
            inhibition_weight=_get_float(sim, "inhibition_weight_a"),
            encoding=EncodingParams(
                i_0=_get_float(enc, "i0_a"), i_p=_get_float(enc, "ip_a")
            ),
            input_lif=lifs[0],
            hidden_lif=lifs[1],
            output_lif=lifs[2],
        )
        bank = FilterBank(kernels=kernels, gains=gains)
    except ValueError as exc:
        raise ConfigFormatError(f"invalid config values: {exc}") from exc
    return cfg, bank


def save_config(path, cfg: NetworkConfig, filters: FilterBank) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(config_to_text(cfg, filters))


def load_config(path) -> tuple[NetworkConfig, FilterBank]:
    with open(path, "r", encoding="utf-8") as f:
        return config_from_text(f.read())
