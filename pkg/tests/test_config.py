"""Config text round-trips and validation."""
import numpy as np
import pytest

from spikedigits.config import (
    ConfigFormatError,
    config_from_text,
    config_to_text,
    load_config,
    save_config,
)
from spikedigits.filters import default_filter_bank
from spikedigits.network import EncodingParams, NetworkConfig
from spikedigits.neurons import LifParams


def test_round_trip_is_exact():
    cfg = NetworkConfig(t=0.075, dt=2.5e-4, desired_rate=212.5)
    bank = default_filter_bank(drive=1.3e-8)
    text = config_to_text(cfg, bank)
    cfg2, bank2 = config_from_text(text)
    assert cfg2 == cfg
    assert np.array_equal(bank2.kernels, bank.kernels)
    assert np.array_equal(bank2.gains, bank.gains)
    assert config_to_text(cfg2, bank2) == text


def test_file_round_trip(tmp_path):
    path = tmp_path / "net.ini"
    cfg, bank = NetworkConfig(), default_filter_bank()
    save_config(path, cfg, bank)
    cfg2, bank2 = load_config(path)
    assert cfg2 == cfg
    assert np.array_equal(bank2.gains, bank.gains)


def test_shipped_default_config_parses():
    import pathlib

    default = pathlib.Path(__file__).resolve().parents[1] / "configs" / "default.ini"
    cfg, bank = load_config(default)
    assert cfg == NetworkConfig()
    assert np.array_equal(bank.kernels, default_filter_bank().kernels)


def test_odd_but_exact_float_values_survive():
    lif = LifParams(
        capacitance=np.nextafter(300e-12, 1),
        leak_conductance=30e-9,
        rest_potential=-0.07 + 1e-17,
        threshold=0.02,
        refractory=0.003,
    )
    cfg = NetworkConfig(input_lif=lif, hidden_lif=lif, output_lif=lif,
                        encoding=EncodingParams(i_0=lif.leak_conductance * 0.09000000000000001,
                                                i_p=101.2e-12))
    bank = default_filter_bank()
    cfg2, _ = config_from_text(config_to_text(cfg, bank))
    assert cfg2.input_lif.capacitance == lif.capacitance
    assert cfg2.input_lif.rest_potential == lif.rest_potential


@pytest.mark.parametrize(
    "mutate",
    [
        lambda t: t.replace("[simulation]", "[sim]"),
        lambda t: t.replace("t_s = ", "t_removed = "),
        lambda t: t.replace("kernel_4", "kernel_x"),
        lambda t: "not an ini at all {{{",
    ],
)
def test_malformed_config_rejected(mutate):
    text = config_to_text(NetworkConfig(), default_filter_bank())
    with pytest.raises(ConfigFormatError):
        config_from_text(mutate(text))


def test_bad_kernel_arity_rejected():
    text = config_to_text(NetworkConfig(), default_filter_bank())
    lines = text.splitlines()
    lines = [
        "kernel_0 = 1 2 3" if line.startswith("kernel_0") else line for line in lines
    ]
    with pytest.raises(ConfigFormatError, match="9 values"):
        config_from_text("\n".join(lines))


def test_invalid_values_rejected():
    text = config_to_text(NetworkConfig(), default_filter_bank())
    with pytest.raises(ConfigFormatError, match="invalid config values"):
        config_from_text(text.replace("dt_s = 0.001", "dt_s = -0.001"))
