"""Tests for configuration management."""

import logging
from pathlib import Path

import numpy as np
import pytest
import yaml

from src.bath import OhmicBath, TabulatedBath
from src.config import (
    ConfigManager,
    EvolutionSettings,
    LogConfig,
    OutputSettings,
    RunConfig,
    default_output_dir,
    default_threads,
    parse_config,
    setup_logging,
)
from src.config.presets import PRESETS, get_preset
from src.errors import ConfigError
from src.models import CorrelationMode, PreparationKind, SequenceType


class TestRunConfig:
    """Validation of run configurations."""

    def test_defaults(self):
        """An empty document is the default run."""
        config = parse_config({})
        assert config.name == "run"
        assert config.system.N == 2000
        assert config.correlation_mode is CorrelationMode.EXACT
        assert config.bath.beta_value == float("inf")
        assert config.sequence is None

    def test_small_run(self, small_run_config):
        """Nested sections are parsed into settings objects."""
        config = parse_config(small_run_config)
        bath = config.bath.build()
        assert isinstance(bath, OhmicBath)
        assert bath.beta == 1000.0
        assert config.system.preparation is PreparationKind.PROJECTIVE
        assert config.system.state().N == 50

    def test_infinite_beta_string(self, small_run_config):
        """beta may be the string 'inf'."""
        small_run_config["bath"]["beta"] = "inf"
        assert parse_config(small_run_config).bath.build().is_zero_temperature

    @pytest.mark.parametrize("beta", [-1.0, 0.0])
    def test_nonpositive_beta(self, small_run_config, beta):
        """beta must be positive; the error names the field."""
        small_run_config["bath"]["beta"] = beta
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config)
        assert info.value.field == "bath.beta"

    def test_unparseable_beta(self, small_run_config):
        """Strings other than 'inf' are rejected."""
        small_run_config["bath"]["beta"] = "hot"
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config)
        assert info.value.field.startswith("bath.beta")

    @pytest.mark.parametrize(
        "section,key,value,field",
        [
            ("system", "N", 0, "system.N"),
            ("system", "preparation", "measured", "system.preparation"),
            ("evolution", "n_points", 1, "evolution.n_points"),
            ("evolution", "t_max", -0.5, "evolution.t_max"),
            ("bath", "omega_c", 0.0, "bath.omega_c"),
            ("bath", "G", -0.1, "bath.G"),
            ("bath", "colour", "blue", "bath.colour"),
        ],
    )
    def test_invalid_fields(self, small_run_config, section, key, value, field):
        """Invalid values and unknown keys are reported with their dotted path."""
        small_run_config[section][key] = value
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config, "run.yaml")
        assert info.value.field == field
        assert str(info.value).startswith(f"{field}: run.yaml:")

    def test_invalid_mode(self, small_run_config):
        """Correlation mode must be none, exact or large_N."""
        small_run_config["correlation_mode"] = "approximate"
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config)
        assert info.value.field == "correlation_mode"

    def test_missing_spectrum_file(self, small_run_config, temp_config_dir):
        """A spectrum file that does not exist is a config error."""
        small_run_config["bath"]["spectrum_file"] = str(temp_config_dir / "missing.txt")
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config)
        assert info.value.field == "bath.spectrum_file"

    def test_tabulated_bath(self, small_run_config, temp_config_dir):
        """A spectrum file selects the tabulated bath with omega_c as tail scale."""
        path = temp_config_dir / "spectrum.txt"
        omega = np.linspace(0.1, 50.0, 100)
        np.savetxt(path, np.column_stack([omega, 0.01 * omega * np.exp(-omega / 10.0)]))
        small_run_config["bath"]["spectrum_file"] = str(path)
        bath = parse_config(small_run_config).bath.build()
        assert isinstance(bath, TabulatedBath)
        assert bath.cutoff_scale == 10.0
        assert bath.beta == 1000.0

    def test_amplitude_file_needs_projective(self, small_run_config, temp_config_dir):
        """Amplitude files describe projective states only."""
        path = temp_config_dir / "psi.txt"
        path.write_text("-2 1 0\n")
        small_run_config["system"] = {"N": 2, "preparation": "unitary", "amplitude_file": str(path)}
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config)
        assert info.value.field == "system"

    @pytest.mark.parametrize(
        "sequence",
        [
            {"type": "udd"},
            {"type": "udd", "n_pulses": 0},
            {"type": "bang_bang"},
            {"type": "bang_bang", "n_pulses": 4, "interval": 0.02},
            {"type": "explicit"},
            {"type": "explicit", "timings": [0.2, 0.1]},
            {"type": "cpmg", "n_pulses": 2},
        ],
    )
    def test_invalid_sequences(self, small_run_config, sequence):
        """Incomplete or inconsistent sequences are rejected."""
        small_run_config["sequence"] = sequence
        with pytest.raises(ConfigError) as info:
            parse_config(small_run_config)
        assert info.value.field.startswith("sequence")

    def test_sequence_builds(self, small_run_config):
        """A bang-bang interval over t_max = 0.5."""
        small_run_config["sequence"] = {"type": "bang_bang", "interval": 0.1}
        config = parse_config(small_run_config)
        seq = config.sequence.build(config.evolution.t_max)
        assert seq.generator is SequenceType.BANG_BANG
        assert seq.n_pulses == 4

    def test_element(self, small_run_config):
        """Elements are given as m, n and stored doubled."""
        small_run_config["element"] = {"m": -25, "n": -24}
        assert parse_config(small_run_config).element.twice == (-50, -48)

    @pytest.mark.parametrize("element", [{"m": 0.25, "n": 0}, {"m": 26, "n": 0}, {"m": 0.5, "n": 0}])
    def test_invalid_element(self, small_run_config, element):
        """Quarter values, out-of-range and wrong-parity m are rejected for N = 50."""
        small_run_config["element"] = element
        with pytest.raises(ConfigError):
            parse_config(small_run_config)

    def test_describe_omits_runtime_settings(self, small_run_config):
        """Metadata carries physics parameters only."""
        described = parse_config(small_run_config).describe()
        assert set(described) >= {"name", "bath", "system", "evolution", "correlation_mode"}
        assert "log" not in described and "threads" not in described
        assert described["bath"]["beta"] == 1000.0


class TestTimeGrid:
    """Evolution grids."""

    def test_linear(self):
        """Linear grids start at zero."""
        times = EvolutionSettings(t_max=0.5, n_points=11).times()
        assert times[0] == 0.0
        assert times[-1] == 0.5
        assert np.diff(times) == pytest.approx(np.full(10, 0.05))

    def test_log_default_start(self):
        """Log grids start at t_max * 1e-4 unless t_min is set."""
        times = EvolutionSettings(t_max=0.5, n_points=5, grid="log").times()
        assert times[0] == pytest.approx(5e-5)
        assert times[-1] == pytest.approx(0.5)
        ratios = times[1:] / times[:-1]
        assert ratios == pytest.approx(np.full(4, ratios[0]))

    def test_log_explicit_start(self):
        """t_min overrides the default start."""
        assert EvolutionSettings(t_max=1.0, n_points=3, grid="log", t_min=0.01).times()[0] == pytest.approx(0.01)

    def test_t_min_below_t_max(self):
        """t_min >= t_max is invalid."""
        with pytest.raises(ConfigError):
            parse_config({"evolution": {"t_max": 1.0, "t_min": 2.0, "grid": "log"}})


class TestConfigManager:
    """Tests for ConfigManager."""

    def test_missing_file_keeps_defaults(self, config_manager):
        """A missing file leaves the default run in place."""
        assert config_manager.run == RunConfig()
        assert config_manager.log.level == "INFO"

    def test_save_and_load_config(self, config_manager, small_run_config, temp_config_dir):
        """Saved configurations load back unchanged."""
        config_manager.run = parse_config(small_run_config)
        path = config_manager.save_config(temp_config_dir / "saved" / "run.yaml")
        assert path.exists()
        reloaded = ConfigManager(path)
        assert reloaded.run == config_manager.run

    def test_save_default_path(self, config_manager):
        """Without an argument the manager's own path is written."""
        path = config_manager.save_config()
        assert path == config_manager.config_path
        with open(path) as f:
            assert yaml.safe_load(f)["name"] == "run"

    def test_invalid_yaml(self, temp_config_dir):
        """Malformed YAML is a config error."""
        path = temp_config_dir / "bad.yaml"
        path.write_text("bath: [unclosed\n")
        with pytest.raises(ConfigError, match="not valid YAML"):
            ConfigManager(path)

    def test_non_mapping(self, temp_config_dir):
        """The top level must be a mapping."""
        path = temp_config_dir / "list.yaml"
        path.write_text("- a\n- b\n")
        with pytest.raises(ConfigError, match="mapping"):
            ConfigManager(path)

    def test_invalid_value_names_file(self, write_config, small_run_config):
        """Field errors carry the file name."""
        small_run_config["system"]["N"] = -3
        path = write_config(small_run_config)
        with pytest.raises(ConfigError) as info:
            ConfigManager(path)
        assert info.value.field == "system.N"
        assert str(path) in str(info.value)

    def test_empty_file(self, temp_config_dir):
        """An empty document is the default run."""
        path = temp_config_dir / "empty.yaml"
        path.write_text("")
        assert ConfigManager(path).run == RunConfig()

    def test_template_loads(self, config_dir):
        """The shipped template is a valid configuration."""
        run = ConfigManager(config_dir / "config.template.yaml").run
        assert run.bath.beta_value == 1000.0
        assert run.output.path is None

    @pytest.mark.parametrize("name,N,t_max", [("fig1", 2000, 5.0), ("fig2", 20000, 0.5), ("fig3", 20000, 0.1)])
    def test_figure_configs_load(self, config_dir, name, N, t_max):
        """Shipped figure configurations match the figure parameters."""
        run = ConfigManager(config_dir / f"{name}.yaml").run
        assert run.system.N == N
        assert run.evolution.t_max == t_max
        assert run.bath.G == 0.001 and run.bath.omega_c == 10.0 and run.bath.beta_value == 1000.0

    def test_fig3_config_has_udd(self, config_dir):
        """The fig3 configuration is the four-pulse UDD run."""
        run = ConfigManager(config_dir / "fig3.yaml").run
        assert run.sequence.type is SequenceType.UDD
        assert run.sequence.n_pulses == 4


class TestPresets:
    """Built-in figure presets."""

    def test_names(self):
        """fig1, fig2 and fig3 are available."""
        assert sorted(PRESETS) == ["fig1", "fig2", "fig3"]

    def test_fig1_series(self):
        """fig1 has the three main series and their N = 1 inset."""
        configs = dict(get_preset("fig1").series_configs())
        assert configs["no_bath"].bath.G == 0.0
        assert configs["factorized"].correlation_mode is CorrelationMode.NONE
        assert configs["correlated"].correlation_mode is CorrelationMode.EXACT
        assert configs["inset_correlated"].system.N == 1
        assert configs["inset_correlated"].system.omega0 == 0.1

    def test_fig3_sequences(self):
        """fig3 series carry the pulse sequences of the figure."""
        configs = dict(get_preset("fig3").series_configs())
        assert configs["no_pulses"].sequence is None
        assert configs["bang_bang_0.002"].sequence.interval == 0.002
        assert configs["udd_4"].sequence.n_pulses == 4
        assert all(c.system.N == 20000 and c.evolution.t_max == 0.1 for c in configs.values())

    def test_unknown_preset(self):
        """Unknown names raise a ConfigError on the preset field."""
        with pytest.raises(ConfigError) as info:
            get_preset("fig9")
        assert info.value.field == "preset"


class TestEnvironment:
    """Environment overrides."""

    def test_threads(self, monkeypatch):
        """SBC_THREADS sets the default worker count."""
        monkeypatch.setenv("SBC_THREADS", "4")
        assert default_threads() == 4
        assert parse_config({}).threads == 4

    @pytest.mark.parametrize("value", ["many", "0"])
    def test_bad_threads(self, monkeypatch, value):
        """Non-integer or zero values fall back to one worker."""
        monkeypatch.setenv("SBC_THREADS", value)
        assert default_threads() == 1

    def test_output_dir(self, monkeypatch, temp_config_dir):
        """SBC_OUTPUT_DIR sets where unnamed outputs go."""
        monkeypatch.setenv("SBC_OUTPUT_DIR", str(temp_config_dir))
        assert default_output_dir() == temp_config_dir
        assert OutputSettings().resolve("fig1") == temp_config_dir / "fig1.csv"

    def test_explicit_output_path(self):
        """An explicit path wins over the default directory."""
        assert OutputSettings(path="out/x.csv").resolve("fig1") == Path("out/x.csv")


class TestLogging:
    """Tests for logging configuration."""

    def test_log_config_defaults(self):
        """Default log config values."""
        config = LogConfig()
        assert config.level == "INFO"
        assert config.file is None

    def test_setup_logging_with_file(self, temp_config_dir):
        """A log file is created and the level applied."""
        log_file = temp_config_dir / "logs" / "run.log"
        setup_logging(LogConfig(level="debug", file=str(log_file)))
        try:
            assert logging.getLogger().level == logging.DEBUG
            logging.getLogger("src.test").info("hello")
            assert log_file.exists()
        finally:
            setup_logging(LogConfig())
        assert logging.getLogger().level == logging.INFO
