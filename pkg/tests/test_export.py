"""Tests for CSV output and metadata sidecars."""

import numpy as np
import pandas as pd
import pytest
import yaml

from src import __version__
from src.export import metadata_path, read_series, write_frame, write_series
from src.models import TimeSeries


@pytest.fixture
def series():
    t = np.linspace(0.0, 1.0, 5)
    return TimeSeries(t, {"jx": np.cos(t), "rho": np.exp(1j * t) / 3}, {"N": 4, "beta": float("inf")})


class TestWriteSeries:
    """write_series and read_series."""

    def test_columns_and_values(self, series, temp_config_dir):
        """Values survive at full precision."""
        path = write_series(series, temp_config_dir / "out" / "run.csv")
        loaded = read_series(path)
        assert loaded.names == ["t", "jx", "rho_re", "rho_im"]
        assert np.array_equal(loaded.columns["jx"], series.columns["jx"])
        assert np.array_equal(loaded.t, series.t)

    def test_metadata_sidecar(self, series, temp_config_dir):
        """Metadata goes to <stem>.meta.yaml with YAML-safe values."""
        path = write_series(series, temp_config_dir / "run.csv", {"t_c": np.float64(0.005)})
        sidecar = metadata_path(path)
        assert sidecar.name == "run.meta.yaml"
        with open(sidecar) as f:
            meta = yaml.safe_load(f)
        assert meta["generator"] == f"sbc-dephasing {__version__}"
        assert meta["beta"] == "inf"
        assert meta["t_c"] == 0.005
        assert read_series(path).metadata["N"] == 4

    def test_deterministic(self, series, temp_config_dir):
        """The same series gives byte-identical files."""
        a = write_series(series, temp_config_dir / "a.csv")
        b = write_series(series, temp_config_dir / "b.csv")
        assert a.read_bytes() == b.read_bytes()
        assert metadata_path(a).read_bytes() == metadata_path(b).read_bytes()

    def test_format(self, temp_config_dir):
        """Header row, '.' decimals and newline line endings."""
        path = write_frame(pd.DataFrame({"t": [0.0, 0.1], "jx": [1.0, 1 / 3]}), temp_config_dir / "f.csv")
        text = path.read_bytes().decode()
        assert text.splitlines()[0] == "t,jx"
        assert "\r" not in text
        assert "0.33333333333333331" in text

    def test_read_without_sidecar(self, temp_config_dir):
        """A bare CSV loads with empty metadata."""
        path = write_frame(pd.DataFrame({"t": [0.0, 1.0], "jx": [1.0, 0.5]}), temp_config_dir / "bare.csv")
        assert read_series(path).metadata == {}
