"""Batch runs behind the command line: evolve, dd, kernels, sweep, validate and presets."""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..bath import Bath
from ..config import RunConfig, default_output_dir
from ..config.presets import get_preset
from ..dd import PulseSequence, build_sequence, jx_with_dd_series, pulsed_kernels
from ..dynamics import DephasingEngine, correlation_timescale
from ..errors import ConfigError
from ..export import write_frame, write_series
from ..models import TimeSeries
from ..oracle import CheckResult, ValidationSuite
from ..sweep import evaluate_grid

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Series produced by one run and the files written for it."""

    series: TimeSeries
    path: Optional[Path] = None
    sidecars: List[Path] = field(default_factory=list)


def _bath(config: RunConfig, tolerance: Optional[float]) -> Bath:
    settings = config.bath if tolerance is None else config.bath.model_copy(update={"tolerance": tolerance})
    return settings.build()


def _engine(config: RunConfig, bath: Bath) -> DephasingEngine:
    return DephasingEngine(bath, config.system.state(), config.system.omega0)


def _metadata(config: RunConfig, bath: Bath) -> Dict:
    tc = correlation_timescale(config.system.N, bath)
    return {"config": config.describe(), "bath": bath.describe(), "t_c": tc}


def _output(config: RunConfig, out: Optional[Path], suffix: str = "") -> Path:
    if out is not None:
        return Path(out)
    return config.output.resolve(f"{config.name}{suffix}")


def evolve_series(config: RunConfig, threads: int = 1, tolerance: Optional[float] = None) -> TimeSeries:
    """j_x(t) on the configured grid, plus a density-matrix element when one is requested."""
    bath = _bath(config, tolerance)
    engine = _engine(config, bath)
    mode = config.correlation_mode
    times = config.evolution.times()
    engine.jx(times[:1], mode)
    series = TimeSeries(times, metadata=_metadata(config, bath))
    series.add("jx", evaluate_grid(lambda ts: engine.jx(ts, mode), times, threads))
    if config.element is not None:
        tm, tn = config.element.twice

        def element(ts: np.ndarray) -> np.ndarray:
            return np.array([engine.element(float(t), tm, tn, mode).value for t in ts])

        series.add("rho", evaluate_grid(element, times, threads))
        series.metadata["element"] = {"m": config.element.m, "n": config.element.n}
    return series


def run_evolve(
    config: RunConfig, out: Optional[Path] = None, threads: Optional[int] = None, tolerance: Optional[float] = None
) -> RunResult:
    series = evolve_series(config, threads or config.threads, tolerance)
    path = write_series(series, _output(config, out))
    return RunResult(series, path)


def _sequence(config: RunConfig) -> PulseSequence:
    if config.sequence is None:
        raise ConfigError("dd run needs a pulse sequence", field="sequence")
    return config.sequence.build(config.evolution.t_max)


def dd_series(config: RunConfig, threads: int = 1, tolerance: Optional[float] = None) -> TimeSeries:
    """j_x(t') under the configured pulse train observed up to each grid time t'."""
    bath = _bath(config, tolerance)
    engine = _engine(config, bath)
    seq = _sequence(config)
    mode = config.correlation_mode
    times = config.evolution.times()
    jx_with_dd_series(times[:1], seq, engine, mode)
    series = TimeSeries(times, metadata={**_metadata(config, bath), "sequence": seq.describe()})
    series.add("jx_dd", evaluate_grid(lambda ts: jx_with_dd_series(ts, seq, engine, mode), times, threads))
    return series


def sequence_frame(seq: PulseSequence, bath: Bath, omega0: float) -> pd.DataFrame:
    """Pulse timings followed by the pulsed kernels at the end of the sequence."""
    kernels = pulsed_kernels(seq, bath, omega0)
    rows = [(f"t_{k + 1}", x) for k, x in enumerate(seq.timings)]
    rows += [(name, value) for name, value in kernels.as_dict().items()]
    return pd.DataFrame(rows, columns=["quantity", "value"])


def run_dd(
    config: RunConfig, out: Optional[Path] = None, threads: Optional[int] = None, tolerance: Optional[float] = None
) -> RunResult:
    series = dd_series(config, threads or config.threads, tolerance)
    path = write_series(series, _output(config, out))
    seq = _sequence(config)
    sidecar = write_frame(
        sequence_frame(seq, _bath(config, tolerance), config.system.omega0), path.with_name(f"{path.stem}.sequence.csv")
    )
    return RunResult(series, path, [sidecar])


def kernel_series(config: RunConfig, threads: int = 1, tolerance: Optional[float] = None) -> TimeSeries:
    """C, Phi, B (with its vacuum and thermal parts), D, gamma and Delta on the configured grid."""
    bath = _bath(config, tolerance)
    times = config.evolution.times()
    series = TimeSeries(times, metadata={"config": config.describe(), "bath": bath.describe()})
    series.add("C", np.full(times.shape, bath.coupling_constant()))
    kernels = {
        "Phi": bath.phi,
        "B": bath.gamma_kernel,
        "B_vacuum": bath.gamma_kernel_vacuum,
        "B_thermal": bath.gamma_kernel_thermal,
        "D": bath.delta_kernel,
        "gamma": bath.gamma_rate,
        "Delta": bath.delta_rate,
    }
    for name, fn in kernels.items():
        series.add(name, evaluate_grid(lambda ts, fn=fn: np.atleast_1d(fn(ts)), times, threads))
    return series


def run_kernels(
    config: RunConfig, out: Optional[Path] = None, threads: Optional[int] = None, tolerance: Optional[float] = None
) -> RunResult:
    series = kernel_series(config, threads or config.threads, tolerance)
    path = write_series(series, _output(config, out, "_kernels"))
    return RunResult(series, path)


SWEEP_COLUMNS = ["omega0_tilde", "B_tilde", "D_tilde", "S", "jx"]


def sequence_sweep(
    config: RunConfig,
    kinds: Sequence[str] = ("bang_bang", "udd"),
    max_pulses: int = 8,
    threads: int = 1,
    tolerance: Optional[float] = None,
) -> pd.DataFrame:
    """Pulsed kernels and j_x(t_max) for each kind with 1..max_pulses pulses."""
    if max_pulses < 1:
        raise ConfigError(f"max_pulses must be at least 1, got {max_pulses}", field="max_pulses")
    bath = _bath(config, tolerance)
    engine = _engine(config, bath)
    t = config.evolution.t_max
    omega0 = config.system.omega0
    mode = config.correlation_mode
    candidates = [build_sequence(kind, t, n_pulses=n) for kind in kinds for n in range(1, max_pulses + 1)]
    jx_with_dd_series([t], candidates[0], engine, mode)

    def evaluate(index: np.ndarray) -> np.ndarray:
        rows = []
        for i in index.astype(int):
            seq = candidates[i]
            k = pulsed_kernels(seq, bath, omega0)
            jx_end = jx_with_dd_series([t], seq, engine, mode)[0]
            rows.append([k.omega0_tilde, k.B_tilde, k.D_tilde, k.S, jx_end])
        return np.asarray(rows, dtype=float).reshape(-1, len(SWEEP_COLUMNS))

    values = evaluate_grid(evaluate, np.arange(len(candidates)), threads)
    frame = pd.DataFrame(values, columns=SWEEP_COLUMNS)
    frame.insert(0, "n_pulses", [seq.n_pulses for seq in candidates])
    frame.insert(0, "type", [str(seq.generator) for seq in candidates])
    logger.info(f"sweep over {len(candidates)} sequences at t={t:g}")
    return frame


def run_sweep(
    config: RunConfig,
    out: Optional[Path] = None,
    threads: Optional[int] = None,
    tolerance: Optional[float] = None,
    kinds: Sequence[str] = ("bang_bang", "udd"),
    max_pulses: int = 8,
) -> Path:
    frame = sequence_sweep(config, kinds, max_pulses, threads or config.threads, tolerance)
    return write_frame(frame, _output(config, out, "_sweep"))


def run_validate(
    out_dir: Optional[Path] = None,
    tolerance: float = 1e-7,
    phi_sign: float = 1.0,
    n_max: Optional[int] = None,
) -> List[CheckResult]:
    """Run the validation suite and write one CSV per oracle case plus a summary."""
    out_dir = Path(out_dir) if out_dir is not None else default_output_dir() / "validation"
    suite = ValidationSuite(phi_sign=phi_sign, n_max=n_max, tolerance=tolerance)
    results = suite.run()
    for label, report in suite.reports.items():
        write_frame(report.to_frame(), out_dir / f"oracle_{label}.csv")
    write_frame(ValidationSuite.to_frame(results), out_dir / "summary.csv")
    return results


def preset_series(name: str, threads: int = 1) -> TimeSeries:
    """All series of a preset on the preset's common time grid."""
    preset = get_preset(name)
    base = preset.config()
    times = base.evolution.times()
    series = TimeSeries(
        times,
        metadata={"preset": preset.name, "description": preset.description, "config": base.describe(), "series": {}},
    )
    for label, config in preset.series_configs():
        logger.info(f"preset {name}: evaluating {label}")
        if config.sequence is None:
            values = evolve_series(config, threads).columns["jx"]
        else:
            values = dd_series(config, threads).columns["jx_dd"]
        series.add(label, values)
        series.metadata["series"][label] = preset.series[label]
    return series


def run_preset(name: str, out: Optional[Path] = None, threads: int = 1) -> RunResult:
    series = preset_series(name, threads)
    path = Path(out) if out is not None else default_output_dir() / f"{name}.csv"
    write_series(series, path)
    return RunResult(series, path)


__all__ = [
    "RunResult",
    "dd_series",
    "evolve_series",
    "kernel_series",
    "preset_series",
    "run_dd",
    "run_evolve",
    "run_kernels",
    "run_preset",
    "run_sweep",
    "run_validate",
    "sequence_frame",
    "sequence_sweep",
]
