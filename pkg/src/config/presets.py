"""Built-in parameter sets for the fig1, fig2 and fig3 data sets.

Each preset is a base :class:`RunConfig` plus named series that override
parts of it. Every figure shares G = 0.001, omega_c = 10, beta = 1000 and
omega0 = 0.1; the "no bath" series sets G = 0.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from ..errors import ConfigError
from . import RunConfig, parse_config

FIGURE_BATH = {"G": 0.001, "omega_c": 10.0, "beta": 1000.0}
FIGURE_OMEGA0 = 0.1
FIGURE_POINTS = 2000


def _merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    base: dict
    series: Dict[str, dict] = field(default_factory=dict)

    def config(self) -> RunConfig:
        return parse_config(self.base, f"preset {self.name}")

    def series_configs(self) -> List[Tuple[str, RunConfig]]:
        return [
            (label, parse_config(_merge(self.base, override), f"preset {self.name}/{label}"))
            for label, override in self.series.items()
        ]


def _figure_base(name: str, N: int, t_max: float) -> dict:
    return {
        "name": name,
        "bath": dict(FIGURE_BATH),
        "system": {"N": N, "omega0": FIGURE_OMEGA0, "preparation": "projective"},
        "evolution": {"t_max": t_max, "n_points": FIGURE_POINTS, "grid": "linear"},
        "correlation_mode": "exact",
    }


def _three_series(prefix: str = "", N: Optional[int] = None) -> Dict[str, dict]:
    system = {} if N is None else {"system": {"N": N}}
    return {
        f"{prefix}no_bath": _merge({"bath": {"G": 0.0}, "correlation_mode": "none"}, system),
        f"{prefix}factorized": _merge({"correlation_mode": "none"}, system),
        f"{prefix}correlated": _merge({"correlation_mode": "exact"}, system),
    }


PRESETS: Dict[str, Preset] = {
    "fig1": Preset(
        "fig1",
        "j_x without bath, factorized and correlated, N = 2000; inset series at N = 1",
        _figure_base("fig1", 2000, 5.0),
        {**_three_series(), **_three_series("inset_", N=1)},
    ),
    "fig2": Preset(
        "fig2",
        "j_x without bath, factorized and correlated, N = 20000",
        _figure_base("fig2", 20000, 0.5),
        _three_series(),
    ),
    "fig3": Preset(
        "fig3",
        "correlated j_x under no pulses, bang-bang tau = 0.02 and 0.002, and four UDD pulses, N = 20000",
        _figure_base("fig3", 20000, 0.1),
        {
            "no_pulses": {},
            "bang_bang_0.02": {"sequence": {"type": "bang_bang", "interval": 0.02}},
            "bang_bang_0.002": {"sequence": {"type": "bang_bang", "interval": 0.002}},
            "udd_4": {"sequence": {"type": "udd", "n_pulses": 4}},
        },
    ),
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; expected one of {sorted(PRESETS)}", field="preset") from None
