"""Experiment configuration: defaults, a ``[bench]`` INI file and CLI overrides.

Config file keys are the :class:`ExperimentConfig` field names; list-valued
keys take comma-separated values.  ``epsilons`` accepts the token ``min``
for ``exp(-m)``.  Values given on the command line win over the file.
"""

import configparser
import dataclasses
from dataclasses import dataclass, field
from typing import Optional

EXPERIMENTS = ("er_known_support", "er_small_hist", "uav", "roadnet", "support_recovery")

MIN_EPSILON = "min"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    n: int = 100
    p: float = 0.2
    k_values: tuple = (4,)
    m_values: tuple = ()  # empty means m = k
    trials: int = 10
    epsilons: tuple = (0.5,)
    noise_variance: float = 0.02**2
    amplitude_sigma: float = 100.0
    num_signals: tuple = (1,)
    noise_levels: tuple = (0.0,)
    side: float = 10.0
    radius: float = 0.3
    master_seed: int = 0
    out: Optional[str] = None
    graph_path: Optional[str] = None
    workers: int = 1
    timing: bool = True
    full: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        for name in ("k_values", "epsilons", "num_signals", "noise_levels"):
            if not getattr(self, name):
                raise ValueError(f"{name} must be non-empty")
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not 0 <= self.p <= 1:
            raise ValueError("p must lie in [0, 1]")
        if any(k < 1 for k in self.k_values) or any(m < 1 for m in self.m_values):
            raise ValueError("k and m values must be positive")
        if self.noise_variance < 0 or any(e < 0 for e in self.noise_levels):
            raise ValueError("noise parameters must be non-negative")

    def ms_for(self, k):
        return self.m_values if self.m_values else (k,)


def default_config(experiment, full=False, **overrides):
    """Desk-scale defaults per experiment; ``full`` switches to the large setting."""
    if experiment not in EXPERIMENTS:
        raise ValueError(f"unknown experiment {experiment!r}")
    base = {
        "er_known_support": dict(n=100, p=0.2, k_values=tuple(range(2, 100)), trials=100,
                                 noise_variance=0.02**2, amplitude_sigma=100.0),
        "er_small_hist": dict(n=10, p=0.2, k_values=(4,), m_values=(4,), trials=100,
                              epsilons=(0.1, 0.01, MIN_EPSILON)),
        "uav": dict(n=1000 if full else 400, side=10.0 if full else 10.0 * (0.4**0.5),
                    radius=0.3, k_values=(10, 20, 30, 40, 50), trials=10,
                    epsilons=(0.5, 0.1, 0.01), noise_variance=1e-2),
        "roadnet": dict(k_values=(600,) if full else (200,),
                        m_values=(150, 300, 450, 600) if full else (50, 100, 150, 200),
                        trials=2, epsilons=(0.5,), noise_variance=1e-2),
        "support_recovery": dict(n=50, p=0.2, k_values=(5,), trials=200,
                                 num_signals=(1, 4, 16, 64), noise_levels=(0.0, 0.5, 1.0, 2.0)),
    }[experiment]
    base.update(overrides)
    return ExperimentConfig(experiment=experiment, full=full, **base)


_INT_LISTS = {"k_values", "m_values", "num_signals"}
_FLOAT_LISTS = {"noise_levels"}
_INTS = {"n", "trials", "master_seed", "workers"}
_FLOATS = {"p", "noise_variance", "amplitude_sigma", "side", "radius"}
_BOOLS = {"timing", "full"}
_STRS = {"out", "graph_path"}


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_epsilons(text_or_items):
    items = _split(text_or_items) if isinstance(text_or_items, str) else text_or_items
    return tuple(MIN_EPSILON if str(t).lower() == MIN_EPSILON else float(t) for t in items)


def load_config_file(path):
    """Read the ``[bench]`` section into a dict of typed overrides."""
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise ValueError(f"cannot read config file {path}")
    if "bench" not in cp:
        raise ValueError(f"config file {path} has no [bench] section")
    sec = cp["bench"]
    known = {f.name for f in dataclasses.fields(ExperimentConfig)} - {"extra"}
    out = {}
    for key, raw in sec.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        try:
            if key in _INT_LISTS:
                out[key] = tuple(int(t) for t in _split(raw))
            elif key in _FLOAT_LISTS:
                out[key] = tuple(float(t) for t in _split(raw))
            elif key == "epsilons":
                out[key] = parse_epsilons(raw)
            elif key in _INTS:
                out[key] = sec.getint(key)
            elif key in _FLOATS:
                out[key] = sec.getfloat(key)
            elif key in _BOOLS:
                out[key] = sec.getboolean(key)
            elif key in _STRS:
                out[key] = raw
            else:
                out[key] = raw
        except ValueError as exc:
            raise ValueError(f"bad value for {key!r}: {exc}") from None
    return out
