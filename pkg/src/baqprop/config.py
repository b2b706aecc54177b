"""Run configuration: defaults that reproduce the published-parameter runs,
a flat key=value config-file format, and strict unknown-key rejection."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, fields

__all__ = ["RunConfig", "parse_config_file", "dump_config"]

EXPERIMENTS = ("xor", "maxcut", "unitary", "hybrid")
OPTIMIZERS = ("momgrad", "qdd", "nelder-mead")

DEFAULT_ITERATIONS = {"xor": 30, "maxcut": 25, "unitary": 40, "hybrid": 60}


@dataclass
class RunConfig:
    """One experiment run. Defaults reproduce the published hyper-parameters;
    eta/gamma/sigma override the schedules with constant values when set."""

    experiment: str = "xor"
    optimizer: str = "momgrad"
    seed: int = 1
    iterations: int | None = None
    shots: int | None = None
    eta: float | None = None
    gamma: float | None = None
    sigma: float | None = None
    out: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; "
                             f"choose from {EXPERIMENTS}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"unknown optimizer {self.optimizer!r}; "
                             f"choose from {OPTIMIZERS}")
        if self.experiment == "hybrid" and self.optimizer != "momgrad":
            raise ValueError("the hybrid experiment runs MoMGrad only")
        if self.optimizer == "nelder-mead" and self.experiment != "maxcut":
            raise ValueError("nelder-mead is the maxcut baseline only")
        if self.shots is not None and self.shots <= 0:
            raise ValueError("shots must be positive")

    @property
    def resolved_iterations(self) -> int:
        if self.iterations is not None:
            return self.iterations
        its = DEFAULT_ITERATIONS[self.experiment]
        if self.experiment == "maxcut" and self.optimizer == "nelder-mead":
            return 200  # baseline budget counted in objective evaluations
        return its


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_config_file(path) -> dict:
    """Flat ``key = value`` lines; values parsed as JSON scalars when valid.

    Unknown keys are rejected so typos cannot silently change a run.
    """
    known = {f.name for f in fields(RunConfig)}
    out = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{ln}: expected 'key = value'")
            key, _, val = line.partition("=")
            key = key.strip()
            if key not in known:
                raise ValueError(f"{path}:{ln}: unknown config key {key!r}")
            out[key] = _parse_value(val.strip())
    return out


def dump_config(cfg: RunConfig) -> str:
    lines = [f"{k} = {json.dumps(v)}" for k, v in asdict(cfg).items()]
    return "\n".join(lines) + "\n"
