"""Run configuration shared by the CLI and the lemma suites."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field


@dataclass(frozen=True)
class Guards:
    eval_points: int = 4096
    free_carrier: int = 20000
    iso_elements: int = 12
    universe: int = 12
    instances: int = 2_000_000


@dataclass(frozen=True)
class RunConfig:
    seed: int = 0
    depth_bound: int = 2
    ctx_bound: int = 2
    set_size_bound: int = 2
    derivation_budget: int = 4
    instance_depth: int = 1
    samples: int = 500
    max_elems: int = 4
    guards: Guards = field(default_factory=Guards)
    parallelism: bool = False

    def __post_init__(self):
        for k, v in asdict(self).items():
            if isinstance(v, int) and not isinstance(v, bool) and v < 0:
                raise ValueError(f"{k} must be nonnegative, got {v}")
        for k, v in asdict(self.guards).items():
            if v < 0:
                raise ValueError(f"guard {k} must be nonnegative, got {v}")

    def to_dict(self) -> dict:
        return asdict(self)
