"""Threshold families used by the geometry pipeline.

Every threshold is a multiple of one base value so that a single knob
(``--tol`` / ``SHEARLAB_TOL``) rescales all of them uniformly.
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields, replace

DEFAULT_RANK = 1e-9
ENV_VAR = "SHEARLAB_TOL"


@dataclass(frozen=True)
class Tolerances:
    rank: float = DEFAULT_RANK  # relative singular-value cut, all rank decisions
    trace: float = 1e-9  # times (1 + max|h|)
    umb: float = 1e-7  # times (1 + ||h~||_F)
    det: float = 1e-12  # times max(1, ||g||_inf^N)
    eig: float = 1e-10  # times ||g||_2, signature sign count
    orth: float = 1e-9  # times ||g||_2 * max(||E||_2, ||Xi||_2)
    spacelike: float = 1e-10  # times trace(g)/n
    immersion: float = 1e-9  # relative singular-value cut on the differential

    def scaled(self, factor: float) -> "Tolerances":
        if not factor > 0:
            raise ValueError(f"tolerance scale must be positive, got {factor}")
        return replace(self, **{f.name: getattr(self, f.name) * factor for f in fields(self)})

    @classmethod
    def from_rank(cls, rank: float) -> "Tolerances":
        """Defaults rescaled so that the rank threshold equals ``rank``."""
        return cls().scaled(rank / DEFAULT_RANK)

    @classmethod
    def from_env(cls) -> "Tolerances":
        raw = os.environ.get(ENV_VAR)
        if not raw:
            return cls()
        return cls.from_rank(float(raw))

    def as_dict(self) -> dict:
        return asdict(self)


DEFAULT = Tolerances()
