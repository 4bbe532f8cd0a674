"""Treatment assignment for sequentially arriving patients.

Each assignment consumes exactly one uniform draw, whatever the scheme, so
the stateful ``AssignmentState`` and the batch ``assign_all`` produce the
same arms from the same stream.

* simple: arm 1 when ``u < pi``.
* permuted block: within each stratum the next slot of the open block is
  arm 1 with probability (ones left) / (slots left); this draws a uniformly
  random arrangement of the block one slot at a time.
* minimization (Pocock-Simon, range measure): the arm whose hypothetical
  assignment gives the smaller summed |n1 - n0| over the patient's margin
  levels is chosen with probability ``p_prefer``; ties go to a fair coin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConfigError, InvalidMarginVector
from .rng import stream

KINDS = {"simple": kernels.SIMPLE, "permuted_block": kernels.PERMUTED_BLOCK,
         "minimization": kernels.MINIMIZATION}


@dataclass(frozen=True)
class SchemeConfig:
    kind: str = "simple"
    pi: float = 0.5
    block_size: int = 4
    p_prefer: float = 0.8
    margins: tuple = ()

    def __post_init__(self):
        kind = self.kind.lower().replace("-", "_")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "margins", tuple(int(m) for m in self.margins))
        if kind not in KINDS:
            raise ConfigError(f"unknown randomization scheme {self.kind!r}")
        if not 0.0 < self.pi < 1.0:
            raise ConfigError("pi must lie in (0, 1)")
        if kind == "permuted_block":
            ones = self.block_size * self.pi
            if self.block_size <= 0 or abs(ones - round(ones)) > 1e-9:
                raise ConfigError("block_size * pi must be a positive integer")
            if not 0 < round(ones) < self.block_size:
                raise ConfigError("each block needs slots for both arms")
        if kind == "minimization":
            if not 0.5 <= self.p_prefer <= 1.0:
                raise ConfigError("p_prefer must lie in [0.5, 1]")
            if self.pi != 0.5:
                raise ConfigError("minimization balances towards equal allocation; pi must be 0.5")
            if self.margins and min(self.margins) < 1:
                raise ConfigError("every margin needs at least one level")

    @property
    def ones_per_block(self) -> int:
        return int(math.ceil(self.block_size * self.pi - 1e-9))

    @property
    def margin_offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.margins)[:-1]]).astype(np.int64)


@dataclass
class AssignmentState:
    """Mutable assignment state; one writer at a time."""

    config: SchemeConfig
    rng: np.random.Generator
    blocks: dict = field(default_factory=dict)  # stratum -> [ones left, slots left]
    diff: np.ndarray = None  # per margin cell: (#arm 1) - (#arm 0)
    counts: np.ndarray = None  # per margin cell and arm
    n_assigned: int = 0

    @classmethod
    def start(cls, config: SchemeConfig, seed: int = 0, replication: int = 0) -> "AssignmentState":
        _require_margins(config)
        cells = int(sum(config.margins))
        return cls(config, stream(seed, replication, "assignment"),
                   diff=np.zeros(cells, dtype=np.int64),
                   counts=np.zeros((cells, 2), dtype=np.int64))

    def _cells(self, z):
        cfg = self.config
        z = np.atleast_1d(np.asarray(z))
        if z.shape != (len(cfg.margins),):
            raise InvalidMarginVector(f"expected {len(cfg.margins)} margin levels, got {z.tolist()}")
        if np.any(z < 0) or np.any(z >= np.asarray(cfg.margins)) or np.any(z != np.round(z)):
            raise InvalidMarginVector(f"margin levels {z.tolist()} out of range {cfg.margins}")
        return cfg.margin_offsets + z.astype(np.int64)

    def assign_next(self, z=None) -> int:
        cfg = self.config
        if cfg.kind == "minimization":
            cells = self._cells(z)
        elif cfg.kind == "permuted_block":
            key = 0 if z is None else (tuple(np.atleast_1d(z).tolist()) if np.ndim(z) else z)
        u = self.rng.random()

        if cfg.kind == "simple":
            arm = 1 if u < cfg.pi else 0
        elif cfg.kind == "permuted_block":
            block = self.blocks.setdefault(key, [0, 0])
            if block[1] == 0:
                block[0], block[1] = cfg.ones_per_block, cfg.block_size
            arm = 1 if u * block[1] < block[0] else 0
            block[0] -= arm
            block[1] -= 1
        else:
            d = self.diff[cells]
            imb1 = int(np.abs(d + 1).sum())
            imb0 = int(np.abs(d - 1).sum())
            if imb1 == imb0:
                arm = 1 if u < 0.5 else 0
            elif imb1 < imb0:
                arm = 1 if u < cfg.p_prefer else 0
            else:
                arm = 0 if u < cfg.p_prefer else 1
            self.diff[cells] += 1 if arm else -1
            self.counts[cells, arm] += 1
        self.n_assigned += 1
        return arm


def _require_margins(config):
    if config.kind == "minimization" and not config.margins:
        raise ConfigError("minimization needs the number of levels of each margin")


def _block_codes(z_sequence, n):
    if z_sequence is None:
        return np.zeros(n, dtype=np.int64), 1
    z = np.asarray(z_sequence)
    if z.ndim == 1:
        _, codes = np.unique(z, return_inverse=True)
    else:
        _, codes = np.unique(z, axis=0, return_inverse=True)
    codes = np.asarray(codes).reshape(-1)
    return codes.astype(np.int64), int(codes.max()) + 1 if n else 1


def assign_all(config: SchemeConfig, z_sequence=None, seed: int = 0, replication: int = 0,
               n=None, rng=None, backend=None) -> np.ndarray:
    """Assign a whole arrival sequence at once.

    ``z_sequence`` holds stratum labels (permuted block), an ``(n, m)`` array
    of margin levels (minimization), or is ignored (simple, give ``n``).
    The result equals repeated ``assign_next`` calls on the same stream.
    """
    if n is None:
        n = len(z_sequence)
    if rng is None:
        rng = stream(seed, replication, "assignment")
    kind = KINDS[config.kind]
    levels = np.zeros((n, 1), dtype=np.int64)
    codes = np.zeros(n, dtype=np.int64)
    n_strata = 1
    if config.kind == "minimization":
        _require_margins(config)
        z = np.asarray(z_sequence)
        if z.ndim != 2 or z.shape[1] != len(config.margins):
            raise InvalidMarginVector(f"expected an (n, {len(config.margins)}) array of margin levels")
        if np.any(z < 0) or np.any(z >= np.asarray(config.margins)[None, :]):
            raise InvalidMarginVector("margin level out of range")
        levels = z.astype(np.int64) + config.margin_offsets[None, :]
    elif config.kind == "permuted_block":
        codes, n_strata = _block_codes(z_sequence, n)
    u = rng.random(n)
    arms = kernels.assign_sequence(kind, levels, codes, u, config.pi, config.ones_per_block,
                                   config.block_size, config.p_prefer, int(sum(config.margins)),
                                   n_strata, backend=backend)
    return arms.astype(np.int64)
