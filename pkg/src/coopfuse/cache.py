"""Per-agent sliding window of feature frames and cooperative stacking.

The ego agent keeps the last ``window`` frames for every registered agent.
Non-ego frames are stored exactly as received (already channel-corrupted
at their own transmission time); the ego's frames bypass the channel and
are stored verbatim.  ``assemble`` stacks the full window into the dense
N x T x H x W x C cooperative tensor consumed by the fusion stages.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .tensor import DimensionError, Tensor


class IncompleteFrameError(ValueError):
    """A timestep push is missing at least one registered agent."""


class InsufficientHistoryError(RuntimeError):
    """assemble() called before the window holds T frames."""


@dataclass(frozen=True)
class FeatureMap:
    """One agent's H x W x C feature map at one timestep."""

    agent_id: int
    timestep: int
    data: Tensor

    def __post_init__(self) -> None:
        if self.data.rank != 3:
            raise DimensionError(f"feature map must be H x W x C, got {self.data.shape}")


@dataclass(frozen=True)
class CoopTensor:
    """Dense cooperative stack: agents x time x H x W x C."""

    data: Tensor
    ego_index: int

    def __post_init__(self) -> None:
        if self.data.rank != 5:
            raise DimensionError(f"cooperative tensor must be rank 5, got {self.data.shape}")
        n = self.data.shape[0]
        if not 0 <= self.ego_index < n:
            raise ValueError(f"ego_index {self.ego_index} outside [0, {n})")

    @property
    def num_agents(self) -> int:
        return self.data.shape[0]

    @property
    def window(self) -> int:
        return self.data.shape[1]


class FeatureCache:
    """Sliding window of the last ``window`` timesteps for a fixed agent set."""

    def __init__(
        self,
        agent_ids: Sequence[int],
        ego_id: int,
        window: int,
        feature_shape: tuple[int, int, int],
    ) -> None:
        if window < 1:
            raise ValueError(f"window must be >= 1, got {window}")
        self.agent_ids = tuple(agent_ids)
        if len(set(self.agent_ids)) != len(self.agent_ids):
            raise ValueError("duplicate agent ids")
        if ego_id not in self.agent_ids:
            raise ValueError(f"ego id {ego_id} not among agents {self.agent_ids}")
        self.ego_id = ego_id
        self.window = window
        self.feature_shape = tuple(feature_shape)
        self._frames: deque[dict[int, FeatureMap]] = deque(maxlen=window)
        self._last_timestep: int | None = None

    @property
    def ego_index(self) -> int:
        return self.agent_ids.index(self.ego_id)

    def __len__(self) -> int:
        return len(self._frames)

    @property
    def full(self) -> bool:
        return len(self._frames) == self.window

    def push_frame(self, frames: Mapping[int, FeatureMap]) -> None:
        """Advance the window by one timestep; evicts the oldest when full.

        ``frames`` must contain exactly one map per registered agent, all
        with the same timestep.  The ego entry is expected to be the raw,
        uncorrupted map; non-ego entries the channel outputs.
        """
        missing = [a for a in self.agent_ids if a not in frames]
        if missing:
            raise IncompleteFrameError(f"missing frames for agents {missing}")
        extra = [a for a in frames if a not in self.agent_ids]
        if extra:
            raise IncompleteFrameError(f"frames for unregistered agents {extra}")
        steps = {fm.timestep for fm in frames.values()}
        if len(steps) != 1:
            raise IncompleteFrameError(f"inconsistent timesteps in push: {sorted(steps)}")
        t = steps.pop()
        if self._last_timestep is not None and t <= self._last_timestep:
            raise IncompleteFrameError(
                f"timestep {t} does not advance past {self._last_timestep}"
            )
        for a in self.agent_ids:
            fm = frames[a]
            if fm.agent_id != a:
                raise IncompleteFrameError(f"frame keyed {a} carries agent_id {fm.agent_id}")
            if fm.data.shape != self.feature_shape:
                raise DimensionError(
                    f"agent {a} frame shape {fm.data.shape} != scenario shape {self.feature_shape}"
                )
        self._frames.append({a: frames[a] for a in self.agent_ids})
        self._last_timestep = t

    def frame(self, agent_id: int, index: int) -> FeatureMap:
        """Stored map for an agent at window position ``index`` (0 = oldest)."""
        return self._frames[index][agent_id]

    def assemble(self) -> CoopTensor:
        """Stack the full window into an N x T x H x W x C tensor."""
        if not self.full:
            raise InsufficientHistoryError(
                f"window holds {len(self._frames)}/{self.window} frames"
            )
        stack = np.stack(
            [
                np.stack([step[a].data.array for step in self._frames])
                for a in self.agent_ids
            ]
        )
        return CoopTensor(data=Tensor._wrap(np.ascontiguousarray(stack)), ego_index=self.ego_index)
