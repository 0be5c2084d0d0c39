"""Episode-level result record shared by the grid and tree runners."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


@dataclass(frozen=True)
class EpisodeReport:
    """Outcome of one simulated episode.

    captured       -- whether the cop reached the robber within the horizon
    capture_time   -- round index of capture (1-based count of completed
                      rounds), None when not captured
    steps_run      -- rounds actually simulated; equals the horizon exactly
                      when the episode was not captured
    final_distance -- graph distance between cop and robber when the episode
                      ended (0 iff captured)
    tree_stats     -- tree.TreeEpisodeStats for tree episodes, else None
    """

    captured: bool
    capture_time: int | None
    steps_run: int
    final_distance: int
    tree_stats: Any = None

    def __post_init__(self) -> None:
        if self.captured:
            if self.capture_time is None or self.capture_time > self.steps_run:
                raise ValueError(
                    f"captured episode needs capture_time <= steps_run, got "
                    f"{self.capture_time} vs {self.steps_run}"
                )
        elif self.capture_time is not None:
            raise ValueError("capture_time must be None when not captured")
