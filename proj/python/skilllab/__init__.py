"""Python access to the skilllab core: mazes, tabular reward analysis and runs."""

import json
from pathlib import Path

from ._skilllab import (
    JsonError,
    content_hash,
    count_free_regions,
    default_config,
    evaluate,
    forward_reward,
    gridworld_figure,
    is_free,
    maze,
    maze_names,
    optimal_assignment,
    posterior,
    reverse_reward,
    run,
    sibling_rivalry_select,
    step,
    validate_config,
)

__all__ = [
    "JsonError",
    "content_hash",
    "count_free_regions",
    "default_config",
    "evaluate",
    "forward_reward",
    "gridworld_figure",
    "is_free",
    "load_export",
    "maze",
    "maze_names",
    "optimal_assignment",
    "posterior",
    "read_metrics",
    "reverse_reward",
    "run",
    "sibling_rivalry_select",
    "step",
    "validate_config",
]


def read_metrics(run_dir):
    """Per-iteration records from a run's metrics.jsonl."""
    path = Path(run_dir) / "metrics.jsonl"
    with path.open() as f:
        return [json.loads(line) for line in f if line.strip()]


def load_export(run_dir, name):
    """An eval export such as "trajectories" or "landscape-0" as a dict."""
    path = Path(run_dir) / "eval" / f"{name}.json"
    if not path.exists():
        raise FileNotFoundError(f"no export {name!r} under {run_dir}")
    with path.open() as f:
        return json.load(f)
