"""Concurrent sweep engine for energy maps.

ARCHITECTURE:
    SweepSpec → CellTask per (s_x, s_y) → solve_cell on a worker pool → MapCell
             → partial CSV (appended as cells finish) → sorted CSV + summary JSON

Key Design:
- Semaphore-bounded fan-out; cells run in a process pool (a single thread
  for one worker, which keeps debugging and profiling simple)
- gather with return_exceptions: a crashed worker becomes a failed cell
- Resume reads the partial CSV and skips finished cells
- The final CSV is sorted by (s_x, s_y), so its content does not depend on
  completion order
"""

import asyncio
import json
import logging
import time
from concurrent.futures import Executor, ProcessPoolExecutor, ThreadPoolExecutor
from pathlib import Path

import pandas as pd

from cranetraj.constants import MAP_COLUMNS, PARTIAL_COLUMNS
from cranetraj.energymap import solve_cell, summarize
from cranetraj.models.energymap import CellTask, MapCell, SweepSpec, SweepSummary

logger = logging.getLogger(__name__)


def map_stem(spec: SweepSpec) -> str:
    return f"map_{spec.vertical_direction.value}_{spec.objective.value}"


def write_map_csv(cells: list[MapCell], path: Path) -> None:
    """Write the map CSV, one row per cell, sorted by (s_x, s_y)."""
    rows = [cell.to_row() for cell in sorted(cells, key=lambda c: c.key)]
    frame = pd.DataFrame(rows, columns=PARTIAL_COLUMNS)[MAP_COLUMNS]
    frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")


def read_partial(path: Path) -> list[MapCell]:
    """Cells already stored in a partial CSV."""
    if not path.exists() or path.stat().st_size == 0:
        return []
    frame = pd.read_csv(path, float_precision="round_trip")
    return [MapCell.from_row(row) for row in frame.to_dict(orient="records")]


class SweepEngine:
    """Runs the cells of an energy map concurrently.

    Use ``max_concurrent`` worker processes; results stream into a partial
    CSV so that an interrupted sweep can resume.
    """

    def __init__(
        self,
        max_concurrent: int = 1,
        dump_trajectories: bool = False,
        dump_dt: float | None = None,
    ) -> None:
        self.max_concurrent = max(1, max_concurrent)
        self.dump_trajectories = dump_trajectories
        self.dump_dt = dump_dt

    def _executor(self) -> Executor:
        if self.max_concurrent == 1:
            return ThreadPoolExecutor(max_workers=1)
        return ProcessPoolExecutor(max_workers=self.max_concurrent)

    def _tasks(self, spec: SweepSpec, out_dir: Path | None, done: set[tuple[float, float]]) -> list[CellTask]:
        tasks = []
        for s_x, s_y in spec.cells():
            pending = MapCell(s_x=s_x, s_y=s_y, direction=spec.vertical_direction, objective=spec.objective)
            if pending.key in done:
                continue
            dump = None
            if self.dump_trajectories and out_dir is not None:
                dump = out_dir / "trajectories" / f"{map_stem(spec)}_{s_x:g}_{s_y:g}.json"
            tasks.append(CellTask(s_x=s_x, s_y=s_y, sweep=spec, dump_path=dump, dump_dt=self.dump_dt))
        return tasks

    async def run(
        self,
        spec: SweepSpec,
        out_dir: Path | None = None,
        resume: bool = False,
        config_hash: str = "",
    ) -> tuple[list[MapCell], SweepSummary]:
        """Solve all cells of ``spec``.

        Args:
            spec: The energy map to compute
            out_dir: Directory for the CSV, partial CSV, summary and dumps; None keeps results in memory
            resume: Skip cells already present in the partial CSV
            config_hash: Hash of the run configuration, recorded in the summary

        Returns:
            Cells sorted by (s_x, s_y) and the map summary
        """
        started = time.perf_counter()
        partial: Path | None = None
        previous: list[MapCell] = []
        if out_dir is not None:
            out_dir.mkdir(parents=True, exist_ok=True)
            partial = out_dir / f"{map_stem(spec)}.partial.csv"
            if resume:
                previous = read_partial(partial)
                logger.info(f"Resuming: {len(previous)} cells already solved")
            elif partial.exists():
                partial.unlink()

        tasks = self._tasks(spec, out_dir, {cell.key for cell in previous})
        total = len(tasks)
        logger.info(f"Sweeping {total} cells ({map_stem(spec)}) with {self.max_concurrent} workers")

        semaphore = asyncio.Semaphore(self.max_concurrent)
        loop = asyncio.get_running_loop()
        finished = 0

        with self._executor() as pool:

            async def run_with_semaphore(task: CellTask) -> MapCell:
                nonlocal finished
                async with semaphore:
                    cell = await loop.run_in_executor(pool, solve_cell, task)
                if partial is not None:
                    pd.DataFrame([cell.to_row()], columns=PARTIAL_COLUMNS).to_csv(
                        partial,
                        mode="a",
                        header=not partial.exists(),
                        index=False,
                        lineterminator="\n",
                    )
                finished += 1
                if total >= 10 and finished % max(1, total // 10) == 0:
                    logger.info(f"{finished}/{total} cells done")
                return cell

            results = await asyncio.gather(*(run_with_semaphore(t) for t in tasks), return_exceptions=True)

        cells = list(previous)
        for task, result in zip(tasks, results):
            if isinstance(result, BaseException):
                logger.error(f"Worker failed on cell ({task.s_x:g}, {task.s_y:g}): {result}")
                result = MapCell(
                    s_x=task.s_x,
                    s_y=task.s_y,
                    direction=spec.vertical_direction,
                    objective=spec.objective,
                    error=f"{type(result).__name__}: {result}",
                )
            cells.append(result)
        cells.sort(key=lambda c: c.key)

        elapsed = time.perf_counter() - started
        summary = summarize(cells, spec, config_hash=config_hash, elapsed_s=elapsed)
        if out_dir is not None:
            write_map_csv(cells, out_dir / f"{map_stem(spec)}.csv")
            with open(out_dir / f"{map_stem(spec)}_summary.json", "w") as f:
                json.dump(summary.model_dump(mode="json"), f, indent=2)
            if partial is not None and partial.exists():
                partial.unlink()
            logger.info(f"Map written to {out_dir / map_stem(spec)}.csv")

        failed = sum(1 for c in cells if c.error is not None)
        if failed:
            logger.warning(f"{failed} of {len(cells)} cells failed")
        return cells, summary
