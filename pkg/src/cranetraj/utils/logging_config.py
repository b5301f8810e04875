"""Structured logging of optimizer decisions.

Every optimization can leave a trace: the problem it was asked to solve, the
plan it settled on, and any error. Both outputs are off by default; enable
them explicitly when debugging a map cell.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any


class SolveDecisionLogger:
    """Logger for solve decisions with JSONL file output."""

    def __init__(
        self,
        log_dir: Path | None = None,
        enable_file_logging: bool = False,
        enable_console_logging: bool = False,
    ):
        """Initialize the solve decision logger.

        Args:
            log_dir: Directory for log files. Defaults to ./logs
            enable_file_logging: Whether to write JSONL records (default: False)
            enable_console_logging: Whether to print summaries to console (default: False)
        """
        self.logger = logging.getLogger("cranetraj.decisions")
        self.logger.setLevel(logging.INFO)
        self.enable_console_logging = enable_console_logging

        self.logger.handlers.clear()

        if enable_console_logging:
            console_handler = logging.StreamHandler()
            console_handler.setLevel(logging.INFO)
            console_handler.setFormatter(
                logging.Formatter(
                    "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
                    datefmt="%Y-%m-%d %H:%M:%S",
                )
            )
            self.logger.addHandler(console_handler)

        self.file_handler: logging.FileHandler | None = None
        self.log_file: Path | None = None
        if enable_file_logging:
            if log_dir is None:
                log_dir = Path("./logs")
            log_dir.mkdir(parents=True, exist_ok=True)

            timestamp = datetime.now().strftime("%Y%m%d")
            self.log_file = log_dir / f"solve_decisions_{timestamp}.jsonl"

            # JSON lines are written to the stream directly; the filter keeps
            # ordinary records out of the file
            self.file_handler = logging.FileHandler(self.log_file)
            self.file_handler.setLevel(logging.DEBUG)
            self.file_handler.setFormatter(logging.Formatter("%(message)s"))
            self.file_handler.addFilter(lambda record: record.levelno == logging.DEBUG)
            self.logger.addHandler(self.file_handler)

            if enable_console_logging:
                self.logger.info(f"Solve decision logging enabled: {self.log_file}")

    def _write(self, entry: dict[str, Any]) -> None:
        if self.file_handler:
            self.file_handler.stream.write(json.dumps(entry) + "\n")
            self.file_handler.flush()

    def log_solve_request(
        self,
        objective: str,
        s0: float,
        T: float,
        optimized_axis: str,
        direction_sign: int,
        model: str,
    ) -> str:
        """Log an optimization request.

        Returns:
            Request ID for tracking
        """
        request_id = f"{optimized_axis}_{s0:g}_{T:.4f}_{datetime.now().strftime('%Y%m%d_%H%M%S_%f')}"
        self._write(
            {
                "timestamp": datetime.now().isoformat(),
                "event_type": "solve_request",
                "request_id": request_id,
                "input": {
                    "objective": objective,
                    "s0": s0,
                    "T": T,
                    "optimized_axis": optimized_axis,
                    "direction_sign": direction_sign,
                    "model": model,
                },
            }
        )
        if self.enable_console_logging:
            self.logger.info(f"Solve request: {objective} on axis {optimized_axis}, s0={s0:g} m, T={T:.3f} s")
        return request_id

    def log_solve_result(
        self,
        request_id: str,
        plan: str,
        n_intervals: int,
        objective_value: float,
        baseline_value: float,
        converged: bool,
        mode: str,
        plan_solves: int,
        elapsed_s: float,
        evaluations: int = 0,
    ) -> None:
        """Log the accepted optimization result."""
        self._write(
            {
                "timestamp": datetime.now().isoformat(),
                "event_type": "solve_result",
                "request_id": request_id,
                "output": {
                    "plan": plan,
                    "n_intervals": n_intervals,
                    "objective_value": objective_value,
                    "baseline_value": baseline_value,
                    "converged": converged,
                    "mode": mode,
                    "plan_solves": plan_solves,
                    "evaluations": evaluations,
                    "elapsed_s": elapsed_s,
                },
            }
        )
        if self.enable_console_logging:
            self.logger.info(
                f"Solve result: {plan} (n={n_intervals}, {mode}) → {objective_value / 1e3:.3f} kJ "
                f"vs baseline {baseline_value / 1e3:.3f} kJ"
            )

    def log_solve_error(self, request_id: str, error: Exception) -> None:
        """Log an optimization error."""
        self._write(
            {
                "timestamp": datetime.now().isoformat(),
                "event_type": "solve_error",
                "request_id": request_id,
                "error": {"type": type(error).__name__, "message": str(error)},
            }
        )
        # Errors reach the console even when console logging is disabled
        self.logger.error(f"Solve error ({request_id}): {error}")


_global_logger: SolveDecisionLogger | None = None


def get_logger(
    log_dir: Path | None = None,
    enable_file_logging: bool = False,
    enable_console_logging: bool = False,
) -> SolveDecisionLogger:
    """Get or create the global solve decision logger."""
    global _global_logger

    if _global_logger is None:
        _global_logger = SolveDecisionLogger(
            log_dir=log_dir,
            enable_file_logging=enable_file_logging,
            enable_console_logging=enable_console_logging,
        )

    return _global_logger


def reset_logger() -> None:
    """Reset the global logger (mainly for testing)."""
    global _global_logger
    _global_logger = None
