from pydantic import BaseModel, Field
from typing import Any, Literal, Tuple

from .executors import ExecutorBase, MultiprocessingExecutor, SerialExecutor


class ExecutorFactory(BaseModel):
    """Factory method for selecting an executor"""

    mode: Literal["serial", "multiprocessing"] = "serial"
    processes: int = Field(default=2, ge=1, description="Number of processes (if multiprocess).")
    init_args: Tuple[Any, ...] = Field(default=(), description="Arguments for the worker logging initializer.")

    def create_executor(self) -> ExecutorBase:
        """Factory method to build an ExecutorBase instance from the config."""
        if self.mode == "serial":
            return SerialExecutor()
        elif self.mode == "multiprocessing":
            return MultiprocessingExecutor(processes=self.processes, init_args=self.init_args)
        else:
            raise ValueError(f"Unsupported mode: {self.mode}")
