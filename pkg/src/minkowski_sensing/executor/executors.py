import abc
import concurrent.futures
from typing import Any, Callable, Generic, List, Sequence, Tuple, TypeVar

from ..ms_logging import init_worker_logging, logger

T = TypeVar("T")


class ExecutionResult(Generic[T]):
    """
    Holds the outcome of executing tasks.

    `successes` keeps the order in which tasks were submitted, so reductions over it
    are independent of scheduling.
    """

    def __init__(self) -> None:
        self.successes: List[T] = []
        self.failures: List[Tuple[Any, Exception]] = []

    @property
    def all_successful(self) -> bool:
        return len(self.failures) == 0

    @property
    def num_failures(self) -> int:
        return len(self.failures)

    @property
    def num_successes(self) -> int:
        return len(self.successes)

    def __repr__(self) -> str:
        return f"ExecutionResult(successes={len(self.successes)}, failures={len(self.failures)})"


class ExecutorBase(abc.ABC):
    """Abstract base class for concurrency executors."""

    @abc.abstractmethod
    def run(self, tasks: Sequence[Tuple[Any, ...]], func: Callable[..., T]) -> ExecutionResult[T]:
        pass


def _check_tasks(tasks: Sequence[Tuple[Any, ...]]) -> None:
    if tasks and not isinstance(tasks[0], tuple):
        raise ValueError("Tasks need to be tuples!")


class SerialExecutor(ExecutorBase):
    """Run tasks one after another in the calling process, capturing errors like the parallel executor."""

    def run(self, tasks: Sequence[Tuple[Any, ...]], func: Callable[..., T]) -> ExecutionResult[T]:
        _check_tasks(tasks)
        result = ExecutionResult[T]()
        for task in tasks:
            try:
                result.successes.append(func(*task))
            except Exception as exc:
                logger.debug(f"Task failed: {exc!r}")
                result.failures.append((task, exc))
        return result


class MultiprocessingExecutor(ExecutorBase):
    """
    Run tasks in parallel using ProcessPoolExecutor, capturing errors gracefully.
    Optionally takes an `initializer` function (plus `initargs`) that is invoked
    *once* in each worker process before it starts running tasks.
    """

    def __init__(
        self,
        processes: int = 4,
        init_worker_logging: Callable[..., None] = init_worker_logging,
        init_args: Tuple[Any, ...] = (),
    ):
        self.processes = processes
        self.init_worker_logging = init_worker_logging
        self.init_args = init_args

    def run(self, tasks: Sequence[Tuple[Any, ...]], func: Callable[..., T]) -> ExecutionResult[T]:
        _check_tasks(tasks)
        result = ExecutionResult[T]()
        if not tasks:
            return result
        with concurrent.futures.ProcessPoolExecutor(
            max_workers=self.processes, initializer=self.init_worker_logging, initargs=self.init_args
        ) as executor:
            futures = [executor.submit(func, *task) for task in tasks]
            # collect in submission order; completion order varies between runs
            for task, future in zip(tasks, futures):
                try:
                    result.successes.append(future.result())
                except Exception as exc:
                    result.failures.append((task, exc))

        return result
