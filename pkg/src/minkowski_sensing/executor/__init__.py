from .executors import ExecutionResult, ExecutorBase, MultiprocessingExecutor, SerialExecutor
from .executor_factory import ExecutorFactory
