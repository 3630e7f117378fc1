import re
import numpy as np
import pandas as pd
import numpy.typing as npt

from typing import List, Optional, Sequence, Union
from pathlib import Path
from cloudpathlib import AnyPath, CloudPath

from ..constants import DIMENSION_CSV_COLUMNS
from ..errors import DimensionError
from ..linalg import as_matrix
from ..ms_logging import logger
from .box_counting import DimensionEstimate

PathLike = Union[str, Path, CloudPath]

_SHAPE_LINE = re.compile(r"^#\s*m=(\d+),\s*n=(\d+)\s*$")


def export_point_cloud(points: Sequence[npt.ArrayLike], path: PathLike) -> None:
    """
    Write matrices one per row in row-major vec order, preceded by a `# m=<m>,n=<n>` line.
    """
    mats = [as_matrix(p, "point") for p in points]
    if not mats:
        raise DimensionError("Cannot export an empty point cloud")
    m, n = mats[0].shape
    if any(p.shape != (m, n) for p in mats):
        raise DimensionError("All points in a cloud must share one shape")
    frame = pd.DataFrame(np.stack([p.ravel() for p in mats]))
    path = AnyPath(path)
    try:
        with path.open("w") as f:
            f.write(f"# m={m},n={n}\n")
            frame.to_csv(f, header=False, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise OSError(f"Could not write point cloud to {path}: {e}") from e
    logger.info(f"Wrote {len(mats)} points to {path}")


def import_point_cloud(path: PathLike) -> List[np.ndarray]:
    path = AnyPath(path)
    try:
        with path.open("r") as f:
            first = f.readline()
            match = _SHAPE_LINE.match(first.strip())
            if match is None:
                raise DimensionError(f"{path} does not start with a `# m=..,n=..` line")
            m, n = int(match.group(1)), int(match.group(2))
            frame = pd.read_csv(f, header=None, comment="#")
    except OSError as e:
        raise OSError(f"Could not read point cloud from {path}: {e}") from e
    values = frame.to_numpy(dtype=np.float64)
    if values.shape[1] != m * n:
        raise DimensionError(f"{path}: rows have {values.shape[1]} entries, expected {m * n}")
    return [row.reshape(m, n) for row in values]


def dimension_trailer(estimate: DimensionEstimate, reference: Optional[float]) -> str:
    reference_text = "nan" if reference is None else f"{reference:g}"
    line = f"# slope={estimate.slope:.6f} reference={reference_text} r2={estimate.r2:.6f}"
    if not estimate.saturated:
        line += " warning=insufficient_samples"
    return line


def export_dimension_estimate(estimate: DimensionEstimate, path: PathLike, reference: Optional[float] = None) -> None:
    """Write `rho,count` rows followed by a `# slope=… reference=… r2=…` trailer."""
    frame = pd.DataFrame({"rho": estimate.rho_schedule, "count": estimate.counts}, columns=list(DIMENSION_CSV_COLUMNS))
    path = AnyPath(path)
    try:
        with path.open("w") as f:
            frame.to_csv(f, index=False, float_format="%.10g", lineterminator="\n")
            f.write(dimension_trailer(estimate, reference) + "\n")
    except OSError as e:
        raise OSError(f"Could not write dimension estimate to {path}: {e}") from e


def import_matrix(path: PathLike) -> np.ndarray:
    """Read one matrix stored as plain comma-separated rows."""
    path = AnyPath(path)
    try:
        with path.open("r") as f:
            frame = pd.read_csv(f, header=None, comment="#")
    except OSError as e:
        raise OSError(f"Could not read matrix from {path}: {e}") from e
    return as_matrix(frame.to_numpy(dtype=np.float64), str(path))
