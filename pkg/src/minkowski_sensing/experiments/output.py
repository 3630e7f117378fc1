import json
import matplotlib

from functools import partial

matplotlib.use("Agg")

import numpy as np
import pandas as pd
import matplotlib.pyplot as plt

from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Union
from cloudpathlib import AnyPath, CloudPath

from ..concentration import BoundReport
from ..config import SweepRecord
from ..constants import CONCENTRATION_CSV_COLUMNS, PHASE_CSV_COLUMNS
from ..errors import DomainError
from ..ms_logging import logger
from ..support import DimensionEstimate

PathLike = Union[str, Path, CloudPath]

# fixed salt and no date keep SVG output byte-identical between runs
SVG_RC = {"svg.hashsalt": "minkowski-sensing", "svg.fonttype": "path"}
SVG_METADATA = {"Date": None}


def _columns_for(records: Sequence[Any]) -> Sequence[str]:
    if all(isinstance(r, SweepRecord) for r in records):
        return PHASE_CSV_COLUMNS
    if all(isinstance(r, BoundReport) for r in records):
        return CONCENTRATION_CSV_COLUMNS
    raise DomainError("Records must all be SweepRecord or all BoundReport")


def emit_csv(records: Sequence[Union[SweepRecord, BoundReport]], path: PathLike) -> None:
    """
    Write sweep records (phase) or bound reports (concentration) with their fixed header.

    Raises:
    - DomainError for an empty or mixed record list.
    - OSError with the path when the file cannot be written.
    """
    if len(records) == 0:
        raise DomainError("Refusing to write an empty result table")
    columns = list(_columns_for(records))
    frame = pd.DataFrame([r.model_dump(include=set(columns)) for r in records], columns=columns)
    path = AnyPath(path)
    try:
        with path.open("w") as f:
            frame.to_csv(f, index=False, float_format="%.12g", na_rep="nan", lineterminator="\n")
    except OSError as e:
        raise OSError(f"Could not write results to {path}: {e}") from e
    logger.info(f"Wrote {len(records)} rows to {path}")


def _plot_sweep(ax, records: Sequence[SweepRecord], reference_lines: Sequence[float]) -> None:
    ax.plot([r.k for r in records], [r.success_rate for r in records], marker="o", color="C0", label="success rate")
    for i, ref in enumerate(reference_lines):
        ax.axvline(ref, linestyle="--", color=f"C{i + 1}", label=f"k = {ref:g}")
    ax.set_xlabel("measurements k")
    ax.set_ylabel("success rate")
    ax.set_ylim(-0.05, 1.05)


def _plot_bounds(ax, records: Sequence[BoundReport]) -> None:
    deltas = [r.delta for r in records]
    ax.loglog(deltas, [r.empirical_prob for r in records], marker="o", label="empirical")
    ax.loglog(deltas, [r.single_bound for r in records], linestyle="--", label="single-measurement bound")
    ax.set_xlabel("delta")
    ax.set_ylabel("probability")


def _plot_dimension(ax, estimate: DimensionEstimate, reference_lines: Sequence[float]) -> None:
    ax.plot(np.log(1.0 / np.asarray(estimate.rho_schedule)), np.log(estimate.counts), marker="o", label="log N")
    ax.set_xlabel("log(1/rho)")
    ax.set_ylabel("log N(rho)")
    ax.set_title(f"slope {estimate.slope:.3f}" + (f", reference {reference_lines[0]:g}" if reference_lines else ""))


def emit_svg_plot(
    records: Union[Sequence[SweepRecord], Sequence[BoundReport], DimensionEstimate],
    path: PathLike,
    reference_lines: Sequence[float] = (),
) -> None:
    """
    SVG line plot: success rate against k with vertical reference lines (phase), empirical
    probability and bound against δ (concentration), or log N against log(1/ρ) (dimension).
    """
    if isinstance(records, DimensionEstimate):
        draw = partial(_plot_dimension, estimate=records, reference_lines=reference_lines)
    else:
        if len(records) == 0:
            raise DomainError("Refusing to plot an empty result table")
        if _columns_for(records) == PHASE_CSV_COLUMNS:
            draw = partial(_plot_sweep, records=records, reference_lines=reference_lines)
        else:
            draw = partial(_plot_bounds, records=records)

    path = AnyPath(path)
    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 4))
        try:
            draw(ax)
            ax.legend(loc="best")
            fig.tight_layout()
            with path.open("wb") as f:
                fig.savefig(f, format="svg", metadata=SVG_METADATA)
        except OSError as e:
            raise OSError(f"Could not write plot to {path}: {e}") from e
        finally:
            plt.close(fig)
    logger.info(f"Wrote plot to {path}")


def metadata_path(output_path: PathLike) -> Union[Path, CloudPath]:
    path = AnyPath(output_path)
    return path.with_name(path.name + ".meta.json")


def write_metadata(output_path: PathLike, metadata: Dict[str, Any]) -> Union[Path, CloudPath]:
    """Write `<output>.meta.json` next to the result file; keys are sorted so the file is deterministic."""
    path = metadata_path(output_path)
    try:
        with path.open("w") as f:
            json.dump(metadata, f, indent=2, sort_keys=True, default=_jsonable)
            f.write("\n")
    except OSError as e:
        raise OSError(f"Could not write metadata to {path}: {e}") from e
    return path


def _jsonable(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    return str(value)


def read_metadata(output_path: PathLike) -> Optional[Dict[str, Any]]:
    path = metadata_path(output_path)
    if not path.exists():
        return None
    with path.open("r") as f:
        return json.load(f)
