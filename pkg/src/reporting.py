"""
Reporting - run records, batch estimation and comparison tables
"""

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import pandas as pd

from src import config
from src.errors import CjsrError, InputError
from src.estimator import CjsrEstimate, Method, estimate, resolve_method
from src.schemas import ReportFileModel, RunRecordModel
from src.switched_system import ConstrainedSystem
from src.system_io import system_digest

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = [
    "method",
    "param",
    "nodes",
    "edges",
    "lifted_dim",
    "seconds",
    "upper",
    "certified_lower",
    "cycle_lower",
    "error",
]

Job = Tuple[Method, Optional[int]]


@dataclass
class BatchRow:
    method: Method
    parameter: Optional[int]
    result: Optional[CjsrEstimate] = None
    error: Optional[CjsrError] = None
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.result is not None


def parse_param_range(text: Optional[str]) -> List[Optional[int]]:
    """``"6"`` -> [6]; ``"1..7"`` -> [1, ..., 7]; ``None`` -> [None]."""
    if text is None or str(text).strip() == "":
        return [None]
    text = str(text).strip()
    try:
        if ".." in text:
            first, last = (int(part) for part in text.split("..", 1))
            if last < first:
                raise InputError(f"empty parameter range {text!r}")
            return list(range(first, last + 1))
        return [int(text)]
    except ValueError:
        raise InputError(f"cannot parse parameter {text!r}")


def parse_methods_spec(spec: str) -> List[Job]:
    """Comma-separated ``method[:params]`` items, e.g. ``tproduct:1..7,pathdep:0..6,plain``."""
    jobs: List[Job] = []
    for item in (spec or "").split(","):
        item = item.strip()
        if not item:
            continue
        name, _, params = item.partition(":")
        method = resolve_method(name)
        if method in (Method.PLAIN, Method.KRONECKER):
            if params:
                raise InputError(f"method {method.value} takes no parameter")
            jobs.append((method, None))
            continue
        if not params:
            raise InputError(f"method {method.value} needs a parameter, e.g. {name}:1..3")
        jobs.extend((method, p) for p in parse_param_range(params))
    if not jobs:
        raise InputError("methods spec is empty")
    return jobs


def _sort_key(method: str, parameter: Optional[int]) -> Tuple[str, int]:
    return (method, -1 if parameter is None else parameter)


def _finite_or_none(x: Optional[float]) -> Optional[float]:
    return x if x is not None and math.isfinite(x) else None


def run_record(result: CjsrEstimate, abs_tol: float) -> RunRecordModel:
    d = result.diagnostics
    return RunRecordModel(
        method=result.method.value,
        parameter=result.parameter,
        abs_tol=abs_tol,
        gamma_star_interval=result.gamma_star_interval,
        cjsr_upper=result.cjsr_upper,
        cjsr_lower_certified=result.cjsr_lower_certified,
        accuracy_factor=result.accuracy_factor,
        cycle_lower=_finite_or_none(result.cycle_lower),
        cycle_lower_labels=list(result.cycle_lower_labels),
        exact=None if result.exact is None else result.exact.to_dict(),
        lifted_nodes=d.get("nodes", 0),
        lifted_edges=d.get("edges", 0),
        lifted_dim=d.get("dimension", 0),
        seconds=d.get("seconds", 0.0),
    )


def build_report(s: ConstrainedSystem, records: Sequence[RunRecordModel]) -> ReportFileModel:
    ordered = sorted(records, key=lambda r: _sort_key(r.method, r.parameter))
    return ReportFileModel(system_digest=system_digest(s), records=ordered)


def _run_one(s: ConstrainedSystem, job: Job, abs_tol: Optional[float], estimate_kwargs: Dict) -> BatchRow:
    method, parameter = job
    start = time.time()
    row = BatchRow(method, parameter)
    try:
        row.result = estimate(s, method, parameter, abs_tol=abs_tol, **estimate_kwargs)
    except CjsrError as exc:
        logger.warning(f"[BATCH] {method.value}({parameter}) failed: {exc}")
        row.error = exc
    row.seconds = time.time() - start
    return row


def run_batch(
    s: ConstrainedSystem,
    jobs: Sequence[Job],
    abs_tol: Optional[float] = None,
    workers: Optional[int] = None,
    **estimate_kwargs,
) -> List[BatchRow]:
    """Estimate every (method, parameter) job; rows come back sorted by job.

    A failing job keeps its row with ``error`` set and does not stop the batch.
    """
    workers = max(1, workers or config.WORKERS)
    jobs = sorted(set(jobs), key=lambda job: _sort_key(job[0].value, job[1]))
    logger.info(f"[BATCH] {len(jobs)} jobs on {workers} worker(s)")
    if workers == 1:
        return [_run_one(s, job, abs_tol, estimate_kwargs) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: _run_one(s, job, abs_tol, estimate_kwargs), jobs))


def comparison_frame(rows: Sequence[BatchRow]) -> pd.DataFrame:
    """One line per batch row with lift sizes, timings and bounds."""
    records = []
    for row in rows:
        line = {"method": row.method.value, "param": row.parameter, "seconds": row.seconds}
        if row.ok:
            d = row.result.diagnostics
            line.update(
                nodes=d.get("nodes"),
                edges=d.get("edges"),
                lifted_dim=d.get("dimension"),
                upper=row.result.cjsr_upper,
                certified_lower=row.result.cjsr_lower_certified,
                cycle_lower=row.result.cycle_lower,
                error="",
            )
        else:
            line["error"] = str(row.error)
        records.append(line)
    frame = pd.DataFrame.from_records(records, columns=COMPARISON_COLUMNS)
    frame["param"] = pd.array(frame["param"].tolist(), dtype="Int64")
    return frame


def write_comparison_csv(frame: pd.DataFrame, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, encoding="utf-8", lineterminator="\n", float_format="%.10g")
    logger.info(f"[IO] wrote {path} ({len(frame)} rows)")
    return path
