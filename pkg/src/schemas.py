"""
File schemas - system descriptions, lifted matrix sets and estimation reports
"""

from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from src import config


class SystemFileModel(BaseModel):
    """Constrained switching system: matrices per mode label plus the automaton."""

    model_config = ConfigDict(populate_by_name=True, allow_inf_nan=False, extra="forbid")

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    dimension: int
    modes: Dict[str, List[List[float]]]
    nodes: List[str]
    edges: List[Tuple[str, str, int]]


class MatrixSetFileModel(BaseModel):
    """Matrix set without an automaton (Kronecker and [d]-lift outputs)."""

    model_config = ConfigDict(populate_by_name=True, allow_inf_nan=False, extra="forbid")

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    kind: str = "matrix_set"
    dimension: int
    modes: Dict[str, List[List[float]]]


class RunRecordModel(BaseModel):
    model_config = ConfigDict(allow_inf_nan=False)

    method: str
    parameter: Optional[int] = None
    abs_tol: float
    gamma_star_interval: Tuple[float, float]
    cjsr_upper: float
    cjsr_lower_certified: float
    accuracy_factor: float
    cycle_lower: Optional[float] = None
    cycle_lower_labels: List[int] = []
    exact: Optional[Dict[str, Any]] = None
    lifted_nodes: int
    lifted_edges: int
    lifted_dim: int
    seconds: float


class ReportFileModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True, allow_inf_nan=False)

    schema_version: int = Field(config.SCHEMA_VERSION, alias="schema")
    system_digest: str
    records: List[RunRecordModel]
