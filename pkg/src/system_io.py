"""
System I/O - read, validate and write system files
Canonical JSON serialization (17 significant digits) and the input digest
"""

import hashlib
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from src import config
from src.automaton import Automaton, ValidationReport
from src.errors import InvalidSystemError, SystemFileError
from src.lifts import LiftDescriptor
from src.schemas import MatrixSetFileModel, ReportFileModel, SystemFileModel
from src.switched_system import ConstrainedSystem, MatrixSet, validate_system

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _matrix_rows(A: np.ndarray) -> List[List[float]]:
    return [[float(x) for x in row] for row in np.asarray(A, dtype=float)]


def _matrix_text(rows: List[List[float]]) -> str:
    # One row per bracket pair, every entry with 17 significant digits
    return "[" + ", ".join("[" + ", ".join(format(x, ".17g") for x in row) + "]" for row in rows) + "]"


def parse_system(text: str) -> SystemFileModel:
    """Parse system JSON text; raises SystemFileError on syntax or schema errors."""
    try:
        return SystemFileModel.model_validate_json(text)
    except ValidationError as exc:
        raise SystemFileError(f"system file does not match the schema: {exc}") from exc


def read_system_file(path: PathLike) -> SystemFileModel:
    path = Path(path)
    if not path.exists():
        raise SystemFileError(f"system file {path} does not exist")
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise SystemFileError(f"cannot read {path}: {exc}") from exc
    model = parse_system(text)
    logger.debug(f"[IO] read {path}: n={model.dimension}, {len(model.nodes)} nodes, {len(model.edges)} edges")
    return model


def _shape_problems(model: SystemFileModel) -> List[str]:
    found = []
    if model.schema_version != config.SCHEMA_VERSION:
        found.append(f"unsupported schema version {model.schema_version}")
    if model.dimension < 1:
        found.append(f"dimension must be >= 1, got {model.dimension}")
    for key, rows in model.modes.items():
        if not key.isdigit() or int(key) < 1:
            found.append(f"mode {key!r}: label is not a positive decimal integer")
            continue
        if len(rows) != model.dimension or any(len(row) != len(rows) for row in rows):
            found.append(f"mode {key}: matrix is not square with dimension {model.dimension}")
    return found


def system_problems(model: SystemFileModel) -> ValidationReport:
    """Every problem of a parsed file: shape errors first, then structural ones."""
    shape = _shape_problems(model)
    if shape:
        return ValidationReport(valid=False, problems=shape)
    num_labels = max((int(k) for k in model.modes), default=0)
    automaton = Automaton.from_triples(model.nodes, model.edges, num_labels=num_labels)
    return validate_system(ConstrainedSystem(automaton, MatrixSet({int(k): v for k, v in model.modes.items()})))


def build_system(model: SystemFileModel) -> ConstrainedSystem:
    report = system_problems(model)
    if not report.valid:
        raise InvalidSystemError(report)
    num_labels = max(int(k) for k in model.modes)
    automaton = Automaton.from_triples(model.nodes, model.edges, num_labels=num_labels)
    return ConstrainedSystem(automaton, MatrixSet({int(k): v for k, v in model.modes.items()}))


def load_system(path: PathLike) -> ConstrainedSystem:
    """Read and validate a system file (SystemFileError / InvalidSystemError)."""
    return build_system(read_system_file(path))


def load_bundled_system(name: str) -> ConstrainedSystem:
    """A system shipped under Database/systems, by file stem."""
    return load_system(Path(config.SYSTEMS_PATH) / f"{name}.json")


def list_bundled_systems() -> List[str]:
    directory = Path(config.SYSTEMS_PATH)
    if not directory.exists():
        return []
    return sorted(p.stem for p in directory.glob("*.json"))


def system_to_model(s: ConstrainedSystem) -> SystemFileModel:
    a = s.automaton
    return SystemFileModel(
        dimension=s.dimension,
        modes={str(label): _matrix_rows(A) for label, A in s.matrices.items()},
        nodes=list(a.nodes),
        edges=[(e.source, e.target, e.label) for e in a.edges],
    )


def matrix_set_to_model(matrices: MatrixSet) -> MatrixSetFileModel:
    return MatrixSetFileModel(
        dimension=matrices.dimension,
        modes={str(label): _matrix_rows(A) for label, A in matrices.items()},
    )


def dumps_model(model: BaseModel) -> str:
    """Canonical JSON text: aliases, sorted keys, two-space indent, final newline.

    Matrices under ``modes`` are written with 17 significant digits per entry.
    """
    data = model.model_dump(mode="json", by_alias=True)
    matrices = {}
    if isinstance(data.get("modes"), dict):
        for label, rows in data["modes"].items():
            token = f"@@matrix-{label}@@"
            matrices[token] = _matrix_text(rows)
            data["modes"][label] = token
    text = json.dumps(data, indent=2, sort_keys=True, allow_nan=False, ensure_ascii=False)
    for token, matrix in matrices.items():
        text = text.replace(json.dumps(token), matrix)
    return text + "\n"


def serialize_system(s: ConstrainedSystem) -> str:
    return dumps_model(system_to_model(s))


def system_digest(s: ConstrainedSystem) -> str:
    """SHA-256 of the canonical serialization."""
    return hashlib.sha256(serialize_system(s).encode("utf-8")).hexdigest()


def _write_text(path: PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"[IO] wrote {path}")
    return path


def write_system(s: ConstrainedSystem, path: PathLike) -> Path:
    return _write_text(path, serialize_system(s))


def write_matrix_set(matrices: MatrixSet, path: PathLike) -> Path:
    return _write_text(path, dumps_model(matrix_set_to_model(matrices)))


def backmap_path(path: PathLike) -> Path:
    """Sidecar next to a lifted file: ``lift.json`` -> ``lift.backmap.json``."""
    path = Path(path)
    return path.with_name(f"{path.stem}.backmap.json")


def write_backmap(descriptor: LiftDescriptor, path: PathLike) -> Path:
    text = json.dumps(descriptor.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    return _write_text(path, text)


def write_report(report: ReportFileModel, path: PathLike) -> Path:
    return _write_text(path, dumps_model(report))


def read_report(path: PathLike) -> ReportFileModel:
    try:
        return ReportFileModel.model_validate_json(Path(path).read_text(encoding="utf-8"))
    except (OSError, ValidationError) as exc:
        raise SystemFileError(f"cannot read report {path}: {exc}") from exc


def load_json(path: PathLike) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)
