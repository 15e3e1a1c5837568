#!/usr/bin/env python3
"""
Run configuration, checkpoints and CSV logs.

Checkpoints are a JSON header plus one raw little-endian float64 blob
per field in a sibling file ``<stem>.<field>.bin`` (row-major order).
"""

import csv
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from config import (
    CHECKPOINT_DTYPE,
    CHECKPOINT_SUFFIX,
    CSV_COLUMNS,
    DEFAULT_CADENCE,
    DEFAULT_CFL,
    DEFAULT_EPS,
    DEFAULT_GAMMA,
    DEFAULT_N3,
    DEFAULT_PROFILE,
    DEFAULT_T_END,
    OUTPUT_DIR,
    OUTPUT_DIR_ENV,
    SHOW_PROGRESS,
)
from eos import ThermoParams
from errors import ConfigError, InvalidInputError, VacuumFlowError
from grid import GridSpec
from kinematics import FlowState
from profiles import get_preset
from solver import AT_REST, IDENTITY_MAP, SolverConfig

logger = logging.getLogger(__name__)

_BLOB_DTYPE = np.dtype("<f8")
CHECKPOINT_FORMAT = "vacuum-flow-checkpoint"


class RunConfig(BaseModel):
    """Single JSON run document; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    gamma: float = Field(DEFAULT_GAMMA, gt=1.0, le=3.0)
    eps: float = Field(DEFAULT_EPS, ge=0.0)
    n3: int = Field(DEFAULT_N3, ge=3)
    n1: int = Field(1, ge=1)
    n2: int = Field(1, ge=1)
    profile: str = DEFAULT_PROFILE
    weight_expression: Optional[str] = None
    preset: Optional[str] = None
    eta0: Optional[List[str]] = None
    eta1: Optional[List[str]] = None
    t_end: float = Field(DEFAULT_T_END, ge=0.0)
    cfl: float = Field(DEFAULT_CFL, gt=0.0, le=1.0)
    dt: Optional[float] = Field(None, gt=0.0)
    forcing: Optional[List[str]] = None
    exact: Optional[List[str]] = None
    cadence: int = Field(DEFAULT_CADENCE, ge=1)
    order: Optional[int] = Field(None, ge=0)
    output_dir: str = OUTPUT_DIR
    checks: Optional[List[str]] = None
    eps_list: List[float] = Field(default_factory=lambda: [0.4, 0.2, 0.1, 0.05])
    mms_grids: List[int] = Field(default_factory=lambda: [64, 128, 256, 512])
    workers: int = Field(1, ge=1)
    seed: Optional[int] = None

    @field_validator("eta0", "eta1", "forcing", "exact")
    @classmethod
    def _three_components(cls, value):
        if value is not None and len(value) != 3:
            raise ValueError(f"needs 3 components, got {len(value)}")
        return value

    @field_validator("eps_list")
    @classmethod
    def _nonnegative_eps(cls, value):
        if not value or any(e < 0.0 for e in value):
            raise ValueError("must be a nonempty list of nonnegative values")
        return value

    @field_validator("mms_grids")
    @classmethod
    def _grid_sizes(cls, value):
        if len(value) < 2 or any(n < 5 for n in value):
            raise ValueError("needs at least two node counts, each >= 5")
        return value


def _validation_diagnostics(error: ValidationError) -> List[tuple]:
    out = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "<root>"
        out.append((location, item["msg"]))
    return out


def load_config(source: Union[str, Path, dict]) -> RunConfig:
    """
    Parse and validate a run configuration.

    Args:
        source: Path to a JSON file, JSON text, or an already parsed dict

    Returns:
        Validated RunConfig; $VACUUM_FLOW_OUTPUT_DIR overrides output_dir

    Raises:
        ConfigError: On unreadable files, JSON syntax errors (line/column)
            or schema errors (key path)
    """
    if isinstance(source, dict):
        data = source
        origin = "<dict>"
    else:
        text = str(source)
        if isinstance(source, Path) or not text.lstrip().startswith("{"):
            origin = text
            try:
                text = Path(text).read_text(encoding="utf-8")
            except OSError as e:
                raise ConfigError(f"Cannot read config {origin}: {e}") from e
        else:
            origin = "<text>"
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"Malformed JSON in {origin}",
                              [(f"line {e.lineno}, column {e.colno}", e.msg)]) from e

    if not isinstance(data, dict):
        raise ConfigError(f"Config {origin} must be a JSON object", [("<root>", type(data).__name__)])
    try:
        run_config = RunConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {origin}", _validation_diagnostics(e)) from e

    override = os.environ.get(OUTPUT_DIR_ENV)
    if override:
        run_config = run_config.model_copy(update={"output_dir": override})
    return run_config


def to_solver_config(run_config: RunConfig, show_progress: bool = SHOW_PROGRESS) -> SolverConfig:
    """
    Build the SolverConfig of a run.

    Preset components fill eta0/eta1/exact where the config leaves them
    unset; an exact solution without forcing gets the manufactured one.

    Raises:
        ConfigError: If the physical setup is rejected
    """
    from manufactured import with_forcing

    rc = run_config
    preset = {}
    try:
        if rc.preset is not None:
            preset = get_preset(rc.preset)
    except ValueError as e:
        raise ConfigError(str(e), [("preset", str(e))]) from e

    try:
        solver_config = SolverConfig(
            params=ThermoParams(rc.gamma, rc.eps),
            grid=GridSpec((rc.n1, rc.n2, rc.n3)),
            profile=rc.profile,
            weight_expression=rc.weight_expression,
            eta0=rc.eta0 or preset.get("eta0") or IDENTITY_MAP,
            eta1=rc.eta1 or preset.get("eta1") or AT_REST,
            t_end=rc.t_end,
            cfl=rc.cfl,
            dt=rc.dt,
            forcing=rc.forcing,
            exact=rc.exact or preset.get("exact"),
            cadence=rc.cadence,
            order=rc.order,
            show_progress=show_progress,
        )
        if solver_config.exact is not None and solver_config.forcing is None:
            solver_config = with_forcing(solver_config)
    except VacuumFlowError as e:
        raise ConfigError(f"Rejected run setup: {e}", [("config", str(e))]) from e
    return solver_config


def output_directory(run_config: RunConfig) -> Path:
    """Create and return the output directory."""
    path = Path(run_config.output_dir)
    path.mkdir(parents=True, exist_ok=True)
    return path


def write_run_header(path: Union[str, Path], run_config: RunConfig,
                     extra: Optional[dict] = None) -> Path:
    """Echo every run parameter (and derived quantities) to a JSON file."""
    path = Path(path)
    payload = {"config": run_config.model_dump(), **(extra or {})}
    path.write_text(json.dumps(payload, indent=2, default=str), encoding="utf-8")
    return path


@dataclass
class Checkpoint:
    """A state read back from disk."""

    state: FlowState
    grid: GridSpec
    params: ThermoParams
    header: dict


def _blob_path(header_path: Path, name: str) -> Path:
    return header_path.with_name(f"{header_path.stem}.{name}.bin")


def write_checkpoint(path: Union[str, Path], state: FlowState, grid: GridSpec,
                     params: ThermoParams, extra: Optional[dict] = None) -> Path:
    """
    Write a checkpoint header and its field blobs.

    Args:
        path: Header path; CHECKPOINT_SUFFIX is appended if missing
        state: State to store (eta_tt included when present)
        grid: Its grid
        params: Gas parameters
        extra: Additional header entries (weight, run parameters)

    Returns:
        Path of the header
    """
    path = Path(path)
    if path.suffix != CHECKPOINT_SUFFIX:
        path = path.with_name(path.name + CHECKPOINT_SUFFIX)
    grid.check_field(state.eta, 1, "eta")

    fields = {"eta": state.eta, "eta_t": state.eta_t}
    if state.eta_tt is not None:
        fields["eta_tt"] = state.eta_tt

    entries = {}
    for name, values in fields.items():
        blob = np.ascontiguousarray(values, dtype=_BLOB_DTYPE).tobytes(order="C")
        target = _blob_path(path, name)
        target.write_bytes(blob)
        entries[name] = {"file": target.name, "shape": list(values.shape), "bytes": len(blob)}

    header = {
        "format": CHECKPOINT_FORMAT,
        "grid_shape": list(grid.shape),
        "spacing": list(grid.spacing),
        "time": float(state.time),
        "params": params.as_dict(),
        "dtype": CHECKPOINT_DTYPE,
        "order": "C",
        "fields": entries,
        "extra": extra or {},
    }
    path.write_text(json.dumps(header, indent=2), encoding="utf-8")
    logger.debug("checkpoint t=%.6g written to %s", state.time, path)
    return path


def read_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint written by write_checkpoint.

    Raises:
        InvalidInputError: On a foreign format, dtype tag, or a blob whose
            size differs from the header byte count
    """
    path = Path(path)
    header = json.loads(path.read_text(encoding="utf-8"))
    if header.get("format") != CHECKPOINT_FORMAT:
        raise InvalidInputError(f"{path} is not a checkpoint header")
    if header.get("dtype") != CHECKPOINT_DTYPE or header.get("order") != "C":
        raise InvalidInputError(f"Unsupported checkpoint layout in {path}: "
                                f"{header.get('dtype')}/{header.get('order')}")

    arrays: Dict[str, np.ndarray] = {}
    for name, entry in header["fields"].items():
        blob_path = path.with_name(entry["file"])
        blob = blob_path.read_bytes()
        if len(blob) != entry["bytes"]:
            raise InvalidInputError(
                f"Blob {blob_path} has {len(blob)} bytes, header says {entry['bytes']}"
            )
        arrays[name] = np.frombuffer(blob, dtype=_BLOB_DTYPE).reshape(entry["shape"]).astype(float)

    grid = GridSpec(tuple(header["grid_shape"]))
    params = ThermoParams(header["params"]["gamma"], header["params"]["eps"])
    state = FlowState(eta=arrays["eta"], eta_t=arrays["eta_t"], eta_tt=arrays.get("eta_tt"),
                      time=header["time"])
    return Checkpoint(state=state, grid=grid, params=params, header=header)


def _format(value: float) -> str:
    return f"{float(value):.17g}"


def write_energy_csv(path: Union[str, Path], rows: Sequence[dict]) -> Path:
    """
    Write one row per cadence point with CSV_COLUMNS as header.

    Values carry 17 significant digits, so they re-parse bitwise.

    Raises:
        InvalidInputError: For an empty row list
        OSError: On write failure (the message names the path)
    """
    if not rows:
        raise InvalidInputError("Energy log needs at least one row")
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_format(row.get(name, float("nan"))) for name in CSV_COLUMNS])
    return path


def read_energy_csv(path: Union[str, Path]) -> List[Dict[str, float]]:
    """Parse a CSV written by write_energy_csv."""
    with open(Path(path), "r", encoding="utf-8", newline="") as f:
        reader = csv.DictReader(f)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InvalidInputError(f"{path} lacks columns: {', '.join(sorted(missing))}")
        return [{name: float(row[name]) for name in CSV_COLUMNS} for row in reader]
