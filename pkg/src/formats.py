"""File formats: manifold documents, CSV point clouds, encoded vectors,
grids, datasets and model checkpoints."""

import csv
import json
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .basis import make_basis
from .config import NetworkConfig
from .errors import ParseError, UnsupportedVersionError, ValidationFailedError
from .geometry import ManifoldFunction, SimplicialManifold, ValidationReport, validate_manifold
from .meshes import point_set
from .models import EncodedVector, Normalization, Provenance
from .neuralop.data import OperatorDataset
from .neuralop.network import MIONet, network_arrays, network_from_arrays
from .storage import load_bundle, save_bundle

MANIFOLD_FORMAT = "mfe-manifold"
MANIFOLD_VERSION = 1


def save_manifold(mf: ManifoldFunction, path) -> Path:
    """Write a manifold function as a JSON document (17 significant digits)."""
    m = mf.manifold
    document = {
        "format": MANIFOLD_FORMAT,
        "version": MANIFOLD_VERSION,
        "name": m.name,
        "d": m.d,
        "k": m.k,
        "is_box": m.is_box,
        "vertices": m.vertices.tolist(),
        "simplices": m.simplices.tolist(),
        "values": mf.values.tolist(),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(document, f, indent=2)
        f.write("\n")
    return path


def _require(document: dict, key: str):
    if key not in document:
        raise ParseError("Missing required field", field=key)
    return document[key]


def parse_manifold(text: str, periodic: bool = False) -> Tuple[ManifoldFunction, ValidationReport]:
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"Invalid JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(document, dict):
        raise ParseError("Manifold document must be an object", line=1)
    version = document.get("version", MANIFOLD_VERSION)
    if version != MANIFOLD_VERSION:
        raise UnsupportedVersionError(f"Unsupported manifold format version {version}")

    d = _require(document, "d")
    k = _require(document, "k")
    is_box = bool(document.get("is_box", False))
    if not isinstance(d, int) or not isinstance(k, int):
        raise ParseError("d and k must be integers", field="d" if not isinstance(d, int) else "k")
    vertices = _require(document, "vertices")
    simplices = _require(document, "simplices")
    for i, vertex in enumerate(vertices):
        if not isinstance(vertex, list) or len(vertex) != d:
            raise ParseError(f"Vertex {i} needs {d} coordinates", field="vertices")
    width = 2 if is_box else k + 1
    for i, simplex in enumerate(simplices):
        if not isinstance(simplex, list) or len(simplex) != width:
            raise ParseError(
                f"Simplex {i} has {len(simplex) if isinstance(simplex, list) else '?'} "
                f"vertices, k={k} needs {width}",
                field="simplices",
            )
    values = document.get("values")
    if values is None:
        values = [0.0] * len(vertices)
    elif len(values) != len(vertices):
        raise ParseError(f"{len(values)} values for {len(vertices)} vertices", field="values")

    manifold = SimplicialManifold(
        d=d,
        k=k,
        vertices=np.array(vertices, dtype=float).reshape(-1, d),
        simplices=np.array(simplices, dtype=np.int64).reshape(-1, width),
        is_box=is_box,
        name=document.get("name", ""),
    )
    return _validated(ManifoldFunction(manifold, values), periodic)


def _validated(mf: ManifoldFunction, periodic: bool):
    report = validate_manifold(mf.manifold, periodic=periodic)
    if not report.ok:
        raise ValidationFailedError("; ".join(report.summary()), report=report)
    return mf, report


def load_pointcloud(path, d: Optional[int] = None, periodic: bool = False):
    """CSV point cloud: x1..xd[,value] per line, optional header row.

    A header names the columns ('value' marks the value column). Without a
    header, `d` sets the coordinate count; failing that the last column is
    the value when there are at least two columns.
    """
    points, values = [], []
    value_column = None
    with open(path, newline="") as f:
        for lineno, row in enumerate(csv.reader(f), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and not _is_number(row[0]):
                names = [c.strip().lower() for c in row]
                value_column = names.index("value") if "value" in names else None
                columns = len(names) - (1 if value_column is not None else 0)
                if d is not None and d != columns:
                    raise ParseError(f"Header names {columns} coordinates, expected {d}", line=lineno)
                d = columns
                continue
            try:
                numbers = [float(cell) for cell in row]
            except ValueError as e:
                raise ParseError(f"Non-numeric entry: {e}", line=lineno) from e
            if d is None:
                d = len(numbers) - 1 if len(numbers) > 1 else 1
            if value_column is None:
                value_column = d if len(numbers) > d else None
            expected = d + (1 if value_column is not None else 0)
            if len(numbers) != expected:
                raise ParseError(f"Expected {expected} columns, got {len(numbers)}", line=lineno)
            if value_column is not None:
                values.append(numbers[value_column])
                numbers = numbers[:value_column] + numbers[value_column + 1 :]
            else:
                values.append(0.0)
            points.append(numbers)
    if not points:
        raise ParseError("Point cloud has no rows")
    mf = ManifoldFunction(point_set(np.array(points), name=Path(path).stem), values)
    return _validated(mf, periodic)


def _is_number(text: str) -> bool:
    try:
        float(text)
        return True
    except ValueError:
        return False


def load_manifold(
    path, periodic: bool = False, d: Optional[int] = None
) -> Tuple[ManifoldFunction, ValidationReport]:
    """Load a manifold document (or a .csv point cloud) with its validation report.

    `d` only applies to headerless point clouds.

    Containment violations are fatal; other findings stay in the report.
    """
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return load_pointcloud(path, d=d, periodic=periodic)
    return parse_manifold(path.read_text(), periodic=periodic)


def save_encoded(encoded: EncodedVector, path) -> Path:
    return save_bundle(path, "encoded", dict(encoded.blocks), encoded.header())


def load_encoded(path) -> EncodedVector:
    header, arrays = load_bundle(path, expected_kind="encoded")
    meta = header["metadata"]
    basis = meta["basis"]
    return EncodedVector(
        basis=make_basis(basis["family"], basis["n"], basis["d"]),
        blocks={entry["name"]: arrays[entry["name"]] for entry in meta["blocks"]},
        normalization=Normalization(meta["normalization"]),
        provenance=Provenance.from_dict(meta.get("provenance", {})),
    )


def _format_float(value: float) -> str:
    return repr(float(value))


def write_grid_csv(grid, path) -> Path:
    """Rows of the grid with round-trip decimal formatting."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        for row in grid:
            writer.writerow([_format_float(v) for v in row])
    return path


def grid_to_gray(grid) -> np.ndarray:
    """Map [min, max] linearly onto 0..255 (constant grids become 0)."""
    grid = np.atleast_2d(np.asarray(grid, dtype=float))
    lo, hi = float(grid.min()), float(grid.max())
    if hi - lo <= 0:
        return np.zeros(grid.shape, dtype=np.uint8)
    return np.rint(255.0 * (grid - lo) / (hi - lo)).astype(np.uint8)


def write_pgm(grid, path) -> Path:
    """Binary 8-bit PGM (P5); rows of the grid become image rows."""
    gray = grid_to_gray(grid)
    rows, cols = gray.shape
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(f"P5\n{cols} {rows}\n255\n".encode() + gray.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    parts = blob.split(b"\n", 3)
    if parts[0] != b"P5" or len(parts) < 4:
        raise ParseError("Not a binary PGM file", line=1)
    cols, rows = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(rows, cols)


def save_dataset(dataset: OperatorDataset, path) -> Path:
    arrays = {f"branch{i}": x for i, x in enumerate(dataset.branch_inputs)}
    arrays.update(queries=dataset.queries, targets=dataset.targets, weights=dataset.weights)
    return save_bundle(path, "dataset", arrays, dataset.metadata)


def load_dataset(path) -> OperatorDataset:
    header, arrays = load_bundle(path, expected_kind="dataset")
    branches = []
    while f"branch{len(branches)}" in arrays:
        branches.append(arrays[f"branch{len(branches)}"])
    return OperatorDataset(
        branch_inputs=branches,
        queries=arrays["queries"],
        targets=arrays["targets"],
        weights=arrays["weights"],
        metadata=header["metadata"],
    )


def save_checkpoint(net: MIONet, network: NetworkConfig, path, losses=None, extra=None) -> Path:
    arrays = network_arrays(net)
    if losses is not None:
        arrays["loss_history"] = np.asarray(losses, dtype=float)
    metadata = {"network": network.model_dump(), "net": net.metadata, **(extra or {})}
    return save_bundle(path, "checkpoint", arrays, metadata)


def load_checkpoint(path) -> Tuple[MIONet, dict]:
    header, arrays = load_bundle(path, expected_kind="checkpoint")
    meta = header["metadata"]
    network = NetworkConfig(**meta["network"])
    arrays.pop("loss_history", None)
    return network_from_arrays(arrays, network.activation, meta.get("net")), meta
