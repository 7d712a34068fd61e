"""
binvox reader and writer

Layout: an ASCII header (``#binvox 1``, ``dim``, ``translate``, ``scale``,
``data``) followed by (value, count) byte pairs. Voxels are ordered with y
fastest, then z, then x, so the flat index is ``x * d * d + z * d + y``.
Writing always produces canonical RLE (maximal runs split at 255).
"""

from pathlib import Path
from typing import Optional, Union

import numpy as np

from .grid import VoxelGrid
from ..utils.error_handling import BinvoxParseError, DataError

MAX_RUN = 255


def _format_float(value: float) -> str:
    text = repr(float(value))
    if text.endswith('.0'):
        text = text[:-2]
    return text


def encode_runs(flat) -> np.ndarray:
    """Canonical run-length encoding of a flat 0/1 array as (value, count) byte pairs."""
    flat = np.asarray(flat, dtype=np.uint8)
    if flat.size == 0:
        return np.zeros(0, dtype=np.uint8)
    starts = np.concatenate([[0], np.flatnonzero(np.diff(flat)) + 1])
    lengths = np.diff(np.concatenate([starts, [flat.size]]))
    chunks = -(-lengths // MAX_RUN)
    values = np.repeat(flat[starts], chunks)
    counts = np.full(int(chunks.sum()), MAX_RUN, dtype=np.int64)
    counts[np.cumsum(chunks) - 1] = lengths - MAX_RUN * (chunks - 1)
    pairs = np.empty(2 * len(values), dtype=np.uint8)
    pairs[0::2] = values
    pairs[1::2] = counts
    return pairs


def write_binvox(grid: VoxelGrid) -> bytes:
    """Serialize a grid to binvox bytes."""
    d = grid.resolution
    header = (
        "#binvox 1\n"
        f"dim {d} {d} {d}\n"
        f"translate {' '.join(_format_float(v) for v in grid.translate)}\n"
        f"scale {_format_float(grid.scale)}\n"
        "data\n"
    )
    flat = grid.occupancy.transpose(0, 2, 1).ravel()
    return header.encode('ascii') + encode_runs(flat).tobytes()


def _read_line(data: bytes, offset: int):
    end = data.find(b'\n', offset)
    if end < 0:
        raise BinvoxParseError("Unterminated header line", offset)
    return data[offset:end].strip(), end + 1


def read_binvox(data: bytes, expected_resolution: Optional[int] = None) -> VoxelGrid:
    """
    Parse binvox bytes.

    Any legal RLE is accepted, including runs that do not merge equal
    neighbours.

    Raises:
        BinvoxParseError: malformed header, bad values, truncated or
            overflowing RLE, or a resolution other than ``expected_resolution``
    """
    line, offset = _read_line(data, 0)
    if not line.startswith(b'#binvox'):
        raise BinvoxParseError("Missing '#binvox' magic", 0)
    dims = translate = None
    scale = 1.0
    while True:
        line_start = offset
        line, offset = _read_line(data, offset)
        if line == b'data':
            break
        keyword, _, rest = line.partition(b' ')
        try:
            values = [float(v) for v in rest.split()]
        except ValueError:
            raise BinvoxParseError(f"Non-numeric values in '{keyword.decode(errors='replace')}' line", line_start)
        if keyword == b'dim':
            if len(values) != 3 or any(v != int(v) or v < 1 for v in values):
                raise BinvoxParseError("dim needs three positive integers", line_start)
            dims = [int(v) for v in values]
        elif keyword == b'translate':
            if len(values) != 3:
                raise BinvoxParseError("translate needs three values", line_start)
            translate = values
        elif keyword == b'scale':
            if len(values) != 1:
                raise BinvoxParseError("scale needs one value", line_start)
            scale = values[0]
        else:
            raise BinvoxParseError(f"Unknown header keyword '{keyword.decode(errors='replace')}'", line_start)

    if dims is None:
        raise BinvoxParseError("Header has no dim line", offset)
    if len(set(dims)) != 1:
        raise BinvoxParseError(f"Only cubic grids are supported, got dim {dims}", offset)
    d = dims[0]
    if expected_resolution is not None and d != expected_resolution:
        raise BinvoxParseError(f"dim {d} does not match expected resolution {expected_resolution}", offset)

    body = np.frombuffer(data, dtype=np.uint8, offset=offset)
    if body.size % 2:
        raise BinvoxParseError("Truncated RLE: odd number of data bytes", len(data) - 1)
    values, counts = body[0::2], body[1::2].astype(np.int64)

    bad = np.flatnonzero(values > 1)
    if bad.size:
        raise BinvoxParseError(f"Voxel value {values[bad[0]]} is not 0 or 1", offset + 2 * int(bad[0]))
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise BinvoxParseError("Zero-length run", offset + 2 * int(empty[0]) + 1)

    total = d ** 3
    ends = np.cumsum(counts)
    if ends.size == 0 or ends[-1] < total:
        raise BinvoxParseError(
            f"Truncated RLE: {int(ends[-1]) if ends.size else 0} of {total} voxels", len(data)
        )
    if ends[-1] > total:
        overflow = int(np.argmax(ends > total))
        raise BinvoxParseError(f"RLE overflows {total} voxels", offset + 2 * overflow)

    flat = np.repeat(values, counts).astype(bool)
    occupancy = flat.reshape(d, d, d).transpose(0, 2, 1)
    return VoxelGrid(occupancy, translate=translate or (0.0, 0.0, 0.0), scale=scale)


def save_binvox(grid: VoxelGrid, path: Union[str, Path]) -> Path:
    from ..utils.data_processing import atomic_write_bytes

    return atomic_write_bytes(path, write_binvox(grid))


def load_binvox(path: Union[str, Path], expected_resolution: Optional[int] = None) -> VoxelGrid:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise DataError("binvox file not found", path=str(path))
    return read_binvox(data, expected_resolution=expected_resolution)
