"""Flat binary raster I/O: ASCII ``key = value`` headers plus raw payloads.

Header files start with the literal line ``ENVI``; keys are
case-insensitive. Payloads are raw binary in BSQ, BIL, or BIP order. Class
maps travel as a ``.hdr``/``.dat`` pair with a ``.legend.csv`` sidecar.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ColorOutOfRange,
    DuplicateClassId,
    MalformedHeader,
    MissingKey,
    NonFiniteSample,
    RasterIOError,
    SizeMismatch,
    UnsupportedDataType,
    ValidationError,
)

REQUIRED_KEYS = ("samples", "lines", "bands", "data type", "interleave", "byte order")


class DataType(enum.Enum):
    """Supported sample formats, keyed by their numeric header code."""

    U8 = (1, "u1")
    I16 = (2, "i2")
    F32 = (4, "f4")
    U16 = (12, "u2")

    @property
    def code(self) -> int:
        return self.value[0]

    @property
    def itemsize(self) -> int:
        return int(self.value[1][1])

    def numpy_dtype(self, byte_order: "ByteOrder") -> np.dtype:
        prefix = "<" if byte_order is ByteOrder.LITTLE else ">"
        return np.dtype(prefix + self.value[1])

    @classmethod
    def from_code(cls, code: int) -> "DataType":
        for member in cls:
            if member.code == code:
                return member
        raise UnsupportedDataType(code)


class Interleave(enum.Enum):
    BSQ = "bsq"
    BIL = "bil"
    BIP = "bip"


class ByteOrder(enum.Enum):
    LITTLE = 0
    BIG = 1


@dataclass(frozen=True)
class RasterHeader:
    samples: int
    lines: int
    bands: int
    data_type: DataType
    interleave: Interleave
    byte_order: ByteOrder
    extra: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("samples", "lines", "bands"):
            if getattr(self, name) < 1:
                raise ValidationError(f"{name} must be >= 1, got {getattr(self, name)}")

    @property
    def payload_bytes(self) -> int:
        return self.samples * self.lines * self.bands * self.data_type.itemsize


@dataclass(frozen=True)
class MultibandRaster:
    """Scene samples as float64, band-sequential: values[band, row, col]."""

    header: RasterHeader
    values: np.ndarray

    def __post_init__(self):
        expected = (self.header.bands, self.header.lines, self.header.samples)
        if self.values.shape != expected:
            raise ValidationError(f"values shape {self.values.shape} != header {expected}")

    @property
    def bands(self) -> int:
        return self.header.bands

    @property
    def rows(self) -> int:
        return self.header.lines

    @property
    def cols(self) -> int:
        return self.header.samples

    def pixel_matrix(self) -> np.ndarray:
        """(rows*cols, bands) C-contiguous pixel vectors, row-major."""
        return np.ascontiguousarray(self.values.transpose(1, 2, 0).reshape(-1, self.bands))


@dataclass(frozen=True)
class ClassRaster:
    """Single-band map of class ids; 0 means unclassified."""

    values: np.ndarray

    def __post_init__(self):
        if self.values.ndim != 2 or self.values.size == 0:
            raise ValidationError("class raster must be a non-empty 2-D array")
        if self.values.dtype != np.uint8:
            raise ValidationError("class raster values must be uint8")

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    def class_ids(self) -> list[int]:
        """Nonzero ids present, ascending."""
        present = np.unique(self.values)
        return [int(v) for v in present if v != 0]

    def class_counts(self) -> dict[int, int]:
        counts = np.bincount(self.values.ravel(), minlength=256)
        return {int(i): int(counts[i]) for i in range(1, 256) if counts[i]}


@dataclass(frozen=True)
class LegendEntry:
    class_id: int
    name: str
    color: tuple[int, int, int]


@dataclass(frozen=True)
class ClassLegend:
    entries: tuple[LegendEntry, ...]

    def __post_init__(self):
        seen_ids: set[int] = set()
        seen_names: set[str] = set()
        for e in self.entries:
            if not 1 <= e.class_id <= 255:
                raise ValidationError(f"class id {e.class_id} outside 1..255")
            if e.class_id in seen_ids:
                raise DuplicateClassId(e.class_id)
            if e.name in seen_names:
                raise ValidationError(f"duplicate class name {e.name!r}")
            for component in e.color:
                if not 0 <= component <= 255:
                    raise ColorOutOfRange(component)
            seen_ids.add(e.class_id)
            seen_names.add(e.name)
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e.class_id)))

    def ids(self) -> list[int]:
        return [e.class_id for e in self.entries]

    def entry(self, class_id: int) -> LegendEntry:
        for e in self.entries:
            if e.class_id == class_id:
                return e
        raise KeyError(class_id)

    def name(self, class_id: int) -> str:
        return self.entry(class_id).name

    def color(self, class_id: int) -> tuple[int, int, int]:
        return self.entry(class_id).color


def parse_keyvalue(text: str, first_line: str | None = None) -> dict[str, str]:
    """Parse ``key = value`` lines into a dict with lowercased keys.

    Used for both raster headers and scene specs (one parser, one format).
    `first_line`, when given, must match the first non-blank line exactly.
    """
    result: dict[str, str] = {}
    lines = text.splitlines()
    start = 0
    if first_line is not None:
        while start < len(lines) and not lines[start].strip():
            start += 1
        if start >= len(lines) or lines[start].strip() != first_line:
            raise MalformedHeader(start + 1, f"first line must be {first_line!r}")
        start += 1
    for idx in range(start, len(lines)):
        line = lines[idx].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedHeader(idx + 1, "expected 'key = value'")
        key, value = line.split("=", 1)
        result[key.strip().lower()] = value.strip()
    return result


def parse_brace_list(value: str) -> list[str]:
    """Split a ``{a, b, c}`` header value into stripped items."""
    stripped = value.strip()
    if stripped.startswith("{") and stripped.endswith("}"):
        stripped = stripped[1:-1]
    return [item.strip() for item in stripped.split(",") if item.strip()]


def read_header(path: str | Path) -> RasterHeader:
    """Parse an ENVI-style header file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="ascii")
    except OSError as exc:
        raise RasterIOError(f"cannot read header {path}: {exc}") from exc
    pairs = parse_keyvalue(text, first_line="ENVI")
    for key in REQUIRED_KEYS:
        if key not in pairs:
            raise MissingKey(key)

    def parse_int(key: str) -> int:
        try:
            return int(pairs[key])
        except ValueError:
            raise MalformedHeader(_line_of(text, key), f"{key} must be an integer") from None

    samples, lines, bands = parse_int("samples"), parse_int("lines"), parse_int("bands")
    for key, val in (("samples", samples), ("lines", lines), ("bands", bands)):
        if val < 1:
            raise MalformedHeader(_line_of(text, key), f"{key} must be >= 1")
    data_type = DataType.from_code(parse_int("data type"))
    interleave_text = pairs["interleave"].lower()
    try:
        interleave = Interleave(interleave_text)
    except ValueError:
        raise MalformedHeader(_line_of(text, "interleave"), f"unknown interleave {interleave_text!r}") from None
    order_code = parse_int("byte order")
    if order_code not in (0, 1):
        raise MalformedHeader(_line_of(text, "byte order"), "byte order must be 0 or 1")
    extra = {k: v for k, v in pairs.items() if k not in REQUIRED_KEYS}
    return RasterHeader(samples, lines, bands, data_type, interleave, ByteOrder(order_code), extra)


def _line_of(text: str, key: str) -> int:
    for idx, line in enumerate(text.splitlines(), start=1):
        if "=" in line and line.split("=", 1)[0].strip().lower() == key:
            return idx
    return 0


def read_raster(header: RasterHeader, path: str | Path) -> MultibandRaster:
    """Load the raw payload described by `header` as float64 BSQ values."""
    path = Path(path)
    try:
        actual = path.stat().st_size
    except OSError as exc:
        raise RasterIOError(f"cannot stat payload {path}: {exc}") from exc
    if actual != header.payload_bytes:
        raise SizeMismatch(header.payload_bytes, actual)
    raw = np.fromfile(path, dtype=header.data_type.numpy_dtype(header.byte_order))

    b, r, c = header.bands, header.lines, header.samples
    if header.interleave is Interleave.BSQ:
        cube = raw.reshape(b, r, c)
    elif header.interleave is Interleave.BIL:
        cube = raw.reshape(r, b, c).transpose(1, 0, 2)
    else:  # BIP
        cube = raw.reshape(r, c, b).transpose(2, 0, 1)
    values = np.ascontiguousarray(cube, dtype=np.float64)

    if header.data_type is DataType.F32 and not np.isfinite(values).all():
        band, row, col = (int(i) for i in np.argwhere(~np.isfinite(values))[0])
        raise NonFiniteSample(band, row, col)
    return MultibandRaster(header, values)


def _strip_hdr(path: str | Path) -> Path:
    p = Path(path)
    return p.with_suffix("") if p.suffix == ".hdr" else p


def _payload_for(prefix: Path) -> Path:
    for candidate in (prefix.with_suffix(prefix.suffix + ".dat"), prefix.with_suffix(prefix.suffix + ".img"), prefix):
        if candidate.is_file():
            return candidate
    raise RasterIOError(f"no payload file found next to {prefix}.hdr")


def load_raster(path: str | Path) -> MultibandRaster:
    """Read a raster given its ``.hdr`` path or the common prefix."""
    prefix = _strip_hdr(path)
    header = read_header(prefix.with_suffix(prefix.suffix + ".hdr"))
    return read_raster(header, _payload_for(prefix))


def write_raster(raster: MultibandRaster, prefix: str | Path,
                 data_type: DataType = DataType.F32) -> tuple[Path, Path]:
    """Write a multiband raster as BSQ little-endian ``.hdr`` + ``.dat``."""
    prefix = _strip_hdr(prefix)
    header = RasterHeader(raster.cols, raster.rows, raster.bands, data_type,
                          Interleave.BSQ, ByteOrder.LITTLE, dict(raster.header.extra))
    hdr_path = prefix.with_suffix(prefix.suffix + ".hdr")
    dat_path = prefix.with_suffix(prefix.suffix + ".dat")
    try:
        hdr_path.parent.mkdir(parents=True, exist_ok=True)
        hdr_path.write_text(format_header(header), encoding="ascii")
        raster.values.astype(data_type.numpy_dtype(ByteOrder.LITTLE)).tofile(dat_path)
    except OSError as exc:
        raise RasterIOError(f"cannot write raster {prefix}: {exc}") from exc
    return hdr_path, dat_path


def format_header(header: RasterHeader) -> str:
    lines = [
        "ENVI",
        f"samples = {header.samples}",
        f"lines = {header.lines}",
        f"bands = {header.bands}",
        f"data type = {header.data_type.code}",
        f"interleave = {header.interleave.value}",
        f"byte order = {header.byte_order.value}",
    ]
    lines.extend(f"{key} = {value}" for key, value in header.extra.items())
    return "\n".join(lines) + "\n"


def validate_against_legend(cr: ClassRaster, legend: ClassLegend) -> None:
    declared = set(legend.ids())
    missing = [cid for cid in cr.class_ids() if cid not in declared]
    if missing:
        raise ValidationError(f"map classes missing from legend: {missing}")


def write_class_raster(cr: ClassRaster, legend: ClassLegend,
                       prefix: str | Path) -> tuple[Path, Path, Path]:
    """Write a class map as ``.hdr`` + ``.dat`` + ``.legend.csv``."""
    validate_against_legend(cr, legend)
    prefix = _strip_hdr(prefix)
    header = RasterHeader(cr.cols, cr.rows, 1, DataType.U8, Interleave.BSQ, ByteOrder.LITTLE)
    hdr_path = prefix.with_suffix(prefix.suffix + ".hdr")
    dat_path = prefix.with_suffix(prefix.suffix + ".dat")
    legend_path = prefix.with_suffix(prefix.suffix + ".legend.csv")
    try:
        hdr_path.parent.mkdir(parents=True, exist_ok=True)
        hdr_path.write_text(format_header(header), encoding="ascii")
        cr.values.tofile(dat_path)
        write_legend(legend, legend_path)
    except OSError as exc:
        raise RasterIOError(f"cannot write class raster {prefix}: {exc}") from exc
    return hdr_path, dat_path, legend_path


def read_class_raster(path: str | Path) -> tuple[ClassRaster, ClassLegend | None]:
    """Read a class map written by :func:`write_class_raster`.

    The legend sidecar is optional on read; ``None`` when absent.
    """
    prefix = _strip_hdr(path)
    raster = load_raster(prefix)
    if raster.bands != 1:
        raise ValidationError(f"class raster must have one band, found {raster.bands}")
    plane = raster.values[0]
    if not np.array_equal(plane, np.round(plane)) or plane.min() < 0 or plane.max() > 255:
        raise ValidationError("class raster samples must be integers in 0..255")
    cr = ClassRaster(plane.astype(np.uint8))
    legend_path = prefix.with_suffix(prefix.suffix + ".legend.csv")
    legend = read_legend(legend_path) if legend_path.is_file() else None
    if legend is not None:
        validate_against_legend(cr, legend)
    return cr, legend


LEGEND_HEADER = ["class_id", "name", "r", "g", "b"]


def read_legend(path: str | Path) -> ClassLegend:
    """Read a legend CSV with header ``class_id,name,r,g,b``."""
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise RasterIOError(f"cannot read legend {path}: {exc}") from exc
    if not rows or [cell.strip() for cell in rows[0]] != LEGEND_HEADER:
        raise ValidationError(f"legend must start with header {','.join(LEGEND_HEADER)!r}")
    entries = []
    for line_no, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != 5:
            raise ValidationError(f"legend line {line_no}: expected 5 fields, got {len(row)}")
        try:
            class_id = int(row[0])
            color = (int(row[2]), int(row[3]), int(row[4]))
        except ValueError:
            raise ValidationError(f"legend line {line_no}: non-integer id or color") from None
        entries.append(LegendEntry(class_id, row[1], color))
    return ClassLegend(tuple(entries))


def write_legend(legend: ClassLegend, path: str | Path) -> None:
    path = Path(path)
    with path.open("w", newline="\n", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(LEGEND_HEADER)
        for e in legend.entries:
            writer.writerow([e.class_id, e.name, *e.color])


def auto_legend(class_ids: list[int]) -> ClassLegend:
    """Deterministic legend for maps that lack one: distinct non-black colors."""
    entries = []
    for idx, cid in enumerate(sorted(class_ids)):
        hue = (idx * 0.6180339887498949) % 1.0
        r, g, b = _hue_to_rgb(hue)
        entries.append(LegendEntry(cid, f"class {cid}", (r, g, b)))
    return ClassLegend(tuple(entries))


def _hue_to_rgb(hue: float) -> tuple[int, int, int]:
    # full-saturation HSV wheel at value 0.85, offset to avoid pure black
    h = hue * 6.0
    sector = int(h) % 6
    frac = h - int(h)
    v, p = 217, 38
    q = int(round(v - (v - p) * frac))
    t = int(round(p + (v - p) * frac))
    return [(v, t, p), (q, v, p), (p, v, t), (p, q, v), (t, p, v), (v, p, q)][sector]
