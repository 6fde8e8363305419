"""Exception hierarchy shared by every toolkit module.

Two families matter to callers: :class:`ValidationError` (bad inputs,
parameters, or file contents; CLI exit code 1) and :class:`RasterIOError`
(filesystem or payload level failures; CLI exit code 2).
"""


class TerraClassError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(TerraClassError):
    """Invalid inputs, parameters, or file contents."""


class RasterIOError(TerraClassError):
    """Filesystem-level failure while reading or writing raster artifacts."""


# raster_io ------------------------------------------------------------------

class MalformedHeader(ValidationError):
    def __init__(self, line_no: int, message: str = "unparseable line"):
        self.line_no = line_no
        super().__init__(f"header line {line_no}: {message}")


class MissingKey(ValidationError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"required header key missing: {name!r}")


class UnsupportedDataType(ValidationError):
    def __init__(self, code: int):
        self.code = code
        super().__init__(f"unsupported data type code: {code}")


class SizeMismatch(RasterIOError):
    def __init__(self, expected: int, actual: int):
        self.expected = expected
        self.actual = actual
        super().__init__(f"payload size mismatch: expected {expected} bytes, found {actual}")


class NonFiniteSample(ValidationError):
    def __init__(self, band: int, row: int, col: int):
        self.band = band
        self.row = row
        self.col = col
        super().__init__(f"non-finite sample at band={band} row={row} col={col}")


class DuplicateClassId(ValidationError):
    def __init__(self, class_id: int):
        self.class_id = class_id
        super().__init__(f"duplicate class id in legend: {class_id}")


class ColorOutOfRange(ValidationError):
    def __init__(self, value: int):
        self.value = value
        super().__init__(f"legend color component out of 0..255 range: {value}")


# training -------------------------------------------------------------------

class OutOfBounds(ValidationError):
    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"pixel ({row}, {col}) outside raster bounds")


class DuplicatePixel(ValidationError):
    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"pixel ({row}, {col}) listed more than once")


class EmptyRoi(ValidationError):
    def __init__(self):
        super().__init__("ROI file contains no labeled pixels")


class InsufficientSamples(ValidationError):
    def __init__(self, class_id: int, needed: int = 2):
        self.class_id = class_id
        self.needed = needed
        super().__init__(f"class {class_id} has too few samples (needs >= {needed})")


# classify -------------------------------------------------------------------

class DegenerateInput(ValidationError):
    """Fewer distinct pixel vectors than requested clusters."""


class SingularCovariance(ValidationError):
    def __init__(self, class_id: int | None = None):
        self.class_id = class_id
        which = "pooled covariance" if class_id is None else f"class {class_id} covariance"
        super().__init__(f"{which} is singular; supply a ridge term to regularize")


class InvalidPriors(ValidationError):
    """Priors missing a class, non-positive, or not summing to one."""


class UnmappedCluster(ValidationError):
    def __init__(self, cluster_id: int):
        self.cluster_id = cluster_id
        super().__init__(f"cluster id {cluster_id} present in map but missing from mapping")


# accuracy -------------------------------------------------------------------

class EmptyMatrix(ValidationError):
    def __init__(self):
        super().__init__("confusion matrix holds no samples")


class DegenerateChance(ValidationError):
    def __init__(self):
        super().__init__("chance agreement equals 1; kappa undefined")


# postclass ------------------------------------------------------------------

class UnknownSource(ValidationError):
    def __init__(self, class_id: int):
        self.class_id = class_id
        super().__init__(f"recode source id {class_id} not present in legend")


class TargetUndeclared(ValidationError):
    def __init__(self, class_id: int):
        self.class_id = class_id
        super().__init__(f"recode target id {class_id} neither in legend nor declared with name/color")


class BadWindow(ValidationError):
    def __init__(self, window: int):
        self.window = window
        super().__init__(f"window must be an odd integer >= 3, got {window}")


# landscape ------------------------------------------------------------------

class NoClassifiedPixels(ValidationError):
    def __init__(self):
        super().__init__("map contains no classified (nonzero) pixels")


# change ---------------------------------------------------------------------

class DimensionMismatch(ValidationError):
    def __init__(self, a: tuple, b: tuple):
        self.a = a
        self.b = b
        super().__init__(f"raster dimensions differ: {a} vs {b}")


class MalformedRow(ValidationError):
    def __init__(self, line_no: int, message: str = "unparseable row"):
        self.line_no = line_no
        super().__init__(f"table row {line_no}: {message}")


# synth ----------------------------------------------------------------------

class OverlappingLayout(ValidationError):
    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"scene rectangles overlap at ({row}, {col})")
