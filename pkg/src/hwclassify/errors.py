"""Exception types shared across the toolkit."""


class HwclassifyError(Exception):
    """Base class for all toolkit errors."""


class StrokeParseError(HwclassifyError):
    """Malformed stroke-data stream. Carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class RejectedRecordError(HwclassifyError):
    """A stroke record violates the record contract (e.g. multi-character label)."""


class DegenerateGlyphError(HwclassifyError):
    """Glyph geometry has zero extent in both axes."""


class UnsupportedCharacterError(HwclassifyError):
    """A character is not covered by the glyph bank or font."""

    def __init__(self, char: str, context: str = ""):
        detail = f" in {context}" if context else ""
        super().__init__(f"unsupported character {char!r}{detail}")
        self.char = char


class UnknownWriterError(HwclassifyError):
    """Requested writer id is not present in the glyph bank."""


class ConfigurationError(HwclassifyError):
    """Invalid or inconsistent configuration."""


class ShapeError(HwclassifyError):
    """Array shape does not match the expected shape."""


class StratificationError(HwclassifyError):
    """A class has too few samples to populate every split."""


class GenerationError(HwclassifyError):
    """Sample generation failed. Chains the cause, keeps the sample index."""

    def __init__(self, index: int, label: str, message: str):
        super().__init__(f"sample {index} (class {label!r}): {message}")
        self.index = index
        self.label = label


class DistanceFitError(HwclassifyError):
    """Not enough pairwise distances to fit a distance distribution."""

    def __init__(self, label: str, message: str):
        super().__init__(f"class {label!r}: {message}")
        self.label = label
