"""Exception hierarchy shared by every stage of the pipeline."""


class InscribeError(Exception):
    """Base class for all package errors."""


class UnsupportedFormat(InscribeError, ValueError):
    """File magic number or header field is not a supported raster format."""


class CorruptImage(InscribeError, ValueError):
    """Header and payload of an image file disagree."""


class DegenerateHistogram(InscribeError, ValueError):
    """Histogram mass sits on a single intensity, so no two classes exist."""


class EmptyMask(InscribeError, ValueError):
    """A region mask selects no pixels."""


class StratumTooSmall(InscribeError, ValueError):
    """A (material, background) stratum holds fewer than two samples."""


class SingleClassTrainingSet(InscribeError, ValueError):
    """A binary classifier was given training data with only one label."""


class ManifestParseError(InscribeError, ValueError):
    """Dataset manifest failed validation."""
