"""Exception hierarchy shared by all modules.

Everything derives from :class:`DctJpegError` (itself a ``ValueError``) so callers
can catch the whole family at once. :class:`UnsupportedInput` marks errors the
CLI reports with exit code 2.
"""


class DctJpegError(ValueError):
    pass


class UnsupportedInput(DctJpegError):
    """Input is well-formed enough to identify but outside the supported subset."""


# bitstream
class MalformedMarker(UnsupportedInput):
    pass


class UnsupportedCoding(UnsupportedInput):
    pass


class UnsupportedSampling(UnsupportedInput):
    pass


class UnsupportedDepth(UnsupportedInput):
    pass


class BitstreamExhausted(UnsupportedInput):
    pass


class InvalidHuffmanCode(UnsupportedInput):
    pass


class DcOutOfRange(UnsupportedInput):
    pass


class MisalignedCrop(DctJpegError):
    pass


class OutOfBounds(DctJpegError):
    pass


# transform
class ShapeMismatch(DctJpegError):
    pass


# augment
class NegativeFactor(DctJpegError):
    pass


class BadBitCount(DctJpegError):
    pass


class MisalignedShift(DctJpegError):
    pass


class UnsupportedRatio(DctJpegError):
    pass


class AngleOutOfRange(DctJpegError):
    pass


class UnknownOp(UnsupportedInput):
    pass


# embed
class BadPatchSize(DctJpegError):
    pass


class DimMismatch(DctJpegError):
    pass


# oracle
class SizeMismatch(DctJpegError):
    pass


# bench
class BadSymbolCount(DctJpegError):
    pass


class EmptyCorpus(DctJpegError):
    pass
